//! Input derivatives of a network and their parameter gradients.
//!
//! Each layer carries a truncated Taylor jet per input coordinate `k`:
//! the value, `d/dx_k` and `d^2/dx_k^2`. A reverse sweep through the jets then
//! yields parameter gradients of any loss built from those quantities.

use super::mlp::{axpy, Mlp};
use crate::error::{Error, Result};

/// Forward jets of every layer.
#[derive(Debug, Clone)]
pub struct JetCache {
    order: usize,
    dim: usize,
    /// Layer outputs; index 0 is the input.
    a: Vec<Vec<f64>>,
    /// `d a / d x_k`, stored as `dim` consecutive blocks of the layer width.
    ak: Vec<Vec<f64>>,
    akk: Vec<Vec<f64>>,
    zk: Vec<Vec<f64>>,
    zkk: Vec<Vec<f64>>,
    /// Activation derivatives `(s, s', s'', s''')` at each pre-activation.
    ds: Vec<Vec<[f64; 4]>>,
}

impl JetCache {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> &[f64] {
        self.a.last().unwrap()
    }

    /// `d output / d x_k`.
    pub fn first(&self, k: usize) -> &[f64] {
        let w = self.value().len();
        &self.ak.last().unwrap()[k * w..(k + 1) * w]
    }

    /// `d^2 output / d x_k^2`; zero when the cache has order 1.
    pub fn second(&self, k: usize) -> &[f64] {
        let w = self.value().len();
        &self.akk.last().unwrap()[k * w..(k + 1) * w]
    }
}

/// Loss sensitivities with respect to the jet entries of the output layer.
#[derive(Debug, Clone)]
pub struct JetAdjoint {
    pub value: Vec<f64>,
    /// `dim` blocks of output width.
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl JetAdjoint {
    pub fn zeros(outputs: usize, dim: usize) -> Self {
        Self { value: vec![0.0; outputs], first: vec![0.0; outputs * dim], second: vec![0.0; outputs * dim] }
    }
}

/// Output, gradient and diagonal Hessian with respect to the input.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDerivatives {
    pub value: Vec<f64>,
    /// `gradient[o][k] = d y_o / d x_k`.
    pub gradient: Vec<Vec<f64>>,
    /// `second[o][k] = d^2 y_o / d x_k^2`, present for order 2.
    pub second: Option<Vec<Vec<f64>>>,
}

impl Mlp {
    pub(crate) fn check_order(&self, order: usize) -> Result<()> {
        match order {
            1 => Ok(()),
            2 => {
                if let Some(act) = self.activations().iter().find(|a| !a.is_smooth()) {
                    return Err(Error::Unsupported(format!(
                        "second input derivatives through {act} layers vanish almost everywhere"
                    )));
                }
                Ok(())
            }
            _ => Err(Error::Unsupported(format!("input derivatives of order {order}"))),
        }
    }

    /// Propagate value and input-derivative jets through the network.
    pub fn jet_forward(&self, x: &[f64], order: usize) -> Result<JetCache> {
        self.check_input(x)?;
        self.check_order(order)?;
        let dim = x.len();
        let second = order == 2;
        let n_layers = self.layer_count();
        let mut cache = JetCache {
            order,
            dim,
            a: Vec::with_capacity(n_layers + 1),
            ak: Vec::with_capacity(n_layers + 1),
            akk: Vec::with_capacity(n_layers + 1),
            zk: Vec::with_capacity(n_layers),
            zkk: Vec::with_capacity(n_layers),
            ds: Vec::with_capacity(n_layers),
        };
        let mut seed = vec![0.0; dim * dim];
        for k in 0..dim {
            seed[k * dim + k] = 1.0;
        }
        cache.a.push(x.to_vec());
        cache.ak.push(seed);
        cache.akk.push(vec![0.0; dim * dim]);

        for l in 0..n_layers {
            let (n_in, w) = (self.sizes()[l], self.sizes()[l + 1]);
            let act = self.activations()[l];
            let mut z = vec![0.0; w];
            self.affine(l, &cache.a[l], &mut z);
            let mut zk = vec![0.0; dim * w];
            let mut zkk = vec![0.0; dim * w];
            for k in 0..dim {
                self.linear(l, &cache.ak[l][k * n_in..(k + 1) * n_in], &mut zk[k * w..(k + 1) * w]);
                if second {
                    self.linear(l, &cache.akk[l][k * n_in..(k + 1) * n_in], &mut zkk[k * w..(k + 1) * w]);
                }
            }
            let ds: Vec<[f64; 4]> = z.iter().map(|v| act.derivatives(*v)).collect();
            let a: Vec<f64> = ds.iter().map(|d| d[0]).collect();
            let mut ak = vec![0.0; dim * w];
            let mut akk = vec![0.0; dim * w];
            for k in 0..dim {
                for i in 0..w {
                    let j = k * w + i;
                    ak[j] = ds[i][1] * zk[j];
                    if second {
                        akk[j] = ds[i][2] * zk[j] * zk[j] + ds[i][1] * zkk[j];
                    }
                }
            }
            cache.a.push(a);
            cache.ak.push(ak);
            cache.akk.push(akk);
            cache.zk.push(zk);
            cache.zkk.push(zkk);
            cache.ds.push(ds);
        }
        Ok(cache)
    }

    /// Accumulate into `grad` the parameter gradient of a loss whose
    /// sensitivities to the output jets are `adjoint`.
    pub fn jet_backward(&self, cache: &JetCache, adjoint: &JetAdjoint, grad: &mut [f64]) -> Result<()> {
        let dim = cache.dim;
        let out = self.output_dim();
        if cache.a.len() != self.sizes().len()
            || cache.a.iter().zip(self.sizes()).any(|(a, s)| a.len() != *s)
            || grad.len() != self.param_count()
        {
            return Err(Error::Dimension("jet cache or gradient does not match the network".into()));
        }
        if adjoint.value.len() != out || adjoint.first.len() != out * dim || adjoint.second.len() != out * dim {
            return Err(Error::Dimension("jet adjoint does not match the network output".into()));
        }
        let second = cache.order == 2;
        let mut abar = adjoint.value.clone();
        let mut akbar = adjoint.first.clone();
        let mut akkbar = if second { adjoint.second.clone() } else { vec![0.0; out * dim] };

        for l in (0..self.layer_count()).rev() {
            let (n_in, w) = (self.sizes()[l], self.sizes()[l + 1]);
            let ds = &cache.ds[l];
            let zk = &cache.zk[l];
            let zkk = &cache.zkk[l];
            let mut zbar = vec![0.0; w];
            let mut zkbar = vec![0.0; dim * w];
            let mut zkkbar = vec![0.0; dim * w];
            for i in 0..w {
                let [_, s1, s2, s3] = ds[i];
                let mut acc = abar[i] * s1;
                for k in 0..dim {
                    let j = k * w + i;
                    acc += akbar[j] * s2 * zk[j];
                    zkbar[j] = akbar[j] * s1;
                    if second {
                        acc += akkbar[j] * (s3 * zk[j] * zk[j] + s2 * zkk[j]);
                        zkbar[j] += akkbar[j] * 2.0 * s2 * zk[j];
                        zkkbar[j] = akkbar[j] * s1;
                    }
                }
                zbar[i] = acc;
            }

            let wo = self.layer_offset(l);
            let bo = wo + n_in * w;
            let a_prev = &cache.a[l];
            let ak_prev = &cache.ak[l];
            let akk_prev = &cache.akk[l];
            for o in 0..w {
                let row = &mut grad[wo + o * n_in..wo + (o + 1) * n_in];
                if zbar[o] != 0.0 {
                    axpy(zbar[o], a_prev, row);
                }
                for k in 0..dim {
                    let j = k * w + o;
                    if zkbar[j] != 0.0 {
                        axpy(zkbar[j], &ak_prev[k * n_in..(k + 1) * n_in], row);
                    }
                    if second && zkkbar[j] != 0.0 {
                        axpy(zkkbar[j], &akk_prev[k * n_in..(k + 1) * n_in], row);
                    }
                }
                grad[bo + o] += zbar[o];
            }

            if l > 0 {
                let mut prev = vec![0.0; n_in];
                self.linear_transpose(l, &zbar, &mut prev);
                abar = prev;
                let mut kb = vec![0.0; dim * n_in];
                let mut kkb = vec![0.0; dim * n_in];
                for k in 0..dim {
                    self.linear_transpose(l, &zkbar[k * w..(k + 1) * w], &mut kb[k * n_in..(k + 1) * n_in]);
                    if second {
                        self.linear_transpose(l, &zkkbar[k * w..(k + 1) * w], &mut kkb[k * n_in..(k + 1) * n_in]);
                    }
                }
                akbar = kb;
                akkbar = kkb;
            }
        }
        Ok(())
    }

    /// Exact first (and for `order == 2`, diagonal second) input derivatives.
    pub fn input_derivatives(&self, x: &[f64], order: usize) -> Result<InputDerivatives> {
        let cache = self.jet_forward(x, order)?;
        let out = self.output_dim();
        let dim = x.len();
        let gradient = (0..out).map(|o| (0..dim).map(|k| cache.first(k)[o]).collect()).collect();
        let second = (order == 2).then(|| (0..out).map(|o| (0..dim).map(|k| cache.second(k)[o]).collect()).collect());
        Ok(InputDerivatives { value: cache.value().to_vec(), gradient, second })
    }
}
