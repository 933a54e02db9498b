//! Row-batched forward passes, input-derivative jets and their reverse sweep.
//!
//! A batch of `rows` inputs is pushed through each layer as one matrix
//! product. For derivative orders 1 and 2 the per-coordinate jets are stacked
//! below the values as extra row blocks, so a layer still costs one product:
//! block 0 holds values, blocks `1..=dim` first derivatives and, for order 2,
//! blocks `dim+1..=2 dim` diagonal second derivatives.

use super::mlp::Mlp;
use crate::error::{Error, Result};

/// `C = A B + beta C` on row-major or strided views.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    beta: f64,
    c: &mut [f64],
    rsc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(k == 0 || (m - 1) * rsa + (k - 1) * csa < a.len());
    assert!(k == 0 || (k - 1) * rsb + (n - 1) * csb < b.len());
    assert!((m - 1) * rsc + n - 1 < c.len());
    // SAFETY: the asserts above keep every strided access inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            1,
        );
    }
}

/// Values and input-derivative jets of every layer for a batch of inputs.
#[derive(Debug, Clone)]
pub struct BatchJets {
    rows: usize,
    order: usize,
    dim: usize,
    /// Per layer (index 0 is the input) the stacked `blocks*rows x width` jets.
    stacks: Vec<Vec<f64>>,
    /// Stacked pre-activations of each layer.
    pre: Vec<Vec<f64>>,
    /// Activation derivatives `(s, s', s'', s''')` at the value pre-activations.
    ds: Vec<Vec<[f64; 4]>>,
    out: usize,
}

fn block_count(order: usize, dim: usize) -> usize {
    1 + dim * order
}

impl BatchJets {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn block(&self, b: usize) -> &[f64] {
        let s = self.stacks.last().unwrap();
        &s[b * self.rows * self.out..(b + 1) * self.rows * self.out]
    }

    /// Row-major `rows x outputs` network outputs.
    pub fn value(&self) -> &[f64] {
        self.block(0)
    }

    /// `d output / d x_k` for every row.
    pub fn first(&self, k: usize) -> &[f64] {
        assert!(self.order >= 1 && k < self.dim);
        self.block(1 + k)
    }

    /// `d^2 output / d x_k^2` for every row.
    pub fn second(&self, k: usize) -> &[f64] {
        assert!(self.order >= 2 && k < self.dim);
        self.block(1 + self.dim + k)
    }
}

/// Loss sensitivities to the output jets of a batch, laid out like
/// [`BatchJets::value`], [`BatchJets::first`] and [`BatchJets::second`].
#[derive(Debug, Clone, PartialEq)]
pub struct BatchAdjoint {
    pub value: Vec<f64>,
    /// `dim` blocks of `rows x outputs`; empty below order 1.
    pub first: Vec<f64>,
    /// `dim` blocks of `rows x outputs`; empty below order 2.
    pub second: Vec<f64>,
}

impl BatchAdjoint {
    pub fn zeros(rows: usize, outputs: usize, dim: usize, order: usize) -> Self {
        let n = rows * outputs;
        Self {
            value: vec![0.0; n],
            first: vec![0.0; if order >= 1 { n * dim } else { 0 }],
            second: vec![0.0; if order >= 2 { n * dim } else { 0 }],
        }
    }
}

impl Mlp {
    fn check_batch(&self, x: &[f64]) -> Result<usize> {
        let d = self.input_dim();
        if x.is_empty() || x.len() % d != 0 {
            return Err(Error::Dimension(format!("batch of length {} for {d} inputs", x.len())));
        }
        Ok(x.len() / d)
    }

    fn check_batch_order(&self, order: usize) -> Result<()> {
        match order {
            0 => Ok(()),
            _ => self.check_order(order),
        }
    }

    /// Outputs for a row-major `rows x inputs` batch.
    pub fn predict_batch(&self, x: &[f64]) -> Result<Vec<f64>> {
        let rows = self.check_batch(x)?;
        let mut a = x.to_vec();
        for l in 0..self.layer_count() {
            let (n_in, w) = (self.sizes()[l], self.sizes()[l + 1]);
            let mut z = bias_rows(self.bias(l), rows);
            gemm(rows, n_in, w, &a, (n_in, 1), self.weights(l), (1, n_in), 1.0, &mut z, w);
            let act = self.activations()[l];
            for v in &mut z {
                *v = act.apply(*v);
            }
            a = z;
        }
        Ok(a)
    }

    /// Forward pass of a row-major batch carrying input-derivative jets of
    /// `order` 0, 1 or 2.
    pub fn forward_batch(&self, x: &[f64], order: usize) -> Result<BatchJets> {
        let rows = self.check_batch(x)?;
        self.check_batch_order(order)?;
        let dim = self.input_dim();
        let blocks = block_count(order, dim);
        let mut input = vec![0.0; blocks * rows * dim];
        input[..rows * dim].copy_from_slice(x);
        if order >= 1 {
            for k in 0..dim {
                let base = (1 + k) * rows * dim;
                for r in 0..rows {
                    input[base + r * dim + k] = 1.0;
                }
            }
        }
        let n_layers = self.layer_count();
        let mut jets = BatchJets {
            rows,
            order,
            dim,
            stacks: Vec::with_capacity(n_layers + 1),
            pre: Vec::with_capacity(n_layers),
            ds: Vec::with_capacity(n_layers),
            out: self.output_dim(),
        };
        jets.stacks.push(input);
        for l in 0..n_layers {
            let (n_in, w) = (self.sizes()[l], self.sizes()[l + 1]);
            let mut z = vec![0.0; blocks * rows * w];
            z[..rows * w].copy_from_slice(&bias_rows(self.bias(l), rows));
            gemm(blocks * rows, n_in, w, &jets.stacks[l], (n_in, 1), self.weights(l), (1, n_in), 1.0, &mut z, w);
            let act = self.activations()[l];
            let ds: Vec<[f64; 4]> = z[..rows * w].iter().map(|v| act.derivatives(*v)).collect();
            let mut a = vec![0.0; blocks * rows * w];
            let n = rows * w;
            for (j, d) in ds.iter().enumerate() {
                a[j] = d[0];
            }
            for k in 0..dim * order.min(1) {
                let f = (1 + k) * n;
                for (j, d) in ds.iter().enumerate() {
                    a[f + j] = d[1] * z[f + j];
                }
                if order >= 2 {
                    let s = (1 + dim + k) * n;
                    for (j, d) in ds.iter().enumerate() {
                        let zk = z[f + j];
                        a[s + j] = d[2] * zk * zk + d[1] * z[s + j];
                    }
                }
            }
            jets.stacks.push(a);
            jets.pre.push(z);
            jets.ds.push(ds);
        }
        Ok(jets)
    }

    /// Accumulate into `grad` the parameter gradient of a loss whose
    /// sensitivities to the batch output jets are `adjoint`.
    pub fn backward_batch(&self, jets: &BatchJets, adjoint: &BatchAdjoint, grad: &mut [f64]) -> Result<()> {
        let (rows, order, dim) = (jets.rows, jets.order, jets.dim);
        let out = self.output_dim();
        let shapes_ok = jets.stacks.len() == self.sizes().len()
            && jets.out == out
            && dim == self.input_dim()
            && jets.stacks.iter().zip(self.sizes()).all(|(s, w)| s.len() == block_count(order, dim) * rows * w);
        if !shapes_ok || grad.len() != self.param_count() {
            return Err(Error::Dimension("batch jets or gradient do not match the network".into()));
        }
        let n = rows * out;
        let first_len = if order >= 1 { n * dim } else { 0 };
        let second_len = if order >= 2 { n * dim } else { 0 };
        if adjoint.value.len() != n || adjoint.first.len() != first_len || adjoint.second.len() != second_len {
            return Err(Error::Dimension("batch adjoint does not match the jets".into()));
        }
        let blocks = block_count(order, dim);
        let mut abar = Vec::with_capacity(blocks * n);
        abar.extend_from_slice(&adjoint.value);
        abar.extend_from_slice(&adjoint.first);
        abar.extend_from_slice(&adjoint.second);

        for l in (0..self.layer_count()).rev() {
            let (n_in, w) = (self.sizes()[l], self.sizes()[l + 1]);
            let n = rows * w;
            let ds = &jets.ds[l];
            let z = &jets.pre[l];
            let mut zbar = vec![0.0; blocks * n];
            for (j, d) in ds.iter().enumerate() {
                zbar[j] = abar[j] * d[1];
            }
            for k in 0..dim * order.min(1) {
                let f = (1 + k) * n;
                for (j, d) in ds.iter().enumerate() {
                    let zk = z[f + j];
                    zbar[j] += abar[f + j] * d[2] * zk;
                    zbar[f + j] = abar[f + j] * d[1];
                }
                if order >= 2 {
                    let s = (1 + dim + k) * n;
                    for (j, d) in ds.iter().enumerate() {
                        let (zk, zkk, g) = (z[f + j], z[s + j], abar[s + j]);
                        zbar[j] += g * (d[3] * zk * zk + d[2] * zkk);
                        zbar[f + j] += g * 2.0 * d[2] * zk;
                        zbar[s + j] = g * d[1];
                    }
                }
            }

            let wo = self.layer_offset(l);
            let bo = wo + n_in * w;
            // dW += Zbar^T S_prev over all stacked blocks
            gemm(w, blocks * rows, n_in, &zbar, (1, w), &jets.stacks[l], (n_in, 1), 1.0, &mut grad[wo..bo], n_in);
            for r in 0..rows {
                for (g, zb) in grad[bo..bo + w].iter_mut().zip(&zbar[r * w..(r + 1) * w]) {
                    *g += zb;
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; blocks * rows * n_in];
                gemm(blocks * rows, w, n_in, &zbar, (w, 1), self.weights(l), (n_in, 1), 0.0, &mut prev, n_in);
                abar = prev;
            }
        }
        Ok(())
    }
}

fn bias_rows(bias: &[f64], rows: usize) -> Vec<f64> {
    let mut z = Vec::with_capacity(rows * bias.len());
    for _ in 0..rows {
        z.extend_from_slice(bias);
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::jet::JetAdjoint;
    use crate::nn::Activation::{self, *};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_batch(rows: usize, dim: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows * dim).map(|_| rng.gen_range(-1.5..1.5)).collect()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn batch_matches_single_forward_and_backward() {
        for act in [Relu, Tanh, Sigmoid] {
            let net = Mlp::init(&[3, 7, 5, 2], &[act, act, Activation::Identity], 4).unwrap();
            let rows = 9;
            let x = random_batch(rows, 3, 1);
            let dout = random_batch(rows, 2, 2);
            let jets = net.forward_batch(&x, 0).unwrap();
            let mut g_batch = vec![0.0; net.param_count()];
            let mut adj = BatchAdjoint::zeros(rows, 2, 3, 0);
            adj.value.copy_from_slice(&dout);
            net.backward_batch(&jets, &adj, &mut g_batch).unwrap();
            let mut g_single = vec![0.0; net.param_count()];
            let mut y_single = Vec::new();
            for r in 0..rows {
                let (y, cache) = net.forward(&x[r * 3..(r + 1) * 3]).unwrap();
                y_single.extend(y);
                net.backward_into(&cache, &dout[r * 2..(r + 1) * 2], &mut g_single).unwrap();
            }
            close(jets.value(), &y_single, 1e-13);
            close(&net.predict_batch(&x).unwrap(), &y_single, 1e-13);
            close(&g_batch, &g_single, 1e-12);
        }
    }

    #[test]
    fn batch_jets_match_single_jets() {
        for (act, order) in [(Tanh, 2), (Sigmoid, 2), (Relu, 1), (Tanh, 1)] {
            let net = Mlp::init(&[2, 6, 4, 1], &[act, act, Activation::Identity], 8).unwrap();
            let rows = 5;
            let x = random_batch(rows, 2, 3);
            let weights = random_batch(rows * 5, 1, 4);
            let jets = net.forward_batch(&x, order).unwrap();
            let mut adj = BatchAdjoint::zeros(rows, 1, 2, order);
            let mut g_single = vec![0.0; net.param_count()];
            for r in 0..rows {
                let cache = net.jet_forward(&x[r * 2..(r + 1) * 2], order).unwrap();
                assert!((jets.value()[r] - cache.value()[0]).abs() < 1e-13);
                let mut single = JetAdjoint::zeros(1, 2);
                single.value[0] = weights[r * 5];
                adj.value[r] = weights[r * 5];
                for k in 0..2 {
                    assert!((jets.first(k)[r] - cache.first(k)[0]).abs() < 1e-13);
                    single.first[k] = weights[r * 5 + 1 + k];
                    adj.first[k * rows + r] = weights[r * 5 + 1 + k];
                    if order == 2 {
                        assert!((jets.second(k)[r] - cache.second(k)[0]).abs() < 1e-12);
                        single.second[k] = weights[r * 5 + 3 + k];
                        adj.second[k * rows + r] = weights[r * 5 + 3 + k];
                    }
                }
                net.jet_backward(&cache, &single, &mut g_single).unwrap();
            }
            let mut g_batch = vec![0.0; net.param_count()];
            net.backward_batch(&jets, &adj, &mut g_batch).unwrap();
            close(&g_batch, &g_single, 1e-12);
        }
    }

    #[test]
    fn batch_rejects_bad_shapes() {
        let net = Mlp::init(&[2, 3, 1], &[Relu, Identity], 0).unwrap();
        assert!(net.forward_batch(&[1.0, 2.0, 3.0], 0).is_err());
        assert!(net.forward_batch(&[1.0, 2.0], 2).is_err());
        let jets = net.forward_batch(&[1.0, 2.0], 1).unwrap();
        let mut g = vec![0.0; net.param_count()];
        assert!(net.backward_batch(&jets, &BatchAdjoint::zeros(1, 1, 2, 0), &mut g).is_err());
        assert!(net.backward_batch(&jets, &BatchAdjoint::zeros(1, 1, 2, 1), &mut g[1..]).is_err());
    }
}
