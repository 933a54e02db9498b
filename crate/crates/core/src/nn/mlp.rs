use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::activation::Activation;
use crate::error::{Error, Result};

/// Fully connected feed-forward network.
///
/// Parameters live in one flat vector: for each layer the row-major
/// `outputs x inputs` weight matrix followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
    params: Vec<f64>,
    offsets: Vec<usize>,
}

/// Per-layer pre-activations and activations recorded by [`Mlp::forward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input, `activations[k+1]` the output of layer `k`.
    pub activations: Vec<Vec<f64>>,
    pub pre_activations: Vec<Vec<f64>>,
}

fn layout(sizes: &[usize]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(sizes.len());
    let mut total = 0;
    for w in sizes.windows(2) {
        offsets.push(total);
        total += w[1] * w[0] + w[1];
    }
    (offsets, total)
}

impl Mlp {
    /// Assemble a network from explicit parameters.
    pub fn from_parts(sizes: Vec<usize>, activations: Vec<Activation>, params: Vec<f64>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Dimension("a network needs at least an input and an output size".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::Dimension("layer sizes must be positive".into()));
        }
        if activations.len() != sizes.len() - 1 {
            return Err(Error::Dimension(format!(
                "{} activations for {} layers",
                activations.len(),
                sizes.len() - 1
            )));
        }
        if *activations.last().unwrap() != Activation::Identity {
            return Err(Error::Dimension("the output layer must be linear".into()));
        }
        let (offsets, total) = layout(&sizes);
        if params.len() != total {
            return Err(Error::Dimension(format!("{} parameters, expected {total}", params.len())));
        }
        Ok(Self { sizes, activations, params, offsets })
    }

    /// Glorot-uniform weights, zero biases, deterministic per seed.
    pub fn init(sizes: &[usize], activations: &[Activation], seed: u64) -> Result<Self> {
        let (_, total) = layout(sizes);
        let mut net = Self::from_parts(sizes.to_vec(), activations.to_vec(), vec![0.0; total])?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..net.layer_count() {
            let (fan_in, fan_out) = (net.sizes[k], net.sizes[k + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in net.weights_mut(k) {
                *w = rng.gen_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let o = self.offsets[layer];
        &self.params[o..o + self.sizes[layer] * self.sizes[layer + 1]]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let o = self.offsets[layer];
        let len = self.sizes[layer] * self.sizes[layer + 1];
        &mut self.params[o..o + len]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let o = self.offsets[layer] + self.sizes[layer] * self.sizes[layer + 1];
        &self.params[o..o + self.sizes[layer + 1]]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let o = self.offsets[layer] + self.sizes[layer] * self.sizes[layer + 1];
        let len = self.sizes[layer + 1];
        &mut self.params[o..o + len]
    }

    /// Offset of layer `k`'s weights in the flat parameter vector.
    pub fn layer_offset(&self, layer: usize) -> usize {
        self.offsets[layer]
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "input of length {} for a network with {} inputs",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// `z = W a + b`.
    #[inline]
    pub(crate) fn affine(&self, layer: usize, a: &[f64], z: &mut [f64]) {
        let n_in = self.sizes[layer];
        let w = self.weights(layer);
        let b = self.bias(layer);
        for (o, zo) in z.iter_mut().enumerate() {
            *zo = b[o] + dot(&w[o * n_in..(o + 1) * n_in], a);
        }
    }

    /// `z = W a` without bias.
    #[inline]
    pub(crate) fn linear(&self, layer: usize, a: &[f64], z: &mut [f64]) {
        let n_in = self.sizes[layer];
        let w = self.weights(layer);
        for (o, zo) in z.iter_mut().enumerate() {
            *zo = dot(&w[o * n_in..(o + 1) * n_in], a);
        }
    }

    /// `out = W^T delta`.
    #[inline]
    pub(crate) fn linear_transpose(&self, layer: usize, delta: &[f64], out: &mut [f64]) {
        let n_in = self.sizes[layer];
        let w = self.weights(layer);
        out.fill(0.0);
        for (o, d) in delta.iter().enumerate() {
            if *d != 0.0 {
                axpy(*d, &w[o * n_in..(o + 1) * n_in], out);
            }
        }
    }

    /// Output only, no cache.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut a = x.to_vec();
        for k in 0..self.layer_count() {
            let mut z = vec![0.0; self.sizes[k + 1]];
            self.affine(k, &a, &mut z);
            let act = self.activations[k];
            for v in &mut z {
                *v = act.apply(*v);
            }
            a = z;
        }
        Ok(a)
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.sizes.len());
        let mut pre = Vec::with_capacity(self.layer_count());
        activations.push(x.to_vec());
        for k in 0..self.layer_count() {
            let mut z = vec![0.0; self.sizes[k + 1]];
            self.affine(k, &activations[k], &mut z);
            let act = self.activations[k];
            let a: Vec<f64> = z.iter().map(|v| act.apply(*v)).collect();
            pre.push(z);
            activations.push(a);
        }
        let out = activations.last().unwrap().clone();
        Ok((out, ForwardCache { activations, pre_activations: pre }))
    }

    /// Parameter gradient of a scalar loss with `d loss / d output = output_grad`.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.param_count()];
        self.backward_into(cache, output_grad, &mut grad)?;
        Ok(grad)
    }

    /// Accumulate the parameter gradient into `grad`.
    pub fn backward_into(&self, cache: &ForwardCache, output_grad: &[f64], grad: &mut [f64]) -> Result<()> {
        let shapes_ok = cache.activations.len() == self.sizes.len()
            && cache.pre_activations.len() == self.layer_count()
            && cache.activations.iter().zip(&self.sizes).all(|(a, s)| a.len() == *s);
        if !shapes_ok || grad.len() != self.param_count() {
            return Err(Error::Dimension("cache or gradient does not match the network".into()));
        }
        if output_grad.len() != self.output_dim() {
            return Err(Error::Dimension(format!(
                "output gradient of length {} for {} outputs",
                output_grad.len(),
                self.output_dim()
            )));
        }
        let mut delta = output_grad.to_vec();
        for k in (0..self.layer_count()).rev() {
            let act = self.activations[k];
            for (d, z) in delta.iter_mut().zip(&cache.pre_activations[k]) {
                *d *= act.derivative(*z);
            }
            let n_in = self.sizes[k];
            let a_prev = &cache.activations[k];
            let wo = self.offsets[k];
            let bo = wo + n_in * self.sizes[k + 1];
            for (o, d) in delta.iter().enumerate() {
                if *d != 0.0 {
                    axpy(*d, a_prev, &mut grad[wo + o * n_in..wo + (o + 1) * n_in]);
                    grad[bo + o] += d;
                }
            }
            if k > 0 {
                let mut prev = vec![0.0; n_in];
                self.linear_transpose(k, &delta, &mut prev);
                delta = prev;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[derive(Serialize, Deserialize)]
struct LayerDoc {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MlpDoc {
    sizes: Vec<usize>,
    layers: Vec<LayerDoc>,
}

impl Serialize for Mlp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let layers = (0..self.layer_count())
            .map(|k| LayerDoc {
                inputs: self.sizes[k],
                outputs: self.sizes[k + 1],
                activation: self.activations[k],
                weights: self.weights(k).to_vec(),
                bias: self.bias(k).to_vec(),
            })
            .collect();
        MlpDoc { sizes: self.sizes.clone(), layers }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mlp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = MlpDoc::deserialize(d)?;
        if doc.layers.len() + 1 != doc.sizes.len() {
            return Err(D::Error::custom("layer count does not match sizes"));
        }
        let mut params = Vec::new();
        let mut acts = Vec::new();
        for (k, l) in doc.layers.into_iter().enumerate() {
            if l.inputs != doc.sizes[k]
                || l.outputs != doc.sizes[k + 1]
                || l.weights.len() != l.inputs * l.outputs
                || l.bias.len() != l.outputs
            {
                return Err(D::Error::custom(format!("layer {k} has inconsistent shapes")));
            }
            params.extend(l.weights);
            params.extend(l.bias);
            acts.push(l.activation);
        }
        Mlp::from_parts(doc.sizes, acts, params).map_err(D::Error::custom)
    }
}
