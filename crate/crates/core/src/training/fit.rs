use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{plateau_step, BatchAdjoint, Activation, Mlp, OptimizerKind, OptimizerState, PlateauScheduler};

/// Network shape, optimizer and schedule for one pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub plateau_factor: f64,
    pub plateau_patience: usize,
    pub min_lr: f64,
    pub epochs: usize,
    /// Samples per gradient step; `0` means the full dataset.
    pub batch_size: usize,
    pub seed: u64,
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_epsilon() -> f64 {
    1e-8
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive and non-empty".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        PlateauScheduler::new(self.plateau_factor, self.plateau_patience, self.min_lr)?;
        Ok(())
    }

    /// Layer sizes and activations for the given input/output widths.
    pub fn architecture(&self, inputs: usize, outputs: usize) -> (Vec<usize>, Vec<Activation>) {
        let mut sizes = vec![inputs];
        sizes.extend(&self.hidden);
        sizes.push(outputs);
        let mut acts = vec![self.activation; self.hidden.len()];
        acts.push(Activation::Identity);
        (sizes, acts)
    }

    pub fn init_network(&self, inputs: usize, outputs: usize) -> Result<Mlp> {
        let (sizes, acts) = self.architecture(inputs, outputs);
        Mlp::init(&sizes, &acts, self.seed)
    }

    pub(crate) fn optimizer(&self, params: usize) -> OptimizerState {
        OptimizerState::new(self.optimizer, self.learning_rate, params).with_betas(self.beta1, self.beta2, self.epsilon)
    }

    pub(crate) fn scheduler(&self) -> Result<PlateauScheduler> {
        PlateauScheduler::new(self.plateau_factor, self.plateau_patience, self.min_lr)
    }
}

/// Outcome of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub method: String,
    /// Mean loss over each epoch.
    pub epoch_losses: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub final_train_mse: f64,
    pub final_test_mse: Option<f64>,
    pub train_seconds: f64,
    pub epochs_run: usize,
    pub final_lr: f64,
    pub seed: u64,
}

impl TrainReport {
    /// The report with the wall-clock field cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self { train_seconds: 0.0, ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `epoch,loss,lr` rows.
    pub fn write_loss_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["epoch", "loss", "lr"])?;
        for (k, (l, lr)) in self.epoch_losses.iter().zip(&self.learning_rates).enumerate() {
            w.write_record([(k + 1).to_string(), format!("{l:?}"), format!("{lr:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-coordinate affine map `x' = (x - shift) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Affine {
    pub fn identity(dim: usize) -> Self {
        Self { shift: vec![0.0; dim], scale: vec![1.0; dim] }
    }

    /// Mean and standard deviation of row-major `rows x dim` data; constant
    /// columns keep unit scale.
    pub fn standardize(data: &[f64], dim: usize) -> Self {
        let rows = data.len() / dim;
        let mut shift = vec![0.0; dim];
        let mut scale = vec![0.0; dim];
        for r in data.chunks(dim) {
            for (m, v) in shift.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut shift {
            *m /= rows as f64;
        }
        for r in data.chunks(dim) {
            for ((s, v), m) in scale.iter_mut().zip(r).zip(&shift) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut scale {
            *s = (*s / rows as f64).sqrt();
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Self { shift, scale }
    }

    pub fn apply(&self, data: &mut [f64]) {
        let dim = self.shift.len();
        for r in data.chunks_mut(dim) {
            for ((v, m), s) in r.iter_mut().zip(&self.shift).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
    }
}

/// Rewrite `net` so that `net'(x) = net((x - shift) / scale)`.
pub fn fold_input_map(net: &mut Mlp, map: &Affine) {
    let n_in = net.input_dim();
    let n_out = net.sizes()[1];
    let w: Vec<f64> = net.weights(0).to_vec();
    let mut bias_shift = vec![0.0; n_out];
    {
        let wm = net.weights_mut(0);
        for o in 0..n_out {
            for i in 0..n_in {
                let wi = w[o * n_in + i] / map.scale[i];
                wm[o * n_in + i] = wi;
                bias_shift[o] += wi * map.shift[i];
            }
        }
    }
    for (b, s) in net.bias_mut(0).iter_mut().zip(&bias_shift) {
        *b -= s;
    }
}

/// Rewrite `net` so that its outputs become `shift + scale * net(x)`.
pub fn fold_output_map(net: &mut Mlp, map: &Affine) {
    let last = net.layer_count() - 1;
    let n_in = net.sizes()[last];
    for (o, row) in net.weights_mut(last).chunks_mut(n_in).enumerate() {
        for w in row {
            *w *= map.scale[o];
        }
    }
    for (o, b) in net.bias_mut(last).iter_mut().enumerate() {
        *b = map.shift[o] + map.scale[o] * *b;
    }
}

/// Mean squared error of `net` over row-major inputs and targets.
pub fn dataset_mse(net: &Mlp, inputs: &[f64], targets: &[f64]) -> Result<f64> {
    let (di, dout) = (net.input_dim(), net.output_dim());
    let rows = inputs.len() / di;
    if rows == 0 || inputs.len() != rows * di || targets.len() != rows * dout {
        return Err(Error::Dimension("empty or mismatched dataset".into()));
    }
    let mut sum = 0.0;
    for (x, t) in inputs.chunks(EVAL_CHUNK * di).zip(targets.chunks(EVAL_CHUNK * dout)) {
        let y = net.predict_batch(x)?;
        sum += y.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(sum / (rows * dout) as f64)
}

/// Rows per batched evaluation call.
const EVAL_CHUNK: usize = 1024;

/// Minibatch mean-squared-error regression with the configured optimizer
/// and plateau schedule. Inputs and targets are standardized internally and
/// the maps are folded into the returned network.
pub fn fit_regression(
    method: &str,
    inputs: &[f64],
    input_dim: usize,
    targets: &[f64],
    output_dim: usize,
    config: &TrainConfig,
) -> Result<(Mlp, TrainReport)> {
    config.validate()?;
    if config.optimizer == OptimizerKind::Lbfgs {
        return Err(Error::Config("lbfgs is only supported for physics-informed training".into()));
    }
    let rows = inputs.len() / input_dim;
    if rows == 0 || inputs.len() != rows * input_dim || targets.len() != rows * output_dim {
        return Err(Error::Dimension(format!(
            "{} inputs and {} targets do not form {input_dim}->{output_dim} rows",
            inputs.len(),
            targets.len()
        )));
    }
    let start = Instant::now();
    let in_map = Affine::standardize(inputs, input_dim);
    let out_map = Affine::standardize(targets, output_dim);
    let mut x = inputs.to_vec();
    in_map.apply(&mut x);
    let mut t = targets.to_vec();
    out_map.apply(&mut t);

    let mut net = config.init_network(input_dim, output_dim)?;
    let mut opt = config.optimizer(net.param_count());
    let mut sched = config.scheduler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let batch = if config.batch_size == 0 { rows } else { config.batch_size.min(rows) };
    let mut order: Vec<usize> = (0..rows).collect();
    let mut grad = vec![0.0; net.param_count()];
    let mut losses = Vec::with_capacity(config.epochs);
    let mut lrs = Vec::with_capacity(config.epochs);
    // squared error of the standardized targets maps back through the output scales
    let weights: Vec<f64> = out_map.scale.iter().map(|s| s * s).collect();
    let mut xb = Vec::with_capacity(batch * input_dim);

    for _ in 0..config.epochs {
        if batch < rows {
            order.shuffle(&mut rng);
        }
        let mut epoch_sum = 0.0;
        for chunk in order.chunks(batch) {
            xb.clear();
            for &r in chunk {
                xb.extend_from_slice(&x[r * input_dim..(r + 1) * input_dim]);
            }
            let jets = net.forward_batch(&xb, 0)?;
            let y = jets.value();
            let norm = 1.0 / (chunk.len() * output_dim) as f64;
            let mut adjoint = BatchAdjoint::zeros(chunk.len(), output_dim, input_dim, 0);
            for (i, &r) in chunk.iter().enumerate() {
                for o in 0..output_dim {
                    let e = y[i * output_dim + o] - t[r * output_dim + o];
                    epoch_sum += weights[o] * e * e;
                    adjoint.value[i * output_dim + o] = 2.0 * e * norm;
                }
            }
            grad.fill(0.0);
            net.backward_batch(&jets, &adjoint, &mut grad)?;
            opt.apply(&mut net, &grad)?;
        }
        let epoch_loss = epoch_sum / (rows * output_dim) as f64;
        losses.push(epoch_loss);
        lrs.push(opt.learning_rate);
        plateau_step(&mut sched, &mut opt, epoch_loss)?;
    }

    fold_input_map(&mut net, &in_map);
    fold_output_map(&mut net, &out_map);
    let final_train_mse = dataset_mse(&net, inputs, targets)?;
    if !final_train_mse.is_finite() {
        return Err(Error::Diverged { epoch: config.epochs, loss: final_train_mse });
    }
    let report = TrainReport {
        method: method.to_string(),
        epoch_losses: losses,
        learning_rates: lrs,
        final_train_mse,
        final_test_mse: None,
        train_seconds: start.elapsed().as_secs_f64(),
        epochs_run: config.epochs,
        final_lr: opt.learning_rate,
        seed: config.seed,
    };
    Ok((net, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_config(epochs: usize) -> TrainConfig {
        TrainConfig {
            hidden: vec![16, 16],
            activation: Activation::Tanh,
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            plateau_factor: 0.5,
            plateau_patience: 20,
            min_lr: 1e-6,
            epochs,
            batch_size: 0,
            seed: 1,
        }
    }

    #[test]
    fn folding_preserves_function() {
        let net = Mlp::init(&[2, 5, 3], &[Activation::Tanh, Activation::Identity], 2).unwrap();
        let inm = Affine { shift: vec![0.5, -1.0], scale: vec![2.0, 0.25] };
        let outm = Affine { shift: vec![1.0, 2.0, 3.0], scale: vec![0.5, 4.0, 1.5] };
        let mut folded = net.clone();
        fold_input_map(&mut folded, &inm);
        fold_output_map(&mut folded, &outm);
        let x = [0.3, 0.7];
        let mut xn = x.to_vec();
        inm.apply(&mut xn);
        let y = net.predict(&xn).unwrap();
        let yf = folded.predict(&x).unwrap();
        for o in 0..3 {
            assert!((yf[o] - (outm.shift[o] + outm.scale[o] * y[o])).abs() < 1e-13);
        }
    }

    #[test]
    fn memorizes_one_sample() {
        let (net, rep) = fit_regression("t", &[0.7], 1, &[0.3, -1.2, 5.0], 3, &small_config(300)).unwrap();
        assert!(rep.final_train_mse < 1e-8, "{}", rep.final_train_mse);
        assert!((net.predict(&[0.7]).unwrap()[2] - 5.0).abs() < 1e-3);
    }

    #[test]
    fn deterministic_and_lr_monotone() {
        let xs: Vec<f64> = (0..20).map(|k| k as f64 / 19.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let mut cfg = small_config(200);
        cfg.batch_size = 4;
        let (a, ra) = fit_regression("t", &xs, 1, &ys, 1, &cfg).unwrap();
        let (b, rb) = fit_regression("t", &xs, 1, &ys, 1, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra.without_timing(), rb.without_timing());
        assert!(ra.learning_rates.windows(2).all(|w| w[1] <= w[0]));
        assert!(ra.final_train_mse < 1e-3);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(fit_regression("t", &[], 1, &[], 1, &small_config(1)).is_err());
        assert!(fit_regression("t", &[1.0, 2.0], 1, &[1.0], 1, &small_config(1)).is_err());
        let mut cfg = small_config(1);
        cfg.hidden.clear();
        assert!(fit_regression("t", &[1.0], 1, &[1.0], 1, &cfg).is_err());
    }
}
