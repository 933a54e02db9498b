use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
    /// Full-batch quasi-Newton with a line search; only the physics-informed loop supports it.
    Lbfgs,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Lbfgs => "lbfgs",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            "lbfgs" => Ok(OptimizerKind::Lbfgs),
            other => Err(Error::Config(format!("unknown optimizer '{other}'"))),
        }
    }
}

/// `theta <- theta - lr * grad`.
pub fn sgd_step(mlp: &mut Mlp, grads: &[f64], lr: f64) -> Result<()> {
    check_len(mlp.param_count(), grads.len())?;
    for (p, g) in mlp.params_mut().iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}

fn check_len(params: usize, grads: usize) -> Result<()> {
    if params != grads {
        return Err(Error::Dimension(format!("{grads} gradients for {params} parameters")));
    }
    Ok(())
}

/// Optimizer configuration plus Adam moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    first: Vec<f64>,
    second: Vec<f64>,
}

impl OptimizerState {
    pub fn sgd(learning_rate: f64) -> Self {
        Self::new(OptimizerKind::Sgd, learning_rate, 0)
    }

    /// Adam with `beta1 = 0.9`, `beta2 = 0.999`, `eps = 1e-8`.
    pub fn adam(learning_rate: f64, params: usize) -> Self {
        Self::new(OptimizerKind::Adam, learning_rate, params)
    }

    pub fn new(kind: OptimizerKind, learning_rate: f64, params: usize) -> Self {
        let moments = if kind == OptimizerKind::Adam { params } else { 0 };
        Self {
            kind,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first: vec![0.0; moments],
            second: vec![0.0; moments],
        }
    }

    pub fn with_betas(mut self, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self.epsilon = epsilon;
        self
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second
    }

    pub fn apply(&mut self, mlp: &mut Mlp, grads: &[f64]) -> Result<()> {
        match self.kind {
            OptimizerKind::Sgd => {
                self.step += 1;
                sgd_step(mlp, grads, self.learning_rate)
            }
            OptimizerKind::Adam => adam_step(mlp, grads, self),
            OptimizerKind::Lbfgs => Err(Error::Unsupported("lbfgs has no per-step update; it runs full-batch".into())),
        }
    }
}

/// Adam with bias correction.
pub fn adam_step(mlp: &mut Mlp, grads: &[f64], state: &mut OptimizerState) -> Result<()> {
    check_len(mlp.param_count(), grads.len())?;
    check_len(state.first.len(), grads.len())?;
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let lr = state.learning_rate;
    let eps = state.epsilon;
    for (((p, g), m), v) in
        mlp.params_mut().iter_mut().zip(grads).zip(state.first.iter_mut()).zip(state.second.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let mhat = *m / c1;
        let vhat = *v / c2;
        *p -= lr * mhat / (vhat.sqrt() + eps);
    }
    Ok(())
}

/// Multiply the learning rate by `factor` after `patience` epochs without a
/// relative improvement of `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauScheduler {
    pub factor: f64,
    pub patience: usize,
    pub threshold: f64,
    pub min_lr: f64,
    best_loss: f64,
    epochs_since_improvement: usize,
    epoch: usize,
}

impl PlateauScheduler {
    pub fn new(factor: f64, patience: usize, min_lr: f64) -> Result<Self> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::Config(format!("plateau factor must lie in (0, 1), got {factor}")));
        }
        if !(min_lr > 0.0) {
            return Err(Error::Config(format!("min_lr must be positive, got {min_lr}")));
        }
        if patience == 0 {
            return Err(Error::Config("plateau patience must be at least 1".into()));
        }
        Ok(Self {
            factor,
            patience,
            threshold: 1e-4,
            min_lr,
            best_loss: f64::INFINITY,
            epochs_since_improvement: 0,
            epoch: 0,
        })
    }

    pub fn best_loss(&self) -> f64 {
        self.best_loss
    }

    pub fn epochs_since_improvement(&self) -> usize {
        self.epochs_since_improvement
    }

    /// Record an epoch loss and return the learning rate to use next.
    pub fn step(&mut self, epoch_loss: f64, lr: f64) -> Result<f64> {
        self.epoch += 1;
        if !epoch_loss.is_finite() {
            return Err(Error::Diverged { epoch: self.epoch, loss: epoch_loss });
        }
        if epoch_loss < self.best_loss * (1.0 - self.threshold) {
            self.best_loss = epoch_loss;
            self.epochs_since_improvement = 0;
            return Ok(lr);
        }
        self.epochs_since_improvement += 1;
        if self.epochs_since_improvement >= self.patience {
            self.epochs_since_improvement = 0;
            return Ok((lr * self.factor).max(self.min_lr).min(lr));
        }
        Ok(lr)
    }
}

/// Scheduler step that also updates the optimizer's learning rate.
pub fn plateau_step(scheduler: &mut PlateauScheduler, state: &mut OptimizerState, epoch_loss: f64) -> Result<f64> {
    state.learning_rate = scheduler.step(epoch_loss, state.learning_rate)?;
    Ok(state.learning_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation::*;

    fn net() -> Mlp {
        Mlp::init(&[2, 3, 1], &[Tanh, Identity], 4).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut m = net();
        let before = m.clone();
        let zeros = vec![0.0; m.param_count()];
        sgd_step(&mut m, &zeros, 0.1).unwrap();
        assert_eq!(m, before);
        let mut st = OptimizerState::adam(1e-3, m.param_count());
        adam_step(&mut m, &zeros, &mut st).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn sgd_is_linear_in_lr() {
        let g: Vec<f64> = (0..net().param_count()).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut a = net();
        sgd_step(&mut a, &g, 0.05).unwrap();
        sgd_step(&mut a, &g, 0.05).unwrap();
        let mut b = net();
        sgd_step(&mut b, &g, 0.1).unwrap();
        for (x, y) in a.params().iter().zip(b.params()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(sgd_step(&mut b, &g[1..], 0.1).is_err());
    }

    #[test]
    fn adam_hand_trace() {
        // scalar parameter, gradients 1, -2, 0.5, lr 0.1
        let mut m = Mlp::from_parts(vec![1, 1], vec![Identity], vec![0.0, 0.0]).unwrap();
        let mut st = OptimizerState::adam(0.1, 2);
        let mut p = 0.0f64;
        let (mut mm, mut vv) = (0.0f64, 0.0f64);
        for (t, g) in [1.0f64, -2.0, 0.5].iter().enumerate() {
            adam_step(&mut m, &[*g, 0.0], &mut st).unwrap();
            mm = 0.9 * mm + 0.1 * g;
            vv = 0.999 * vv + 0.001 * g * g;
            let k = (t + 1) as i32;
            p -= 0.1 * (mm / (1.0 - 0.9f64.powi(k))) / ((vv / (1.0 - 0.999f64.powi(k))).sqrt() + 1e-8);
            assert!((m.params()[0] - p).abs() < 1e-15);
        }
        // first step of Adam moves by lr regardless of gradient scale
        let mut m2 = Mlp::from_parts(vec![1, 1], vec![Identity], vec![0.0, 0.0]).unwrap();
        let mut st2 = OptimizerState::adam(0.1, 2);
        adam_step(&mut m2, &[1.0, 0.0], &mut st2).unwrap();
        assert!((m2.params()[0] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn adam_constant_gradient_step_size() {
        let mut m = Mlp::from_parts(vec![1, 1], vec![Identity], vec![0.0, 0.0]).unwrap();
        let mut st = OptimizerState::adam(0.01, 2);
        let mut last = 0.0;
        for _ in 0..1000 {
            last = m.params()[0];
            adam_step(&mut m, &[3.0, -0.2], &mut st).unwrap();
        }
        let step = last - m.params()[0];
        assert!((step - 0.01).abs() < 1e-8);
    }

    #[test]
    fn plateau_behaviour() {
        let mut s = PlateauScheduler::new(0.5, 3, 1e-4).unwrap();
        let mut lr = 1e-2;
        for k in 0..10 {
            lr = s.step(1.0 / (k + 1) as f64, lr).unwrap();
        }
        assert_eq!(lr, 1e-2);

        let mut s = PlateauScheduler::new(0.5, 3, 1e-4).unwrap();
        let mut lr = 1e-2;
        for _ in 0..4 {
            lr = s.step(1.0, lr).unwrap();
        }
        assert_eq!(lr, 5e-3);

        let mut s = PlateauScheduler::new(0.1, 1, 1e-3).unwrap();
        let mut lr = 1e-3;
        for _ in 0..5 {
            let next = s.step(2.0, lr).unwrap();
            assert!(next <= lr);
            lr = next;
        }
        assert_eq!(lr, 1e-3);

        let mut s = PlateauScheduler::new(0.5, 3, 1e-4).unwrap();
        assert!(matches!(s.step(f64::NAN, 1e-3), Err(Error::Diverged { epoch: 1, .. })));
        assert!(PlateauScheduler::new(1.5, 3, 1e-4).is_err());
    }
}
