//! Experiment configuration: one TOML file freezes every choice of a run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iga::heat::HeatProblem;
use crate::nn::{Activation, OptimizerKind};

use super::data::{n_grid, split_train_test};
use super::fit::TrainConfig;
use super::pinn::{CollocationCounts, PinnProblem, PinnWeights};

/// Discretization of the heat problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Elements per direction on open uniform knots over `[0,2]`, corner knot
    /// repeated `degree` times.
    pub mesh: usize,
    pub degree: usize,
}

/// How heating parameters are drawn and split, and the sampling densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// `n_count` evenly spaced values on `(n_min, n_max]`.
    pub n_min: f64,
    pub n_max: f64,
    pub n_count: usize,
    /// Values held out by the stratified split.
    pub test_count: usize,
    pub split_seed: u64,
    /// Per-axis grid of direct-net training points for each training n.
    pub direct_grid: usize,
    /// Per-axis grid for pointwise MSE.
    pub eval_grid: usize,
}

/// Physics-informed run at one fixed heating parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnConfig {
    pub n: f64,
    pub collocation: CollocationCounts,
    pub weights: PinnWeights,
    pub collocation_seed: u64,
    /// Discretization of the solver field the network is scored against.
    pub reference: ProblemConfig,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub out_dir: String,
    pub problem: ProblemConfig,
    pub sampling: SamplingConfig,
    pub coeff: TrainConfig,
    pub direct: TrainConfig,
    pub pinn: PinnConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.heat_problem()?;
        self.reference_problem()?;
        let s = &self.sampling;
        if !(s.n_min >= 0.0 && s.n_max > s.n_min && s.n_max.is_finite()) {
            return Err(Error::Config(format!("n range ({}, {}] is empty or negative", s.n_min, s.n_max)));
        }
        self.split()?;
        if s.direct_grid < 2 || s.eval_grid < 2 {
            return Err(Error::Config("direct_grid and eval_grid must be at least 2".into()));
        }
        for (name, t) in [("coeff", &self.coeff), ("direct", &self.direct), ("pinn.train", &self.pinn.train)] {
            t.validate().map_err(|e| Error::Config(format!("[{name}] {e}")))?;
        }
        for (name, t) in [("coeff", &self.coeff), ("direct", &self.direct)] {
            if t.optimizer == OptimizerKind::Lbfgs {
                return Err(Error::Config(format!("[{name}] lbfgs is only supported for the physics-informed net")));
            }
        }
        if self.pinn.train.activation == Activation::Relu {
            return Err(Error::Config("[pinn.train] relu has no second derivative".into()));
        }
        PinnProblem::sample(self.pinn.n, self.pinn.collocation, self.pinn.weights, 0)
            .map(|_| ())
            .map_err(|e| Error::Config(format!("[pinn] {e}")))
    }

    /// Solver template at `n = 1`; training code swaps `n` per sample.
    pub fn heat_problem(&self) -> Result<HeatProblem> {
        HeatProblem::new(1.0, self.problem.mesh, self.problem.degree).map_err(|e| Error::Config(format!("[problem] {e}")))
    }

    pub fn reference_problem(&self) -> Result<HeatProblem> {
        let r = self.pinn.reference;
        HeatProblem::new(self.pinn.n, r.mesh, r.degree).map_err(|e| Error::Config(format!("[pinn.reference] {e}")))
    }

    /// Coefficient-net output width implied by the discretization.
    pub fn coefficient_count(&self) -> Result<usize> {
        Ok(self.heat_problem()?.dof_count())
    }

    pub fn n_values(&self) -> Vec<f64> {
        n_grid(self.sampling.n_min, self.sampling.n_max, self.sampling.n_count)
    }

    /// `(train, test)` heating parameters.
    pub fn split(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        split_train_test(&self.n_values(), self.sampling.test_count, self.sampling.split_seed)
    }

    pub fn pinn_problem(&self) -> Result<PinnProblem> {
        PinnProblem::sample(self.pinn.n, self.pinn.collocation, self.pinn.weights, self.pinn.collocation_seed)
    }

    /// Replace every training seed, as the command line `--seed` does.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.coeff.seed = seed;
        self.direct.seed = seed;
        self.pinn.train.seed = seed;
        self
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let adam = |hidden: Vec<usize>, activation, learning_rate, patience, epochs, batch_size| TrainConfig {
            hidden,
            activation,
            optimizer: OptimizerKind::Adam,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            plateau_factor: 0.5,
            plateau_patience: patience,
            min_lr: 1e-6,
            epochs,
            batch_size,
            seed: 1,
        };
        let pinn_train = TrainConfig {
            optimizer: OptimizerKind::Lbfgs,
            ..adam(vec![50, 50], Activation::Tanh, 1.0, 1, 9000, 0)
        };
        Self {
            out_dir: "out".into(),
            problem: ProblemConfig { mesh: 10, degree: 2 },
            sampling: SamplingConfig {
                n_min: 0.5,
                n_max: 1.0,
                n_count: 24,
                test_count: 5,
                split_seed: 1,
                direct_grid: 50,
                eval_grid: 101,
            },
            coeff: adam(vec![100, 100], Activation::Tanh, 3e-3, 30, 2000, 0),
            direct: adam(vec![100, 100], Activation::Relu, 3e-3, 25, 1500, 256),
            pinn: PinnConfig {
                n: 1.0,
                collocation: CollocationCounts::default(),
                weights: PinnWeights::default(),
                collocation_seed: 0,
                reference: ProblemConfig { mesh: 40, degree: 3 },
                train: pinn_train,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        let text = c.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml().unwrap(), text);
        assert_eq!(c.coefficient_count().unwrap(), 169);
        let (train, test) = c.split().unwrap();
        assert_eq!((train.len(), test.len()), (19, 5));
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ExperimentConfig::default();
        c.problem.mesh = 7;
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.sampling.test_count = 12;
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.pinn.train.activation = Activation::Relu;
        assert!(c.validate().is_err());

        let mut c = ExperimentConfig::default();
        c.coeff.optimizer = OptimizerKind::Lbfgs;
        assert!(c.validate().is_err());

        let text = ExperimentConfig::default().to_toml().unwrap().replace("mesh = 10", "mesh = 10\nmeshes = 3");
        let err = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("meshes"), "{err}");
    }

    #[test]
    fn seed_override_reaches_every_pipeline() {
        let c = ExperimentConfig::default().with_seed(42);
        assert_eq!([c.coeff.seed, c.direct.seed, c.pinn.train.seed], [42; 3]);
    }
}
