//! Network mapping `(n, x, y)` straight to the field value.

use crate::error::{Error, Result};
use crate::iga::heat::HeatProblem;
use crate::iga::metrics::{pointwise_mse, ScalarField};
use crate::iga::solve_heat_problem;
use crate::nn::Mlp;

use super::data::DirectDataset;
use super::fit::{fit_regression, TrainConfig, TrainReport};

/// A direct network frozen at one heating parameter, viewed as a field.
pub struct DirectField<'a> {
    pub net: &'a Mlp,
    pub n: f64,
}

impl ScalarField for DirectField<'_> {
    fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.net.predict(&[self.n, x, y])?[0])
    }
}

/// Train `(n, x, y) -> u` on every sample of `train`.
pub fn train_direct_net(train: &DirectDataset, config: &TrainConfig) -> Result<(Mlp, TrainReport)> {
    if train.is_empty() {
        return Err(Error::Dimension("direct dataset is empty".into()));
    }
    let inputs: Vec<f64> = train.samples.iter().flat_map(|s| [s.n, s.x, s.y]).collect();
    let targets: Vec<f64> = train.samples.iter().map(|s| s.u).collect();
    fit_regression("direct", &inputs, 3, &targets, 1, config)
}

/// Mean over `n_values` of the pointwise MSE against fresh solver fields on a
/// `grid x grid` L-shape grid.
pub fn direct_pointwise_mse(net: &Mlp, problem: &HeatProblem, n_values: &[f64], grid: usize) -> Result<f64> {
    if net.input_dim() != 3 || net.output_dim() != 1 {
        return Err(Error::Dimension(format!(
            "direct network must map 3 -> 1, got {} -> {}",
            net.input_dim(),
            net.output_dim()
        )));
    }
    if n_values.is_empty() {
        return Err(Error::Dimension("no evaluation n values".into()));
    }
    let mut sum = 0.0;
    for &n in n_values {
        let solved = solve_heat_problem(&problem.with_n(n))?;
        sum += pointwise_mse(&DirectField { net, n }, &solved, grid, grid)?;
    }
    Ok(sum / n_values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, OptimizerKind};
    use crate::iga::metrics::lshape_grid;
    use crate::training::data::DirectSample;

    #[test]
    fn constant_field_is_learned() {
        let mut samples = Vec::new();
        for &n in &[0.6, 0.8] {
            for (x, y) in lshape_grid(6, 6) {
                samples.push(DirectSample { n, x, y, u: 0.75 });
            }
        }
        let config = TrainConfig {
            hidden: vec![8, 8],
            activation: Activation::Relu,
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            plateau_factor: 0.5,
            plateau_patience: 20,
            min_lr: 1e-7,
            epochs: 10000,
            batch_size: 0,
            seed: 5,
        };
        let (net, report) = train_direct_net(&DirectDataset { samples }, &config).unwrap();
        assert!(report.final_train_mse < 1e-8, "{}", report.final_train_mse);
        assert!((DirectField { net: &net, n: 0.6 }.value(1.2, 0.4).unwrap() - 0.75).abs() < 1e-4);
    }

    #[test]
    fn shape_checks() {
        let problem = HeatProblem::new(1.0, 4, 2).unwrap();
        let wrong = Mlp::init(&[2, 3, 1], &[Activation::Tanh, Activation::Identity], 0).unwrap();
        assert!(direct_pointwise_mse(&wrong, &problem, &[0.7], 11).is_err());
        assert!(train_direct_net(&DirectDataset { samples: vec![] }, &TrainConfig {
            hidden: vec![4],
            activation: Activation::Relu,
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            plateau_factor: 0.5,
            plateau_patience: 10,
            min_lr: 1e-7,
            epochs: 1,
            batch_size: 8,
            seed: 5,
        })
        .is_err());
    }
}
