//! Network mapping the heating parameter `n` to all spline coefficients.

use crate::bspline::SplineField2D;
use crate::error::{Error, Result};
use crate::iga::heat::HeatProblem;
use crate::iga::metrics::vector_mse;
use crate::nn::Mlp;

use super::data::CoeffDataset;
use super::fit::{fit_regression, TrainConfig, TrainReport};

/// Train `n -> u_ij` on every sample of `train`. When `test` is given its
/// coefficient MSE is recorded in the report.
pub fn train_coefficient_net(
    train: &CoeffDataset,
    test: Option<&CoeffDataset>,
    config: &TrainConfig,
) -> Result<(Mlp, TrainReport)> {
    if train.is_empty() {
        return Err(Error::Dimension("coefficient dataset is empty".into()));
    }
    let width = train.problem.dof_count();
    if train.samples.iter().any(|s| s.coefficients.len() != width) {
        return Err(Error::Dimension(format!("every sample must carry {width} coefficients")));
    }
    let inputs = train.n_values();
    let targets: Vec<f64> = train.samples.iter().flat_map(|s| s.coefficients.iter().copied()).collect();
    let (net, mut report) = fit_regression("coeff", &inputs, 1, &targets, width, config)?;
    if let Some(test) = test {
        report.final_test_mse = Some(coefficient_mse(&net, test)?);
    }
    Ok((net, report))
}

/// Network output at `n` with the constrained coefficients set to zero.
pub fn predict_coefficients(net: &Mlp, n: f64, problem: &HeatProblem) -> Result<Vec<f64>> {
    if net.input_dim() != 1 || net.output_dim() != problem.dof_count() {
        return Err(Error::Dimension(format!(
            "network maps {} -> {}, problem needs 1 -> {}",
            net.input_dim(),
            net.output_dim(),
            problem.dof_count()
        )));
    }
    let mut u = net.predict(&[n])?;
    for k in problem.dirichlet_dofs()? {
        u[k] = 0.0;
    }
    Ok(u)
}

/// The spline field whose coefficients the network predicts at `n`.
pub fn predict_field_from_coeffs(net: &Mlp, n: f64, problem: &HeatProblem) -> Result<SplineField2D> {
    let u = predict_coefficients(net, n, problem)?;
    let kv = problem.knot_vector()?;
    SplineField2D::new(kv.clone(), kv, u)
}

/// Mean squared error between the predicted and solved coefficient vectors
/// over every sample in `data`.
pub fn coefficient_mse(net: &Mlp, data: &CoeffDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Dimension("coefficient dataset is empty".into()));
    }
    let mut sum = 0.0;
    for s in &data.samples {
        let u = predict_coefficients(net, s.n, &data.problem)?;
        sum += vector_mse(&u, &s.coefficients)?;
    }
    Ok(sum / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iga::{pointwise_mse, solve_heat_problem};
    use crate::nn::{Activation, OptimizerKind};
    use crate::training::data::generate_coeff_dataset;

    fn config(epochs: usize) -> TrainConfig {
        TrainConfig {
            hidden: vec![32],
            activation: Activation::Tanh,
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            plateau_factor: 0.5,
            plateau_patience: 50,
            min_lr: 1e-6,
            epochs,
            batch_size: 0,
            seed: 3,
        }
    }

    #[test]
    fn single_sample_is_memorized() {
        let problem = HeatProblem::new(1.0, 4, 2).unwrap();
        let data = generate_coeff_dataset(&problem, &[0.9]).unwrap();
        let (net, report) = train_coefficient_net(&data, Some(&data), &config(400)).unwrap();
        assert!(report.final_train_mse < 1e-8, "{}", report.final_train_mse);
        assert!(report.final_test_mse.unwrap() < 1e-8);
        let solved = solve_heat_problem(&problem.with_n(0.9)).unwrap();
        let field = predict_field_from_coeffs(&net, 0.9, &problem).unwrap();
        assert!(pointwise_mse(&field, &solved, 21, 21).unwrap() < 1e-8);
    }

    #[test]
    fn constrained_outputs_are_zeroed() {
        let problem = HeatProblem::new(1.0, 4, 2).unwrap();
        let net = config(0).init_network(1, problem.dof_count()).unwrap();
        let mut net = net;
        net.bias_mut(1).fill(1.0);
        let u = predict_coefficients(&net, 0.7, &problem).unwrap();
        for k in problem.dirichlet_dofs().unwrap() {
            assert_eq!(u[k], 0.0);
        }
        let field = predict_field_from_coeffs(&net, 0.7, &problem).unwrap();
        assert_eq!(field.eval(0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn perfect_lookup_reproduces_the_solver_field() {
        let problem = HeatProblem::new(1.3, 4, 2).unwrap();
        let solved = solve_heat_problem(&problem).unwrap();
        let width = problem.dof_count();
        let mut params = vec![0.0; width];
        params.extend_from_slice(solved.coefficients());
        let net = Mlp::from_parts(vec![1, width], vec![Activation::Identity], params).unwrap();
        let field = predict_field_from_coeffs(&net, 1.3, &problem).unwrap();
        assert!(pointwise_mse(&field, &solved, 21, 21).unwrap() < 1e-16);
    }

    #[test]
    fn held_out_parameter_inside_its_family() {
        let problem = HeatProblem::new(1.0, 4, 2).unwrap();
        let ns: Vec<f64> = (0..21).map(|k| 1.3 + 0.02 * k as f64).filter(|n| (n - 1.5).abs() > 1e-9).collect();
        let data = generate_coeff_dataset(&problem, &ns).unwrap();
        let mut cfg = config(2000);
        cfg.hidden = vec![32, 32];
        cfg.learning_rate = 3e-3;
        let (net, _) = train_coefficient_net(&data, None, &cfg).unwrap();
        let solved = solve_heat_problem(&problem.with_n(1.5)).unwrap();
        let field = predict_field_from_coeffs(&net, 1.5, &problem).unwrap();
        let mse = pointwise_mse(&field, &solved, 41, 41).unwrap();
        assert!(mse < 1e-5, "{mse}");
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let problem = HeatProblem::new(1.0, 4, 2).unwrap();
        let net = config(0).init_network(1, 3).unwrap();
        assert!(predict_field_from_coeffs(&net, 0.7, &problem).is_err());
    }
}
