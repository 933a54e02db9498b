//! Side-by-side accuracy table of the three surrogates against fresh solves.

use std::io::Write;

use crate::error::{Error, Result};
use crate::iga::export::fmt;
use crate::iga::heat::HeatProblem;
use crate::iga::metrics::{pointwise_mse, vector_mse, ScalarField};
use crate::iga::solve_heat_problem;
use crate::nn::Mlp;

use super::coeff::{predict_coefficients, predict_field_from_coeffs};
use super::direct::DirectField;
use super::pinn::PinnField;

/// One line of the comparison table; `n == None` is a method's mean row.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: String,
    pub n: Option<f64>,
    pub coeff_mse: Option<f64>,
    pub pointwise_mse: f64,
    pub train_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

/// Trained networks with their training wall-clock.
#[derive(Debug, Clone, Copy)]
pub struct TrainedArtifacts<'a> {
    pub coeff: Option<(&'a Mlp, f64)>,
    pub direct: Option<(&'a Mlp, f64)>,
    /// Network, its fixed n, and training seconds.
    pub pinn: Option<(&'a Mlp, f64, f64)>,
}

impl Comparison {
    /// Mean rows only, in insertion order.
    pub fn summary(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| r.n.is_none())
    }

    pub fn mean_pointwise_mse(&self, method: &str) -> Option<f64> {
        self.summary().find(|r| r.method == method).map(|r| r.pointwise_mse)
    }

    /// `method,n,coeff_mse,pointwise_mse,train_seconds`; mean rows carry
    /// `n = mean` and absent coefficient errors are empty.
    pub fn write_csv<W: Write>(&self, out: W, with_timing: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "n", "coeff_mse", "pointwise_mse", "train_seconds"])?;
        for r in &self.rows {
            let n = r.n.map_or_else(|| "mean".to_string(), fmt);
            let c = r.coeff_mse.map_or_else(String::new, fmt);
            let t = if with_timing { fmt(r.train_seconds) } else { String::new() };
            w.write_record([r.method.clone(), n, c, fmt(r.pointwise_mse), t])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-n rows plus a mean row for one method. `predict` returns the field
/// and, when the method has one, its coefficient vector.
pub fn evaluate_method<F, S>(
    method: &str,
    reference: &HeatProblem,
    n_test: &[f64],
    grid: usize,
    train_seconds: f64,
    predict: F,
) -> Result<Vec<ComparisonRow>>
where
    F: Fn(f64) -> Result<(S, Option<Vec<f64>>)>,
    S: ScalarField,
{
    if n_test.is_empty() {
        return Err(Error::Dimension(format!("no evaluation n values for {method}")));
    }
    let mut rows = Vec::with_capacity(n_test.len() + 1);
    for &n in n_test {
        let solved = solve_heat_problem(&reference.with_n(n))?;
        let (field, coeffs) = predict(n)?;
        let coeff_mse = coeffs.map(|c| vector_mse(&c, solved.coefficients())).transpose()?;
        rows.push(ComparisonRow {
            method: method.into(),
            n: Some(n),
            coeff_mse,
            pointwise_mse: pointwise_mse(&field, &solved, grid, grid)?,
            train_seconds,
        });
    }
    let count = rows.len() as f64;
    let coeff_mse = rows.iter().map(|r| r.coeff_mse).sum::<Option<f64>>().map(|s| s / count);
    let pointwise = rows.iter().map(|r| r.pointwise_mse).sum::<f64>() / count;
    rows.push(ComparisonRow { method: method.into(), n: None, coeff_mse, pointwise_mse: pointwise, train_seconds });
    Ok(rows)
}

/// Score every available artifact. The coefficient and direct nets are
/// compared on `n_test` against `problem`; the physics-informed net at its
/// own n against `pinn_reference`.
pub fn evaluate_methods(
    problem: &HeatProblem,
    pinn_reference: &HeatProblem,
    n_test: &[f64],
    grid: usize,
    artifacts: &TrainedArtifacts<'_>,
) -> Result<Comparison> {
    let mut rows = Vec::new();
    if let Some((net, secs)) = artifacts.coeff {
        if net.input_dim() != 1 || net.output_dim() != problem.dof_count() {
            return Err(Error::Config(format!(
                "coefficient net maps {} -> {} but the problem has {} coefficients",
                net.input_dim(),
                net.output_dim(),
                problem.dof_count()
            )));
        }
        rows.extend(evaluate_method("coeff", problem, n_test, grid, secs, |n| {
            let c = predict_coefficients(net, n, problem)?;
            Ok((predict_field_from_coeffs(net, n, problem)?, Some(c)))
        })?);
    }
    if let Some((net, secs)) = artifacts.direct {
        if net.input_dim() != 3 || net.output_dim() != 1 {
            return Err(Error::Config(format!("direct net maps {} -> {}, expected 3 -> 1", net.input_dim(), net.output_dim())));
        }
        rows.extend(evaluate_method("direct", problem, n_test, grid, secs, |n| Ok((DirectField { net, n }, None)))?);
    }
    if let Some((net, n, secs)) = artifacts.pinn {
        if net.input_dim() != 2 || net.output_dim() != 1 {
            return Err(Error::Config(format!("physics-informed net maps {} -> {}, expected 2 -> 1", net.input_dim(), net.output_dim())));
        }
        rows.extend(evaluate_method("pinn", pinn_reference, &[n], grid, secs, |_| Ok((PinnField(net), None)))?);
    }
    Ok(Comparison { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::SplineField2D;

    #[test]
    fn solver_against_itself_scores_zero() {
        let problem = HeatProblem::new(1.0, 4, 2).unwrap();
        let rows = evaluate_method("iga", &problem, &[0.6, 0.9], 21, 0.0, |n| {
            let f: SplineField2D = solve_heat_problem(&problem.with_n(n))?;
            let c = f.coefficients().to_vec();
            Ok((f, Some(c)))
        })
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.pointwise_mse == 0.0 && r.coeff_mse == Some(0.0)));
        assert_eq!(rows[2].n, None);
    }

    #[test]
    fn table_layout() {
        let problem = HeatProblem::new(1.0, 4, 2).unwrap();
        let coeff = Mlp::init(&[1, 3, problem.dof_count()], &[crate::nn::Activation::Tanh, crate::nn::Activation::Identity], 0).unwrap();
        let direct = Mlp::init(&[3, 3, 1], &[crate::nn::Activation::Relu, crate::nn::Activation::Identity], 0).unwrap();
        let pinn = Mlp::init(&[2, 3, 1], &[crate::nn::Activation::Tanh, crate::nn::Activation::Identity], 0).unwrap();
        let art = TrainedArtifacts { coeff: Some((&coeff, 1.0)), direct: Some((&direct, 2.0)), pinn: Some((&pinn, 1.0, 3.0)) };
        let table = evaluate_methods(&problem, &problem, &[0.6, 0.8, 0.9], 11, &art).unwrap();
        assert_eq!(table.rows.len(), 4 + 4 + 2);
        let names: Vec<&str> = table.summary().map(|r| r.method.as_str()).collect();
        assert_eq!(names, ["coeff", "direct", "pinn"]);
        assert!(table.rows.iter().filter(|r| r.method == "direct").all(|r| r.coeff_mse.is_none()));

        let mut out = Vec::new();
        table.write_csv(&mut out, false).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("method,n,coeff_mse,pointwise_mse,train_seconds\n"));
        assert_eq!(text.lines().count(), 11);
        assert!(text.lines().filter(|l| l.contains(",mean,")).count() == 3);
    }

    #[test]
    fn mismatched_artifacts_are_rejected() {
        let problem = HeatProblem::new(1.0, 4, 2).unwrap();
        let wrong = Mlp::init(&[1, 3, 5], &[crate::nn::Activation::Tanh, crate::nn::Activation::Identity], 0).unwrap();
        let art = TrainedArtifacts { coeff: Some((&wrong, 0.0)), direct: None, pinn: None };
        assert!(matches!(evaluate_methods(&problem, &problem, &[0.7], 11, &art), Err(Error::Config(_))));
    }
}
