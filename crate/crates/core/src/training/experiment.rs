//! End-to-end runs driven by an [`ExperimentConfig`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iga::metrics::pointwise_mse;
use crate::iga::solve_heat_problem;
use crate::nn::Mlp;

use super::coeff::train_coefficient_net;
use super::compare::{evaluate_methods, Comparison, TrainedArtifacts};
use super::config::ExperimentConfig;
use super::data::{generate_coeff_dataset, generate_direct_dataset};
use super::direct::{direct_pointwise_mse, train_direct_net};
use super::fit::TrainReport;
use super::pinn::{train_pinn, PinnField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Coeff,
    Direct,
    Pinn,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Coeff, Method::Direct, Method::Pinn];

    pub fn tag(self) -> &'static str {
        match self {
            Method::Coeff => "coeff",
            Method::Direct => "direct",
            Method::Pinn => "pinn",
        }
    }

    /// The method whose networks have this input/output shape.
    pub fn of_network(net: &Mlp, config: &ExperimentConfig) -> Result<Self> {
        match (net.input_dim(), net.output_dim()) {
            (1, k) if k == config.coefficient_count()? => Ok(Method::Coeff),
            (3, 1) => Ok(Method::Direct),
            (2, 1) => Ok(Method::Pinn),
            (i, o) => Err(Error::Config(format!("a {i} -> {o} network matches no method of this config"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}' (expected coeff, direct or pinn)")))
    }
}

/// Generate the method's data from `config`, train, and record the held-out
/// error in `final_test_mse`: coefficient MSE for the coefficient net,
/// pointwise MSE for the others.
pub fn train_method(config: &ExperimentConfig, method: Method) -> Result<(Mlp, TrainReport)> {
    config.validate()?;
    let problem = config.heat_problem()?;
    let (train_n, test_n) = config.split()?;
    let grid = config.sampling.eval_grid;
    match method {
        Method::Coeff => {
            let train = generate_coeff_dataset(&problem, &train_n)?;
            let test = generate_coeff_dataset(&problem, &test_n)?;
            train_coefficient_net(&train, Some(&test), &config.coeff)
        }
        Method::Direct => {
            let train = generate_direct_dataset(&problem, &train_n, config.sampling.direct_grid)?;
            let (net, mut report) = train_direct_net(&train, &config.direct)?;
            report.final_test_mse = Some(direct_pointwise_mse(&net, &problem, &test_n, grid)?);
            Ok((net, report))
        }
        Method::Pinn => {
            let (net, mut report) = train_pinn(&config.pinn_problem()?, &config.pinn.train)?;
            let reference = solve_heat_problem(&config.reference_problem()?)?;
            report.final_test_mse = Some(pointwise_mse(&PinnField(&net), &reference, grid, grid)?);
            Ok((net, report))
        }
    }
}

/// Comparison table for whichever trained networks are given.
pub fn compare_networks(config: &ExperimentConfig, nets: &[(Method, &Mlp, f64)]) -> Result<Comparison> {
    let mut art = TrainedArtifacts { coeff: None, direct: None, pinn: None };
    for &(method, net, secs) in nets {
        match method {
            Method::Coeff => art.coeff = Some((net, secs)),
            Method::Direct => art.direct = Some((net, secs)),
            Method::Pinn => art.pinn = Some((net, config.pinn.n, secs)),
        }
    }
    let (_, test_n) = config.split()?;
    evaluate_methods(&config.heat_problem()?, &config.reference_problem()?, &test_n, config.sampling.eval_grid, &art)
}
