//! Shared fixtures for the kernel benchmarks.

use splinenet::iga::HeatProblem;
use splinenet::nn::{Activation, Mlp};
use splinenet::training::{CollocationCounts, PinnProblem, PinnWeights};

/// The production discretization: mesh 10, quadratic.
pub fn heat_problem() -> HeatProblem {
    HeatProblem::new(0.75, 10, 2).expect("valid discretization")
}

/// A tanh network with two inputs and one output.
pub fn field_network(hidden: &[usize]) -> Mlp {
    let mut sizes = vec![2];
    sizes.extend_from_slice(hidden);
    sizes.push(1);
    let mut activations = vec![Activation::Tanh; hidden.len()];
    activations.push(Activation::Identity);
    Mlp::init(&sizes, &activations, 1).expect("valid network")
}

/// `rows` points in `[0,2]^2`, row-major, spread by a fixed low-discrepancy rule.
pub fn grid_points(rows: usize) -> Vec<f64> {
    let golden = 0.618_033_988_749_894_9;
    (0..rows).flat_map(|k| [2.0 * ((k as f64 + 0.5) / rows as f64), 2.0 * ((k as f64 * golden) % 1.0)]).collect()
}

pub fn pinn_problem() -> PinnProblem {
    PinnProblem::sample(1.0, CollocationCounts::default(), PinnWeights::default(), 0).expect("valid collocation")
}
