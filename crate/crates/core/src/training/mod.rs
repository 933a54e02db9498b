//! Training pipelines: the three-parameter worked examples, the coefficient
//! and direct regressors, and the physics-informed network.

pub mod appendix;
pub mod coeff;
pub mod compare;
pub mod config;
pub mod data;
pub mod direct;
pub mod experiment;
pub mod fit;
pub mod lbfgs;
pub mod pinn;

pub use coeff::{coefficient_mse, predict_coefficients, predict_field_from_coeffs, train_coefficient_net};
pub use compare::{evaluate_method, evaluate_methods, Comparison, ComparisonRow, TrainedArtifacts};
pub use config::{ExperimentConfig, PinnConfig, ProblemConfig, SamplingConfig};
pub use data::{
    generate_coeff_dataset, generate_direct_dataset, n_grid, split_train_test, CoeffDataset, CoeffSample,
    DirectDataset, DirectSample,
};
pub use experiment::{compare_networks, train_method, Method};
pub use direct::{direct_pointwise_mse, train_direct_net, DirectField};
pub use fit::{fit_regression, Affine, TrainConfig, TrainReport};
pub use pinn::{initial_network, PinnField, pinn_loss, pinn_loss_gradient, train_pinn, CollocationCounts, PinnLoss, PinnProblem, PinnWeights};
