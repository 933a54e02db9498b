//! Galerkin assembly and solves: L2 projection, the L-shape heat problem and
//! the 1D Bernstein problem.

pub mod appendix;
pub mod assembly;
pub mod export;
pub mod heat;
pub mod linalg;
pub mod metrics;

pub use appendix::{appendix_dataset, solve_1d_appendix, AppendixSample};
pub use assembly::{assemble_l2_projection, assemble_stiffness, DofMap, LinearSystem};
pub use heat::{
    apply_dirichlet, apply_dirichlet_lshape, assemble_heat_system, assemble_neumann_load,
    dirichlet_dofs, heating_g, in_removed_quarter, solve_heat_problem, solve_system, HeatProblem,
};
pub use linalg::{lu_solve, relative_residual, DenseMatrix};
pub use metrics::{lshape_grid, pointwise_mse, vector_mse, ScalarField};
