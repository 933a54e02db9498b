pub mod bspline;
pub mod error;
pub mod iga;
pub mod nn;
pub mod quadrature;
pub mod training;

pub use bspline::{KnotVector, SplineField2D};
pub use error::{Error, Result};
