//! Feed-forward networks with exact parameter and input derivatives.

pub mod activation;
pub mod batch;
pub mod jet;
pub mod mlp;
pub mod optim;

pub use activation::Activation;
pub use batch::{BatchAdjoint, BatchJets};
pub use jet::{InputDerivatives, JetAdjoint, JetCache};
pub use mlp::{ForwardCache, Mlp};
pub use optim::{adam_step, plateau_step, sgd_step, OptimizerKind, OptimizerState, PlateauScheduler};

/// Glorot-initialized network; see [`Mlp::init`].
pub fn init_mlp(sizes: &[usize], activations: &[Activation], seed: u64) -> crate::Result<Mlp> {
    Mlp::init(sizes, activations, seed)
}
