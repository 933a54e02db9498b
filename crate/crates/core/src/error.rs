use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("parameter {value} outside the domain [{lo}, {hi}]")]
    OutsideDomain { value: f64, lo: f64, hi: f64 },

    #[error("derivative order {order} exceeds spline degree {degree}")]
    DerivativeOrder { order: usize, degree: usize },

    #[error("gauss-legendre rule with {0} points is not supported (1..=16)")]
    QuadraturePoints(usize),

    #[error("invalid boundary edge: {0}")]
    InvalidEdge(String),

    #[error("normal must be a signed unit axis vector, got ({0}, {1})")]
    InvalidNormal(f64, f64),

    #[error("singular matrix: zero pivot in column {pivot}")]
    SingularMatrix { pivot: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Diverged { epoch: usize, loss: f64 },

    #[error("solver failed for n = {n}: {source}")]
    SolveFailed {
        n: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
