use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("step size out of range: dt = {0} (must satisfy 0 < dt <= 1e-2/gamma)")]
    StepSize(f64),
    #[error("no emission after {0} steps; drive too weak for the configured step cap")]
    NoEmission(u64),
    #[error("invalid parameter range: {0}")]
    InvalidRange(String),
    #[error("degenerate support: {0}")]
    DegenerateSupport(String),
    #[error("likelihood vanished at every grid point; record is impossible under the model")]
    AllImpossible,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("eigenvalue branch ambiguous: {0}")]
    EigenvalueTracking(String),
    #[error("training diverged at epoch {0}: loss is not finite")]
    TrainingDiverged(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("estimator requires a trained model but none was provided")]
    MissingModel,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
