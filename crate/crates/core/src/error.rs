use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by an interval containing zero")]
    DivisionByZeroInterval,
    #[error("domain error: {0}")]
    DomainError(&'static str),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeError { expected: usize, got: usize },
    #[error("weights must be strictly positive")]
    WeightError,
    #[error("symmetry mismatch between operands")]
    SymmetryError,
    #[error("truncation size {n} too small for mu={mu} (need n >= mu^2/4)")]
    TruncationTooSmall { n: usize, mu: f64 },
    #[error("mu={mu} below the asymptotic regime threshold {min}")]
    RegimeError { mu: f64, min: f64 },
    #[error("index {index} out of range {len}")]
    IndexError { index: usize, len: usize },
    #[error("verified linear solve failed: {0}")]
    SolveError(&'static str),
    #[error("finite block of L could not be verifiably inverted (increase N): defect norm {kappa}")]
    BlockInversionError { kappa: f64 },
    #[error("Neumann series not contracting: rho = {rho} >= 1")]
    NotContracting { rho: f64 },
    #[error("cell [{mu1}, {mu2}] too wide for the range-extension lemma")]
    CellTooWide { mu1: f64, mu2: f64 },
    #[error("mu-table build failed at mu = {mu}: {reason}")]
    TableBuildError { mu: f64, reason: String },
    #[error("mu-table does not cover mu = {mu} (covered up to {mu_star}, asymptotics from 3000)")]
    TableGap { mu: f64, mu_star: f64 },
    #[error("problem specification error: {0}")]
    SpecError(String),
    #[error("nonzero mean mode in zero-mean vorticity data")]
    MeanModeError,
    #[error("Newton iteration stalled: residual {residual} after {iters} iterations")]
    NewtonStalled { residual: f64, iters: usize },
    #[error("finite Jacobian is singular")]
    JacobianSingular,
    #[error("contraction failure in bound {0}")]
    ContractionFailure(&'static str),
    #[error("no admissible radius found: {0}")]
    RadiusNotFound(String),
    #[error("asymptotic constant verification failed: {0}")]
    ConstantRegressionError(String),
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
