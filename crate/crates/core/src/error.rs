use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Toolkit-wide error type. Variants carry enough context to name the
/// offending quantity (cell index, parameter value) in diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("negative density sample at cell {cell}: {value}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("non-finite field value at cell {cell}")]
    NonFinite { cell: usize },

    #[error("empty time window: t1 = {t1}, t2 = {t2}")]
    EmptyWindow { t1: f64, t2: f64 },

    #[error("window [{t1}, {t2}] not contained in [{lo}, {hi}]")]
    WindowOutOfRange { t1: f64, t2: f64, lo: f64, hi: f64 },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("under-resolved kernel: epsilon {epsilon} below cell width {dx}")]
    UnderResolvedKernel { epsilon: f64, dx: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("negative density after update at cell {cell} (internal invariant)")]
    PositivityLoss { cell: usize },

    #[error("not a rarefaction connection: {0}")]
    NotRarefaction(String),

    #[error("missing analytic derivatives: {0}")]
    MissingDerivatives(String),

    #[error("velocity undefined on vacuum exterior and no closure supplied")]
    MissingExteriorVelocity,

    #[error("divergent kernel integrability: {0}")]
    DivergentKernel(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}
