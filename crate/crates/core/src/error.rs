use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,
    #[error("unnormalizable: spectrum has zero norm")]
    Unnormalizable,
    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("truncation overflow: mode {mode} would exceed n_max = {n_max}")]
    TruncationOverflow { mode: usize, n_max: u32 },
    #[error("non-collinear: spectrum has support off the +z axis")]
    NonCollinear,
    #[error("mixed helicity: {0}")]
    MixedHelicity(String),
    #[error("wraparound: {0}")]
    Wraparound(String),
    #[error("zero interval: t1 must differ from t0")]
    ZeroInterval,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("retarded time {t_ret} outside source window [{start}, {end}]")]
    RetardedTimeOutsideWindow { t_ret: f64, start: f64, end: f64 },
    #[error("evaluation point {0:?} lies inside a source cell and no regularization radius is set")]
    Coincident([f64; 3]),
    #[error("insufficient stencil: {0}")]
    InsufficientStencil(String),
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
