use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("profiles live on different grids (K={0}, N={1} vs K={2}, N={3})")]
    GridMismatch(f64, usize, f64, usize),

    #[error("operator mode {mode} not admissible on this grid: {reason}")]
    ModeConstraint { mode: &'static str, reason: String },

    #[error("norm exponent r={0} must satisfy r >= 1")]
    InvalidExponent(f64),

    #[error("invalid ray coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("bisection bracket [{lo}, {hi}] does not straddle a sign change of f_c")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("degenerate profile: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("lattice integration blew up at t={t} (max |x|={max_abs:e})")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("profile parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
