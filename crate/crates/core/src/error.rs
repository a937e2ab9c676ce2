use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("union members overlap or are not declared disjoint; its measure is ambiguous")]
    AmbiguousUnion,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("quadrature did not converge; refinement trace (order, value): {trace:?}")]
    QuadratureNonConvergence { trace: Vec<(usize, f64)> },

    #[error("eigenvalue iteration did not converge for a {n}x{n} matrix")]
    EigenNonConvergence { n: usize },

    #[error("rejection budget exhausted after {attempts} proposals ({accepted} accepted, rate {rate:.3e})")]
    RejectionBudget { attempts: u64, accepted: usize, rate: f64 },

    #[error("no accepted Palm sample within {attempts} attempts (acceptance rate estimate {rate:.3e})")]
    PalmAcceptance { attempts: u64, rate: f64 },

    #[error("anchor too far out: K_n(x,x) = {0:e} is below the underflow threshold")]
    AnchorUnderflow(f64),

    #[error("no crossing g(r) = kappa below r = {r_max} (g = {g_at_max:e})")]
    BracketFailure { r_max: f64, g_at_max: f64 },

    #[error("g is not monotone near r = {r}: {detail}")]
    NonMonotone { r: f64, detail: String },

    #[error("truncated product cannot reach tolerance {tol:e} with at most {max_factors} factors")]
    TruncationUnreachable { tol: f64, max_factors: usize },

    #[error("configuration has fewer than two points; nearest neighbours are undefined")]
    TooFewPoints,

    #[error("sample window too small: {0}")]
    WindowTooSmall(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mismatched sample sizes: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("{failed} of {total} trials failed")]
    TooManyFailures { failed: usize, total: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
