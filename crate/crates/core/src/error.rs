use thiserror::Error;

/// Errors surfaced by the sensing library.
///
/// The variants are deliberately coarse: callers (notably the CLI) dispatch
/// on *kind*, not message. `Domain`/`InvalidParameter` mean the caller passed
/// arguments outside a documented precondition; `Infeasible`, `Degenerate`
/// and `Overlap` are mathematical outcomes of a valid request; `SizeLimit`
/// means a request exceeded an exact-computation bound.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid bracket: {0}")]
    InvalidBracket(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("decision regions overlap: {0}")]
    Overlap(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("report is for {got} sensors, policy is for {expected}")]
    MismatchedSensorCount { expected: u32, got: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::InvalidBracket(_) => "invalid_bracket",
            Error::NoConvergence(_) => "no_convergence",
            Error::Infeasible(_) => "infeasible",
            Error::Degenerate(_) => "degenerate",
            Error::Overlap(_) => "overlap",
            Error::SizeLimit(_) => "size_limit",
            Error::MismatchedSensorCount { .. } => "mismatched_sensor_count",
        }
    }
}
