use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown variable `{name}` at byte {position}")]
    UnknownVariable { name: String, position: usize },

    #[error("invalid exponent at byte {position}: {message}")]
    BadExponent { position: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid matrix document: {0}")]
    Schema(String),

    #[error("entry ({row}, {col}): {source}")]
    Entry {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("no zero found after {restarts} restarts")]
    NoZeroFound { restarts: usize },

    #[error("no common zero found: intersection of the zero sets looks empty")]
    IntersectionNotFound,

    #[error("inclusion hypothesis violated at {}", fmt_points(.witnesses))]
    InclusionViolated { witnesses: Vec<Vec<f64>> },

    #[error("failed to sample the constraint set K: {0}")]
    KSampling(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn fmt_points(points: &[Vec<f64>]) -> String {
    points
        .iter()
        .map(|p| {
            let coords: Vec<String> = p.iter().map(|v| format!("{v:.6}")).collect();
            format!("({})", coords.join(", "))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    /// True for errors that mean a hypothesis of the checked inequality does
    /// not hold (as opposed to malformed input).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_)
                | Error::NoZeroFound { .. }
                | Error::IntersectionNotFound
                | Error::InclusionViolated { .. }
                | Error::KSampling(_)
                | Error::DegenerateFit(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
