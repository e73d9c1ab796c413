use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the calibration pipeline can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("device is not transmissive: |s21| = {magnitude:e} is below the floor")]
    NonTransmissive { magnitude: f64 },

    #[error("T-matrix cannot be converted to S-parameters: |t22| = {magnitude:e}")]
    SingularConversion { magnitude: f64 },

    #[error("singular matrix in {context}: |det| = {magnitude:e}")]
    SingularMatrix { context: &'static str, magnitude: f64 },

    #[error("Möbius transform evaluated at its pole: |cz+d| = {magnitude:e}")]
    PoleInput { magnitude: f64 },

    #[error("rank deficient system ({reason})")]
    RankDeficient { reason: String },

    #[error("F matrix is singular: |det| = {magnitude:e}")]
    SingularF { magnitude: f64 },

    #[error("H matrix is singular: |det| = {magnitude:e}")]
    SingularH { magnitude: f64 },

    #[error("degenerate eigenvalues: separation ratio {ratio:e}")]
    DegenerateEigen { ratio: f64 },

    #[error("nullspace vector cannot be normalized: |last| / |v| = {ratio:e}")]
    NormalizationFailure { ratio: f64 },

    #[error("eigenvector ordering is ambiguous: hypothesis costs {cost_first:.6e} vs {cost_second:.6e}")]
    AmbiguousChoice { cost_first: f64, cost_second: f64 },

    #[error("sign of k cannot be decided: estimate is equidistant and no neighboring anchor exists")]
    SignUndecidable,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("frequency grid error: {0}")]
    Grid(String),

    #[error("frequency grid mismatch in '{name}': {detail}")]
    GridMismatch { name: String, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{failed} of {total} Monte Carlo runs failed (limit {limit:.3}); first failure: {first}")]
    CalibrationFailureRate {
        failed: usize,
        total: usize,
        limit: f64,
        first: String,
    },

    #[error("at frequency index {index}: {source}")]
    AtFrequency {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, index: usize) -> Self {
        match self {
            e @ Error::AtFrequency { .. } => e,
            e => Error::AtFrequency {
                index,
                source: Box::new(e),
            },
        }
    }

    /// Strips any frequency tag.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtFrequency { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn frequency_index(&self) -> Option<usize> {
        match self {
            Error::AtFrequency { index, .. } => Some(*index),
            _ => None,
        }
    }

    /// True for failures of the numerical solve (as opposed to bad input data).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::NonTransmissive { .. }
                | Error::SingularConversion { .. }
                | Error::SingularMatrix { .. }
                | Error::PoleInput { .. }
                | Error::RankDeficient { .. }
                | Error::SingularF { .. }
                | Error::SingularH { .. }
                | Error::DegenerateEigen { .. }
                | Error::NormalizationFailure { .. }
                | Error::AmbiguousChoice { .. }
                | Error::SignUndecidable
                | Error::CalibrationFailureRate { .. }
        )
    }
}
