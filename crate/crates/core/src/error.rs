use thiserror::Error;

/// Errors raised by state construction, channel evaluation and run orchestration.
///
/// Every message starts with the variant name so that diagnostics printed by the
/// command-line front end can be matched on directly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("DimensionMismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("NotSquare: matrix is {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("NotHermitian: max |M - M^dagger| = {0:e}")]
    NotHermitian(f64),

    #[error("InvalidState: {0}")]
    InvalidState(String),

    #[error("DegenerateSpectrum: min gap {min_gap:e} <= tolerance {tolerance:e}")]
    DegenerateSpectrum { min_gap: f64, tolerance: f64 },

    #[error("NonPositiveDispersion: detector {index} has delta_x = {value}")]
    NonPositiveDispersion { index: usize, value: f64 },

    #[error("BlochVectorTooLong: |s| = {0}")]
    BlochVectorTooLong(f64),

    #[error("NonUnitAxis: |e| = {0}")]
    NonUnitAxis(f64),

    #[error("DegenerateSampleCloud: top scatter eigenvalues {0:e} and {1:e} coincide")]
    DegenerateSampleCloud(f64, f64),

    #[error("AmbiguousBranch: readout does not identify a stationary state")]
    AmbiguousBranch,

    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),

    #[error("ConfigInvalid: field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),

    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("Csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid { .. } => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
