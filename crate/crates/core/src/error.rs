use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("non-finite value in row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("Gram matrix is not positive definite (smallest pivot {pivot:e} at index {index}, jitter {jitter:e})")]
    NotPositiveDefinite { index: usize, pivot: f64, jitter: f64 },

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("statically unstable or degenerate condition (radicand {radicand:e})")]
    Degenerate { radicand: f64 },

    #[error("overdamped: real eigenvalues (trace {trace:e}, determinant {det:e})")]
    Overdamped { trace: f64, det: f64 },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("unparseable cell at row {row}, column `{col}`: {value:?}")]
    Parse { row: usize, col: String, value: String },

    #[error("too few usable rows: {found} (need at least {min})")]
    TooFewRows { found: usize, min: usize },

    #[error("time is not monotone at row {row} (t = {t})")]
    NonMonotoneTime { row: usize, t: f64 },

    #[error("non-positive dynamic pressure {qbar} at t = {t}")]
    NonPositiveQbar { t: f64, qbar: f64 },

    #[error("Mach {mach} lies outside all trim bins {edges:?}")]
    MachOutsideBins { mach: f64, edges: Vec<(f64, f64)> },

    #[error("trim bin [{lo}, {hi}) has no fit ({shots} shots, need 3)")]
    UnfittedBin { lo: f64, hi: f64, shots: usize },

    #[error("model file inconsistent: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics on valid input, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::RankDeficient(_)
                | Error::Degenerate { .. }
                | Error::Overdamped { .. }
                | Error::Corrupt(_)
        )
    }
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
