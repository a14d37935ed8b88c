use thiserror::Error;

use crate::solve::IterationTrace;

/// Errors raised by the toolkit.
///
/// Mathematical failures that a check can express as a verdict (a violated
/// inequality, an uncovered point) are reported through
/// [`CheckReport`](crate::report::CheckReport) instead. The variants here are
/// the cases where an operation cannot produce its result at all.
#[derive(Debug, Error)]
pub enum Error {
    #[error("space has no points")]
    EmptySpace,

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("growth function evaluated outside (0, inf): t = {0}")]
    DomainError(f64),

    #[error("eta must be a finite real > 1, got {0}")]
    InvalidEta(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mapping is not surjective; uncovered points: {}", .uncovered.join(", "))]
    NotSurjective { uncovered: Vec<String> },

    #[error("the check requires a partial order but none was given")]
    MissingOrder,

    #[error("the check requires a second mapping V but none was given")]
    MissingMapping,

    #[error("V(M) is not contained in U(M): V({point}) = {image} has no U-preimage")]
    ContainmentViolated { point: String, image: String },

    #[error("start condition x0 <= U*x0 violated: x0 = {x0}, U*x0 = {image}")]
    StartConditionViolated { x0: String, image: String },

    #[error("step distances increased for 3 consecutive steps (ending at step {step})")]
    NonMonotoneTrace {
        step: usize,
        trace: Box<IterationTrace>,
    },

    #[error("coincidence point {point} found but U and V do not commute there")]
    CoincidenceNotFixed { point: String },

    #[error("trace has {len} points, the diagnostic window needs {window}")]
    TraceTooShort { len: usize, window: usize },

    #[error("unknown gallery item '{0}' (expected one of: example1, example2, wang_linear, theta_profile)")]
    UnknownGalleryItem(String),

    #[error("point '{0}' is not a point of this space")]
    UnknownPoint(String),

    #[error("spec parse error at {path} (line {line}, column {column}): {message}")]
    SpecParse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for this error: 1 when the inputs are well formed
    /// but a mathematical requirement fails, 2 for usage and input errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotSurjective { .. }
            | Error::ContainmentViolated { .. }
            | Error::StartConditionViolated { .. }
            | Error::NonMonotoneTrace { .. }
            | Error::CoincidenceNotFixed { .. } => 1,
            _ => 2,
        }
    }
}
