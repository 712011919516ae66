use thiserror::Error;

/// Errors raised anywhere in the fitting, prediction and simulation pipeline.
#[derive(Debug, Error)]
pub enum HazardError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no at-risk subjects in interval {interval}; shorten the grid so the last measurement time is well inside the follow-up")]
    EmptyInterval { interval: usize },

    #[error("prior risk vectors have length {got} but interval {interval} needs {interval}; networks must be built in interval order")]
    PriorRiskMismatch { interval: usize, got: usize },

    #[error("empty risk set at t = {0}")]
    EmptyRiskSet(f64),

    #[error("time {t} outside [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("working dataset is not sorted by time")]
    Unsorted,

    #[error("training diverged at epoch {epoch} (learning rate {lr}): non-finite loss or gradient")]
    Diverged { epoch: usize, lr: f64 },

    #[error("tape does not match network: {0}")]
    StaleTape(String),

    #[error("negative total hazard {value} at u = {u}; covariate draw is outside the model's support")]
    NegativeHazard { u: f64, value: f64 },

    #[error("censoring target {target} not attainable (achieved {achieved} at the bracket edge)")]
    CensoringUnattainable { target: f64, achieved: f64 },

    #[error("no comparable pairs")]
    NoComparablePairs,

    #[error("group {0} has no events")]
    GroupWithoutEvents(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl HazardError {
    /// Whether the error is a problem with user-supplied input or configuration
    /// rather than something that went wrong while computing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            HazardError::InvalidGrid(_)
                | HazardError::InvalidInput(_)
                | HazardError::DimensionMismatch { .. }
                | HazardError::TimeOutOfRange { .. }
                | HazardError::Json(_)
                | HazardError::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, HazardError>;
