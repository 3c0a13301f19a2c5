use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("K index {index} is beyond the explicit list of length {len}")]
    KIndexOutOfRange { index: usize, len: usize },

    #[error("K index {index} exceeds the supported rule index {max}")]
    KIndexTooLarge { index: usize, max: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stage {stage} exceeds the enumeration cap {cap}")]
    CapExceeded { stage: u64, cap: u32 },

    #[error("depth {depth} is below the stage {stage} of delta; the bracket would be uninformative")]
    DepthBelowStage { depth: u32, stage: String },

    #[error("grid of {cells} cells exceeds the budget of {budget} cells")]
    GridBudget { cells: String, budget: String },

    #[error("comparison against stage {stage} boundary is indeterminate at {bits} bits; {hint}")]
    Indeterminate { stage: String, bits: u32, hint: String },

    #[error("{0} requires an F or G schedule")]
    NeedsPhasedSchedule(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_indeterminate(&self) -> bool {
        matches!(self, Error::Indeterminate { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
