use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid data matrix: {0}")]
    InvalidMatrix(String),

    #[error("feature {index} ({name}) has zero variance; drop it and retry")]
    ZeroVarianceFeature { index: usize, name: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cluster label {label} out of range for k = {k}")]
    LabelOutOfRange { label: usize, k: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error(
        "every feature has nonpositive between-cluster sum of squares; the clustering collapsed"
    )]
    NoPositiveBcss,

    #[error("degenerate groups: {0}")]
    DegenerateGroups(String),

    #[error("all features screened at layer {layer} (alpha = {alpha:e}); try a smaller alpha")]
    AllFeaturesScreened { layer: usize, alpha: f64 },

    #[error("outcome has a single class; both 0 and 1 labels are required")]
    SingleClassOutcome,

    #[error("survival outcome has no events")]
    NoEvents,

    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("rank deficient: requested {requested} components, only {available} nonzero singular values")]
    RankDeficient { requested: usize, available: usize },

    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),

    #[error("contingency table has a zero margin")]
    DegenerateMargins,

    #[error("zero cell in row {row}; odds ratio undefined")]
    ZeroCell { row: usize },

    #[error("monotone partial likelihood (separation); hazard ratio is not finite")]
    Separation,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),

    #[error("report serialization failed: {0}")]
    Report(String),
}
