use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ring needs at least 3 atoms, got {0}")]
    TooFewAtoms(usize),

    #[error("spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),

    #[error("full-space enumeration capped at N <= {cap}, got N = {n}")]
    AtomCapExceeded { n: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state has wrong basis tag: expected {expected}")]
    WrongBasis { expected: &'static str },

    #[error("state not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),

    #[error("segment duration must be positive, got {0}")]
    NonPositiveDuration(f64),

    #[error("need at least 4 retained levels for gap ratios, got {0}")]
    TooFewLevels(usize),

    #[error("unsupported surmise beta = {0} (expected 1 or 2)")]
    UnsupportedBeta(u8),

    #[error("negative argument {0} outside distribution support")]
    NegativeArgument(f64),

    #[error("interaction energy V must be positive, got {0}")]
    NonPositiveInteraction(f64),

    #[error("histograms have mismatched bin edges; rebin first")]
    BinMismatch,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("bipartition is not exchange-symmetric")]
    NotExchangeSymmetric,

    #[error("bipartition must be a non-empty proper subset of sites")]
    InvalidBipartition,

    #[error("all optimizer restarts failed")]
    AllRestartsFailed,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
