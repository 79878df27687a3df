use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input too short: need at least {needed} elements, got {got}")]
    EmptyInput { needed: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("non-positive price {price} at record {index}")]
    NonPositivePrice { index: usize, price: f64 },

    #[error(
        "records out of order at index {index}: (day, minute) must strictly increase within a day"
    )]
    UnorderedRecords { index: usize },

    #[error("series carries no calendar tags")]
    MissingTags,

    #[error("every return at minute {minute} is zero; intraday profile would vanish")]
    ZeroProfileMinute { minute: u32 },

    #[error("minute {minute} has no entry in the intraday profile")]
    UnknownMinute { minute: u32 },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("negative magnitude {value} at index {index}")]
    NegativeMagnitude { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("window size {window} exceeds half the series length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("segment of length {len} cannot support a polynomial of order {order}")]
    SingularFit { len: usize, order: usize },

    #[error("need at least {needed} scales inside the fit range, got {got}")]
    InsufficientScales { needed: usize, got: usize },

    #[error("moment grids differ between scaling results")]
    GridMismatch,

    #[error("delta h of the original series is zero; weights undefined")]
    ZeroDeltaH,

    #[error("series too short for phase randomization: need at least 4, got {0}")]
    TooShort(usize),

    #[error("lag {lag} must be in 1..{len}")]
    LagTooLarge { lag: usize, len: usize },

    #[error("point coordinates have zero range on the {axis} axis")]
    DegenerateRange { axis: char },

    #[error("grid coordinate {value} does not fit in {bits} bits")]
    OutOfRange { value: u64, bits: u32 },

    #[error("Hurst exponent must lie in (0, 1), got {0}")]
    InvalidH(f64),

    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("log binning requires strictly positive data, found {0}")]
    NonPositiveForLog(f64),

    #[error("need at least {needed} non-empty bins, got {got}")]
    InsufficientBins { needed: usize, got: usize },

    #[error("fit did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("parse error in {path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
