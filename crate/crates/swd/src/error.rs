//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // recording / annotation ingestion
    #[error("malformed CSV at {path}: {detail}")]
    MalformedCsv { path: String, detail: String },
    #[error("inconsistent sample rate in {path}: max |dt - median dt| exceeds 1% of median")]
    InconsistentRate { path: String },
    #[error("empty file: {path}")]
    EmptyFile { path: String },
    #[error("annotation references unknown channel {label:?}")]
    UnknownChannel { label: String },
    #[error("annotation [{onset_s}, {onset_s}+{duration_s}] exceeds recording duration {recording_s} s")]
    OutOfRange {
        onset_s: f64,
        duration_s: f64,
        recording_s: f64,
    },
    #[error("bad class label {label:?} (expected \"swd\" or \"non-swd\")")]
    BadLabel { label: String },
    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    // segmentation
    #[error("signal too short: {n} samples, window needs {window}")]
    SignalTooShort { n: usize, window: usize },
    #[error("invalid window spec: window {window_s} s, overlap {overlap_s} s")]
    BadWindowSpec { window_s: f64, overlap_s: f64 },

    // wavelet
    #[error("bad frequency band [{f_min}, {f_max}] Hz at rate {rate} Hz")]
    BadBand { f_min: f64, f_max: f64, rate: f64 },
    #[error("scale grid was built for {grid_rate} Hz, segment sampled at {segment_rate} Hz")]
    GridRateMismatch { grid_rate: f64, segment_rate: f64 },

    // GGD fitting
    #[error("degenerate data: no positive-scale maximizer exists")]
    DegenerateData,
    #[error("GGD fit did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("degenerate wavelet coefficients (all entries equal)")]
    DegenerateCoefficients,
    #[error("too few samples for GGD fit: {0} < 8")]
    TooFewSamples(usize),

    // classifier
    #[error("model has no training points")]
    EmptyModel,
    #[error("feature dimension {dim} has zero spread, cannot standardize")]
    ZeroSpread { dim: usize },
    #[error("invalid k = {k} for {n} training points")]
    BadK { k: usize, n: usize },

    // harness
    #[error("too few training points: {n} < k = {k}")]
    TooFewPoints { n: usize, k: usize },
    #[error("training set contains a single class")]
    SingleClass,
    #[error("patient augmentation needs >= 10 SWD vectors, got {0}")]
    TooFewAugment(usize),
    #[error("empty test set")]
    EmptyTestSet,

    #[error("model file {path}: {detail}")]
    BadModelFile { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
