use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("code length {0} is odd")]
    OddLength(usize),
    #[error("code length {code_length} is not divisible by 2*M = {divisor}")]
    IndivisibleCode { code_length: usize, divisor: usize },
    #[error("exhaustive search over 2^{0} candidates is too large (max length 20)")]
    SearchTooLarge(usize),
    #[error("invalid code: {0}")]
    BadCode(String),

    #[error("duration must be positive and finite, got {0}")]
    BadDuration(f64),
    #[error("band limit {f_max} Hz must exceed the bin spacing {delta_f} Hz")]
    BadBand { f_max: f64, delta_f: f64 },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid PSD mask: {0}")]
    BadMask(String),

    #[error("range must be positive")]
    ZeroRange,
    #[error("invalid scenario: {0}")]
    BadScenario(String),

    #[error("phase-noise process covers {available} s but the frame needs {needed} s")]
    PnDurationTooShort { available: f64, needed: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cannot invert a windowed range-Doppler map")]
    WindowedMap,
    #[error("exclusion leaves {kept} of {total} cells (need at least 25%)")]
    OverExcluded { kept: usize, total: usize },
    #[error("range bin {bin} out of range (rows = {rows})")]
    BadBin { bin: usize, rows: usize },
    #[error("range section is empty")]
    EmptySection,
    #[error("no LOS return above the detection gate in bins {start}..{end}")]
    LosNotFound { start: usize, end: usize },

    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
