use core::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Calibration pipeline stage, used to tag errors raised while calibrating.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Dataset,
    EstimateGain,
    EstimateColorBias,
    EstimateRowNoise,
    EstimateReadNoise,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Dataset => "dataset",
            Stage::EstimateGain => "estimate_gain",
            Stage::EstimateColorBias => "estimate_color_bias",
            Stage::EstimateRowNoise => "estimate_row_noise",
            Stage::EstimateReadNoise => "estimate_read_noise",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("sample size {n} outside supported range [{min}, {max}]")]
    SampleSize { n: usize, min: usize, max: usize },
    #[error("invalid frame: {0}")]
    InvalidFrame(&'static str),
    #[error("invalid noise parameters: {0}")]
    InvalidParams(&'static str),
    #[error("insufficient records: got {got}, need at least {need}")]
    InsufficientRecords { got: usize, need: usize },
    #[error("duplicate ISO {0} in records")]
    DuplicateIso(u32),
    #[error("unknown ISO {0}")]
    UnknownIso(u32),
    #[error("empty parameter pool")]
    EmptyPool,
    #[error("profile has no joint model (needs at least 3 ISO records)")]
    NotSampleable,
    #[error("inconsistent dataset: {0}")]
    Dataset(&'static str),
    #[error("flat field saturated: median {median} DN >= limit {limit} DN")]
    Saturated { median: f64, limit: f64 },
    #[error("found {found} distinct flat-field intensity levels, need at least 2")]
    InsufficientLevels { found: usize },
    #[error("photon transfer slope is negative ({0}); data is corrupt")]
    NegativeSlope(f64),
    #[error("clean pixel at ({x}, {y}) is below the black level")]
    BelowBlackLevel { x: usize, y: usize },
    #[error("too few rows for row-noise estimation: {rows} < 16")]
    TooFewRows { rows: usize },
    #[error("stage {stage} failed: {source}")]
    Calibration {
        stage: Stage,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: Stage) -> Error {
        Error::Calibration { stage, source: alloc::boxed::Box::new(self) }
    }

    /// The calibration stage that raised this error, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Calibration { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
