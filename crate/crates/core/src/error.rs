use thiserror::Error;

use crate::lattice::CubeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("weight at index {index} is negative ({value})")]
    NegativeWeight { index: usize, value: f64 },
    #[error("measure has zero total mass")]
    ZeroMass,
    #[error("expected {expected} weights for dimension {dim} and depth {depth}, got {got}")]
    WeightCount {
        dim: usize,
        depth: u32,
        expected: usize,
        got: usize,
    },
    #[error("dimension {0} unsupported (only 1 and 2)")]
    Dimension(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
    #[error("radius {0} outside (0, 1/2]")]
    Radius(f64),
    #[error("cube level {level} outside 0..={depth}")]
    Level { level: i64, depth: u32 },
    #[error("no child ordering of {cube} satisfies the tail-mass inequality")]
    InsufficientAccretivity { cube: CubeId },
    #[error("degenerate Haar function on {cube}, index {index}: {what} vanishes")]
    DegenerateHaar {
        cube: CubeId,
        index: usize,
        what: &'static str,
    },
    #[error("cube {cube} is bad (witness {witness})")]
    BadCube { cube: CubeId, witness: CubeId },
    #[error("pi_good vanishes at level {level}")]
    ZeroPiGood { level: u32 },
    #[error("exact enumeration over {bits} shift bits exceeds the cost guard of {limit}")]
    CostGuard { bits: u32, limit: u32 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// Schema violation in an experiment configuration, with the field path.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
