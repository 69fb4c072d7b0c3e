//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by metric construction, clustering, solving and learning.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input was empty where at least one element is required.
    #[error("empty input: {0}")]
    Empty(&'static str),

    /// Two vectors or matrices had incompatible shapes.
    #[error("dimension mismatch: {context} (expected {expected}, found {found})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// A value was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A distance matrix was not symmetric within tolerance.
    #[error("asymmetric distance matrix at ({i}, {j}): {dij} vs {dji}")]
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },

    /// A distance matrix had a negative entry or a nonzero diagonal.
    #[error("invalid distance at ({i}, {j}): {value}")]
    InvalidDistance { i: usize, j: usize, value: f64 },

    /// A distance matrix violated the triangle inequality.
    #[error("triangle inequality violated: d({i},{k}) = {direct} > d({i},{j}) + d({j},{k}) = {detour}")]
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },

    /// An index referred to a point outside the ground set.
    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// A scalar parameter was outside its admissible range.
    #[error("parameter {name} = {value} out of range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// Blocks did not form a partition of the ground set.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// Partitions or datasets disagreed on the number of points.
    #[error("ground size mismatch: {left} vs {right}")]
    GroundSizeMismatch { left: usize, right: usize },

    /// A map was required to be a bijection.
    #[error("map is not a bijection")]
    NotBijective,

    /// A binary integer program had no feasible assignment.
    #[error("binary integer program is infeasible")]
    Infeasible,

    /// Brute-force enumeration was asked to handle too many variables.
    #[error("too many variables for enumeration: {m} > {max}")]
    TooManyVariables { m: usize, max: usize },

    /// A BIP morphism could not be built from the given collections.
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),

    /// A candidate family was not laminar (two sets properly overlap).
    #[error("sets {0} and {1} properly overlap; family is not laminar")]
    NotLaminar(usize, usize),

    /// A measure was malformed (no positive weight, not normalized, out of space).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// Every particle weight vanished after a Bayesian update.
    #[error("posterior collapse at step {step}: all reweighted particle weights are zero")]
    PosteriorCollapse { step: usize },

    /// Unknown functor or option name.
    #[error("unknown {kind}: {name}")]
    Unknown { kind: &'static str, name: String },

    /// Failure reading or writing files.
    #[error("io error: {0}")]
    Io(String),

    /// Failure parsing CSV or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short stable identifier used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Empty(_) => "empty",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::Asymmetric { .. } => "asymmetric",
            Error::InvalidDistance { .. } => "invalid_distance",
            Error::TriangleViolation { .. } => "triangle_violation",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::OutOfRange { .. } => "out_of_range",
            Error::InvalidPartition(_) => "invalid_partition",
            Error::GroundSizeMismatch { .. } => "ground_size_mismatch",
            Error::NotBijective => "not_bijective",
            Error::Infeasible => "infeasible",
            Error::TooManyVariables { .. } => "too_many_variables",
            Error::InvalidMorphism(_) => "invalid_morphism",
            Error::NotLaminar(..) => "not_laminar",
            Error::InvalidMeasure(_) => "invalid_measure",
            Error::PosteriorCollapse { .. } => "posterior_collapse",
            Error::Unknown { .. } => "unknown",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
