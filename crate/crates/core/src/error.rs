use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("the network graph is not connected")]
    DisconnectedGraph,
    #[error("the load-load block is reducible: loads do not form a connected subgraph")]
    ReducibleLoadBlock,
    #[error("edge {edge} has nonpositive or non-finite conductance {g}")]
    NonpositiveConductance { edge: usize, g: f64 },
    #[error("a grid needs at least one load and one source")]
    NoLoadsOrNoSources,
    #[error("invalid network description: {0}")]
    InvalidNetwork(String),
    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("block to eliminate is singular")]
    SingularBlock,
    #[error("matrix is not a Z-matrix")]
    NotZMatrix,
    #[error("matrix is reducible")]
    Reducible,
    #[error("the weight vector must be strictly positive")]
    NonpositiveNu,
    #[error("source voltages must be strictly positive")]
    NonpositiveSourceVoltage,
    #[error("grid core invariant violated: {0}")]
    CoreInvariantViolation(String),
    #[error("voltages must be strictly positive")]
    NonpositiveVoltage,
    #[error("lambda is not admissible: h(lambda) is not positive definite")]
    LambdaNotAdmissible,
    #[error("mu is not admissible: g(mu) is not a well-conditioned nonsingular M-matrix")]
    MuNotAdmissible,
    #[error("nu must be nonnegative, finite and nonzero")]
    InvalidNu,
    #[error("continuation step control failed at theta = {theta}: {reason}")]
    StepFailure { theta: f64, reason: String },
    #[error("the power-flow Jacobian is singular")]
    SingularJacobian,
    #[error("Newton iteration did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("demand has a negative entry")]
    NegativeDemand,
    #[error("{n} loads give too many subsets to enumerate (limit 16)")]
    TooManySubsets { n: usize },
    #[error("the all-solutions oracle supports at most 3 loads, got {n}")]
    OracleTooLarge { n: usize },
    #[error("Hoelder exponent p = {p} is outside [1, inf]")]
    InvalidP { p: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("radius must be finite and nonnegative, got {r}")]
    NegativeRadius { r: f64 },
    #[error("non-finite value in input")]
    NonFinite,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DisconnectedGraph => "DisconnectedGraph",
            Error::ReducibleLoadBlock => "ReducibleLoadBlock",
            Error::NonpositiveConductance { .. } => "NonpositiveConductance",
            Error::NoLoadsOrNoSources => "NoLoadsOrNoSources",
            Error::InvalidNetwork(_) => "InvalidNetwork",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::SingularBlock => "SingularBlock",
            Error::NotZMatrix => "NotZMatrix",
            Error::Reducible => "Reducible",
            Error::NonpositiveNu => "NonpositiveNu",
            Error::NonpositiveSourceVoltage => "NonpositiveSourceVoltage",
            Error::CoreInvariantViolation(_) => "CoreInvariantViolation",
            Error::NonpositiveVoltage => "NonpositiveVoltage",
            Error::LambdaNotAdmissible => "LambdaNotAdmissible",
            Error::MuNotAdmissible => "MuNotAdmissible",
            Error::InvalidNu => "InvalidNu",
            Error::StepFailure { .. } => "StepFailure",
            Error::SingularJacobian => "SingularJacobian",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NegativeDemand => "NegativeDemand",
            Error::TooManySubsets { .. } => "TooManySubsets",
            Error::OracleTooLarge { .. } => "OracleTooLarge",
            Error::InvalidP { .. } => "InvalidP",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NegativeRadius { .. } => "NegativeRadius",
            Error::NonFinite => "NonFinite",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
