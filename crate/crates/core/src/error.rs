use thiserror::Error;

/// Broad failure classes. The CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Infeasible,
    Budget,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("switch schedules have unequal lengths: {0:?}")]
    ScheduleMismatch(Vec<usize>),

    #[error("invalid matching: {0}")]
    InvalidMatching(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("temporal path violates hop {hop}: {reason}")]
    IllegalPath { hop: usize, reason: String },

    #[error("illegal flow: {0}")]
    IllegalFlow(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("throughput undefined: demand matrix has no positive entry")]
    UndefinedThroughput,

    #[error("degree must be at least 2 (got {0})")]
    DegenerateDegree(usize),

    #[error("graph is not {expected}-regular: {detail}")]
    NotRegular { expected: usize, detail: String },

    #[error("uplinks {nu} do not divide degree {degree}; nearest schedulable degrees are {below} and {above}")]
    Divisibility {
        degree: usize,
        nu: usize,
        below: usize,
        above: usize,
    },

    #[error("no Ramanujan graph found after {attempts} attempts (best second eigenvalue {best_lambda:.6}, threshold {threshold:.6})")]
    SpectralFailure {
        attempts: usize,
        best_lambda: f64,
        threshold: f64,
    },

    #[error("pair ({src}, {dst}) has positive demand but no route")]
    Coverage { src: usize, dst: usize },

    #[error("route fractions for pair ({src}, {dst}) sum to {sum}, expected 1")]
    RouteFractions { src: usize, dst: usize, sum: f64 },

    #[error("value {x} is outside the domain of the {branch} branch")]
    LambertDomain { branch: &'static str, x: f64 },

    #[error("delay bound infeasible: {0}")]
    InfeasibleDelay(String),

    #[error("buffer bound infeasible: {0}")]
    InfeasibleBuffer(String),

    #[error("instance too large for the oracle: {0}")]
    OracleTooLarge(String),

    #[error("no route from {src} to {dst}")]
    Unreachable { src: usize, dst: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("simulation invariant violated at slot {slot}: {detail}")]
    InvariantViolated { slot: u64, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InfeasibleDelay(_) | Error::InfeasibleBuffer(_) | Error::SpectralFailure { .. } => {
                ErrorKind::Infeasible
            }
            Error::OracleTooLarge(_) => ErrorKind::Budget,
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
