use thiserror::Error;

/// Errors raised by the censoring toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid atom at time {time}: {reason}")]
    InvalidAtom { time: f64, reason: String },

    #[error("invalid window ({a}, {b}]: left end exceeds right end")]
    InvalidWindow { a: f64, b: f64 },

    #[error("reciprocal integrand vanishes at {time} where the integrator has mass {mass}")]
    NonzeroMassAtSingularity { time: f64, mass: f64 },

    #[error("hazard increment {mass} at time {time} exceeds one")]
    MassExceedsOne { time: f64, mass: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("quantity requires a given censoring time, but the world is observed-only")]
    ObservedOnly,

    #[error("time {time} lies outside the identifiable region [0, {tau}]")]
    OutsideJ { time: f64, tau: f64 },

    #[error("bad generator event: {0}")]
    BadEvent(String),

    #[error("the sample is empty")]
    EmptySample,

    #[error("invalid sample record {row}: {reason}")]
    InvalidRecord { row: usize, reason: String },

    #[error("bad grid resolution {0}: must be even and at least 4")]
    BadResolution(usize),

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("parse failure: {0}")]
    Parse(String),

    #[error("internal invariant breached: {0}")]
    Invariant(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
