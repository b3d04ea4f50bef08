use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("an instance needs at least two arms, got {len}")]
    TooFewArms { len: usize },

    #[error("mean of arm {arm} is {value}, outside [0, 1]")]
    OutOfRange { arm: usize, value: f64 },

    #[error("the highest mean is shared by arms {first} and {second}")]
    NonUniqueBest { first: usize, second: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("elimination rate u = {u} must lie in (1, {arms}]")]
    InvalidU { u: f64, arms: usize },

    #[error("horizon {horizon} is too short: {reason}")]
    HorizonTooShort { horizon: usize, reason: String },

    #[error("step {t}: corruption cost {cost} would raise spend to {would_spend}, above budget {budget}")]
    BudgetExceeded {
        t: usize,
        cost: f64,
        would_spend: f64,
        budget: f64,
    },

    #[error("step {t}, arm {arm}: {what} = {value} is out of range")]
    RangeViolation {
        t: usize,
        arm: usize,
        what: &'static str,
        value: f64,
    },

    #[error("attack precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("agent returned arm {arm} for an instance with {arms} arms")]
    InvalidArm { arm: usize, arms: usize },

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{context}: {source}")]
    Experiment {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
