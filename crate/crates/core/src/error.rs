use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{key}`: {message}")]
    InvalidParameter { key: String, message: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Fractions are undefined for a population with no cells.
    #[error("empty population: fractions are undefined when the total count is zero")]
    EmptyPopulation,

    #[error(
        "numeric instability at integration step {step} (t = {time:.6} d): \
         component {component} = {value:e} left [-1e-9, 1+1e-9]"
    )]
    NumericInstability {
        step: usize,
        time: f64,
        component: usize,
        value: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("schema mismatch in column `{column}`: {message}")]
    Schema { column: String, message: String },

    #[error("the two trajectories share no (day, phase) records")]
    EmptyAlignment,

    #[error("golden fixture checksum mismatch: expected {expected}, found {found}")]
    Checksum { expected: String, found: String },

    #[error("{0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn param(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            Error::NumericInstability { .. } => 3,
            _ => 1,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        match err.into_kind() {
            csv::ErrorKind::Io(e) => Error::Io(e),
            other => Error::Schema {
                column: "<row>".into(),
                message: format!("{other:?}"),
            },
        }
    }
}
