//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Structural problem detected while building a network, connection, or
    /// config: dangling population ids, mismatched matrix dimensions,
    /// out-of-range parameters. Raised at build time, never mid-run.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value is outside its mathematical domain (empty population,
    /// reward outside [0,1], unknown column group).
    #[error("domain error: {0}")]
    Domain(String),

    /// An encoder ran out of room (more tokens than position slots).
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Bad user-supplied input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Non-finite state encountered while stepping the simulation.
    #[error("simulation fault at step {step}: {detail}")]
    Simulation { step: usize, detail: String },

    /// File contents could not be parsed. `line` is 1-based when known.
    #[error("parse error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line: Some(line),
            msg: msg.into(),
        }
    }

    pub fn parse_nl(msg: impl Into<String>) -> Self {
        Error::Parse {
            line: None,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
