use std::fmt;

use crate::space::SequenceState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library. `Error::exit_code` maps them onto the CLI contract.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("coupling has zero total weight")]
    EmptyCoupling,

    #[error("state {state} has zero mass under the coupling source marginal")]
    ZeroMass { state: SequenceState },

    #[error("state {x_t} is incompatible with endpoints ({x0}, {x1}) at t={t}")]
    InconsistentBridge {
        x_t: SequenceState,
        x0: SequenceState,
        x1: SequenceState,
        t: f64,
    },

    #[error("state {state} is off the probability path at t={t} (posterior normalizer {normalizer:e})")]
    OffPath {
        state: SequenceState,
        t: f64,
        normalizer: f64,
    },

    #[error("{what}: size {size} exceeds cap {cap}; {hint}")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
        hint: &'static str,
    },

    #[error("KL divergence undefined: p({state}) > 0 but q({state}) = 0")]
    Divergence { state: SequenceState },

    #[error("state space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Infeasible,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ZeroMass { .. }
            | Error::InconsistentBridge { .. }
            | Error::OffPath { .. }
            | Error::CapExceeded { .. }
            | Error::Divergence { .. } => ErrorClass::Infeasible,
            _ => ErrorClass::Usage,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Usage => 2,
            ErrorClass::Infeasible => 3,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl fmt::Display) -> Self {
        Error::Parse {
            line,
            msg: msg.to_string(),
        }
    }
}
