use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller broke a precondition (dimension mismatch, bad parameter, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// An objective was evaluated below its domain floor `‖θ‖₂ ≥ r0`.
    #[error("point {theta:?} lies outside the domain ‖θ‖₂ ≥ {min_radius}")]
    Domain { theta: Vec<f64>, min_radius: f64 },

    /// Objective value or gradient left the representable range.
    #[error("numeric overflow at {theta:?}")]
    Overflow { theta: Vec<f64> },

    #[error("unknown catalog objective `{0}`")]
    UnknownObjective(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
