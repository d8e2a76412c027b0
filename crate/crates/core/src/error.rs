use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("terminal {symbol} is not part of the {problem} primitive set")]
    ForeignSymbol {
        problem: &'static str,
        symbol: String,
    },

    #[error("enumeration of {required} sequences exceeds the guard of {guard}")]
    EnumerationTooLarge { required: f64, guard: u64 },

    #[error("no root of {0} inside the search bracket")]
    NoRoot(&'static str),

    #[error("population cap {cap} reached without success (trace: {trace:?})")]
    CapReached {
        cap: usize,
        trace: Vec<(usize, bool)>,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for GpError {
    fn from(e: std::io::Error) -> Self {
        GpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GpError>;
