use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the range the hardware supports.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A requested configuration violates a hard resource limit.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    /// Tensor shapes or quantization parameters do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An accumulator left the 48-bit range the MAC datapath guarantees.
    #[error("accumulator overflow in lane {lane}: {value}")]
    AccumulatorOverflow { lane: usize, value: i64 },

    /// Malformed workload or tensor input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
