use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Mean photon number must be finite and strictly positive.
    InvalidMeanPhotonNumber(f64),
    /// An operation that needs at least one measurement got none.
    EmptySequence,
    /// More photons were requested in a bin than pulses fit in it.
    BinCapacity {
        bin: usize,
        count: u32,
        capacity: usize,
    },
    Config(String),
    Diverged {
        epoch: usize,
        learning_rate: f64,
    },
    NonFinite(&'static str),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMeanPhotonNumber(v) => {
                write!(f, "mean photon number must be finite and > 0, got {v}")
            }
            Error::EmptySequence => f.write_str("photon count sequence is empty"),
            Error::BinCapacity {
                bin,
                count,
                capacity,
            } => write!(
                f,
                "bin {bin} holds {count} photons but only {capacity} pulses fit in one bin"
            ),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Diverged {
                epoch,
                learning_rate,
            } => write!(
                f,
                "training diverged at epoch {epoch} with learning rate {learning_rate}"
            ),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
        }
    }
}

impl core::error::Error for Error {}
