//! File formats, the sweep harness and the command line around
//! [`photon_discrim_core`].

pub mod cli;
pub mod error;
pub mod formats;
pub mod harness;

pub use error::{AppError, Result};
