//! File formats and the `regulus` command-line driver on top of
//! [`regulus_core`].

pub mod cli;
pub mod error;
pub mod files;

pub use error::{CliError, Result};
