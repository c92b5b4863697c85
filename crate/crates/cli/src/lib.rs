//! Batch interface to the `mangeron` solver: TOML configs in, CSV and JSON
//! out. The binary is a thin layer over [`commands`].

pub mod commands;
pub mod config;
pub mod datafile;
pub mod error;
pub mod output;

pub use error::{CliError, Exit};
