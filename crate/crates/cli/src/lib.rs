//! Library side of the `wavedsm` binary: subcommands, exit codes and run
//! manifests.

pub mod commands;
pub mod manifest;

pub use commands::{Check, CliError};
