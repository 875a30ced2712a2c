//! The `hcj` command line: function files, result tables with run
//! manifests, one subcommand per experiment, and the reproduction suite.

pub mod app;
pub mod commands;
pub mod error;
pub mod format;
pub mod output;
pub mod repro;

pub use app::run;
pub use error::{CliError, CliResult};
pub use output::{Cell, RunManifest, Table};
