//! Command-line front end: VDMX matrix files, parameter files, run
//! manifests, and the select, simulation and benchmark subcommands.
//!
//! Exit codes: 0 success, 2 usage (including a refused memory budget),
//! 3 file format or I/O, 4 numerical failure.

pub mod app;
pub mod bench;
pub mod error;
pub mod manifest;
pub mod matrix;
pub mod model;
pub mod params;
pub mod select;
pub mod sim;

pub use app::{run, Cli};
pub use error::CliError;
