//! Command-line driver: configuration, task pipeline, and plot data.

pub mod config;
mod error;
pub mod plot;
pub mod run;

pub use config::{Overrides, RawConfig, RunConfig, Task};
pub use error::CliError;
pub use plot::emit_plotdata;
pub use run::{run, Manifest};
