//! Experiment harness for the weighted SAV solvers: an FFT backend,
//! presets, studies, file formats and the `wsav` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod fft;
pub mod record;
pub mod snapshot;
pub mod study;

pub use cli::cli_main;
pub use config::{ExperimentConfig, Preset};
pub use error::{HarnessError, Result};
