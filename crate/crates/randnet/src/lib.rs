//! File formats, sensor-log ingestion and the command-line interface for
//! [`randnet_core`].

pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod json;
pub mod model_file;
pub mod report;
pub mod sensor_log;
pub mod synthetic;

pub use error::{CliError, Result};
