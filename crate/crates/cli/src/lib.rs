//! Command-line front end of idflow: experiment configuration, field sampling
//! on Bloch-ball planes, flow series, witness reports, and CSV/JSON/SVG output.

#![forbid(unsafe_code)]

pub mod commands;
pub mod config;
pub mod emit;
mod error;
pub mod field;
pub mod model;
pub mod series;
pub mod svg;

pub use commands::{run, Command};
pub use config::{parse_config, ExperimentConfig, FieldKind, Format};
pub use error::{CliError, Result};
pub use field::{sample_field, FieldFrame, Mask};
