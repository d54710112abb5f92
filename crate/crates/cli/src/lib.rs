//! Experiment driver: configuration, artifact writers and subcommands.

pub mod artifacts;
pub mod args;
pub mod commands;
pub mod config;

use prandtl_core::Error as CoreError;

pub use args::{run, Cli};
pub use config::{ConfigError, Preset, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_GUARD: i32 = 4;

/// Exit status and machine-readable code for a failure.
pub fn classify(err: &anyhow::Error) -> (i32, &'static str) {
    if let Some(c) = err.downcast_ref::<ConfigError>() {
        return (EXIT_CONFIG, c.code);
    }
    if let Some(e) = err.downcast_ref::<CoreError>() {
        let status = match e {
            CoreError::InvalidParameter { .. } | CoreError::OutOfRange { .. } | CoreError::TooFewStations { .. } => EXIT_CONFIG,
            CoreError::GuardViolation { .. } => EXIT_GUARD,
            CoreError::Io(_) => EXIT_IO,
            _ => EXIT_NUMERIC,
        };
        return (status, e.code());
    }
    (EXIT_IO, "io")
}

/// JSON diagnostic written to stderr on failure.
pub fn diagnostic(err: &anyhow::Error) -> serde_json::Value {
    let (status, code) = classify(err);
    serde_json::json!({
        "error": {
            "code": code,
            "exit": status,
            "message": err.to_string(),
            "chain": err.chain().skip(1).map(|c| c.to_string()).collect::<Vec<_>>(),
        }
    })
}
