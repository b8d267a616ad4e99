//! Configuration, command dispatch, the acceptance battery and report
//! emission behind the `dyadica` binary.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for
//! configuration and input errors.

pub mod acceptance;
pub mod config;
pub mod emit;
mod run;

pub use config::{ExperimentConfig, Factor, Setup};
pub use emit::{emit, format_float, CheckResult, Format, RunReport};
pub use run::{run, Command};

/// The documented configuration schema, with every default spelled out.
pub const SCHEMA: &str = include_str!("../../schema.toml");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_schema_matches_defaults() {
        let cfg = ExperimentConfig::from_toml_str(SCHEMA).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }
}
