pub mod config;

use std::process::ExitCode;

use cuberoute_core::harness::sweep;
use cuberoute_core::report::emit_results;

pub use config::{parse_config, Args, ConfigError, ExperimentConfig};

pub const EXIT_RUN_ERROR: u8 = 1;
pub const EXIT_CONFIG_ERROR: u8 = 2;
pub const EXIT_IO_ERROR: u8 = 3;

/// Runs the configured sweep and writes the table; returns the process exit code.
pub fn run(args: &Args) -> ExitCode {
    let env_seed = std::env::var(config::SEED_ENV).ok();
    let cfg = match parse_config(args, env_seed.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG_ERROR);
        }
    };
    let stats = match sweep(&cfg.cases(), cfg.execution) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUN_ERROR);
        }
    };
    if let Err(e) = emit_results(&stats, cfg.format, cfg.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_IO_ERROR);
    }
    ExitCode::SUCCESS
}
