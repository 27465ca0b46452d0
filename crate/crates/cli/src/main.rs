use std::process::ExitCode;

use clap::Parser;
use cuberoute_cli::{run, Args};

fn main() -> ExitCode {
    run(&Args::parse())
}
