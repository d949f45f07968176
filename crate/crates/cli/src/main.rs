//! `covert-planner`: plan, verify, trace and bench over grounded STRIPS
//! problems with an observation model.
//!
//! Exit codes: 0 success or pass, 1 input error, 2 no plan found,
//! 3 verification failed, 4 verification inconclusive.

mod args;
mod bench;
mod load;
mod plan;
mod trace;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NO_PLAN: u8 = 2;
pub const EXIT_FAIL: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    let result = match cli.command {
        Command::Plan(a) => plan::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Trace(a) => trace::run(a),
        Command::Bench(a) => bench::run(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(EXIT_INPUT)
    })
}
