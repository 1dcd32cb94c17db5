//! The `citescope` command line.
//!
//! Exit status: 0 on success, 2 for usage errors, 1 for runtime failures.
//! Every output directory receives a `manifest.json` with the resolved
//! configuration; metric files contain no timestamps, so identical
//! manifests reproduce identical metrics byte for byte.

mod args;
mod commands;

use std::ffi::OsString;

use clap::Parser;

pub use args::{
    BuildDatasetArgs, Cli, Command, CompareArgs, DataArgs, EvalArgs, GradcheckArgs, ModelArg, PredictArgs, RunArgs,
    TaskArg, TrainArgs,
};

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn parse_and_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
