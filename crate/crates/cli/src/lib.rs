//! Command-line front end for `expander-core`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod export;

use std::ffi::OsString;
use std::io::Write;

use clap::{CommandFactory, FromArgMatches};

use crate::args::{Cli, Command};
pub use crate::error::{CliError, Status};

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    match &cli.command {
        Command::Cone(a) => commands::cone(a, out),
        Command::Profile(a) => commands::profile(a, out),
        Command::Shoot(a) => commands::shoot(a, out),
        Command::CriticalAngle(a) => commands::critical(a, out),
        Command::Verify(a) => commands::verify(a, out),
        Command::Asymptotics(a) => commands::asymptotics(a, out),
    }
}

fn parse(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    let cmd = Cli::command().mut_subcommands(|s| s.args_override_self(true));
    let matches = cmd.try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

/// Runs one invocation, writing the summary to `out` and diagnostics to
/// `err`.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> Status {
    let cli = match config::splice_config(args).map(parse) {
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return e.status();
        }
        Ok(Err(e)) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return Status::ConfigError;
            }
            let _ = write!(out, "{}", e.render());
            return Status::Pass;
        }
        Ok(Ok(cli)) => cli,
    };
    match dispatch(&cli, out) {
        Ok(true) => Status::Pass,
        Ok(false) => Status::GateFailure,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.status()
        }
    }
}
