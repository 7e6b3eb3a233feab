//! Command-line front end for `normlab-core`: JSON descriptors in, JSON or
//! CSV reports out.

pub mod cli;
mod commands;
pub mod error;
pub mod format;
pub mod output;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::{Cli, Format};
use crate::error::CliError;

pub use commands::EXP_FORMULA_AGREEMENT;

fn report(e: &CliError) -> i32 {
    eprintln!("{}", e.diagnostic());
    e.exit_code()
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            return report(&CliError::Usage(first.to_string()));
        }
    };
    let out = match commands::execute(&cli.group, &cli.global) {
        Ok(o) => o,
        Err(e) => return report(&e),
    };
    let written = out
        .render(cli.global.format == Format::Csv)
        .and_then(|b| output::write(&b, cli.global.out.as_deref()));
    if let Err(e) = written {
        return report(&e);
    }
    match out.failure {
        Some(msg) => report(&CliError::Check(msg)),
        None => 0,
    }
}
