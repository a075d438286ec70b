//! Command-line front end for the nonwoven analysis pipelines.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors (missing
//! or malformed inputs, pipeline failures). Outputs are written only after
//! a pipeline finishes, and identical configs with identical seeds produce
//! byte-identical files.

mod commands;
mod output;

use clap::error::ErrorKind;
use clap::Parser;

use commands::Cli;

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Data(String),
}

impl From<nonwoven_core::Error> for CliError {
    fn from(e: nonwoven_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Expands `--config FILE` into the argument list: each non-empty,
/// non-`#` line of the file becomes one argument, spliced in place.
fn expand_config_args() -> Result<Vec<std::ffi::OsString>, String> {
    let raw: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let mut out = Vec::with_capacity(raw.len());
    let mut it = raw.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            let path = it
                .next()
                .ok_or_else(|| "--config needs a file path".to_string())?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
            for line in text.lines() {
                let line = line.trim();
                if !line.is_empty() && !line.starts_with('#') {
                    out.push(line.into());
                }
            }
        } else {
            out.push(arg);
        }
    }
    Ok(out)
}

fn main() {
    let args = match expand_config_args() {
        Ok(args) => args,
        Err(msg) => {
            eprintln!("usage error: {msg}");
            std::process::exit(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are successful terminations
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    match commands::run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
