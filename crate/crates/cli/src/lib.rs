//! Command-line front end: argument parsing, command dispatch and report output.

pub mod args;
pub mod commands;
pub mod output;

use std::io::Write;

use anyhow::{Context, Result};

pub use args::Cli;
pub use commands::{run, Output};

/// Writes the command's output to `--out` or stdout and returns the process exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    let out = run(cli)?;
    let text = out.body.unwrap_or_else(|| out.report.to_json());
    match &cli.common.out {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("--out {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(if out.report.all_passed() { 0 } else { 1 })
}
