//! `percap` command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 convergence, 3 Monte Carlo cap or range.

pub mod args;
pub mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::{self, Write};

use clap::Parser;

use args::Cli;
use commands::{execute, Failure};

/// Environment variable bounding the worker-thread count (0 = automatic).
pub const THREADS_ENV: &str = "PERCAP_THREADS";

/// Runs the CLI on `argv` (program name first), printing to stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.exit_code()
        }
    }
}

fn thread_count() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::Usage(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Failure::Io(format!("cannot start worker pool: {e}")))?;
    let report = pool.install(|| execute(cli.command))?;
    let text = report.render();
    match &report.output.out {
        Some(path) => std::fs::write(path, &text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?,
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(format!("cannot write output: {e}")))?,
    }
    Ok(report.code)
}
