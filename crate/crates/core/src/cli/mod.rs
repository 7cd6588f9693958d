//! The `graphtest` command line: `test`, `power`, `bench` and `subsample`.
//!
//! Exit status is 0 on success, 1 when the data or a computation fails and 2
//! on a usage error. `GRAPHTEST_THREADS` sets the worker count (0 or unset
//! means one per core).

mod args;
mod commands;
pub mod dataset;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{BenchArgs, Cli, Command, PowerArgs, SubsampleArgs, TestArgs};

pub const THREADS_ENV: &str = "GRAPHTEST_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(crate::Error),
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(_) => usage(format!("{THREADS_ENV} is not valid unicode")),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .or_else(|_| usage(format!("{THREADS_ENV}={v} is not a non-negative integer"))),
    }
}

/// Runs the command line with explicit arguments and output streams.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut buffer: Vec<u8> = Vec::new();
    let result = thread_count().and_then(|threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
        pool.install(|| commands::dispatch(cli.command, &mut buffer))
    });
    let _ = out.write_all(&buffer).and_then(|_| out.flush());
    match result {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(CliError::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}
