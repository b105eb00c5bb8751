//! The `dpk` command line: single-transform launches, sequential local
//! pipelines, synthetic corpus generation and the throughput benchmark.

use std::io;
use std::path::{Path, PathBuf};

use dpk_core::RuntimeError;

pub mod app;
pub mod args;
pub mod bench;
pub mod generate;
pub mod pipeline;

pub use app::run_cli;
pub use args::{job_from_flags, parse_flag_args, COMMON_FLAGS};

/// Exit status for success, a rejected request, and a failed job.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Spec(String),
    Io { path: PathBuf, source: io::Error },
    Runtime(RuntimeError),
    Step { index: usize, transform: String, source: RuntimeError },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Spec(_) => EXIT_INVALID,
            CliError::Runtime(e) if args::is_validation_error(e) => EXIT_INVALID,
            _ => EXIT_FAILED,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Spec(m) => write!(f, "pipeline spec: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Runtime(e) => write!(f, "{e}"),
            CliError::Step { index, transform, source } => write!(f, "step {index} ({transform}) failed: {source}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<RuntimeError> for CliError {
    fn from(e: RuntimeError) -> Self {
        CliError::Runtime(e)
    }
}
