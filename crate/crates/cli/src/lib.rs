//! Experiment harness for the Nehari-manifold solvers: configuration
//! parsing, command dispatch and report files.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::path::{Path, PathBuf};

pub use commands::{run_command, Command, Outcome};
pub use config::{load_config, parse_config, RunConfig};
pub use error::CliError;
pub use report::{write_report, Artifact, RunSummary};

/// Runs one invocation end to end and returns the process exit code.
///
/// The summary is printed to stdout and written with the artifacts into
/// `out`, else the configured directory, else the directory holding the
/// configuration file. A summary is produced even when the configuration
/// fails to load.
pub fn run(command: Command, config_path: &Path, out: Option<&Path>) -> i32 {
    let (outcome, directory) = match load_config(config_path) {
        Ok(config) => {
            let directory = out
                .map(Path::to_path_buf)
                .or_else(|| config.output.directory.clone())
                .unwrap_or_else(|| config_dir(config_path));
            (run_command(command, &config, Some(&directory)), Some(directory))
        }
        Err(e) => {
            let mut summary = RunSummary::new(command);
            summary.exit_code = e.exit_code();
            summary.error = Some(e.to_string());
            (
                Outcome {
                    summary,
                    artifacts: Vec::new(),
                },
                out.map(Path::to_path_buf),
            )
        }
    };
    let mut code = outcome.summary.exit_code;
    if let Some(dir) = &directory {
        if let Err(e) = write_report(&outcome.summary, &outcome.artifacts, dir) {
            eprintln!("nehari: cannot write report to {}: {e}", dir.display());
            code = 2;
        }
    }
    print!("{}", outcome.summary.to_text());
    if let Some(e) = &outcome.summary.error {
        eprintln!("nehari: {e}");
    }
    code
}

fn config_dir(config_path: &Path) -> PathBuf {
    match config_path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}
