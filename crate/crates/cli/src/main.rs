use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use nehari_cli::Command;

/// Nehari-manifold solver for concave-convex elliptic systems.
///
/// Exit codes: 0 success, 1 numerical failure, 2 configuration or i/o error.
#[derive(Debug, Parser)]
#[command(name = "nehari", version)]
struct Args {
    command: Command,
    /// Run configuration (`key = value` lines under `[section]` headers).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();
    let code = nehari_cli::run(args.command, &args.config, args.out.as_deref());
    // kept out of the report files, which must be reproducible byte for byte
    eprintln!("wall_time = {:.3} s", start.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
