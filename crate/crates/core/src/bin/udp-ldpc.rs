use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use udp_ldpc::cli::{run, Command, RunConfig};
use udp_ldpc::Error;

#[derive(Parser)]
#[command(
    version,
    about = "Density-evolution thresholds and FER simulation for LDPC codes with protected parity bits"
)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV (default: stdout, or `out` from the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Threshold tables by density evolution.
    Threshold,
    /// Monte-Carlo FER and iteration counts.
    Simulate,
    /// Closed-form Gallager A thresholds.
    Exact,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                _ => 3,
            })
        }
    }
}

fn execute(args: &Args) -> Result<(), Error> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let cmd = match args.cmd {
        Cmd::Threshold => Command::Threshold,
        Cmd::Simulate => Command::Simulate,
        Cmd::Exact => Command::Exact,
    };
    let csv = run(cmd, &cfg)?.to_csv()?;
    match args.out.as_ref().or(cfg.out.as_ref()) {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
