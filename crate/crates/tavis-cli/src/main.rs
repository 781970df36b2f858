use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tavis_cli::commands;
use tavis_cli::config::{self, Overrides};

/// Runs one configured analysis of the driven atom-cavity model and writes
/// CSV data files plus a checksum manifest.
#[derive(Parser)]
#[command(name = "tavis", version, about)]
struct Cli {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (overrides out_dir from the config).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for grid sweeps. The default of 1 keeps runs
    /// byte-for-byte reproducible; sweeps are order-stable either way.
    #[arg(long, default_value_t = 1)]
    threads: usize,

    /// Grid step override.
    #[arg(long)]
    dt: Option<f64>,

    /// Evolution horizon override.
    #[arg(long)]
    tmax: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides { out: cli.out, dt: cli.dt, t_max: cli.tmax };
    let outcome = config::load(&cli.config, &overrides)
        .and_then(|(bytes, run)| commands::run(&run, &bytes, cli.threads.max(1)));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            eprintln!();
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
