use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sdelta::cli::{run, Mode, RunConfig};
use sdelta::Error;

/// Exact coverage probability and scaled expected length of the confidence
/// interval centered on the bootstrap smoothed estimator, with Monte Carlo
/// verification.
#[derive(Parser)]
#[command(name = "sdelta", version, about)]
struct Args {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Override the config's mode (coverage|sel|both|verify|fit).
    #[arg(long)]
    mode: Option<String>,

    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Quadrature { .. } => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: could not set up {threads} threads: {e}");
            return ExitCode::from(2);
        }
    }

    let mut config = match RunConfig::from_file(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    if let Some(mode) = &args.mode {
        config.mode = match Mode::parse(mode) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        };
    }
    if let Some(out) = args.out {
        config.out_dir = out;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }

    match run(&config) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
