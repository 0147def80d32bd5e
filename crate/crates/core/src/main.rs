use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use protective::run::{run, Mode, RunConfig};

/// Run a protective-measurement experiment described by a JSON config.
#[derive(Parser, Debug)]
#[command(name = "protective", version)]
struct Args {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's mode.
    #[arg(long)]
    mode: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = RunConfig::load(&args.config).and_then(|mut cfg| {
        if let Some(seed) = args.seed {
            cfg.seed = Some(seed);
        }
        if let Some(out) = args.out {
            cfg.output_dir = out;
        }
        if let Some(mode) = args.mode {
            cfg.mode = mode.parse::<Mode>()?;
        }
        run(&cfg)
    });
    match result {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
