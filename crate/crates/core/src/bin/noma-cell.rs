use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use noma_cell::experiments::{load_config, run, Experiment, RunError};

/// Run an experiment and write its CSVs and manifest.json.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// moments-sweep, meta-ccdf, area-dist, load-pmf, rate-outage,
    /// delay-outage, rate-region, ra-p1, ra-p2 or validate
    experiment: String,
    /// JSON config; `{}` runs the defaults.
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, e.g. `params.tau=0.6` or `sim.n_realizations=1000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let exp: Experiment = cli.experiment.parse()?;
    let mut cfg = load_config(&cli.config, &cli.sets)?;
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    let manifest = run(exp, &cfg)?;
    for o in &manifest.outputs {
        println!("{}", cfg.output_dir.join(&o.file).display());
    }
    println!("{}", cfg.output_dir.join("manifest.json").display());
    Ok(())
}
