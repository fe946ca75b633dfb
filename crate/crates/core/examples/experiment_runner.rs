//! Runs an experiment from code instead of the binary and reads back the CSV.
use noma_cell::experiments::{run, Experiment, ExperimentConfig, RunError};

fn main() -> Result<(), RunError> {
    let cfg = ExperimentConfig { output_dir: std::env::temp_dir().join("noma-cell-ra-p1"), ..Default::default() };
    let manifest = run(Experiment::RaP1, &cfg)?;
    println!("{} took {:.2} s", manifest.experiment, manifest.wall_time_s);
    for out in &manifest.outputs {
        let path = cfg.output_dir.join(&out.file);
        println!("--- {}", path.display());
        print!("{}", std::fs::read_to_string(&path).map_err(|source| RunError::Io { path, source })?);
    }
    Ok(())
}
