//! The simulation-versus-analysis checks at a reduced scale. Pass a
//! realization count to change it, e.g. `-- 100000` for the full suite.
use noma_cell::sim::SimConfig;
use noma_cell::validation::{run_all, Scale};

fn main() -> Result<(), noma_cell::ModelError> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let scale =
        Scale { sim: SimConfig { n_realizations: n, area_samples: 2_000, ..Default::default() }, ..Default::default() };
    for r in run_all(&scale)? {
        println!("{r}");
    }
    Ok(())
}
