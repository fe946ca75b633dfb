//! One network realization, then simulated meta moments next to the analysis.
use noma_cell::meta::MetaModel;
use noma_cell::sim::{estimate_meta, realize_typical_cell, rng_for, SimConfig};
use noma_cell::{Allocation, SystemParams};

fn main() -> Result<(), noma_cell::ModelError> {
    let p = SystemParams::default();
    let cfg = SimConfig { n_realizations: 20_000, ..Default::default() };

    let real = realize_typical_cell(&p, &cfg, &mut rng_for(cfg.seed, 0))?;
    println!(
        "realization 0: {} stations in the window, cell area {:.3} with {} vertices",
        real.bs_points.len(),
        real.cell.area(),
        real.cell.vertices.len()
    );

    let allocs = [Allocation::Noma { theta: 0.3 }, Allocation::Oma { eta: 0.5 }];
    let meta = MetaModel::new(p);
    for e in estimate_meta(&p, &allocs, &cfg)? {
        let a = meta.moments(e.user_class, e.allocation)?;
        println!(
            "{} {}: m1 {:.4} (sim {:.4} ± {:.4}), m2 {:.4} (sim {:.4})",
            e.allocation.scheme().label(),
            e.user_class.label(),
            a.m1,
            e.m1,
            e.se_m1,
            a.m2,
            e.m2
        );
    }
    Ok(())
}
