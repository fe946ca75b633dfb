//! Rate CDF and mean-delay outage of both classes under NOMA and OMA.
use noma_cell::performance::{delay_ccdf, rate_cdf};
use noma_cell::ra::CellModel;
use noma_cell::{Allocation, SystemParams, TrafficParams, UserClass};

fn main() -> Result<(), noma_cell::ModelError> {
    let p = SystemParams::default();
    let t = TrafficParams::default();
    let model = CellModel::new(p)?;
    for alloc in [Allocation::Noma { theta: p.theta }, Allocation::Oma { eta: p.eta }] {
        for class in UserClass::BOTH {
            let fit = model.fit(class, alloc)?;
            let load = model.load(class);
            let r = t.rate_floor(class);
            let d = t.delay_thresh(class);
            println!(
                "{} {}: mean rate {:.4}, P[R <= {r}] = {:.3}, P[D >= {d}] = {:.3}",
                alloc.scheme().label(),
                class.label(),
                model.mean_rate(class, alloc)?,
                rate_cdf(class, alloc, r, model.meta(), load, &fit),
                delay_ccdf(class, alloc, d, t.arrival(class), load, &fit),
            );
        }
    }
    Ok(())
}
