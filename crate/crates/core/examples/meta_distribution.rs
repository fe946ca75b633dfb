//! Meta-distribution moments and beta fits across the NOMA power split.
use noma_cell::meta::MetaModel;
use noma_cell::ra::{theta_hat, theta_nc};
use noma_cell::{Allocation, SystemParams, UserClass};

fn main() -> Result<(), noma_cell::ModelError> {
    let p = SystemParams::default().with_betas_db(0.0, -3.0);
    let meta = MetaModel::new(p);
    println!("theta_hat = {:.4}, theta_NC = {:.4}", theta_hat(p.beta_c, p.beta_e), theta_nc(p.beta_e));
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "theta", "cc m1", "cc m2", "ce m1", "ce m2");
    for i in 1..=6 {
        let alloc = Allocation::Noma { theta: 0.1 * i as f64 };
        let c = meta.moments(UserClass::Center, alloc)?;
        let e = meta.moments(UserClass::Edge, alloc)?;
        println!("{:>6.2} {:>8.4} {:>8.4} {:>8.4} {:>8.4}", 0.1 * i as f64, c.m1, c.m2, e.m1, e.m2);
    }
    let fit = meta.fit(UserClass::Edge, Allocation::Oma { eta: 0.5 })?;
    println!("OMA CE: P[p_s > 0.5] = {:.4}", fit.ccdf(0.5));
    Ok(())
}
