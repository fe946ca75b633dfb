//! CC/CE region areas, their gamma fits and the number of users per region.
use noma_cell::ra::CellModel;
use noma_cell::{SystemParams, UserClass};

fn main() -> Result<(), noma_cell::ModelError> {
    let model = CellModel::new(SystemParams::default())?;
    for class in UserClass::BOTH {
        let a = model.area(class);
        let load = model.load(class);
        println!(
            "{}: E|A| = {:.3}, E|A|^2 = {:.4}, gamma(shape {:.3}, rate {:.3})",
            class.label(),
            a.mean,
            a.second_moment,
            model.gamma(class).gamma2,
            model.gamma(class).gamma1
        );
        let head: Vec<String> = (1..=6).map(|n| format!("{:.3}", load.prob(n))).collect();
        println!("  P[N = 1..6] = {}, E[1/N] = {:.4}", head.join(" "), load.xi);
    }
    Ok(())
}
