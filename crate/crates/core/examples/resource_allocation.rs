//! Sum-rate and effective-capacity allocation, checked against a grid search.
use noma_cell::ra::{brute_force_ra, solve_p1, solve_p2, CellModel, Problem};
use noma_cell::{Scheme, SystemParams, TrafficParams};

fn main() -> Result<(), noma_cell::ModelError> {
    let t = TrafficParams::default();
    let base = CellModel::new(SystemParams::default().with_betas_db(0.0, -3.0))?;
    for nu in [1.0, 2.0, 3.0, 5.0] {
        let model = base.with_nu(nu)?;
        for scheme in [Scheme::Noma, Scheme::Oma] {
            for problem in [Problem::P1, Problem::P2] {
                let rule = match problem {
                    Problem::P1 => solve_p1(scheme, &model, &t)?,
                    Problem::P2 => solve_p2(scheme, &model, &t)?,
                };
                let grid = brute_force_ra(problem, scheme, &model, &t, 2000)?;
                match rule.reason {
                    Some(why) if !rule.feasible => {
                        println!("nu {nu} {} {problem:?}: infeasible ({why})", scheme.label())
                    }
                    _ => println!(
                        "nu {nu} {} {problem:?}: x* = {:.4}, objective {:.4} (grid {:.4})",
                        scheme.label(),
                        rule.allocation,
                        rule.objective,
                        grid.objective
                    ),
                }
            }
        }
    }
    Ok(())
}
