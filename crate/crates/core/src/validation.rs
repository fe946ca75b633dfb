//! Simulation-versus-analysis checks, one per acceptance criterion.
//!
//! Every check returns a [`CheckResult`] carrying the worst-case metric, its
//! tolerance and a short diagnostic. Checks never panic on a miss; callers
//! decide what a failure means.

use std::fmt;

use serde::Serialize;

use crate::load::mean_areas;
use crate::meta::MetaModel;
use crate::params::{Allocation, Scheme, SystemParams, TrafficParams, UserClass};
use crate::performance::{delay_ccdf, rate_cdf, time_share};
use crate::ra::{
    brute_force_ra, csr, gain_eta_max, solve_p1, solve_p2, theta_hat, theta_nc, CellModel, Problem, RAResult,
};
use crate::sim::{
    estimate_areas_and_loads, estimate_class_fraction, estimate_meta, estimate_rate_delay, queue_sim, rng_for,
    SimConfig,
};
use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scale {
    pub sim: SimConfig,
    pub queue_slots: u64,
    pub grid_size: usize,
}

impl Default for Scale {
    fn default() -> Self {
        Scale { sim: SimConfig::default(), queue_slots: 1_000_000, grid_size: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub title: &'static str,
    /// Worst-case value of the checked metric.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{verdict}] {:<3} {}: {:.4} (tol {}); {}",
            self.id, self.title, self.value, self.tolerance, self.detail
        )
    }
}

fn check(id: &'static str, title: &'static str, value: f64, tolerance: f64, pass: bool, detail: String) -> CheckResult {
    CheckResult { id, title, value, tolerance, pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Thresholds of the moment checks: `(β_c, β_e) = (0, −3)` dB.
pub fn low_threshold_params() -> SystemParams {
    SystemParams::default().with_betas_db(0.0, -3.0)
}

/// CC share of users at `τ = 0.7`.
pub fn class_fraction(scale: &Scale) -> Result<CheckResult, ModelError> {
    let p = SystemParams::default();
    let f = estimate_class_fraction(&p, &scale.sim)?;
    let want = p.tau * p.tau;
    let err = (f.per_cell - want).abs();
    Ok(check(
        "1",
        "CC fraction",
        f.per_cell,
        0.01,
        err <= 0.01,
        format!(
            "uniform user in the cell: {:.4} ± {:.4} vs {want:.2}; area-weighted share {:.4}",
            f.per_cell, f.per_cell_se, f.area_weighted
        ),
    ))
}

/// Moments (2), beta CCDF fit (3) and the θ̂ / θ_NC boundary (4).
pub fn meta_checks(scale: &Scale) -> Result<[CheckResult; 3], ModelError> {
    let p = low_threshold_params();
    let nc = theta_nc(p.beta_e);
    let mut allocs: Vec<Allocation> = (1..=7).map(|i| Allocation::Noma { theta: nc * i as f64 / 8.0 }).collect();
    allocs.push(Allocation::Oma { eta: 0.5 });
    let beyond = [nc * 1.01, 0.8, 0.95];
    allocs.extend(beyond.iter().map(|&theta| Allocation::Noma { theta }));
    let est = estimate_meta(&p, &allocs, &scale.sim)?;
    let model = MetaModel::new(p);
    let n_in = 16;

    let mut worst_moment = (0.0, String::new());
    let mut worst_class = [0.0f64; 2];
    let mut worst_sup = (0.0, String::new());
    let mut sup_class = [0.0f64; 2];
    for e in &est[..n_in] {
        let an = model.moments(e.user_class, e.allocation)?;
        let k = e.user_class as usize;
        for (name, a, s) in [("m1", an.m1, e.m1), ("m2", an.m2, e.m2)] {
            let r = rel(a, s);
            worst_class[k] = worst_class[k].max(r);
            if r > worst_moment.0 {
                worst_moment =
                    (r, format!("{} {name} at {:?}: {a:.4} vs sim {s:.4}", e.user_class.label(), e.allocation));
            }
        }
        let fit = model.fit(e.user_class, e.allocation)?;
        let sup = (0..=100).map(|i| i as f64 / 100.0).map(|x| (fit.ccdf(x) - e.ccdf(x)).abs()).fold(0.0, f64::max);
        sup_class[k] = sup_class[k].max(sup);
        if sup > worst_sup.0 {
            worst_sup = (sup, format!("{} at {:?}", e.user_class.label(), e.allocation));
        }
    }
    let c2 = check(
        "2",
        "meta moments rel. error",
        worst_moment.0,
        0.03,
        worst_moment.0 <= 0.03,
        format!("worst CC {:.2}%, CE {:.2}%; {}", 100.0 * worst_class[0], 100.0 * worst_class[1], worst_moment.1),
    );
    let c3 = check(
        "3",
        "beta meta-CCDF sup-norm",
        worst_sup.0,
        0.04,
        worst_sup.0 <= 0.04,
        format!("worst CC {:.4}, CE {:.4}; {}", sup_class[0], sup_class[1], worst_sup.1),
    );

    let th = theta_hat(p.beta_c, p.beta_e);
    let sim_csr = |i: usize| (1.0 + p.beta_c).log2() * est[2 * i].m1 + (1.0 + p.beta_e).log2() * est[2 * i + 1].m1;
    let sim_peak = (0..7).map(sim_csr).fold(0.0, f64::max);
    let sim_beyond = (8..8 + beyond.len()).map(sim_csr).fold(0.0, f64::max);
    let an_csr = |theta: f64| csr(Allocation::Noma { theta }, &model).unwrap_or(0.0);
    let an_peak = (1..200).map(|i| an_csr(nc * i as f64 / 200.0)).fold(0.0, f64::max);
    let an_beyond = beyond.iter().map(|&t| an_csr(t)).fold(0.0, f64::max);
    let ratio = (sim_beyond / sim_peak).max(an_beyond / an_peak);
    let c4 = check(
        "4",
        "theta_hat and theta_NC",
        (th - 0.5).abs(),
        0.01,
        (th - 0.5).abs() <= 0.01 && (nc - 0.666).abs() < 1e-3 && ratio < 0.01,
        format!(
            "theta_hat {th:.4}, theta_NC {nc:.4}; CSR beyond theta_NC / peak: analytic {:.1e}, sim {:.1e}",
            an_beyond / an_peak,
            sim_beyond / sim_peak
        ),
    );
    Ok([c2, c3, c4])
}

/// Region areas (5) and load pmf (6).
pub fn area_load_checks(scale: &Scale) -> Result<[CheckResult; 2], ModelError> {
    let p = SystemParams::default();
    let model = CellModel::new(p)?;
    let s = estimate_areas_and_loads(&p, &scale.sim)?;
    let (mc, me) = mean_areas(&p);
    let exact = rel(mc, p.tau * p.tau / p.lambda).max(rel(me, (1.0 - p.tau * p.tau) / p.lambda));
    let mean_err = rel(s.mean_area(UserClass::Center), mc).max(rel(s.mean_area(UserClass::Edge), me));
    let m2_err = UserClass::BOTH.map(|c| rel(model.area(c).second_moment, s.second_moment(c)));
    let worst = m2_err[0].max(m2_err[1]);
    let c5 = check(
        "5",
        "area second moments rel. error",
        worst,
        0.03,
        exact < 1e-12 && mean_err <= 0.01 && worst <= 0.03,
        format!(
            "E|A|^2 CC {:.4} vs sim {:.4}, CE {:.4} vs sim {:.4}; sim means {:.4}, {:.4} (analytic {mc:.2}, {me:.2})",
            model.area(UserClass::Center).second_moment,
            s.second_moment(UserClass::Center),
            model.area(UserClass::Edge).second_moment,
            s.second_moment(UserClass::Edge),
            s.mean_area(UserClass::Center),
            s.mean_area(UserClass::Edge),
        ),
    );
    let tv = UserClass::BOTH.map(|c| s.total_variation(c, model.load(c)));
    let c6 = check(
        "6",
        "load pmf total variation",
        tv[0].max(tv[1]),
        0.02,
        tv[0].max(tv[1]) <= 0.02,
        format!("CC {:.4}, CE {:.4} at nu = {}", tv[0], tv[1], p.nu),
    );
    Ok([c5, c6])
}

/// Rate CDFs and delay outage curves against simulation (7).
pub fn rate_delay_check(scale: &Scale) -> Result<CheckResult, ModelError> {
    let p = SystemParams::default();
    let t = TrafficParams::default();
    let model = CellModel::new(p)?;
    let mut worst = (0.0, String::new());
    let mut parts = Vec::new();
    for alloc in [Allocation::Noma { theta: p.theta }, Allocation::Oma { eta: p.eta }] {
        let sims = estimate_rate_delay(&p, alloc, &t, &scale.sim)?;
        for (class, s) in UserClass::BOTH.into_iter().zip(&sims) {
            let fit = model.fit(class, alloc)?;
            let load = model.load(class);
            let full = time_share(class, alloc) * (1.0 + p.beta(class)).log2();
            let rate_sup = (0..=200)
                .map(|i| full * i as f64 / 200.0)
                .map(|r| (rate_cdf(class, alloc, r, model.meta(), load, &fit) - s.rate_cdf(r)).abs())
                .fold(0.0, f64::max);
            let delay_sup = (1..=100)
                .map(|i| i as f64)
                .map(|d| (delay_ccdf(class, alloc, d, t.arrival(class), load, &fit) - s.delay_outage(d)).abs())
                .fold(0.0, f64::max);
            let tag = format!("{} {}", alloc.scheme().label(), class.label());
            parts.push(format!("{tag} rate {rate_sup:.3} delay {delay_sup:.3}"));
            for (what, v) in [("rate", rate_sup), ("delay", delay_sup)] {
                if v > worst.0 {
                    worst = (v, format!("{tag} {what}"));
                }
            }
        }
    }
    Ok(check(
        "7",
        "rate/delay curve sup-norm",
        worst.0,
        0.03,
        worst.0 <= 0.03,
        format!("worst {}; {}", worst.1, parts.join(", ")),
    ))
}

/// Geo/Geo/1 mean delay (8).
pub fn queue_check(scale: &Scale) -> CheckResult {
    let d = queue_sim(0.5, 0.25, scale.queue_slots, &mut rng_for(scale.sim.seed, u64::MAX));
    check(
        "8",
        "Geo/Geo/1 mean delay rel. error",
        rel(d, 3.0),
        0.02,
        rel(d, 3.0) <= 0.02,
        format!("{d:.4} slots vs 3 over {} slots", scale.queue_slots),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaComparison {
    pub nu: f64,
    pub problem: Problem,
    pub scheme: Scheme,
    pub rule: RAResult,
    pub grid: RAResult,
}

impl RaComparison {
    /// Shortfall of the rule relative to the grid optimum.
    pub fn gap(&self) -> f64 {
        if self.rule.feasible && self.grid.feasible {
            (self.grid.objective - self.rule.objective) / self.grid.objective
        } else {
            0.0
        }
    }
}

/// Rule and grid solutions for every `ν` in `nus`.
pub fn ra_sweep(
    base: &CellModel,
    traffic: &TrafficParams,
    nus: &[f64],
    problems: &[Problem],
    grid_size: usize,
) -> Result<Vec<RaComparison>, ModelError> {
    let mut out = Vec::new();
    for &nu in nus {
        let m = base.with_nu(nu)?;
        for &problem in problems {
            for scheme in [Scheme::Noma, Scheme::Oma] {
                let rule = match problem {
                    Problem::P1 => solve_p1(scheme, &m, traffic)?,
                    Problem::P2 => solve_p2(scheme, &m, traffic)?,
                };
                let grid = brute_force_ra(problem, scheme, &m, traffic, grid_size)?;
                out.push(RaComparison { nu, problem, scheme, rule, grid });
            }
        }
    }
    Ok(out)
}

fn find(rows: &[RaComparison], nu: f64, problem: Problem, scheme: Scheme) -> &RaComparison {
    rows.iter().find(|r| r.nu == nu && r.problem == problem && r.scheme == scheme).expect("swept combination")
}

/// Objective values over `nus` where feasible, in order.
fn feasible_series(
    rows: &[RaComparison],
    nus: &[f64],
    problem: Problem,
    scheme: Scheme,
    grid: bool,
) -> Vec<(f64, f64)> {
    nus.iter()
        .map(|&nu| find(rows, nu, problem, scheme))
        .filter_map(|r| {
            let res = if grid { &r.grid } else { &r.rule };
            res.feasible.then_some((r.nu, res.objective))
        })
        .collect()
}

fn nonincreasing(series: &[(f64, f64)]) -> bool {
    series.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9))
}

fn fmt_series(series: &[(f64, f64)]) -> String {
    series.iter().map(|(nu, v)| format!("{nu}:{v:.4}")).collect::<Vec<_>>().join(" ")
}

pub const RA_NUS: [f64; 4] = [2.0, 5.0, 10.0, 20.0];
/// `ν` sweep for the SEC comparisons, at `(β_c, β_e) = (0, −3)` dB.
pub const SEC_NUS: [f64; 3] = [1.0, 2.0, 3.0];

/// Rule versus grid (9) and the qualitative trends (10a to 10d).
pub fn ra_checks(scale: &Scale) -> Result<Vec<CheckResult>, ModelError> {
    let t = TrafficParams::default();
    let base = CellModel::new(SystemParams::default())?;
    let rows = ra_sweep(&base, &t, &RA_NUS, &[Problem::P1, Problem::P2], scale.grid_size)?;
    let mismatched: Vec<String> = rows
        .iter()
        .filter(|r| r.rule.feasible != r.grid.feasible)
        .map(|r| format!("nu {} {:?} {}", r.nu, r.problem, r.scheme.label()))
        .collect();
    let worst = rows.iter().max_by(|a, b| a.gap().total_cmp(&b.gap())).expect("nonempty sweep");
    let over: Vec<String> = rows
        .iter()
        .filter(|r| r.gap() > 0.01)
        .map(|r| format!("nu {} {:?} {} gap {:.2}%", r.nu, r.problem, r.scheme.label(), 100.0 * r.gap()))
        .collect();
    let feasible_count = rows.iter().filter(|r| r.grid.feasible).count();
    let c9 = check(
        "9",
        "RA rule vs grid optimum",
        worst.gap(),
        0.01,
        worst.gap() <= 0.01 && mismatched.is_empty(),
        format!(
            "{feasible_count}/{} cases feasible; feasibility mismatches: {}; over tolerance: {}",
            rows.len(),
            if mismatched.is_empty() { "none".into() } else { mismatched.join(", ") },
            if over.is_empty() { "none".into() } else { over.join(", ") },
        ),
    );

    // 10a: NOMA CSR at least OMA CSR wherever OMA is feasible
    let mut margin = f64::INFINITY;
    let mut a_ok = true;
    for &nu in &RA_NUS {
        let (n, o) = (find(&rows, nu, Problem::P1, Scheme::Noma), find(&rows, nu, Problem::P1, Scheme::Oma));
        if o.rule.feasible {
            a_ok &= n.rule.feasible && n.rule.objective >= o.rule.objective;
            margin = margin.min(n.rule.objective - o.rule.objective);
        }
    }
    let c10a = check(
        "10a",
        "NOMA CSR >= OMA CSR over nu",
        margin,
        0.0,
        a_ok,
        format!(
            "NOMA {} | OMA {}",
            fmt_series(&feasible_series(&rows, &RA_NUS, Problem::P1, Scheme::Noma, false)),
            fmt_series(&feasible_series(&rows, &RA_NUS, Problem::P1, Scheme::Oma, false)),
        ),
    );

    let low = CellModel::new(low_threshold_params())?;
    let sec = ra_sweep(&low, &t, &SEC_NUS, &[Problem::P2], scale.grid_size)?;
    let top = SEC_NUS[SEC_NUS.len() - 1];
    let (n, o) = (find(&sec, top, Problem::P2, Scheme::Noma), find(&sec, top, Problem::P2, Scheme::Oma));
    let b_ok = n.rule.feasible && o.rule.feasible && n.rule.objective > o.rule.objective;
    let defaults_at_2 = (find(&rows, 2.0, Problem::P2, Scheme::Noma), find(&rows, 2.0, Problem::P2, Scheme::Oma));
    let c10b = check(
        "10b",
        "NOMA SEC > OMA SEC at largest nu",
        n.rule.objective - o.rule.objective,
        0.0,
        b_ok,
        format!(
            "(0,-3) dB, nu {top}: NOMA {:.4} vs OMA {:.4}; at (3,-3) dB, nu 2: NOMA {:.4} vs OMA {:.4}",
            n.rule.objective, o.rule.objective, defaults_at_2.0.rule.objective, defaults_at_2.1.rule.objective
        ),
    );

    let gains = CellModel::new(SystemParams::default().with_betas_db(3.0, 0.0))?;
    let eta_max = gain_eta_max(gains.meta())?;
    let c10c = check(
        "10c",
        "eta_max with both NOMA gains > 1",
        eta_max,
        0.05,
        (eta_max - 0.7).abs() <= 0.05,
        format!("eta_max {eta_max:.4} at (3,0) dB, target 0.7"),
    );

    let csr_n = feasible_series(&rows, &RA_NUS, Problem::P1, Scheme::Noma, true);
    let csr_o = feasible_series(&rows, &RA_NUS, Problem::P1, Scheme::Oma, true);
    let sec_n = feasible_series(&sec, &SEC_NUS, Problem::P2, Scheme::Noma, true);
    let sec_o = feasible_series(&sec, &SEC_NUS, Problem::P2, Scheme::Oma, true);
    let d_ok = [&csr_n, &csr_o, &sec_n, &sec_o].iter().all(|s| s.len() >= 2 && nonincreasing(s));
    let rule_csr = feasible_series(&rows, &RA_NUS, Problem::P1, Scheme::Noma, false);
    let c10d = check(
        "10d",
        "optimal CSR and SEC nonincreasing in nu",
        f64::from(u8::from(d_ok)),
        1.0,
        d_ok,
        format!(
            "CSR noma {} | oma {}; SEC noma {} | oma {}; rule CSR noma {} (monotone: {})",
            fmt_series(&csr_n),
            fmt_series(&csr_o),
            fmt_series(&sec_n),
            fmt_series(&sec_o),
            fmt_series(&rule_csr),
            nonincreasing(&rule_csr),
        ),
    );
    Ok(vec![c9, c10a, c10b, c10c, c10d])
}

/// Every check, in criterion order.
pub fn run_all(scale: &Scale) -> Result<Vec<CheckResult>, ModelError> {
    let mut out = vec![class_fraction(scale)?];
    out.extend(meta_checks(scale)?);
    out.extend(area_load_checks(scale)?);
    out.push(rate_delay_check(scale)?);
    out.push(queue_check(scale));
    out.extend(ra_checks(scale)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::db_to_linear;

    #[test]
    fn display_line() {
        let c = check("3", "x", 0.05, 0.04, false, "d".into());
        assert_eq!(c.to_string(), "[FAIL] 3   x: 0.0500 (tol 0.04); d");
    }

    #[test]
    fn monotone_helper() {
        assert!(nonincreasing(&[(1.0, 3.0), (2.0, 2.0), (3.0, 2.0)]));
        assert!(!nonincreasing(&[(1.0, 3.0), (2.0, 3.1)]));
    }

    #[test]
    fn low_threshold_params_convert_decibels() {
        let p = low_threshold_params();
        assert_eq!(p.beta_c, 1.0);
        assert_eq!(p.beta_e, db_to_linear(-3.0));
    }
}
