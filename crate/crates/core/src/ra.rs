//! Power (NOMA) and time (OMA) allocation.
//!
//! P1 maximizes the cell sum rate (CSR) under minimum mean rates, P2 the sum
//! of effective capacities (SEC) under minimum effective capacities. The
//! near-optimal rules locate where each constraint becomes active and pick
//! `θ* = min(θ_e, θ̂)` (NOMA) or `η* = η_e` (OMA). [`brute_force_ra`] is the
//! grid-search reference.

use rayon::prelude::*;
use serde::Serialize;

use crate::load::{area_stats, gamma_fit, load_pmf, GammaFit, LoadPmf, RegionAreaStats};
use crate::meta::{MetaFit, MetaModel};
use crate::numerics::{find_root, maximize_unimodal};
use crate::params::{Allocation, Scheme, SystemParams, TrafficParams, UserClass};
use crate::performance::{delay_ccdf, mean_rate, time_share};
use crate::ModelError;

/// Allocations closer than this to an end of the feasible interval are not
/// considered.
pub const EDGE_EPS: f64 = 1e-4;
const ROOT_TOL: f64 = 1e-10;

pub fn theta_hat(beta_c: f64, beta_e: f64) -> f64 {
    beta_c / (beta_c + beta_e + beta_c * beta_e)
}

pub fn theta_nc(beta_e: f64) -> f64 {
    1.0 / (1.0 + beta_e)
}

/// Everything the rate, delay and allocation routines need for one
/// parameter set.
///
/// The moment cache is shared between models derived with [`CellModel::with_nu`].
#[derive(Debug, Clone)]
pub struct CellModel {
    meta: MetaModel,
    areas: [RegionAreaStats; 2],
    gammas: [GammaFit; 2],
    loads: [LoadPmf; 2],
}

fn slot(class: UserClass) -> usize {
    match class {
        UserClass::Center => 0,
        UserClass::Edge => 1,
    }
}

impl CellModel {
    pub fn new(params: SystemParams) -> Result<CellModel, ModelError> {
        params.validate()?;
        let areas = [area_stats(UserClass::Center, &params)?, area_stats(UserClass::Edge, &params)?];
        let gammas = [gamma_fit(&areas[0])?, gamma_fit(&areas[1])?];
        let loads = [
            load_pmf(UserClass::Center, &gammas[0], params.nu, None)?,
            load_pmf(UserClass::Edge, &gammas[1], params.nu, None)?,
        ];
        Ok(CellModel { meta: MetaModel::new(params), areas, gammas, loads })
    }

    /// Same network with user density `nu`. Areas and moments do not depend
    /// on `ν`, so only the loads are recomputed.
    pub fn with_nu(&self, nu: f64) -> Result<CellModel, ModelError> {
        let mut params = *self.params();
        params.nu = nu;
        params.validate()?;
        let loads = [
            load_pmf(UserClass::Center, &self.gammas[0], nu, None)?,
            load_pmf(UserClass::Edge, &self.gammas[1], nu, None)?,
        ];
        Ok(CellModel { meta: self.meta.with_params(params), areas: self.areas, gammas: self.gammas, loads })
    }

    pub fn params(&self) -> &SystemParams {
        self.meta.params()
    }

    pub fn meta(&self) -> &MetaModel {
        &self.meta
    }

    pub fn area(&self, class: UserClass) -> &RegionAreaStats {
        &self.areas[slot(class)]
    }

    pub fn gamma(&self, class: UserClass) -> &GammaFit {
        &self.gammas[slot(class)]
    }

    pub fn load(&self, class: UserClass) -> &LoadPmf {
        &self.loads[slot(class)]
    }

    pub fn mean_rate(&self, class: UserClass, alloc: Allocation) -> Result<f64, ModelError> {
        mean_rate(class, alloc, &self.meta, self.load(class))
    }

    pub fn fit(&self, class: UserClass, alloc: Allocation) -> Result<MetaFit, ModelError> {
        self.meta.fit(class, alloc)
    }
}

/// `Σ_s share_s · log2(1 + β_s) · M_1^s`.
pub fn csr(alloc: Allocation, meta: &MetaModel) -> Result<f64, ModelError> {
    let p = meta.params();
    let mut total = 0.0;
    for class in UserClass::BOTH {
        let share = time_share(class, alloc);
        if share > 0.0 {
            total += share * (1.0 + p.beta(class)).log2() * meta.m1(class, alloc)?;
        }
    }
    Ok(total)
}

/// Rate gains of NOMA at power split `theta` over OMA at time split `eta`.
pub fn noma_gain(theta: f64, eta: f64, meta: &MetaModel) -> Result<(f64, f64), ModelError> {
    let noma = Allocation::Noma { theta };
    let oma = Allocation::Oma { eta };
    let gc = meta.m1(UserClass::Center, noma)? / (eta * meta.m1(UserClass::Center, oma)?);
    let ge = meta.m1(UserClass::Edge, noma)? / ((1.0 - eta) * meta.m1(UserClass::Edge, oma)?);
    Ok((gc, ge))
}

/// Largest `η` for which some `θ ∈ (0, θ̂]` gives both gains above one.
///
/// `g_c > 1` needs `η < a(θ) = M_1^c(θ)/M̃_1^c` and `g_e > 1` needs
/// `η > b(θ) = 1 − M_1^e(θ)/M̃_1^e`; both `a` and `b` increase on `(0, θ̂]`.
pub fn gain_eta_max(meta: &MetaModel) -> Result<f64, ModelError> {
    let p = meta.params();
    let th = theta_hat(p.beta_c, p.beta_e);
    let oma = Allocation::Oma { eta: 0.5 };
    let mc = meta.m1(UserClass::Center, oma)?;
    let me = meta.m1(UserClass::Edge, oma)?;
    let a = |t: f64| meta.m1(UserClass::Center, Allocation::Noma { theta: t }).map(|m| m / mc);
    let b = |t: f64| meta.m1(UserClass::Edge, Allocation::Noma { theta: t }).map(|m| 1.0 - m / me);
    if a(th)? > b(th)? {
        return a(th);
    }
    let gap = |t: f64| match (a(t), b(t)) {
        (Ok(x), Ok(y)) => x - y,
        _ => f64::NAN,
    };
    match find_root(gap, EDGE_EPS, th, ROOT_TOL) {
        Some(t) => a(t),
        None => Ok(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Sum rate under minimum mean rates.
    P1,
    /// Sum of effective capacities under minimum effective capacities.
    P2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RAResult {
    pub problem: Problem,
    pub scheme: Scheme,
    /// `θ*` or `η*`; NaN when infeasible.
    pub allocation: f64,
    /// CSR (bits/slot/Hz) or SEC (packets/slot); NaN when infeasible.
    pub objective: f64,
    pub feasible: bool,
    /// Where the CC constraint becomes active (`θ_lc` or `η_c`).
    pub cc_root: Option<f64>,
    /// Where the CE constraint becomes active (`θ_e` or `η_e`).
    pub ce_root: Option<f64>,
    /// Which constraint fails, when infeasible.
    pub reason: Option<String>,
}

impl RAResult {
    fn infeasible(
        problem: Problem,
        scheme: Scheme,
        cc_root: Option<f64>,
        ce_root: Option<f64>,
        reason: String,
    ) -> Self {
        log::debug!("{problem:?}/{scheme:?} infeasible: {reason} (roots {cc_root:?}, {ce_root:?})");
        RAResult {
            problem,
            scheme,
            allocation: f64::NAN,
            objective: f64::NAN,
            feasible: false,
            cc_root,
            ce_root,
            reason: Some(reason),
        }
    }
}

/// Largest arrival rate whose delay-outage bound stays at the cap.
pub fn effective_capacity(
    class: UserClass,
    alloc: Allocation,
    traffic: &TrafficParams,
    model: &CellModel,
) -> Result<f64, ModelError> {
    let fit = model.fit(class, alloc)?;
    Ok(ec_from_fit(class, alloc, traffic, model.load(class), &fit))
}

fn ec_from_fit(class: UserClass, alloc: Allocation, traffic: &TrafficParams, load: &LoadPmf, fit: &MetaFit) -> f64 {
    let cap = traffic.outage_cap(class);
    let t = traffic.delay_thresh(class);
    let outage = |rate: f64| delay_ccdf(class, alloc, t, rate, load, fit);
    let (at_zero, at_one) = (outage(0.0), outage(1.0));
    debug_assert!(at_zero <= at_one, "delay outage must grow with the arrival rate");
    if at_zero > cap {
        return 0.0;
    }
    if at_one <= cap {
        return 1.0;
    }
    find_root(|r| outage(r) - cap, 0.0, 1.0, ROOT_TOL).unwrap_or(0.0)
}

fn floor(problem: Problem, class: UserClass, traffic: &TrafficParams) -> f64 {
    match problem {
        Problem::P1 => traffic.rate_floor(class),
        Problem::P2 => traffic.ec_floor(class),
    }
}

/// Mean rate (P1) or effective capacity (P2) of `class`.
fn per_class(
    problem: Problem,
    class: UserClass,
    alloc: Allocation,
    model: &CellModel,
    traffic: &TrafficParams,
) -> Result<f64, ModelError> {
    match problem {
        Problem::P1 => model.mean_rate(class, alloc),
        Problem::P2 => effective_capacity(class, alloc, traffic, model),
    }
}

/// CSR (P1) or SEC (P2).
pub fn objective(
    problem: Problem,
    alloc: Allocation,
    model: &CellModel,
    traffic: &TrafficParams,
) -> Result<f64, ModelError> {
    match problem {
        Problem::P1 => csr(alloc, model.meta()),
        Problem::P2 => Ok(effective_capacity(UserClass::Center, alloc, traffic, model)?
            + effective_capacity(UserClass::Edge, alloc, traffic, model)?),
    }
}

/// Allocation interval searched for `scheme`.
pub fn search_interval(scheme: Scheme, p: &SystemParams) -> (f64, f64) {
    match scheme {
        Scheme::Noma => (EDGE_EPS, theta_nc(p.beta_e) - EDGE_EPS),
        Scheme::Oma => (EDGE_EPS, 1.0 - EDGE_EPS),
    }
}

/// The point in `[lo, hi]` where an increasing `g` crosses zero, `lo` if it
/// never is negative, `None` if it never reaches zero.
fn rising_root<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64) -> Option<f64> {
    if g(lo) >= 0.0 {
        return Some(lo);
    }
    if g(hi) < 0.0 {
        return None;
    }
    find_root(g, lo, hi, ROOT_TOL).map(|x| x.max(lo))
}

/// Mirror of [`rising_root`] for a decreasing `g`: the last point where it is
/// still nonnegative.
fn falling_root<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64) -> Option<f64> {
    if g(hi) >= 0.0 {
        return Some(hi);
    }
    if g(lo) < 0.0 {
        return None;
    }
    find_root(g, lo, hi, ROOT_TOL).map(|x| x.min(hi))
}

fn solve(problem: Problem, scheme: Scheme, model: &CellModel, traffic: &TrafficParams) -> Result<RAResult, ModelError> {
    let p = *model.params();
    let (lo, hi) = search_interval(scheme, &p);
    // constraint slack; errors inside the root search surface afterwards
    let err = std::sync::Mutex::new(None);
    let slack = |class: UserClass, x: f64| match per_class(problem, class, Allocation::new(scheme, x), model, traffic) {
        Ok(v) => v - floor(problem, class, traffic),
        Err(e) => {
            err.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    };
    let cc_peak = match scheme {
        Scheme::Noma => theta_hat(p.beta_c, p.beta_e),
        Scheme::Oma => hi,
    };
    let cc_root = rising_root(|x| slack(UserClass::Center, x), lo, cc_peak);
    let ce_root = falling_root(|x| slack(UserClass::Edge, x), lo, hi);
    if let Some(e) = err.into_inner().unwrap() {
        return Err(e);
    }
    let (c, e) = match (cc_root, ce_root) {
        (None, _) => {
            return Ok(RAResult::infeasible(
                problem,
                scheme,
                cc_root,
                ce_root,
                "CC floor above the best CC value".into(),
            ))
        }
        (_, None) => {
            return Ok(RAResult::infeasible(
                problem,
                scheme,
                cc_root,
                ce_root,
                "CE floor above the best CE value".into(),
            ))
        }
        (Some(c), Some(e)) => (c, e),
    };
    if e < c {
        return Ok(RAResult::infeasible(
            problem,
            scheme,
            cc_root,
            ce_root,
            format!("CE constraint binds at {e} before the CC constraint is met at {c}"),
        ));
    }
    let x = match scheme {
        Scheme::Noma => e.min(cc_peak),
        Scheme::Oma => e,
    };
    Ok(RAResult {
        problem,
        scheme,
        allocation: x,
        objective: objective(problem, Allocation::new(scheme, x), model, traffic)?,
        feasible: true,
        cc_root,
        ce_root,
        reason: None,
    })
}

/// Near-optimal CSR allocation under minimum mean rates.
pub fn solve_p1(scheme: Scheme, model: &CellModel, traffic: &TrafficParams) -> Result<RAResult, ModelError> {
    solve(Problem::P1, scheme, model, traffic)
}

/// Near-optimal SEC allocation under minimum effective capacities.
pub fn solve_p2(scheme: Scheme, model: &CellModel, traffic: &TrafficParams) -> Result<RAResult, ModelError> {
    solve(Problem::P2, scheme, model, traffic)
}

/// Objective and feasibility at one allocation.
fn evaluate(
    problem: Problem,
    alloc: Allocation,
    model: &CellModel,
    traffic: &TrafficParams,
) -> Result<Option<f64>, ModelError> {
    let (vc, ve) = match problem {
        Problem::P1 => (model.mean_rate(UserClass::Center, alloc)?, model.mean_rate(UserClass::Edge, alloc)?),
        Problem::P2 => (
            effective_capacity(UserClass::Center, alloc, traffic, model)?,
            effective_capacity(UserClass::Edge, alloc, traffic, model)?,
        ),
    };
    if vc < floor(problem, UserClass::Center, traffic) || ve < floor(problem, UserClass::Edge, traffic) {
        return Ok(None);
    }
    Ok(Some(match problem {
        Problem::P1 => csr(alloc, model.meta())?,
        Problem::P2 => vc + ve,
    }))
}

/// Exhaustive search over `grid_size` evenly spaced allocations, refined by a
/// golden-section search around the best feasible grid point.
pub fn brute_force_ra(
    problem: Problem,
    scheme: Scheme,
    model: &CellModel,
    traffic: &TrafficParams,
    grid_size: usize,
) -> Result<RAResult, ModelError> {
    if grid_size < 100 {
        return Err(ModelError::InvalidParams(format!("grid_size {grid_size} below 100")));
    }
    let (lo, hi) = search_interval(scheme, model.params());
    let step = (hi - lo) / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|i| lo + step * i as f64).collect();
    let values = grid
        .par_iter()
        .map(|&x| evaluate(problem, Allocation::new(scheme, x), model, traffic))
        .collect::<Result<Vec<_>, _>>()?;
    let best = values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).fold(
        None,
        |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        },
    );
    let Some((i, v)) = best else {
        return Ok(RAResult::infeasible(problem, scheme, None, None, "no feasible grid point".into()));
    };
    let a = grid[i.saturating_sub(1)];
    let b = grid[(i + 1).min(grid_size - 1)];
    let penalized = |x: f64| match evaluate(problem, Allocation::new(scheme, x), model, traffic) {
        Ok(Some(v)) => v,
        _ => f64::NEG_INFINITY,
    };
    let (xr, vr) = maximize_unimodal(penalized, a, b, 1e-9);
    let (allocation, objective) = if vr > v { (xr, vr) } else { (grid[i], v) };
    Ok(RAResult { problem, scheme, allocation, objective, feasible: true, cc_root: None, ce_root: None, reason: None })
}
