//! Sample-based estimates of the quantities the analytic model predicts.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use super::realization::{cond_success_prob, realize_typical_cell};
use super::{per_realization, SimConfig};
use crate::load::LoadPmf;
use crate::meta::chi;
use crate::params::{Allocation, SystemParams, TrafficParams, UserClass};
use crate::performance::{cond_mean_delay, time_share, MeanDelay};
use crate::ModelError;

/// Poisson count conditioned on being at least one.
pub fn sample_ztp<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if !(mean > 0.0) {
        return 1;
    }
    if mean < 1.0 {
        // inversion; rejection would waste ~1/mean draws
        let u: f64 = rng.random();
        let mut term = mean / mean.exp_m1();
        let mut cum = term;
        let mut n = 1;
        while cum < u && n < 1000 {
            term *= mean / (n + 1) as f64;
            cum += term;
            n += 1;
        }
        return n;
    }
    let poisson = Poisson::new(mean).expect("finite positive mean");
    loop {
        let n = poisson.sample(rng) as usize;
        if n > 0 {
            return n;
        }
    }
}

/// `χ` for the allocation, infinite where the layer cannot be decoded.
fn chi_or_inf(class: UserClass, alloc: Allocation, p: &SystemParams) -> Result<f64, ModelError> {
    match chi(class, alloc, p) {
        Ok(x) => Ok(x),
        Err(ModelError::Infeasible { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Share of cell-center users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassFraction {
    /// `P[CC]` for one user uniform in the typical cell, i.e. `E[|V_oc|/|V_o|]`.
    pub per_cell: f64,
    pub per_cell_se: f64,
    /// Each realization weighted by its cell area: the CC share of a user
    /// population of constant density, `E|V_oc| / E|V_o|`.
    pub area_weighted: f64,
}

pub fn estimate_class_fraction(p: &SystemParams, cfg: &SimConfig) -> Result<ClassFraction, ModelError> {
    let rows = per_realization(cfg, |rng| {
        let real = realize_typical_cell(p, cfg, rng)?;
        let hit = f64::from(u8::from(real.draw_user(p.tau, rng).user_class == UserClass::Center));
        Ok((hit, real.cell.area()))
    })?;
    let (per_cell, per_cell_se) = mean_and_se(rows.iter().map(|r| r.0));
    let area: f64 = rows.iter().map(|r| r.1).sum();
    let area_weighted = rows.iter().map(|r| r.0 * r.1).sum::<f64>() / area;
    Ok(ClassFraction { per_cell, per_cell_se, area_weighted })
}

/// Empirical meta distribution of one class under one allocation.
#[derive(Debug, Clone)]
pub struct MetaEstimate {
    pub user_class: UserClass,
    pub allocation: Allocation,
    pub m1: f64,
    pub m2: f64,
    pub se_m1: f64,
    pub se_m2: f64,
    /// Conditional success probabilities, sorted.
    pub samples: Vec<f64>,
}

impl MetaEstimate {
    fn from_samples(user_class: UserClass, allocation: Allocation, mut samples: Vec<f64>) -> Self {
        let (m1, se_m1) = mean_and_se(samples.iter().copied());
        let (m2, se_m2) = mean_and_se(samples.iter().map(|x| x * x));
        samples.sort_by(f64::total_cmp);
        MetaEstimate { user_class, allocation, m1, m2, se_m1, se_m2, samples }
    }

    /// Fraction of samples above `x`.
    pub fn ccdf(&self, x: f64) -> f64 {
        let below = self.samples.partition_point(|&s| s <= x);
        (self.samples.len() - below) as f64 / self.samples.len() as f64
    }
}

/// Meta distributions of both classes for every allocation in `allocs`.
///
/// Each realization contributes one CC user and one CE user, each uniform
/// in its own region. Results are ordered by allocation, CC first.
pub fn estimate_meta(
    p: &SystemParams,
    allocs: &[Allocation],
    cfg: &SimConfig,
) -> Result<Vec<MetaEstimate>, ModelError> {
    let chis = allocs
        .iter()
        .map(|&a| Ok([chi_or_inf(UserClass::Center, a, p)?, chi_or_inf(UserClass::Edge, a, p)?]))
        .collect::<Result<Vec<_>, ModelError>>()?;
    let rows = per_realization(cfg, |rng| {
        let real = realize_typical_cell(p, cfg, rng)?;
        let users = UserClass::BOTH.map(|c| real.draw_user_in(c, p.tau, rng));
        Ok(chis
            .iter()
            .flat_map(|pair| (0..2).map(|k| cond_success_prob(&real, &users[k], pair[k], p, cfg)))
            .collect::<Vec<f64>>())
    })?;
    let mut out = Vec::with_capacity(2 * allocs.len());
    for (i, &a) in allocs.iter().enumerate() {
        for (k, class) in UserClass::BOTH.into_iter().enumerate() {
            let col = rows.iter().map(|r| r[2 * i + k]).collect();
            out.push(MetaEstimate::from_samples(class, a, col));
        }
    }
    Ok(out)
}

/// Region areas of the typical cell and loads drawn given them.
#[derive(Debug, Clone, Default)]
pub struct AreaLoadSamples {
    pub cc_area: Vec<f64>,
    pub ce_area: Vec<f64>,
    pub cc_load: Vec<usize>,
    pub ce_load: Vec<usize>,
}

impl AreaLoadSamples {
    pub fn areas(&self, class: UserClass) -> &[f64] {
        match class {
            UserClass::Center => &self.cc_area,
            UserClass::Edge => &self.ce_area,
        }
    }

    pub fn loads(&self, class: UserClass) -> &[usize] {
        match class {
            UserClass::Center => &self.cc_load,
            UserClass::Edge => &self.ce_load,
        }
    }

    pub fn mean_area(&self, class: UserClass) -> f64 {
        let a = self.areas(class);
        a.iter().sum::<f64>() / a.len() as f64
    }

    pub fn second_moment(&self, class: UserClass) -> f64 {
        let a = self.areas(class);
        a.iter().map(|x| x * x).sum::<f64>() / a.len() as f64
    }

    /// Relative frequency of `N = n` for `n = 1..=n_max` (index `n − 1`).
    pub fn load_histogram(&self, class: UserClass, n_max: usize) -> Vec<f64> {
        let loads = self.loads(class);
        let mut h = vec![0.0; n_max];
        for &n in loads {
            if (1..=n_max).contains(&n) {
                h[n - 1] += 1.0;
            }
        }
        h.iter_mut().for_each(|v| *v /= loads.len() as f64);
        h
    }

    /// Total-variation distance between the sampled loads and `pmf`.
    pub fn total_variation(&self, class: UserClass, pmf: &LoadPmf) -> f64 {
        let top = self.loads(class).iter().copied().max().unwrap_or(1).max(pmf.n_max);
        let h = self.load_histogram(class, top);
        let body: f64 = (1..=top).map(|n| (h[n - 1] - pmf.prob(n)).abs()).sum();
        0.5 * (body + pmf.tail_mass)
    }
}

pub fn estimate_areas_and_loads(p: &SystemParams, cfg: &SimConfig) -> Result<AreaLoadSamples, ModelError> {
    let rows = per_realization(cfg, |rng| {
        let real = realize_typical_cell(p, cfg, rng)?;
        let (ac, ae) = real.region_areas(p.tau, cfg.area_samples, rng);
        Ok((ac, ae, sample_ztp(p.nu * ac, rng), sample_ztp(p.nu * ae, rng)))
    })?;
    let mut out = AreaLoadSamples::default();
    for (ac, ae, nc, ne) in rows {
        out.cc_area.push(ac);
        out.ce_area.push(ae);
        out.cc_load.push(nc);
        out.ce_load.push(ne);
    }
    Ok(out)
}

/// Conditional rates and mean delays of one class.
#[derive(Debug, Clone)]
pub struct RateDelaySamples {
    pub user_class: UserClass,
    pub allocation: Allocation,
    /// Rates in bits/slot/Hz, sorted.
    pub rates: Vec<f64>,
    /// Finite mean delays in slots, sorted.
    pub delays: Vec<f64>,
    /// Realizations whose queue is unstable.
    pub unstable: usize,
}

impl RateDelaySamples {
    fn len(&self) -> f64 {
        self.rates.len() as f64
    }

    pub fn rate_cdf(&self, r: f64) -> f64 {
        self.rates.partition_point(|&x| x <= r) as f64 / self.len()
    }

    /// Fraction of realizations with mean delay at least `t`.
    pub fn delay_outage(&self, t: f64) -> f64 {
        let below = self.delays.partition_point(|&d| d < t);
        (self.delays.len() - below + self.unstable) as f64 / self.len()
    }
}

/// Rates and mean delays of the typical CC and CE users.
///
/// Success probability and load come from the same realization: the load
/// is drawn given the realized region area.
pub fn estimate_rate_delay(
    p: &SystemParams,
    alloc: Allocation,
    traffic: &TrafficParams,
    cfg: &SimConfig,
) -> Result<[RateDelaySamples; 2], ModelError> {
    let chis = [chi_or_inf(UserClass::Center, alloc, p)?, chi_or_inf(UserClass::Edge, alloc, p)?];
    let rows = per_realization(cfg, |rng| {
        let real = realize_typical_cell(p, cfg, rng)?;
        let (ac, ae) = real.region_areas(p.tau, cfg.area_samples, rng);
        let loads = [sample_ztp(p.nu * ac, rng), sample_ztp(p.nu * ae, rng)];
        Ok(UserClass::BOTH.map(|class| {
            let k = class as usize;
            let user = real.draw_user_in(class, p.tau, rng);
            let succ = cond_success_prob(&real, &user, chis[k], p, cfg);
            let service = time_share(class, alloc) * succ / loads[k] as f64;
            let rate = service * (1.0 + p.beta(class)).log2();
            (rate, cond_mean_delay(service, traffic.arrival(class)))
        }))
    })?;
    Ok(UserClass::BOTH.map(|class| {
        let k = class as usize;
        let mut rates: Vec<f64> = rows.iter().map(|r| r[k].0).collect();
        rates.sort_by(f64::total_cmp);
        let mut delays: Vec<f64> = rows.iter().filter_map(|r| r[k].1.slots()).collect();
        delays.sort_by(f64::total_cmp);
        let unstable = rows.iter().filter(|r| r[k].1 == MeanDelay::Unstable).count();
        RateDelaySamples { user_class: class, allocation: alloc, rates, delays, unstable }
    }))
}
