//! Areas of the CC and CE regions of the typical cell, their gamma fits and
//! the resulting user-load distributions.
//!
//! A point `x` lies in the typical cell when the disk `B(x, |x|)` is empty,
//! in its CC region when `B(x, |x|/τ)` is empty, and in its CE region when
//! the first disk is empty but the second is not. Area moments follow from
//! `E|A|² = ∫∫ P[x1, x2 ∈ A] dx1 dx2` and the void probabilities of unions
//! of such disks.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::numerics::{hurwitz_zeta_scaled, log_gamma, quad_finite, QuadSpec};
use crate::params::{SystemParams, UserClass};
use crate::ModelError;

const MAX_LOAD: usize = 200;
const TAIL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionAreaStats {
    pub mean: f64,
    pub second_moment: f64,
    pub region: UserClass,
}

impl RegionAreaStats {
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

/// Gamma law with rate `gamma1` and shape `gamma2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaFit {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl GammaFit {
    pub fn mean(&self) -> f64 {
        self.gamma2 / self.gamma1
    }

    pub fn variance(&self) -> f64 {
        self.gamma2 / (self.gamma1 * self.gamma1)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        statrs::function::gamma::gamma_lr(self.gamma2, self.gamma1 * x)
    }
}

/// Distribution of the number of users `N ≥ 1` in a region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadPmf {
    pub region: UserClass,
    pub nu: f64,
    /// `probs[i] = P[N = i + 1]`.
    pub probs: Vec<f64>,
    /// `Σ P[N = n] / n`, the mean scheduling share of a user.
    pub xi: f64,
    pub n_max: usize,
    /// Mass not represented in `probs`.
    pub tail_mass: f64,
}

impl LoadPmf {
    pub fn prob(&self, n: usize) -> f64 {
        if n == 0 || n > self.n_max {
            0.0
        } else {
            self.probs[n - 1]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (i + 1, p))
    }

    pub fn mean(&self) -> f64 {
        self.expect(|n| n as f64)
    }

    /// `Σ_n f(n) P[N = n]` over the stored support.
    pub fn expect<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        self.iter().map(|(n, p)| f(n) * p).sum()
    }

    /// A zero-truncated Poisson law with the given mean of the parent.
    pub fn zero_truncated_poisson(region: UserClass, mean: f64) -> Result<LoadPmf, ModelError> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(ModelError::Domain(format!("Poisson mean {mean} must be positive")));
        }
        let probs = collect_pmf(None, |n| ztp_ln_pmf(n, mean))?;
        Ok(LoadPmf::from_probs(region, f64::NAN, probs))
    }

    fn from_probs(region: UserClass, nu: f64, probs: Vec<f64>) -> LoadPmf {
        let total: f64 = probs.iter().sum();
        let xi = probs.iter().enumerate().map(|(i, p)| p / (i + 1) as f64).sum();
        LoadPmf { region, nu, n_max: probs.len(), probs, xi, tail_mass: (1.0 - total).max(0.0) }
    }
}

fn ztp_ln_pmf(n: usize, mean: f64) -> f64 {
    let n = n as f64;
    n * mean.ln() - mean - log_gamma(n + 1.0).expect("positive argument") - (-(-mean).exp_m1()).ln()
}

/// Union area of two disks whose radii `z1`, `z2` meet at a common boundary
/// point under the angle `u` between the centers.
///
/// `u ∈ [0, π]`; the disks then always overlap, so the lens formula applies.
pub fn union_area(r1: f64, r2: f64, u: f64) -> Result<f64, ModelError> {
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(ModelError::Domain(format!("radii must be positive, got ({r1}, {r2})")));
    }
    if !(0.0..=PI).contains(&u) {
        return Err(ModelError::Domain(format!("angle {u} outside [0, pi]")));
    }
    Ok(union_from_cos(r1, r2, u.cos()))
}

/// `U(z1, z2, u)` given `cos u`. A cosine above one means one disk contains
/// the other; below minus one the disks are apart.
fn union_from_cos(z1: f64, z2: f64, c: f64) -> f64 {
    if c >= 1.0 {
        let z = z1.max(z2);
        return PI * z * z;
    }
    if c <= -1.0 {
        return PI * (z1 * z1 + z2 * z2);
    }
    let d = (z1 * z1 + z2 * z2 - 2.0 * z1 * z2 * c).max(0.0).sqrt();
    if d == 0.0 {
        return PI * z1 * z1;
    }
    let w = |a: f64, b: f64| ((a - b * c) / d).clamp(-1.0, 1.0).acos();
    let (w1, w2) = (w(z1, z2), w(z2, z1));
    z1 * z1 * (PI - w1 + 0.5 * (2.0 * w1).sin()) + z2 * z2 * (PI - w2 + 0.5 * (2.0 * w2).sin())
}

/// Union area of the disks of radii `z1`, `z2` whose centers are `d` apart.
fn disk_union(z1: f64, z2: f64, d: f64) -> f64 {
    if z1 <= 0.0 || z2 <= 0.0 {
        let z = z1.max(z2);
        return PI * z * z;
    }
    union_from_cos(z1, z2, (z1 * z1 + z2 * z2 - d * d) / (2.0 * z1 * z2))
}

/// The four unions entering the pair probabilities, for centers at polar
/// radii `r1`, `r2` and angular separation `u`: `(|C_o|, |C_1|, |C_2|, |C_3|)`.
fn pair_unions(r1: f64, r2: f64, u: f64, tau: f64) -> [f64; 4] {
    let d = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * u.cos()).max(0.0).sqrt();
    let (t1, t2) = (r1 / tau, r2 / tau);
    [disk_union(r1, r2, d), disk_union(t1, r2, d), disk_union(r1, t2, d), disk_union(t1, t2, d)]
}

/// `P[x1, x2 ∈ region]` for points at polar radii `r1`, `r2` separated by
/// the angle `u`.
pub fn pair_probability(region: UserClass, r1: f64, r2: f64, u: f64, p: &SystemParams) -> f64 {
    let [co, c1, c2, c3] = pair_unions(r1, r2, u, p.tau);
    let v = |a: f64| (-p.lambda * a).exp();
    match region {
        UserClass::Center => v(c3),
        // both disks B empty, and neither enlarged disk empty
        UserClass::Edge => (v(co) - v(c1) - v(c2) + v(c3)).max(0.0),
    }
}

/// Exact means `(τ²/λ, (1 − τ²)/λ)`.
pub fn mean_areas(p: &SystemParams) -> (f64, f64) {
    let t2 = p.tau * p.tau;
    (t2 / p.lambda, (1.0 - t2) / p.lambda)
}

fn area_spec() -> QuadSpec {
    QuadSpec { rel_tol: 1e-10, abs_tol: 1e-14, max_subdivisions: 2000 }
}

/// Points in `(0, 1)` where one of the unions changes between the lens and
/// the containment branch, for `r1 = s·r2` at angle cosine `c`.
fn containment_breaks(c: f64, tau: f64) -> Vec<f64> {
    let k = 1.0 / (tau * tau);
    let inv = 1.0 / tau;
    let q = (k - c) / (k - 1.0);
    let mut out =
        vec![1.0 / (q + (q * q - 1.0).max(0.0).sqrt()), 2.0 * (inv - c) / (k - 1.0), (k - 1.0) / (2.0 * (inv - c))];
    out.retain(|s| s.is_finite() && *s > 0.0 && *s < 1.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// `E|A|²` for the CC or CE region.
///
/// Every union area scales as `r2²` once `r1 = s·r2`, so the radial integral
/// of `r2³ exp(−λ r2² A)` is done in closed form, `1/(2λ²A²)`, and
/// `E|A|² = (4π/λ²) ∫_0^π ∫_0^1 s Σ ±A^{-2} ds du`.
fn second_moment(region: UserClass, p: &SystemParams) -> Result<f64, ModelError> {
    let tau = p.tau;
    let inner = |u: f64| -> Result<f64, ModelError> {
        let c = u.cos();
        let integrand = |s: f64| {
            let [co, c1, c2, c3] = pair_unions(s, 1.0, u, tau);
            let g = |a: f64| 1.0 / (a * a);
            s * match region {
                UserClass::Center => g(c3),
                UserClass::Edge => g(co) - g(c1) - g(c2) + g(c3),
            }
        };
        let mut knots = vec![0.0];
        knots.extend(containment_breaks(c, tau));
        knots.push(1.0);
        let mut total = 0.0;
        for w in knots.windows(2) {
            total += quad_finite(integrand, w[0], w[1], &area_spec())?;
        }
        Ok(total)
    };
    let failure = RefCell::new(None);
    let outer = quad_finite(
        |u| match inner(u) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        PI,
        &QuadSpec { rel_tol: 1e-9, ..area_spec() },
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(4.0 * PI * outer? / (p.lambda * p.lambda))
}

pub fn second_moment_cc(p: &SystemParams) -> Result<f64, ModelError> {
    second_moment(UserClass::Center, p)
}

pub fn second_moment_ce(p: &SystemParams) -> Result<f64, ModelError> {
    second_moment(UserClass::Edge, p)
}

pub fn area_stats(region: UserClass, p: &SystemParams) -> Result<RegionAreaStats, ModelError> {
    let (cc, ce) = mean_areas(p);
    let mean = match region {
        UserClass::Center => cc,
        UserClass::Edge => ce,
    };
    Ok(RegionAreaStats { mean, second_moment: second_moment(region, p)?, region })
}

pub fn gamma_fit(stats: &RegionAreaStats) -> Result<GammaFit, ModelError> {
    let var = stats.variance();
    if !(var > 0.0) || !(stats.mean > 0.0) {
        return Err(ModelError::DegenerateFit(format!("area mean {} with variance {var}", stats.mean)));
    }
    let gamma1 = stats.mean / var;
    Ok(GammaFit { gamma1, gamma2: gamma1 * stats.mean })
}

/// Load law when the region area is gamma distributed and, given the area
/// `a`, the load is zero-truncated Poisson with mean `ν a`.
///
/// Expanding `1/(1 − e^{−νa})` as a geometric series turns every term into a
/// gamma integral, and the series sums to a Hurwitz zeta:
/// `P[N = n] = Γ(n+γ2)/(n! Γ(γ2)) (γ1/ν)^{γ2} ζ(n+γ2, 1+γ1/ν)`.
///
/// Without `n_max` the support grows until the tail is below `1e-8` (at most
/// 200 users). A support that leaves more than `1e-8` behind is an error.
pub fn load_pmf(region: UserClass, fit: &GammaFit, nu: f64, n_max: Option<usize>) -> Result<LoadPmf, ModelError> {
    if !(nu > 0.0) || !(fit.gamma1 > 0.0 && fit.gamma2 > 0.0) {
        return Err(ModelError::Domain(format!("need nu > 0 and a valid gamma fit, got {nu}, {fit:?}")));
    }
    let (g1, g2) = (fit.gamma1, fit.gamma2);
    let q = 1.0 + g1 / nu;
    let base = -log_gamma(g2)? + g2 * (g1 / nu).ln();
    let ln_pmf = |n: usize| -> Result<f64, ModelError> {
        let s = n as f64 + g2;
        Ok(base + log_gamma(s)? - log_gamma(n as f64 + 1.0)? - s * q.ln() + hurwitz_zeta_scaled(s, q)?.ln())
    };
    let mut err = None;
    let probs = collect_pmf(n_max, |n| match ln_pmf(n) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NEG_INFINITY
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(LoadPmf::from_probs(region, nu, probs))
}

fn collect_pmf<F: FnMut(usize) -> f64>(n_max: Option<usize>, mut ln_pmf: F) -> Result<Vec<f64>, ModelError> {
    let cap = n_max.unwrap_or(MAX_LOAD);
    let mut probs = Vec::new();
    let mut total = 0.0;
    for n in 1..=cap {
        let p = ln_pmf(n).exp();
        probs.push(p);
        total += p;
        if n_max.is_none() && total > 1.0 - TAIL_TOL {
            return Ok(probs);
        }
    }
    let tail = 1.0 - total;
    if tail > TAIL_TOL {
        return Err(ModelError::Truncation { n_max: cap, tail });
    }
    Ok(probs)
}
