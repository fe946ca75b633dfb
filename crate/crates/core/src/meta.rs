//! Moments of the conditional success probability (the SIR meta
//! distribution) and their beta approximations.
//!
//! A CC user under NOMA succeeds on its own layer when
//! `h > R_o^α I χ_c`, a CE user when `h > R_o^α I χ_e`. OMA users see the raw
//! thresholds `β_c`, `β_e`. The `b`-th moment for threshold `χ` is
//!
//! ```text
//! M_b(χ) = ρ²/|V| ∫_V (ρ + v Z_b(χ, v))^{-2} (1 + χ v^{1/δ})^{-b} dv
//! ```
//!
//! with `V = [0, τ²]` for CC and `[τ², 1]` for CE users.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::numerics::{quad_finite, reg_inc_beta, NumericsError, QuadSpec};
use crate::params::{Allocation, Scheme, SystemParams, UserClass};
use crate::ModelError;

/// Slack used when deciding whether two moments leave room for a beta fit.
const FIT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetaMoments {
    pub m1: f64,
    pub m2: f64,
    pub user_class: UserClass,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaFit {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl BetaFit {
    pub fn mean(&self) -> f64 {
        self.kappa1 / (self.kappa1 + self.kappa2)
    }

    pub fn second_moment(&self) -> f64 {
        let (a, b) = (self.kappa1, self.kappa2);
        a * (a + 1.0) / ((a + b) * (a + b + 1.0))
    }
}

/// A beta fit, or the point mass used when the moments have no spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetaFit {
    Beta(BetaFit),
    PointMass { at: f64 },
}

impl MetaFit {
    pub fn from_moments(m: &MetaMoments) -> MetaFit {
        match beta_fit(m) {
            Ok(fit) => MetaFit::Beta(fit),
            Err(_) => {
                log::debug!("degenerate meta fit for {m:?}; using a point mass");
                MetaFit::PointMass { at: m.m1.clamp(0.0, 1.0) }
            }
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, MetaFit::PointMass { .. })
    }

    /// `P[P_s ≤ x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match *self {
            MetaFit::Beta(fit) => 1.0 - meta_ccdf(x, &fit),
            MetaFit::PointMass { at } => {
                if x >= at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `P[P_s > x]`.
    pub fn ccdf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
}

/// Effective CC threshold under NOMA: the CC user must decode the CE layer
/// first and then its own.
pub fn chi_c(theta: f64, beta_c: f64, beta_e: f64) -> Result<f64, ModelError> {
    let sic = chi_e(theta, beta_e)?;
    if theta <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((beta_c / theta).max(sic))
}

pub fn chi_e(theta: f64, beta_e: f64) -> Result<f64, ModelError> {
    let slack = 1.0 - theta * (1.0 + beta_e);
    if !(theta >= 0.0) || slack <= 0.0 {
        return Err(ModelError::Infeasible {
            value: theta,
            reason: format!("NOMA needs theta < 1/(1+beta_e) = {}", 1.0 / (1.0 + beta_e)),
        });
    }
    Ok(beta_e / slack)
}

/// Composite threshold of `class` under `alloc`.
pub fn chi(class: UserClass, alloc: Allocation, p: &SystemParams) -> Result<f64, ModelError> {
    match (alloc, class) {
        (Allocation::Noma { theta }, UserClass::Center) => chi_c(theta, p.beta_c, p.beta_e),
        (Allocation::Noma { theta }, UserClass::Edge) => chi_e(theta, p.beta_e),
        (Allocation::Oma { .. }, c) => Ok(p.beta(c)),
    }
}

fn z_spec() -> QuadSpec {
    QuadSpec { rel_tol: 1e-10, abs_tol: 1e-14, max_subdivisions: 500 }
}

/// `Z_b(χ, a) = χ^δ ∫_{χ^{-δ}/a}^∞ [1 − (1 + t^{-1/δ})^{-b}] dt`.
pub fn z_b(chi: f64, a: f64, b: f64, delta: f64) -> Result<f64, NumericsError> {
    if !(chi > 0.0) || !(a > 0.0) || !(b >= 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(NumericsError::Domain {
            func: "z_b",
            detail: format!("need chi > 0, a > 0, b >= 0, 0 < delta < 1; got ({chi}, {a}, {b}, {delta})"),
        });
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let inv_delta = 1.0 / delta;
    let g = |t: f64| -(-b * t.powf(-inv_delta).ln_1p()).exp_m1();
    let lower = chi.powf(-delta) / a;
    let spec = z_spec();
    let integral = if lower >= 1.0 {
        tail(lower, b, delta, &spec)?
    } else {
        quad_finite(g, lower, 1.0, &spec)? + tail(1.0, b, delta, &spec)?
    };
    Ok(chi.powf(delta) * integral)
}

/// `∫_L^∞ [1 − (1 + t^{-1/δ})^{-b}] dt` through `t = L u^{-m}`, `m = δ/(1−δ)`.
///
/// With this `m` the integrand in `u` tends to a constant at `u → 0` and is a
/// series in `u^{1/(1−δ)}`, so no endpoint singularity is left for any α.
fn tail(lower: f64, b: f64, delta: f64, spec: &QuadSpec) -> Result<f64, NumericsError> {
    let m = delta / (1.0 - delta);
    let scale = m * lower.powf(1.0 - 1.0 / delta);
    let base = lower.powf(-1.0 / delta);
    let h = |u: f64| {
        let x = base * u.powf(1.0 / (1.0 - delta));
        if x < 1e-280 {
            return b;
        }
        -(-b * x.ln_1p()).exp_m1() / x
    };
    Ok(scale * quad_finite(h, 0.0, 1.0, spec)?)
}

fn moment_spec() -> QuadSpec {
    QuadSpec { rel_tol: 1e-9, abs_tol: 1e-13, max_subdivisions: 500 }
}

/// `b`-th moment of the meta distribution of `class` at composite threshold
/// `chi`. Both schemes share this kernel; only `chi` differs.
pub fn moment(class: UserClass, b: f64, chi: f64, p: &SystemParams) -> Result<f64, ModelError> {
    if !(b >= 0.0) {
        return Err(ModelError::Domain(format!("moment order b = {b} must be nonnegative")));
    }
    if chi.is_infinite() && chi > 0.0 {
        return Ok(if b == 0.0 { 1.0 } else { 0.0 });
    }
    if !(chi > 0.0) {
        return Err(ModelError::Domain(format!("threshold chi = {chi} must be positive")));
    }
    let rho = p.rho();
    let delta = p.delta();
    let t2 = p.tau * p.tau;
    let (lo, hi) = match class {
        UserClass::Center => (0.0, t2),
        UserClass::Edge => (t2, 1.0),
    };
    // quadrature closures cannot return errors, so remember the first one
    let failure: RwLock<Option<NumericsError>> = RwLock::new(None);
    let integrand = |v: f64| {
        if v <= 0.0 {
            return 1.0 / (rho * rho);
        }
        let z = match z_b(chi, v, b, delta) {
            Ok(z) => z,
            Err(e) => {
                failure.write().unwrap().get_or_insert(e);
                return 0.0;
            }
        };
        let base = rho + v * z;
        (-b * (chi * v.powf(1.0 / delta)).ln_1p()).exp() / (base * base)
    };
    let integral = quad_finite(integrand, lo, hi, &moment_spec())?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e.into());
    }
    Ok((rho * rho * integral / (hi - lo)).clamp(0.0, 1.0))
}

pub fn moment_cc_noma(b: f64, theta: f64, p: &SystemParams) -> Result<f64, ModelError> {
    moment(UserClass::Center, b, chi_c(theta, p.beta_c, p.beta_e)?, p)
}

pub fn moment_ce_noma(b: f64, theta: f64, p: &SystemParams) -> Result<f64, ModelError> {
    moment(UserClass::Edge, b, chi_e(theta, p.beta_e)?, p)
}

pub fn moment_cc_oma(b: f64, p: &SystemParams) -> Result<f64, ModelError> {
    moment(UserClass::Center, b, p.beta_c, p)
}

pub fn moment_ce_oma(b: f64, p: &SystemParams) -> Result<f64, ModelError> {
    moment(UserClass::Edge, b, p.beta_e, p)
}

/// First two moments of `class` under `alloc`.
pub fn meta_moments(class: UserClass, alloc: Allocation, p: &SystemParams) -> Result<MetaMoments, ModelError> {
    let x = chi(class, alloc, p)?;
    Ok(MetaMoments {
        m1: moment(class, 1.0, x, p)?,
        m2: moment(class, 2.0, x, p)?,
        user_class: class,
        scheme: alloc.scheme(),
    })
}

/// Moment-matched beta parameters.
pub fn beta_fit(m: &MetaMoments) -> Result<BetaFit, ModelError> {
    let (m1, m2) = (m.m1, m.m2);
    let var = m2 - m1 * m1;
    if !(m1 > 0.0 && m1 < 1.0) || var <= FIT_EPS * m1.max(FIT_EPS) || m2 >= m1 - FIT_EPS {
        return Err(ModelError::DegenerateFit(format!("m1 = {m1}, m2 = {m2}")));
    }
    let kappa2 = (m1 - m2) * (1.0 - m1) / var;
    let kappa1 = m1 * kappa2 / (1.0 - m1);
    Ok(BetaFit { kappa1, kappa2 })
}

/// `P[P_s > x] ≈ 1 − I(x; κ1, κ2)`.
pub fn meta_ccdf(x: f64, fit: &BetaFit) -> f64 {
    let x = x.clamp(0.0, 1.0);
    1.0 - reg_inc_beta(x, fit.kappa1, fit.kappa2).expect("beta fit parameters are positive")
}

/// Keyed by class and the bit patterns of `b` and `χ`.
type MomentCache = HashMap<(UserClass, u64, u64), f64>;

/// Moment evaluator for fixed `(α, τ)` that memoizes results by
/// `(class, b, χ)`.
///
/// Values are computed outside the lock, so concurrent callers never wait on
/// each other's quadrature. Two threads racing on the same key compute the
/// same number. Clones share the cache.
#[derive(Debug, Clone)]
pub struct MetaModel {
    params: SystemParams,
    cache: Arc<RwLock<MomentCache>>,
}

impl MetaModel {
    pub fn new(params: SystemParams) -> Self {
        MetaModel { params, cache: Arc::default() }
    }

    /// Model for `params`, keeping the cache when `α` and `τ` are unchanged
    /// (moments depend on nothing else once `χ` is given).
    pub fn with_params(&self, params: SystemParams) -> Self {
        if params.alpha == self.params.alpha && params.tau == self.params.tau {
            MetaModel { params, cache: Arc::clone(&self.cache) }
        } else {
            MetaModel::new(params)
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn moment(&self, class: UserClass, b: f64, chi: f64) -> Result<f64, ModelError> {
        let key = (class, b.to_bits(), chi.to_bits());
        if let Some(&v) = self.cache.read().unwrap().get(&key) {
            return Ok(v);
        }
        let v = moment(class, b, chi, &self.params)?;
        self.cache.write().unwrap().insert(key, v);
        Ok(v)
    }

    pub fn m1(&self, class: UserClass, alloc: Allocation) -> Result<f64, ModelError> {
        self.moment(class, 1.0, chi(class, alloc, &self.params)?)
    }

    pub fn moments(&self, class: UserClass, alloc: Allocation) -> Result<MetaMoments, ModelError> {
        let x = chi(class, alloc, &self.params)?;
        Ok(MetaMoments {
            m1: self.moment(class, 1.0, x)?,
            m2: self.moment(class, 2.0, x)?,
            user_class: class,
            scheme: alloc.scheme(),
        })
    }

    pub fn fit(&self, class: UserClass, alloc: Allocation) -> Result<MetaFit, ModelError> {
        Ok(MetaFit::from_moments(&self.moments(class, alloc)?))
    }

    pub fn cache_len(&self) -> usize {
        self.cache.read().unwrap().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::db_to_linear;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn fig2() -> SystemParams {
        SystemParams::default().with_betas_db(0.0, -3.0)
    }

    fn theta_hat(bc: f64, be: f64) -> f64 {
        bc / (bc + be + bc * be)
    }

    #[test]
    fn chi_examples() {
        let be = db_to_linear(-3.0);
        let th = 0.4994;
        let a = 1.0 / th;
        let b = be / (1.0 - th * (1.0 + be));
        assert_abs_diff_eq!(a, b, epsilon = 2e-3);
        assert_abs_diff_eq!(chi_c(th, 1.0, be).unwrap(), 2.0024, epsilon = 2e-3);
        assert_abs_diff_eq!(chi_e(0.4, 0.5012).unwrap(), 0.5012 / (1.0 - 0.4 * 1.5012), epsilon = 1e-14);
        assert_abs_diff_eq!(chi_e(0.4, 0.5012).unwrap(), 1.2545, epsilon = 1e-4);
        assert_eq!(chi_e(0.0, be).unwrap(), be);
        assert!(chi_c(1e-9, 1.0, be).unwrap() > 1e8);
        let nc = 1.0 / (1.0 + be);
        assert!(chi_e(nc * (1.0 - 1e-10), be).unwrap() > 1e8);
        assert!(matches!(chi_e(nc, be), Err(ModelError::Infeasible { .. })));
        assert!(chi_c(0.9, 1.0, be).is_err());
    }

    #[test]
    fn chi_branches_switch_at_theta_hat() {
        let (bc, be) = (1.0, db_to_linear(-3.0));
        let th = theta_hat(bc, be);
        for &t in &[0.1, 0.3, th * 0.999] {
            assert_eq!(chi_c(t, bc, be).unwrap(), bc / t);
        }
        for &t in &[th * 1.001, 0.55, 0.6] {
            assert_eq!(chi_c(t, bc, be).unwrap(), chi_e(t, be).unwrap());
        }
    }

    #[test]
    fn z_b_vanishes_for_b_zero() {
        assert_eq!(z_b(2.0, 0.3, 0.0, 0.5).unwrap(), 0.0);
        assert_eq!(z_b(0.01, 1.0, 0.0, 0.8).unwrap(), 0.0);
    }

    #[test]
    fn z_b_closed_form_at_alpha_four() {
        // b = 1, δ = 1/2: integrand 1/(1 + t²)
        for &chi in &[0.1, 1.0, 2.0, 50.0] {
            for &a in &[1e-4, 0.05, 0.3, 0.49, 1.0] {
                let s = f64::sqrt(chi);
                let exact = s * (PI / 2.0 - (1.0 / (s * a)).atan());
                let got = z_b(chi, a, 1.0, 0.5).unwrap();
                assert!((got - exact).abs() <= 1e-9 * exact.max(1e-12), "chi={chi} a={a}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn z_b_monotone_in_b_and_chi() {
        for &d in &[0.4, 0.5, 0.8] {
            assert!(z_b(1.5, 0.4, 2.0, d).unwrap() > z_b(1.5, 0.4, 1.0, d).unwrap());
            assert!(z_b(3.0, 0.4, 1.0, d).unwrap() > z_b(1.5, 0.4, 1.0, d).unwrap());
            assert!(z_b(1e-3, 0.01, 2.0, d).unwrap() > 0.0);
            assert!(z_b(1e3, 1.0, 2.0, d).unwrap().is_finite());
        }
        assert!(z_b(-1.0, 0.4, 1.0, 0.5).is_err());
    }

    #[test]
    fn zeroth_moment_is_one() {
        let p = fig2();
        assert_abs_diff_eq!(moment_cc_noma(0.0, 0.3, &p).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(moment_ce_noma(0.0, 0.3, &p).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(moment_cc_oma(0.0, &p).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(moment_ce_oma(0.0, &p).unwrap(), 1.0, epsilon = 1e-8);
    }

    /// The same moment written as the expectation over `(R_o, R_d)` before
    /// the radial integral is solved; `b = 1`, `α = 4`.
    fn first_moment_by_distances(class: UserClass, chi: f64, p: &SystemParams) -> f64 {
        use crate::distance::{joint_pdf_cc, joint_pdf_ce};
        let spec = QuadSpec::default();
        let s = chi.sqrt();
        let tilde_z = |a: f64| s * (PI / 2.0 - (1.0 / (s * a * a)).atan());
        let g = |ro: f64, rd: f64| {
            let a = ro / rd;
            (-PI * p.lambda * ro * ro * tilde_z(a)).exp() / (1.0 + chi * a.powi(4))
        };
        let cut = 9.0 / p.lambda.sqrt();
        quad_finite(
            |rd| {
                let (lo, hi) = match class {
                    UserClass::Center => (0.0, p.tau * rd),
                    UserClass::Edge => (p.tau * rd, rd),
                };
                quad_finite(
                    |ro| {
                        let f = match class {
                            UserClass::Center => joint_pdf_cc(ro, rd, p),
                            UserClass::Edge => joint_pdf_ce(ro, rd, p),
                        };
                        f * g(ro, rd)
                    },
                    lo,
                    hi,
                    &spec,
                )
                .unwrap()
            },
            0.0,
            cut,
            &spec,
        )
        .unwrap()
    }

    #[test]
    fn first_moment_matches_distance_expectation() {
        let p = fig2();
        for &(class, chi) in
            &[(UserClass::Center, 1.0), (UserClass::Center, 3.3), (UserClass::Edge, 0.5), (UserClass::Edge, 1.7)]
        {
            let fast = moment(class, 1.0, chi, &p).unwrap();
            let slow = first_moment_by_distances(class, chi, &p);
            assert!((fast - slow).abs() < 1e-6, "{class:?} chi={chi}: {fast} vs {slow}");
        }
    }

    #[test]
    fn lambda_drops_out() {
        let p = fig2();
        let q = SystemParams { lambda: 3.0, ..p };
        assert_eq!(moment_cc_noma(1.0, 0.3, &p).unwrap(), moment_cc_noma(1.0, 0.3, &q).unwrap());
        assert_eq!(moment_ce_noma(2.0, 0.3, &p).unwrap(), moment_ce_noma(2.0, 0.3, &q).unwrap());
        // the distance-based form does depend on λ internally
        let a = first_moment_by_distances(UserClass::Center, 2.0, &p);
        let b = first_moment_by_distances(UserClass::Center, 2.0, &q);
        assert_abs_diff_eq!(a, b, epsilon = 1e-7);
    }

    #[test]
    fn moment_ordering_on_theta_grid() {
        let p = fig2();
        let nc = 1.0 / (1.0 + p.beta_e);
        for i in 1..8 {
            let theta = nc * i as f64 / 8.0;
            for class in UserClass::BOTH {
                let m = meta_moments(class, Allocation::Noma { theta }, &p).unwrap();
                assert!(m.m2 <= m.m1 && m.m1 * m.m1 <= m.m2, "{m:?}");
                let o = meta_moments(class, Allocation::Oma { eta: 0.5 }, &p).unwrap();
                assert!(o.m1 >= m.m1);
            }
        }
    }

    #[test]
    fn shared_kernel_between_schemes() {
        let p = fig2();
        let theta = 0.2;
        let x = chi_c(theta, p.beta_c, p.beta_e).unwrap();
        let q = SystemParams { beta_c: x, ..p };
        assert_eq!(moment_cc_noma(1.0, theta, &p).unwrap(), moment_cc_oma(1.0, &q).unwrap());
    }

    #[test]
    fn cc_peaks_at_theta_hat_and_ce_decreases() {
        let p = fig2();
        let nc = 1.0 / (1.0 + p.beta_e);
        let n = 60;
        let grid: Vec<f64> = (1..n).map(|i| nc * i as f64 / n as f64).collect();
        let cc: Vec<f64> = grid.iter().map(|&t| moment_cc_noma(1.0, t, &p).unwrap()).collect();
        let ce: Vec<f64> = grid.iter().map(|&t| moment_ce_noma(1.0, t, &p).unwrap()).collect();
        let best = (0..grid.len()).max_by(|&a, &b| cc[a].total_cmp(&cc[b])).unwrap();
        let th = theta_hat(p.beta_c, p.beta_e);
        assert!((grid[best] - th).abs() <= nc / n as f64, "argmax {} vs {th}", grid[best]);
        assert!(ce.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn beta_fit_examples() {
        let m = MetaMoments { m1: 0.6, m2: 0.4, user_class: UserClass::Center, scheme: Scheme::Noma };
        let fit = beta_fit(&m).unwrap();
        assert_abs_diff_eq!(fit.kappa2, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.kappa1, 3.0, epsilon = 1e-12);
        let flat = MetaMoments { m1: 0.5, m2: 0.25, ..m };
        assert!(matches!(beta_fit(&flat), Err(ModelError::DegenerateFit(_))));
        let surrogate = MetaFit::from_moments(&flat);
        assert!(surrogate.is_degenerate());
        assert_eq!(surrogate.cdf(0.49), 0.0);
        assert_eq!(surrogate.cdf(0.5), 1.0);
    }

    #[test]
    fn meta_ccdf_endpoints() {
        let fit = BetaFit { kappa1: 3.0, kappa2: 2.0 };
        assert_eq!(meta_ccdf(0.0, &fit), 1.0);
        assert_eq!(meta_ccdf(1.0, &fit), 0.0);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = meta_ccdf(i as f64 / 100.0, &fit);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn model_cache_matches_free_functions() {
        let p = fig2();
        let model = MetaModel::new(p);
        let alloc = Allocation::Noma { theta: 0.25 };
        let a = model.moments(UserClass::Edge, alloc).unwrap();
        let b = meta_moments(UserClass::Edge, alloc, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(model.cache_len(), 2);
        model.moments(UserClass::Edge, alloc).unwrap();
        assert_eq!(model.cache_len(), 2);
    }

    proptest! {
        #[test]
        fn beta_fit_round_trip(m1 in 0.02f64..0.98, frac in 0.01f64..0.99) {
            let m2 = m1 * m1 + frac * (m1 - m1 * m1);
            let m = MetaMoments { m1, m2, user_class: UserClass::Edge, scheme: Scheme::Oma };
            let fit = beta_fit(&m).unwrap();
            prop_assert!((fit.mean() - m1).abs() < 1e-10);
            prop_assert!((fit.second_moment() - m2).abs() < 1e-10);
        }

        #[test]
        fn first_moment_decreases_in_threshold(x in 0.05f64..20.0, k in 1.05f64..3.0) {
            let p = fig2();
            for class in UserClass::BOTH {
                prop_assert!(moment(class, 1.0, x * k, &p).unwrap() < moment(class, 1.0, x, &p).unwrap());
            }
        }
    }
}
