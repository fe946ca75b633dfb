//! Serving-link and dominant-interferer distances of CC and CE users.
//!
//! The joint law of `(R_o, R_d)` is approximated by the distances to the two
//! nearest points of a PPP with density `ρλ`, `ρ = 9/7`. Conditioning on
//! `R_o ≤ τR_d` (center) or `R_o > τR_d` (edge) gives the class laws below.

use std::f64::consts::PI;

use rand::Rng;

use crate::numerics::find_root;
use crate::params::{SystemParams, UserClass};
use crate::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistancePair {
    pub r_o: f64,
    pub r_d: f64,
    pub user_class: UserClass,
}

fn rate(p: &SystemParams) -> f64 {
    PI * p.rho() * p.lambda
}

/// `(P[CC], P[CE]) = (τ², 1 − τ²)`.
pub fn class_probabilities(p: &SystemParams) -> (f64, f64) {
    let cc = p.tau * p.tau;
    (cc, 1.0 - cc)
}

pub fn cdf_ro_cc(r_o: f64, p: &SystemParams) -> f64 {
    if r_o <= 0.0 {
        return 0.0;
    }
    -(-rate(p) * r_o * r_o / (p.tau * p.tau)).exp_m1()
}

/// `P[R_d ≤ r_d | R_o = r_o]` for a center user, supported on `r_d ≥ r_o/τ`.
pub fn cdf_rd_given_ro_cc(r_d: f64, r_o: f64, p: &SystemParams) -> Result<f64, ModelError> {
    let edge = r_o / p.tau;
    if r_d < edge * (1.0 - 1e-12) {
        return Err(ModelError::Domain(format!("center-user r_d = {r_d} below the support edge r_o/τ = {edge}")));
    }
    let excess = (r_d * r_d - edge * edge).max(0.0);
    Ok(-(-rate(p) * excess).exp_m1())
}

pub fn joint_pdf_cc(r_o: f64, r_d: f64, p: &SystemParams) -> f64 {
    if r_o <= 0.0 || r_d * p.tau < r_o {
        return 0.0;
    }
    let c = rate(p);
    let ln = 2.0 * (2.0 * c).ln() - 2.0 * p.tau.ln() + r_o.ln() + r_d.ln() - c * r_d * r_d;
    ln.exp()
}

pub fn cdf_ro_ce(r_o: f64, p: &SystemParams) -> f64 {
    if r_o <= 0.0 {
        return 0.0;
    }
    let t2 = p.tau * p.tau;
    let a = rate(p) * r_o * r_o;
    // (1 − e^{−a}) − τ²(1 − e^{−a/τ²}), normalised by P[CE]
    let num = -(-a).exp_m1() + t2 * (-a / t2).exp_m1();
    (num / (1.0 - t2)).clamp(0.0, 1.0)
}

/// `P[R_d ≤ r_d | R_o = r_o]` for an edge user, supported on `[r_o, r_o/τ]`.
pub fn cdf_rd_given_ro_ce(r_d: f64, r_o: f64, p: &SystemParams) -> Result<f64, ModelError> {
    if r_d < r_o * (1.0 - 1e-12) {
        return Err(ModelError::Domain(format!("edge-user r_d = {r_d} below r_o = {r_o}")));
    }
    if r_d >= r_o / p.tau {
        return Ok(1.0);
    }
    let c = rate(p);
    let num = -(-c * (r_d * r_d - r_o * r_o).max(0.0)).exp_m1();
    let den = -(-c * r_o * r_o * (1.0 / (p.tau * p.tau) - 1.0)).exp_m1();
    Ok((num / den).clamp(0.0, 1.0))
}

pub fn joint_pdf_ce(r_o: f64, r_d: f64, p: &SystemParams) -> f64 {
    if r_o <= 0.0 || r_d <= r_o || r_d * p.tau > r_o {
        return 0.0;
    }
    let c = rate(p);
    let ln = 2.0 * (2.0 * c).ln() - (1.0 - p.tau * p.tau).ln() + r_o.ln() + r_d.ln() - c * r_d * r_d;
    ln.exp()
}

pub fn cdf_ro(class: UserClass, r_o: f64, p: &SystemParams) -> f64 {
    match class {
        UserClass::Center => cdf_ro_cc(r_o, p),
        UserClass::Edge => cdf_ro_ce(r_o, p),
    }
}

/// Exact inverse-transform draw of `(R_o, R_d)` for the given class.
pub fn sample_distance_pair<R: Rng + ?Sized>(class: UserClass, p: &SystemParams, rng: &mut R) -> DistancePair {
    let c = rate(p);
    let tau = p.tau;
    // 1 − U lies in (0, 1]
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    match class {
        UserClass::Center => {
            let r_o = tau * (-u1.ln() / c).sqrt();
            let r_d = ((r_o / tau).powi(2) - (-u2).ln_1p() / c).sqrt();
            DistancePair { r_o, r_d, user_class: class }
        }
        UserClass::Edge => {
            let target = 1.0 - u1;
            let mut hi = (1.0 / c).sqrt();
            while cdf_ro_ce(hi, p) < target {
                hi *= 2.0;
            }
            let r_o = find_root(|r| cdf_ro_ce(r, p) - target, 0.0, hi, 1e-13 * hi)
                .expect("CE distance CDF brackets every quantile");
            let span = -(-c * r_o * r_o * (1.0 / (tau * tau) - 1.0)).exp_m1();
            let r_d2 = r_o * r_o - (-u2 * span).ln_1p() / c;
            let r_d = r_d2.sqrt().clamp(r_o, r_o / tau);
            DistancePair { r_o, r_d, user_class: class }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{quad_finite, QuadSpec};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> SystemParams {
        SystemParams { lambda: 1.0, tau: 0.7, ..Default::default() }
    }

    #[test]
    fn class_probabilities_examples() {
        let (cc, ce) = class_probabilities(&params());
        assert_abs_diff_eq!(cc, 0.49, epsilon = 1e-15);
        assert_abs_diff_eq!(ce, 0.51, epsilon = 1e-15);
        let p = SystemParams { tau: 0.5, ..params() };
        assert_eq!(class_probabilities(&p), (0.25, 0.75));
        let p = SystemParams { tau: 1.0 - 1e-12, ..params() };
        let (cc, ce) = class_probabilities(&p);
        assert!((cc - 1.0).abs() < 1e-11 && ce.abs() < 1e-11);
        assert_eq!(cc + ce, 1.0);
    }

    #[test]
    fn cc_cdf_examples() {
        let p = params();
        assert_eq!(cdf_ro_cc(0.0, &p), 0.0);
        assert_abs_diff_eq!(cdf_ro_cc(50.0, &p), 1.0, epsilon = 1e-15);
        let expected = 1.0 - (-PI * (9.0 / 7.0) * 0.25f64).exp();
        assert_abs_diff_eq!(cdf_ro_cc(0.35, &p), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.6357, epsilon = 1e-4);

        assert_eq!(cdf_rd_given_ro_cc(0.5, 0.35, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(cdf_rd_given_ro_cc(50.0, 0.35, &p).unwrap(), 1.0, epsilon = 1e-15);
        let v = cdf_rd_given_ro_cc(0.6, 0.35, &p).unwrap();
        let expected = 1.0 - (-PI * (9.0 / 7.0) * (0.36f64 - 0.25)).exp();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(v, 0.3587, epsilon = 1e-4);
        assert!(cdf_rd_given_ro_cc(0.4, 0.35, &p).is_err());
    }

    #[test]
    fn ce_cdf_examples() {
        let p = params();
        assert_eq!(cdf_ro_ce(0.0, &p), 0.0);
        assert_abs_diff_eq!(cdf_ro_ce(50.0, &p), 1.0, epsilon = 1e-14);
        assert_eq!(cdf_rd_given_ro_ce(0.5, 0.5, &p).unwrap(), 0.0);
        assert_eq!(cdf_rd_given_ro_ce(0.5 / 0.7, 0.5, &p).unwrap(), 1.0);
        assert!(cdf_rd_given_ro_ce(0.4, 0.5, &p).is_err());
    }

    #[test]
    fn ce_cdf_matches_integral_of_joint_pdf() {
        // F(r) = ∫_0^r ∫_u^{u/τ} f(u, v) dv du by direct quadrature
        let p = params();
        let spec = QuadSpec::default();
        for &r in &[0.2, 0.5, 0.9] {
            let direct =
                quad_finite(|u| quad_finite(|v| joint_pdf_ce(u, v, &p), u, u / p.tau, &spec).unwrap(), 0.0, r, &spec)
                    .unwrap();
            assert_abs_diff_eq!(direct, cdf_ro_ce(r, &p), epsilon = 1e-8);
        }
    }

    #[test]
    fn joint_pdfs_integrate_to_one() {
        let p = params();
        let spec = QuadSpec::default();
        let cut = 8.0;
        let cc = quad_finite(
            |ro| quad_finite(|rd| joint_pdf_cc(ro, rd, &p), ro / p.tau, cut, &spec).unwrap(),
            0.0,
            cut * p.tau,
            &spec,
        )
        .unwrap();
        let ce = quad_finite(
            |ro| quad_finite(|rd| joint_pdf_ce(ro, rd, &p), ro, ro / p.tau, &spec).unwrap(),
            0.0,
            cut,
            &spec,
        )
        .unwrap();
        assert_abs_diff_eq!(cc, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(ce, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn cc_marginal_from_joint_matches_cdf_derivative() {
        let p = params();
        let spec = QuadSpec::default();
        let c = PI * p.rho() * p.lambda;
        for &r in &[0.1, 0.3, 0.6] {
            let marginal = quad_finite(|rd| joint_pdf_cc(r, rd, &p), r / p.tau, 10.0, &spec).unwrap();
            let deriv = 2.0 * c * r / (p.tau * p.tau) * (-c * r * r / (p.tau * p.tau)).exp();
            assert_abs_diff_eq!(marginal, deriv, epsilon = 1e-8);
        }
    }

    #[test]
    fn outside_support_is_zero() {
        let p = params();
        assert_eq!(joint_pdf_cc(0.5, 0.6, &p), 0.0);
        assert_eq!(joint_pdf_ce(0.5, 0.4, &p), 0.0);
        assert_eq!(joint_pdf_ce(0.5, 0.8, &p), 0.0);
        assert!(joint_pdf_ce(0.5, 0.5 + 1e-12, &p) > 0.0);
    }

    #[test]
    fn cdfs_are_monotone_on_grid() {
        let p = params();
        let mut prev = (0.0, 0.0);
        for i in 0..=400 {
            let r = i as f64 * 0.01;
            let cur = (cdf_ro_cc(r, &p), cdf_ro_ce(r, &p));
            assert!(cur.0 >= prev.0 && cur.1 >= prev.1 - 1e-15);
            prev = cur;
        }
        assert!(prev.0 > 1.0 - 1e-12 && prev.1 > 1.0 - 1e-12);
    }

    #[test]
    fn scale_invariance() {
        let p = params();
        let k = 3.7;
        let q = SystemParams { lambda: k * p.lambda, ..p };
        for &r in &[0.1, 0.4, 0.9] {
            let s = r / k.sqrt();
            assert_abs_diff_eq!(cdf_ro_cc(r, &p), cdf_ro_cc(s, &q), epsilon = 1e-14);
            assert_abs_diff_eq!(cdf_ro_ce(r, &p), cdf_ro_ce(s, &q), epsilon = 1e-14);
            let rd = 1.2 * r / p.tau;
            assert_abs_diff_eq!(
                cdf_rd_given_ro_cc(rd, r, &p).unwrap(),
                cdf_rd_given_ro_cc(rd / k.sqrt(), s, &q).unwrap(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn samples_respect_support_and_law() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut ro_cc = Vec::with_capacity(n);
        for _ in 0..n {
            let s = sample_distance_pair(UserClass::Center, &p, &mut rng);
            assert!(s.r_o <= p.tau * s.r_d * (1.0 + 1e-12));
            ro_cc.push(s.r_o);
            let e = sample_distance_pair(UserClass::Edge, &p, &mut rng);
            assert!(p.tau * e.r_d <= e.r_o * (1.0 + 1e-12) && e.r_o <= e.r_d);
        }
        ro_cc.sort_by(f64::total_cmp);
        let ks = ro_cc
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let f = cdf_ro_cc(r, &p);
                (f - i as f64 / n as f64).abs().max((f - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.005, "KS distance {ks}");
    }

    #[test]
    #[ignore = "slow: 10^6 draws"]
    fn million_cc_samples_ks() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mut v: Vec<f64> = (0..n).map(|_| sample_distance_pair(UserClass::Center, &p, &mut rng).r_o).collect();
        v.sort_by(f64::total_cmp);
        let ks = v
            .iter()
            .enumerate()
            .map(|(i, &r)| (cdf_ro_cc(r, &p) - (i + 1) as f64 / n as f64).abs())
            .fold(0.0, f64::max);
        assert!(ks < 0.005);
    }
}
