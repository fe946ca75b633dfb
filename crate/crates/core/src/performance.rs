//! Rates and delays of the typical CC and CE users under random scheduling.
//!
//! A user sharing its region with `N − 1` others is scheduled with
//! probability `1/N` (scaled by `η` or `1 − η` under OMA) and then succeeds
//! with probability `p`, its conditional success probability. The load `N`
//! comes from a [`LoadPmf`] and `p` from the meta distribution.

use serde::Serialize;

use crate::load::LoadPmf;
use crate::meta::{MetaFit, MetaModel};
use crate::params::{Allocation, UserClass};
use crate::ModelError;

/// Time share of `class` under `alloc`: 1 for NOMA, `η` or `1 − η` for OMA.
pub fn time_share(class: UserClass, alloc: Allocation) -> f64 {
    match (alloc, class) {
        (Allocation::Noma { .. }, _) => 1.0,
        (Allocation::Oma { eta }, UserClass::Center) => eta,
        (Allocation::Oma { eta }, UserClass::Edge) => 1.0 - eta,
    }
}

/// Mean rate `share · ξ · log2(1 + β) · M_1` in bits/slot/Hz.
pub fn mean_rate(class: UserClass, alloc: Allocation, meta: &MetaModel, load: &LoadPmf) -> Result<f64, ModelError> {
    let share = time_share(class, alloc);
    if share <= 0.0 {
        return Ok(0.0);
    }
    let p = meta.params();
    Ok(share * load.xi * (1.0 + p.beta(class)).log2() * meta.m1(class, alloc)?)
}

/// `E_N[F(g(N))]`, `F` the fitted meta CDF, with the clamp `min(·, 1)`
/// applied first. `g` is nondecreasing in `N`, so the mass beyond the stored
/// support is charged at the last term.
fn expect_over_load<G: Fn(f64) -> f64>(load: &LoadPmf, fit: &MetaFit, arg: G) -> f64 {
    let at = |n: usize| fit.cdf(arg(n as f64).min(1.0));
    let body = load.expect(at);
    (body + load.tail_mass * at(load.n_max + 1)).clamp(0.0, 1.0)
}

/// `P[R ≤ r]` for the conditional rate `R = share · log2(1+β) · p / N`.
pub fn rate_cdf(
    class: UserClass,
    alloc: Allocation,
    rate: f64,
    meta: &MetaModel,
    load: &LoadPmf,
    fit: &MetaFit,
) -> f64 {
    if rate <= 0.0 {
        return 0.0;
    }
    let share = time_share(class, alloc);
    if share <= 0.0 {
        return 1.0;
    }
    let full = share * (1.0 + meta.params().beta(class)).log2();
    expect_over_load(load, fit, |n| rate * n / full)
}

/// Mean sojourn time of a Geo/Geo/1 queue, or instability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MeanDelay {
    Slots(f64),
    Unstable,
}

impl MeanDelay {
    /// Whether the delay reaches `t`; an unstable queue always does.
    pub fn reaches(self, t: f64) -> bool {
        match self {
            MeanDelay::Slots(d) => d >= t,
            MeanDelay::Unstable => true,
        }
    }

    pub fn slots(self) -> Option<f64> {
        match self {
            MeanDelay::Slots(d) => Some(d),
            MeanDelay::Unstable => None,
        }
    }
}

/// `(1 − ϱ)/(μ − ϱ)` slots for service rate `μ` and arrival rate `ϱ`.
pub fn cond_mean_delay(mu: f64, arrival: f64) -> MeanDelay {
    if mu > arrival {
        MeanDelay::Slots((1.0 - arrival) / (mu - arrival))
    } else {
        MeanDelay::Unstable
    }
}

/// Upper bound on `P[D ≥ t]`, the delay outage at threshold `t`.
///
/// `D < t` exactly when the service rate `share · p / N` exceeds
/// `ϱ + (1 − ϱ)/t`; unstable queues count as outage.
pub fn delay_ccdf(
    class: UserClass,
    alloc: Allocation,
    threshold: f64,
    arrival: f64,
    load: &LoadPmf,
    fit: &MetaFit,
) -> f64 {
    if threshold <= 0.0 {
        return 1.0;
    }
    let share = time_share(class, alloc);
    if share <= 0.0 {
        return 1.0;
    }
    let need = arrival + (1.0 - arrival) / threshold;
    expect_over_load(load, fit, |n| n * need / share)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::load::{area_stats, gamma_fit, load_pmf};
    use crate::meta::beta_fit;
    use crate::numerics::{quad_finite, QuadSpec};
    use crate::params::SystemParams;
    use approx::assert_abs_diff_eq;

    struct Setup {
        meta: MetaModel,
        loads: [LoadPmf; 2],
    }

    fn setup() -> Setup {
        let p = SystemParams::default();
        let loads = UserClass::BOTH.map(|c| {
            let fit = gamma_fit(&area_stats(c, &p).unwrap()).unwrap();
            load_pmf(c, &fit, p.nu, None).unwrap()
        });
        Setup { meta: MetaModel::new(p), loads }
    }

    fn idx(c: UserClass) -> usize {
        match c {
            UserClass::Center => 0,
            UserClass::Edge => 1,
        }
    }

    #[test]
    fn delay_examples() {
        assert_eq!(cond_mean_delay(0.5, 0.25), MeanDelay::Slots(3.0));
        assert_eq!(cond_mean_delay(0.25, 0.25), MeanDelay::Unstable);
        let d = cond_mean_delay(1.0, 1e-12).slots().unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-11);
        assert!(MeanDelay::Unstable.reaches(1e300));
        assert!(!MeanDelay::Slots(2.0).reaches(3.0));
    }

    #[test]
    fn rate_cdf_limits() {
        let s = setup();
        for class in UserClass::BOTH {
            for alloc in [Allocation::Noma { theta: 0.3 }, Allocation::Oma { eta: 0.5 }] {
                let fit = s.meta.fit(class, alloc).unwrap();
                let load = &s.loads[idx(class)];
                assert_eq!(rate_cdf(class, alloc, 0.0, &s.meta, load, &fit), 0.0);
                let full = time_share(class, alloc) * (1.0 + s.meta.params().beta(class)).log2();
                assert_abs_diff_eq!(rate_cdf(class, alloc, full, &s.meta, load, &fit), 1.0, epsilon = 1e-12);
                let mut prev = 0.0;
                for i in 0..=200 {
                    let v = rate_cdf(class, alloc, full * i as f64 / 200.0, &s.meta, load, &fit);
                    assert!(v >= prev && (0.0..=1.0).contains(&v));
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn oma_rates_scale_with_time_share() {
        let s = setup();
        let load = &s.loads[0];
        assert_eq!(mean_rate(UserClass::Center, Allocation::Oma { eta: 0.0 }, &s.meta, load).unwrap(), 0.0);
        let full = mean_rate(UserClass::Center, Allocation::Oma { eta: 1.0 }, &s.meta, load).unwrap();
        let p = s.meta.params();
        let m1 = crate::meta::moment_cc_oma(1.0, p).unwrap();
        assert_eq!(full, load.xi * (1.0 + p.beta_c).log2() * m1);
        let half = mean_rate(UserClass::Center, Allocation::Oma { eta: 0.5 }, &s.meta, load).unwrap();
        assert_abs_diff_eq!(half, 0.5 * full, epsilon = 1e-15);
    }

    #[test]
    fn noma_edge_rate_vanishes_at_power_cap() {
        let s = setup();
        let nc = 1.0 / (1.0 + s.meta.params().beta_e);
        let near =
            mean_rate(UserClass::Edge, Allocation::Noma { theta: nc * (1.0 - 1e-9) }, &s.meta, &s.loads[1]).unwrap();
        assert!(near < 1e-6, "{near}");
        assert!(mean_rate(UserClass::Edge, Allocation::Noma { theta: nc }, &s.meta, &s.loads[1]).is_err());
    }

    #[test]
    fn mean_rate_is_integral_of_rate_ccdf() {
        let s = setup();
        for class in UserClass::BOTH {
            for alloc in [Allocation::Noma { theta: 0.3 }, Allocation::Oma { eta: 0.4 }] {
                let load = &s.loads[idx(class)];
                let fit = s.meta.fit(class, alloc).unwrap();
                let full = time_share(class, alloc) * (1.0 + s.meta.params().beta(class)).log2();
                // the clamp switches on at full/n
                let mut knots: Vec<f64> = (1..=load.n_max).rev().map(|n| full / n as f64).collect();
                knots.insert(0, 0.0);
                let spec = QuadSpec::default();
                let integral: f64 = knots
                    .windows(2)
                    .map(|w| {
                        quad_finite(|r| 1.0 - rate_cdf(class, alloc, r, &s.meta, load, &fit), w[0], w[1], &spec)
                            .unwrap()
                    })
                    .sum();
                let exact = mean_rate(class, alloc, &s.meta, load).unwrap();
                assert!((integral - exact).abs() < 0.02 * exact, "{class:?} {alloc:?}: {integral} vs {exact}");
                assert!((integral - exact).abs() < 1e-6 * exact);
            }
        }
    }

    #[test]
    fn delay_ccdf_limits_and_monotonicity() {
        let s = setup();
        let class = UserClass::Edge;
        let alloc = Allocation::Noma { theta: 0.3 };
        let load = &s.loads[1];
        let fit = s.meta.fit(class, alloc).unwrap();
        assert_eq!(delay_ccdf(class, alloc, 0.0, 0.05, load, &fit), 1.0);
        assert_abs_diff_eq!(delay_ccdf(class, alloc, 1e-9, 0.05, load, &fit), 1.0, epsilon = 1e-12);
        assert!(delay_ccdf(class, alloc, 1e12, 1e-12, load, &fit) < 1e-6);
        let mut prev = 1.0;
        for t in 1..200 {
            let v = delay_ccdf(class, alloc, t as f64, 0.05, load, &fit);
            assert!(v <= prev);
            prev = v;
        }
        let mut prev = 0.0;
        for i in 1..50 {
            let v = delay_ccdf(class, alloc, 30.0, i as f64 / 100.0, load, &fit);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn single_user_delay_matches_direct_beta_probability() {
        // with N ≡ 1 the bound is I(ϱ + (1−ϱ)/t) under the beta law
        let s = setup();
        let load = LoadPmf::zero_truncated_poisson(UserClass::Center, 1e-9).unwrap();
        assert_abs_diff_eq!(load.prob(1), 1.0, epsilon = 1e-8);
        let alloc = Allocation::Oma { eta: 0.6 };
        let m = s.meta.moments(UserClass::Center, alloc).unwrap();
        let fit = beta_fit(&m).unwrap();
        let x: f64 = (0.1 + 0.9 / 20.0) / 0.6;
        let want = crate::numerics::reg_inc_beta(x, fit.kappa1, fit.kappa2).unwrap();
        let got = delay_ccdf(UserClass::Center, alloc, 20.0, 0.1, &load, &MetaFit::Beta(fit));
        assert_abs_diff_eq!(got, want, epsilon = 1e-8);
    }
}
