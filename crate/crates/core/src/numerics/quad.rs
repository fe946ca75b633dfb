use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Tolerances for the adaptive Gauss–Kronrod integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { rel_tol: 1e-8, abs_tol: 1e-12, max_subdivisions: 500 }
    }
}

impl QuadSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self, NumericsError> {
        let spec = QuadSpec { rel_tol, abs_tol, max_subdivisions };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        QuadSpec { rel_tol, ..self }
    }

    fn validate(&self) -> Result<(), NumericsError> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(NumericsError::domain(
                "QuadSpec",
                format!("tolerances must be positive and max_subdivisions >= 1, got {:?}", self),
            ));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

/// 15-point Kronrod rule with the embedded 7-point Gauss error estimate,
/// rescaled the way QUADPACK does it.
fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive integral of `f` over `[lo, hi]`.
///
/// Globally adaptive: the segment with the largest error estimate is bisected
/// until the summed error meets `max(abs_tol, rel_tol·|I|)`. Nodes never touch
/// the endpoints, so integrable endpoint singularities are tolerated.
pub fn quad_finite<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadSpec) -> Result<f64, NumericsError> {
    spec.validate()?;
    if !(lo <= hi) {
        return Err(NumericsError::domain("quad_finite", format!("need lo <= hi, got [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(0.0);
    }
    let (value, error) = gk15(&f, lo, hi);
    let mut segments = vec![Segment { lo, hi, value, error }];
    let mut total = value;
    let mut total_err = error;
    let mut subdivisions = 0;
    loop {
        if !total.is_finite() {
            return Err(NumericsError::domain("quad_finite", "integrand produced a non-finite value"));
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(NumericsError::NonConvergence { subdivisions, estimate: total, error: total_err });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // cannot bisect further in floating point; accept what we have
            return Ok(total);
        }
        let (v1, e1) = gk15(&f, seg.lo, mid);
        let (v2, e2) = gk15(&f, mid, seg.hi);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        segments.push(Segment { lo: seg.lo, hi: mid, value: v1, error: e1 });
        segments.push(Segment { lo: mid, hi: seg.hi, value: v2, error: e2 });
        subdivisions += 1;
        // running sums drift; resum every so often
        if subdivisions % 64 == 0 {
            total = segments.iter().map(|s| s.value).sum();
            total_err = segments.iter().map(|s| s.error).sum();
        }
    }
}

/// Integral of `f` over `[lo, ∞)` through `t = lo + s/(1 − s)`.
pub fn quad_semi_infinite<F: Fn(f64) -> f64>(f: F, lo: f64, spec: &QuadSpec) -> Result<f64, NumericsError> {
    if !lo.is_finite() {
        return Err(NumericsError::domain("quad_semi_infinite", format!("lower limit {lo} is not finite")));
    }
    let g = |s: f64| {
        let one_minus = 1.0 - s;
        let t = lo + s / one_minus;
        if !t.is_finite() {
            return 0.0;
        }
        let v = f(t) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    quad_finite(g, 0.0, 1.0, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn finite_examples() {
        let spec = QuadSpec::default();
        assert_relative_eq!(quad_finite(|_| 1.0, 0.0, 1.0, &spec).unwrap(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(quad_finite(|x| x, 0.0, 2.0, &spec).unwrap(), 2.0, max_relative = 1e-12);
        let g = quad_finite(|x| (-x * x).exp(), -5.0, 5.0, &spec).unwrap();
        // the truncated tails are below 1.6e-12
        assert_relative_eq!(g, PI.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn finite_endpoint_singularity() {
        let spec = QuadSpec::default();
        let v = quad_finite(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &spec).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-7);
    }

    #[test]
    fn semi_infinite_examples() {
        let spec = QuadSpec::default();
        assert_relative_eq!(quad_semi_infinite(|x: f64| (-x).exp(), 0.0, &spec).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(
            quad_semi_infinite(|x: f64| 1.0 / (1.0 + x * x), 0.0, &spec).unwrap(),
            PI / 2.0,
            max_relative = 1e-9
        );
        assert_relative_eq!(quad_semi_infinite(|t: f64| t.powi(-2), 1.0, &spec).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn semi_infinite_matches_truncated_plus_tail() {
        // ∫_1^∞ t^{-3} = 1/2 : finite part on [1, 50] plus the analytic tail 1/(2·50²)
        let spec = QuadSpec::default();
        let full = quad_semi_infinite(|t: f64| t.powi(-3), 1.0, &spec).unwrap();
        let head = quad_finite(|t: f64| t.powi(-3), 1.0, 50.0, &spec).unwrap();
        let tail = 1.0 / (2.0 * 50.0 * 50.0);
        assert!((full - (head + tail)).abs() < 1e-6);
        // and for e^{-t}/(1+t) with tail bounded by e^{-40}
        let f = |t: f64| (-t).exp() / (1.0 + t);
        let full = quad_semi_infinite(f, 0.0, &spec).unwrap();
        let head = quad_finite(f, 0.0, 40.0, &spec).unwrap();
        assert!((full - head).abs() < 1e-6);
    }

    #[test]
    fn bad_specs_and_ranges() {
        assert!(QuadSpec::new(0.0, 1e-12, 10).is_err());
        assert!(QuadSpec::new(1e-8, 1e-12, 0).is_err());
        assert!(quad_finite(|x| x, 1.0, 0.0, &QuadSpec::default()).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadSpec::new(1e-14, 1e-300, 3).unwrap();
        let err = quad_finite(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &spec).unwrap_err();
        assert!(matches!(err, NumericsError::NonConvergence { .. }));
    }
}
