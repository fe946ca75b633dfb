use std::f64::consts::PI;

use super::NumericsError;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64, NumericsError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(NumericsError::domain("log_gamma", format!("x = {x} must be positive and finite")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64, NumericsError> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Regularized incomplete beta function `I(x; a, b)`.
///
/// Evaluated with the modified Lentz continued fraction, switching to
/// `1 − I(1 − x; b, a)` when `x > (a + 1) / (a + b + 2)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64, NumericsError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(NumericsError::domain("reg_inc_beta", format!("x = {x} outside [0, 1]")));
    }
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(NumericsError::domain(
            "reg_inc_beta",
            format!("shape parameters must be positive, got a = {a}, b = {b}"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)?;
    if x <= (a + 1.0) / (a + b + 2.0) {
        Ok((ln_front.exp() * beta_cf(x, a, b) / a).clamp(0.0, 1.0))
    } else {
        Ok((1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b).clamp(0.0, 1.0))
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 10_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `q^s ζ(s, q) = Σ_{k≥0} (q/(q+k))^s` for `s > 1`, `q > 0`.
///
/// Scaling by `q^s` keeps the value near one for large `s`, where `ζ` itself
/// underflows. Direct summation followed by an Euler–Maclaurin tail.
pub fn hurwitz_zeta_scaled(s: f64, q: f64) -> Result<f64, NumericsError> {
    if !(s > 1.0) || !(q > 0.0) || !s.is_finite() || !q.is_finite() {
        return Err(NumericsError::domain("hurwitz_zeta_scaled", format!("need s > 1 and q > 0, got ({s}, {q})")));
    }
    // B_{2j} / (2j)!
    const EM: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
    ];
    let n_direct = 10 + s.ceil().min(1e6) as usize;
    let mut sum = 0.0;
    for k in 0..n_direct {
        let term = (q / (q + k as f64)).powf(s);
        sum += term;
        // remaining terms are below term·(q+k)/(s−1)
        if term * (q + k as f64) / (s - 1.0) < 1e-17 * sum {
            return Ok(sum);
        }
    }
    let a = q + n_direct as f64;
    let lead = (q / a).powf(s);
    let mut tail = a / (s - 1.0) + 0.5;
    let mut poch = s;
    let mut inv_pow = 1.0 / a;
    for (j, c) in EM.iter().enumerate() {
        tail += c * poch * inv_pow;
        let m = 2.0 * j as f64;
        poch *= (s + m + 1.0) * (s + m + 2.0);
        inv_pow /= a * a;
    }
    Ok(sum + lead * tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn beta_endpoints_and_closed_forms() {
        assert_eq!(reg_inc_beta(0.0, 3.0, 2.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 3.0, 2.0).unwrap(), 1.0);
        assert_abs_diff_eq!(reg_inc_beta(0.5, 1.0, 1.0).unwrap(), 0.5, epsilon = 1e-14);
        // I(x; 2, 2) = 3x² − 2x³
        for &x in &[0.1, 0.3, 0.5, 0.77] {
            let exact = 3.0 * x * x - 2.0 * x * x * x;
            assert_abs_diff_eq!(reg_inc_beta(x, 2.0, 2.0).unwrap(), exact, epsilon = 1e-13);
        }
        // I(x; a, 1) = x^a
        assert_abs_diff_eq!(reg_inc_beta(0.3, 4.5, 1.0).unwrap(), 0.3f64.powf(4.5), epsilon = 1e-13);
    }

    #[test]
    fn beta_domain_errors() {
        assert!(reg_inc_beta(-0.1, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(1.1, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 0.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 1.0, -2.0).is_err());
    }

    #[test]
    fn log_gamma_values() {
        assert_abs_diff_eq!(log_gamma(1.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(log_gamma(5.0).unwrap(), 24f64.ln(), epsilon = 1e-13);
        assert_abs_diff_eq!(log_gamma(0.5).unwrap(), PI.sqrt().ln(), epsilon = 1e-13);
        let mut fact = 1.0f64;
        for n in 1..30 {
            assert_abs_diff_eq!(log_gamma(n as f64).unwrap(), fact.ln(), epsilon = 1e-11);
            fact *= n as f64;
        }
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    proptest! {
        #[test]
        fn beta_symmetry(x in 0.0f64..=1.0, a in 0.05f64..60.0, b in 0.05f64..60.0) {
            let lhs = reg_inc_beta(x, a, b).unwrap() + reg_inc_beta(1.0 - x, b, a).unwrap();
            prop_assert!((lhs - 1.0).abs() < 1e-10);
        }

        #[test]
        fn beta_monotone_in_x(x in 0.0f64..0.99, dx in 0.0f64..0.01, a in 0.1f64..40.0, b in 0.1f64..40.0) {
            let lo = reg_inc_beta(x, a, b).unwrap();
            let hi = reg_inc_beta(x + dx, a, b).unwrap();
            prop_assert!(hi >= lo - 1e-13);
        }
    }

    #[test]
    fn hurwitz_zeta_values() {
        use std::f64::consts::PI;
        let z2 = hurwitz_zeta_scaled(2.0, 1.0).unwrap();
        assert!((z2 - PI * PI / 6.0).abs() < 1e-13, "{z2}");
        let z3 = hurwitz_zeta_scaled(3.0, 1.0).unwrap();
        assert!((z3 - 1.202_056_903_159_594_2).abs() < 1e-13);
        // ζ(2, 1/2) = 3ζ(2), scaled by (1/2)^2
        let h = hurwitz_zeta_scaled(2.0, 0.5).unwrap();
        assert!((h - 0.25 * PI * PI / 2.0).abs() < 1e-13);
        // slowly converging case against a brute-force partial sum plus integral tail
        let (s, q) = (1.3, 2.7);
        let n = 2_000_000;
        let direct: f64 = (0..n).map(|k| (q / (q + k as f64)).powf(s)).sum::<f64>()
            + q.powf(s) * (q + n as f64).powf(1.0 - s) / (s - 1.0);
        let fast = hurwitz_zeta_scaled(s, q).unwrap();
        assert!((fast - direct).abs() < 1e-6 * direct, "{fast} vs {direct}");
        assert!((hurwitz_zeta_scaled(400.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(hurwitz_zeta_scaled(1.0, 1.0).is_err());
    }
}
