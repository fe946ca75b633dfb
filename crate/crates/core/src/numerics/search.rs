/// Bisection on `[lo, hi]`.
///
/// Returns `None` when `f(lo)` and `f(hi)` share a sign; the caller decides
/// what a missing root means.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Option<f64> {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let fb = f(b);
    if fa.is_nan() || fb.is_nan() {
        return None;
    }
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let tol = tol.max(f64::EPSILON * b.abs().max(1.0));
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns the best point evaluated, so a maximum sitting on a cliff (`f`
/// dropping to `−∞` past a constraint) is approached from the valid side.
/// For a multimodal `f` the result is a local maximum.
pub fn maximize_unimodal<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut best = (f64::NAN, f64::NAN);
    let mut eval = |x: f64| {
        let v = f(x);
        if !v.is_nan() && !(v <= best.1) {
            best = (x, v);
        }
        v
    };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    let x = 0.5 * (a + b);
    eval(x);
    // the bracket may have collapsed onto an endpoint maximum
    eval(lo);
    eval(hi);
    if best.0.is_nan() {
        (x, f64::NAN)
    } else {
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn root_examples() {
        assert_abs_diff_eq!(find_root(|x| x - 0.5, 0.0, 1.0, 1e-12).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(find_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap(), 2f64.sqrt(), epsilon = 1e-11);
        assert!(find_root(|_| 1.0, 0.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn golden_examples() {
        let (x, v) = maximize_unimodal(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-8);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        // a quadratic peak only pins the argmax to about √ε
        let (x, v) = maximize_unimodal(f64::sin, 0.0, PI, 1e-9);
        assert_abs_diff_eq!(x, PI / 2.0, epsilon = 1e-7);
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        let (x, v) = maximize_unimodal(|x| x * (1.0 - x), 0.0, 1.0, 1e-9);
        assert_abs_diff_eq!(x, 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(v, 0.25, epsilon = 1e-12);
        // monotone: maximum at the right endpoint
        let (x, _) = maximize_unimodal(|x| x, 0.0, 1.0, 1e-9);
        assert_abs_diff_eq!(x, 1.0, epsilon = 1e-8);
        // increasing up to a cliff at 0.61: the answer must stay on the valid side
        for cliff in [0.61, 0.6180339887, 0.3, 0.99] {
            let (x, v) = maximize_unimodal(|x| if x <= cliff { x } else { f64::NEG_INFINITY }, 0.0, 1.0, 1e-9);
            assert!(x <= cliff && cliff - x < 2e-9, "{x} vs {cliff}");
            assert_eq!(v, x);
        }
    }

    proptest! {
        #[test]
        fn root_residual_is_bracketed(c in -0.9f64..0.9, k in 0.2f64..5.0) {
            let f = |x: f64| k * (x - c) + (x - c).powi(3);
            let tol = 1e-9;
            let x = find_root(f, -1.0, 1.0, tol).unwrap();
            let bound = f(x - tol).abs().max(f(x + tol).abs());
            prop_assert!(f(x).abs() <= bound);
        }
    }
}
