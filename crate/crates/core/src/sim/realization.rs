//! One draw of the network seen from the typical cell.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::geometry::{dist2, norm2, Point, Polygon};
use super::SimConfig;
use crate::params::{SystemParams, UserClass};
use crate::ModelError;

/// Interfering base stations in the window around the origin, plus the
/// typical cell they carve out.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    /// Interferers, excluding the origin, sorted by distance to it.
    pub bs_points: Vec<Point>,
    pub cell: Polygon,
    /// Interferers whose bisector cut the cell; contains every Voronoi
    /// neighbour of the origin.
    pub neighbors: Vec<Point>,
    pub window_radius: f64,
    /// Draws discarded because the window could not certify the cell.
    pub retries: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalUser {
    pub position: Point,
    /// Distance to the serving (origin) base station.
    pub r_o: f64,
    /// Distance to the nearest interferer.
    pub r_d: f64,
    pub user_class: UserClass,
}

pub fn classify(r_o: f64, r_d: f64, tau: f64) -> UserClass {
    if r_o <= tau * r_d {
        UserClass::Center
    } else {
        UserClass::Edge
    }
}

fn draw_points<R: Rng + ?Sized>(lambda: f64, w: f64, rng: &mut R) -> Result<Vec<Point>, ModelError> {
    let count = Poisson::new(lambda * PI * w * w)
        .map_err(|e| ModelError::InvalidParams(format!("window mean count: {e}")))?
        .sample(rng) as usize;
    let mut pts: Vec<Point> = (0..count)
        .map(|_| {
            let r = w * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            [r * phi.cos(), r * phi.sin()]
        })
        .collect();
    pts.sort_by(|a, b| norm2(*a).total_cmp(&norm2(*b)));
    Ok(pts)
}

/// Clips the window square by every bisector that can still reach the cell.
fn carve(points: &[Point], w: f64) -> (Polygon, Vec<Point>) {
    let mut cell = Polygon::square(w);
    let mut neighbors = Vec::new();
    for &x in points {
        // bisector lies beyond every vertex once |x| > 2·max radius
        if norm2(x) > 4.0 * cell.max_radius().powi(2) {
            break;
        }
        if cell.clip_bisector(x) {
            neighbors.push(x);
        }
    }
    (cell, neighbors)
}

const MAX_RETRIES: usize = 1000;

/// PPP of intensity `λ` in the disc of radius `window_radius` with a base
/// station added at the origin.
///
/// A draw is kept only if every cell vertex lies within half the window
/// radius, so that no station outside the window could touch the cell.
pub fn realize_typical_cell<R: Rng + ?Sized>(
    p: &SystemParams,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<NetworkRealization, ModelError> {
    let w = cfg.window(p);
    for retries in 0..MAX_RETRIES {
        let bs_points = draw_points(p.lambda, w, rng)?;
        let (cell, neighbors) = carve(&bs_points, w);
        if cell.max_radius() <= 0.5 * w && !neighbors.is_empty() {
            return Ok(NetworkRealization { bs_points, cell, neighbors, window_radius: w, retries });
        }
    }
    Err(ModelError::Domain(format!("window radius {w} too small: no certified cell in {MAX_RETRIES} draws")))
}

impl NetworkRealization {
    pub fn user_at(&self, position: Point, tau: f64) -> TypicalUser {
        let r_o = norm2(position).sqrt();
        let r_d = nearest_sq(&self.neighbors, position).sqrt();
        TypicalUser { position, r_o, r_d, user_class: classify(r_o, r_d, tau) }
    }

    /// User uniform in the cell.
    pub fn draw_user<R: Rng + ?Sized>(&self, tau: f64, rng: &mut R) -> TypicalUser {
        self.user_at(self.cell.sample([0.0, 0.0], rng), tau)
    }

    /// User uniform in the part of the cell belonging to `class`.
    pub fn draw_user_in<R: Rng + ?Sized>(&self, class: UserClass, tau: f64, rng: &mut R) -> TypicalUser {
        loop {
            let u = self.draw_user(tau, rng);
            if u.user_class == class {
                return u;
            }
        }
    }

    /// Hit-or-miss estimate of `(|V_oc|, |V_oe|)` from `samples` uniform
    /// points of the cell.
    pub fn region_areas<R: Rng + ?Sized>(&self, tau: f64, samples: usize, rng: &mut R) -> (f64, f64) {
        let area = self.cell.area();
        let hits = (0..samples)
            .filter(|_| {
                let y = self.cell.sample([0.0, 0.0], rng);
                norm2(y) <= tau * tau * nearest_sq(&self.neighbors, y)
            })
            .count();
        let cc = area * hits as f64 / samples as f64;
        (cc, area - cc)
    }
}

fn nearest_sq(neighbors: &[Point], y: Point) -> f64 {
    neighbors.iter().map(|&x| dist2(x, y)).fold(f64::INFINITY, f64::min)
}

/// `∫_{|x|>W} E_φ|x−y|^{−α} dx / 2π`, using the ring average
/// `r^{−α} ₂F₁(α/2, α/2; 1; |y|²/r²)` to order `|y|⁴`.
fn ring_integral(y2: f64, w: f64, alpha: f64) -> f64 {
    let a = alpha / 2.0;
    let c2 = (a * (a + 1.0) / 2.0).powi(2);
    w.powf(2.0 - alpha) / (alpha - 2.0)
        + a * a * y2 * w.powf(-alpha) / alpha
        + c2 * y2 * y2 * w.powf(-alpha - 2.0) / (alpha + 2.0)
}

/// `ln E[∏ 1/(1 + K|x−y|^{−α})]` over the stations beyond the window, to
/// third order in `K W^{−α}`, with `K = R_o^α χ`. Only the leading term keeps
/// the offset of `y` from the origin.
fn window_tail(k: f64, y2: f64, w: f64, lambda: f64, alpha: f64) -> f64 {
    let second = w.powf(2.0 - 2.0 * alpha) / (2.0 * alpha - 2.0);
    let third = w.powf(2.0 - 3.0 * alpha) / (3.0 * alpha - 2.0);
    -2.0 * PI * lambda * (k * ring_integral(y2, w, alpha) - 0.5 * k * k * second + k * k * k / 3.0 * third)
}

/// Success probability of `user` given the realization, fading averaged:
/// `∏_x 1/(1 + R_o^α χ |x − y|^{−α})`.
pub fn cond_success_prob(
    real: &NetworkRealization,
    user: &TypicalUser,
    chi: f64,
    p: &SystemParams,
    cfg: &SimConfig,
) -> f64 {
    if chi.is_infinite() {
        return 0.0;
    }
    let k = user.r_o.powf(p.alpha) * chi;
    let half = p.alpha / 2.0;
    let mut log_p: f64 = real.bs_points.iter().map(|&x| -(k / dist2(x, user.position).powf(half)).ln_1p()).sum();
    if cfg.tail_correction {
        log_p += window_tail(k, norm2(user.position), real.window_radius, p.lambda, p.alpha);
    }
    log_p.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{quad_semi_infinite, QuadSpec};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn realization(seed: u64) -> NetworkRealization {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        realize_typical_cell(&SystemParams::default(), &SimConfig::default(), &mut rng).unwrap()
    }

    #[test]
    fn neighbours_find_the_nearest_interferer() {
        let p = SystemParams::default();
        for seed in 0..50 {
            let real = realization(seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
            for _ in 0..50 {
                let u = real.draw_user(p.tau, &mut rng);
                let full = real.bs_points.iter().map(|&x| dist2(x, u.position)).fold(f64::INFINITY, f64::min).sqrt();
                assert_eq!(u.r_d, full);
                // the origin serves every point of its own cell
                assert!(u.r_o <= u.r_d);
                assert_eq!(u.user_class == UserClass::Center, u.r_o <= p.tau * u.r_d);
            }
        }
    }

    #[test]
    fn class_conditioned_users() {
        let p = SystemParams::default();
        let real = realization(7);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for class in UserClass::BOTH {
            for _ in 0..100 {
                let u = real.draw_user_in(class, p.tau, &mut rng);
                assert_eq!(u.user_class, class);
                assert!(real.cell.contains(u.position));
            }
        }
    }

    #[test]
    fn success_probability_limits() {
        let p = SystemParams::default();
        let cfg = SimConfig { tail_correction: false, ..Default::default() };
        let mut real = realization(1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = real.draw_user(p.tau, &mut rng);
        assert_eq!(cond_success_prob(&real, &u, f64::INFINITY, &p, &cfg), 0.0);
        assert!(cond_success_prob(&real, &u, 1e12, &p, &cfg) < 1e-12);
        let v = cond_success_prob(&real, &u, 1.0, &p, &cfg);
        assert!(v > 0.0 && v < 1.0);
        real.bs_points.clear();
        assert_eq!(cond_success_prob(&real, &u, 1.0, &p, &cfg), 1.0);
    }

    #[test]
    fn window_tail_matches_quadrature() {
        // user at the origin, where the ring average is exact
        let (k, w, lambda, alpha) = (3.0, 6.0, 1.0, 4.0);
        let spec = QuadSpec::default();
        let direct = quad_semi_infinite(|r| 2.0 * PI * r * (k * r.powf(-alpha)).ln_1p(), w, &spec).unwrap();
        assert_abs_diff_eq!(window_tail(k, 0.0, w, lambda, alpha), -lambda * direct, epsilon = 1e-9);
    }

    #[test]
    fn window_tail_offset_term() {
        // ∫ ring average of |x−y|^{−4} at offset |y| = 1 beyond W = 6
        let (w, y) = (6.0f64, 1.0f64);
        let spec = QuadSpec::default();
        let ring = |r: f64| {
            let f = |phi: f64| (r * r - 2.0 * r * y * phi.cos() + y * y).powi(-2);
            crate::numerics::quad_finite(f, 0.0, PI, &spec).unwrap() / PI
        };
        let direct = quad_semi_infinite(|r| 2.0 * PI * r * ring(r), w, &spec).unwrap();
        let approx = 2.0 * PI * ring_integral(y * y, w, 4.0);
        assert!((approx - direct).abs() < 1e-4 * direct, "{approx} vs {direct}");
    }
}
