//! Convex polygons for the typical Voronoi cell.

use rand::Rng;

pub type Point = [f64; 2];

pub fn norm2(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

pub fn dist2(a: Point, b: Point) -> f64 {
    norm2([a[0] - b[0], a[1] - b[1]])
}

/// Convex polygon with vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    /// Axis-aligned square centred at the origin.
    pub fn square(half: f64) -> Polygon {
        Polygon { vertices: vec![[-half, -half], [half, -half], [half, half], [-half, half]] }
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    pub fn max_radius(&self) -> f64 {
        self.vertices.iter().map(|&v| norm2(v)).fold(0.0, f64::max).sqrt()
    }

    pub fn contains(&self, p: Point) -> bool {
        let v = &self.vertices;
        let n = v.len();
        (0..n).all(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0
        })
    }

    /// Keeps the part of the polygon closer to the origin than to `x`, i.e.
    /// the half-plane `y·x ≤ |x|²/2`. Returns whether anything was cut.
    pub fn clip_bisector(&mut self, x: Point) -> bool {
        let c = 0.5 * norm2(x);
        let side = |p: Point| p[0] * x[0] + p[1] * x[1] - c;
        let v = &self.vertices;
        if v.iter().all(|&p| side(p) <= 0.0) {
            return false;
        }
        let n = v.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let (sa, sb) = (side(a), side(b));
            if sa <= 0.0 {
                out.push(a);
            }
            if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
                let t = sa / (sa - sb);
                out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            }
        }
        self.vertices = out;
        true
    }

    /// Uniform point, by picking a fan triangle around `apex` in proportion
    /// to its area. `apex` must lie inside the polygon.
    pub fn sample<R: Rng + ?Sized>(&self, apex: Point, rng: &mut R) -> Point {
        let v = &self.vertices;
        let n = v.len();
        let tri = |i: usize| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            0.5 * ((a[0] - apex[0]) * (b[1] - apex[1]) - (a[1] - apex[1]) * (b[0] - apex[0]))
        };
        let total: f64 = (0..n).map(tri).sum();
        let mut pick = rng.random::<f64>() * total;
        let mut i = 0;
        while i + 1 < n {
            let w = tri(i);
            if pick < w {
                break;
            }
            pick -= w;
            i += 1;
        }
        let (a, b) = (v[i], v[(i + 1) % n]);
        let (mut s, mut t) = (rng.random::<f64>(), rng.random::<f64>());
        if s + t > 1.0 {
            s = 1.0 - s;
            t = 1.0 - t;
        }
        [apex[0] + s * (a[0] - apex[0]) + t * (b[0] - apex[0]), apex[1] + s * (a[1] - apex[1]) + t * (b[1] - apex[1])]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_clipped_to_hexagon() {
        let mut p = Polygon::square(10.0);
        for k in 0..6 {
            let a = std::f64::consts::PI / 3.0 * k as f64;
            assert!(p.clip_bisector([2.0 * a.cos(), 2.0 * a.sin()]));
        }
        // regular hexagon with apothem 1
        assert_eq!(p.vertices.len(), 6);
        assert_abs_diff_eq!(p.area(), 2.0 * 3f64.sqrt(), epsilon = 1e-12);
        assert!(!p.clip_bisector([0.0, 5.0]));
    }

    #[test]
    fn samples_are_uniform() {
        let mut p = Polygon::square(1.0);
        p.clip_bisector([1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let (mut inside, mut left) = (0, 0);
        for _ in 0..n {
            let y = p.sample([0.0, 0.0], &mut rng);
            inside += p.contains(y) as usize;
            left += (y[0] < 0.0) as usize;
        }
        assert_eq!(inside, n);
        // the cut corner x + y > 1 lies in the right half
        let want = 2.0 / p.area();
        assert!((left as f64 / n as f64 - want).abs() < 0.005);
    }

    proptest! {
        #[test]
        fn clipping_keeps_the_nearer_side(x in -5.0f64..5.0, y in -5.0f64..5.0, qx in -3.0f64..3.0, qy in -3.0f64..3.0) {
            prop_assume!(x * x + y * y > 0.01);
            let mut p = Polygon::square(3.0);
            let before = p.area();
            p.clip_bisector([x, y]);
            prop_assert!(p.area() <= before + 1e-12);
            let q = [qx, qy];
            let nearer = norm2(q) < dist2(q, [x, y]) - 1e-9;
            let farther = norm2(q) > dist2(q, [x, y]) + 1e-9;
            if nearer { prop_assert!(p.contains(q)); }
            if farther { prop_assert!(!p.contains(q)); }
        }
    }
}
