//! Gauss-Legendre rules and polar quadrature over regions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::geometry::{circle_intersections, ComplexPoint, Region};
use crate::scalar::{from_usize, lit, Real};

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

fn rule_cache() -> &'static Mutex<HashMap<usize, Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Newton iteration on the three-term Legendre recurrence.
fn compute_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        // recompute derivative at the converged root
        let mut p0 = 1.0;
        let mut p1 = 0.0;
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        if (z * z - 1.0).abs() > 0.0 {
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
        }
        let wt = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wt;
        w[n - 1 - i] = wt;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn cached_rule(n: usize) -> Rule {
    let mut guard = rule_cache().lock().expect("quadrature cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(compute_rule(n))).clone()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "rule needs at least one node");
    let r = cached_rule(n);
    (r.0.iter().map(|v| lit(*v)).collect(), r.1.iter().map(|v| lit(*v)).collect())
}

/// `n`-point rule mapped to `[a, b]`.
pub fn gauss_legendre_on<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(n);
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    (x.iter().map(|t| mid + half * *t).collect(), w.iter().map(|v| *v * half).collect())
}

/// Integral of `f` over `[a, b]` with an `n`-point rule.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, n: usize) -> T {
    let (x, w) = gauss_legendre_on(n, a, b);
    x.iter().zip(&w).fold(T::zero(), |acc, (xi, wi)| acc + *wi * f(*xi))
}

/// A planar cubature: points with weights that already include the polar
/// Jacobian.
#[derive(Clone, Debug)]
pub struct PlanarRule<T> {
    pub points: Vec<ComplexPoint<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> PlanarRule<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate<F: Fn(ComplexPoint<T>) -> T>(&self, f: F) -> T {
        self.points.iter().zip(&self.weights).fold(T::zero(), |acc, (p, w)| acc + *w * f(*p))
    }
}

/// Directions from `c` at which the ray length through `region` can kink:
/// tangents to boundary circles not enclosing `c` and directions of
/// circle-circle crossings.
fn critical_angles<T: Real>(region: &Region<T>, c: ComplexPoint<T>) -> Vec<T> {
    let circles = region.circles();
    let tiny = lit::<T>(1e-12);
    let mut out = Vec::new();
    for k in &circles {
        let d = k.center.dist(c);
        if k.r > T::zero() && d > k.r * (T::one() + tiny) {
            let base = (k.center.im - c.im).atan2(k.center.re - c.re);
            let half = (k.r / d).asin();
            out.push(base - half);
            out.push(base + half);
        }
    }
    for i in 0..circles.len() {
        for j in (i + 1)..circles.len() {
            for p in circle_intersections(circles[i], circles[j]) {
                if p.dist(c) > tiny {
                    out.push((p.im - c.im).atan2(p.re - c.re));
                }
            }
        }
    }
    let two_pi = T::PI() + T::PI();
    let mut wrapped: Vec<T> = out
        .into_iter()
        .map(|a| {
            let m = a % two_pi;
            if m < T::zero() {
                m + two_pi
            } else {
                m
            }
        })
        .collect();
    wrapped.sort_by(|a, b| a.partial_cmp(b).unwrap());
    wrapped.dedup_by(|a, b| (*a - *b).abs() < tiny);
    wrapped
}

/// Polar cubature about `center`: for each direction, Gauss-Legendre along
/// each ray interval inside the region. Directions use the trapezoid rule
/// when the ray length is smooth and periodic in the angle, and
/// Gauss-Legendre on each arc between critical angles otherwise.
pub fn polar_rule<T: Real>(region: &Region<T>, center: ComplexPoint<T>, radial: usize, angular: usize) -> PlanarRule<T> {
    let two_pi = T::PI() + T::PI();
    let crit = critical_angles(region, center);
    let mut dirs: Vec<(T, T)> = Vec::new();
    if crit.is_empty() {
        let h = two_pi / from_usize::<T>(angular);
        for j in 0..angular {
            dirs.push((from_usize::<T>(j) * h, h));
        }
    } else {
        let m = crit.len();
        for i in 0..m {
            let a = crit[i];
            let b = if i + 1 < m { crit[i + 1] } else { crit[0] + two_pi };
            if b - a <= T::epsilon() {
                continue;
            }
            let share = ((b - a) / two_pi * from_usize::<T>(angular)).ceil().to_usize().unwrap_or(1);
            let order = share.max(16);
            // theta = a + (b - a)(1 - cos u)/2 smooths square-root behavior at tangents
            let (x, w) = gauss_legendre_on(order, T::zero(), T::PI());
            let half = (b - a) * lit(0.5);
            for (u, wu) in x.into_iter().zip(w) {
                dirs.push((a + half * (T::one() - u.cos()), wu * half * u.sin()));
            }
        }
    }
    let (rx, rw) = gauss_legendre::<T>(radial);
    let half = lit::<T>(0.5);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (theta, wt) in dirs {
        let (s, cth) = theta.sin_cos();
        for (t0, t1) in region.ray_intervals(center, theta) {
            let hl = (t1 - t0) * half;
            let mid = (t1 + t0) * half;
            for (x, w) in rx.iter().zip(&rw) {
                let t = mid + hl * *x;
                points.push(ComplexPoint { re: center.re + t * cth, im: center.im + t * s });
                weights.push(wt * *w * hl * t);
            }
        }
    }
    PlanarRule { points, weights }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rule_integrates_polynomials() {
        for n in [1usize, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre::<f64>(n);
            for deg in 0..(2 * n) {
                let s: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(deg as i32)).sum();
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                assert!((s - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn large_rule_weights_sum_to_two() {
        let (_, w) = gauss_legendre::<f64>(1024);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn polar_rule_areas() {
        let p = |a, b| ComplexPoint::new(a, b).unwrap();
        let d = Region::centered_disk(1.5);
        let r = polar_rule(&d, p(0.0, 0.0), 8, 16);
        assert!((r.integrate(|_| 1.0) - PI * 2.25).abs() < 1e-13);
        let off = Region::disk(p(2.0, 1.0), 0.7);
        let r = polar_rule(&off, p(0.0, 0.0), 12, 64);
        let v = r.integrate(|_| 1.0);
        assert!((v - PI * 0.49).abs() < 1e-10, "{v} {}", PI * 0.49);
        let holed = Region::difference(Region::centered_disk(2.0), Region::disk(p(0.8, 0.0), 0.5));
        let r = polar_rule(&holed, p(0.0, 0.0), 16, 64);
        let v = r.integrate(|_| 1.0);
        assert!((v - PI * (4.0 - 0.25)).abs() < 1e-9, "{v} {}", PI * 3.75);
    }

    #[test]
    fn polar_rule_gaussian_moment() {
        // integral of e^{-|z|^2} over the unit disk is pi (1 - e^{-1})
        let d = Region::centered_disk(1.0);
        let r = polar_rule(&d, ComplexPoint::origin(), 12, 8);
        let v = r.integrate(|z: ComplexPoint<f64>| (-z.norm_sqr()).exp());
        assert!((v - PI * (1.0 - (-1.0f64).exp())).abs() < 1e-13);
    }
}
