//! Planar points, point configurations and the small algebra of regions
//! (disks, annuli, unions, differences) the rest of the crate works with.
//!
//! Disks are closed: a point on the boundary circle is inside.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::{lit, Real};

/// A point of the complex plane with finite coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexPoint<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> ComplexPoint<T> {
    /// Builds a point, rejecting NaN and infinite coordinates.
    pub fn new(re: T, im: T) -> Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(Self { re, im })
        } else {
            Err(Error::Domain(format!("non-finite point ({re}, {im})")))
        }
    }

    pub fn origin() -> Self {
        Self { re: T::zero(), im: T::zero() }
    }

    pub fn real(re: T) -> Self {
        Self { re, im: T::zero() }
    }

    pub fn from_polar(r: T, theta: T) -> Self {
        Self { re: r * theta.cos(), im: r * theta.sin() }
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        Self { re: z.re, im: z.im }
    }

    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.re, self.im)
    }

    pub fn norm_sqr(self) -> T {
        self.re * self.re + self.im * self.im
    }

    pub fn abs(self) -> T {
        self.re.hypot(self.im)
    }

    pub fn arg(self) -> T {
        self.im.atan2(self.re)
    }

    pub fn is_origin(self) -> bool {
        self.re == T::zero() && self.im == T::zero()
    }

    pub fn dist_sqr(self, other: Self) -> T {
        let dx = self.re - other.re;
        let dy = self.im - other.im;
        dx * dx + dy * dy
    }

    /// Euclidean distance. Every distance comparison in the crate goes through
    /// this function so that different search engines agree bit for bit.
    pub fn dist(self, other: Self) -> T {
        self.dist_sqr(other).sqrt()
    }

    pub fn scale(self, f: T) -> Self {
        Self { re: self.re * f, im: self.im * f }
    }

    pub fn rotate(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self { re: c * self.re - s * self.im, im: s * self.re + c * self.im }
    }

    pub fn translate(self, by: Self) -> Self {
        Self { re: self.re + by.re, im: self.im + by.im }
    }
}

/// Coordinate convention of a configuration: raw eigenvalues (modulus up to
/// about `sqrt(n)`) or divided by `sqrt(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Unscaled,
    RescaledBySqrtN,
}

/// A finite point set tagged with the ensemble dimension it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration<T> {
    pub points: Vec<ComplexPoint<T>>,
    pub n: usize,
    pub scale: Scale,
}

impl<T: Real> PointConfiguration<T> {
    pub fn new(points: Vec<ComplexPoint<T>>, n: usize, scale: Scale) -> Self {
        Self { points, n, scale }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn sqrt_n(&self) -> T {
        T::from_usize(self.n).unwrap().sqrt()
    }

    /// The configuration in `1/sqrt(n)` coordinates.
    pub fn rescaled(&self) -> Self {
        match self.scale {
            Scale::RescaledBySqrtN => self.clone(),
            Scale::Unscaled => {
                let f = T::one() / self.sqrt_n();
                Self::new(self.points.iter().map(|p| p.scale(f)).collect(), self.n, Scale::RescaledBySqrtN)
            }
        }
    }

    /// The configuration in raw eigenvalue coordinates.
    pub fn unscaled(&self) -> Self {
        match self.scale {
            Scale::Unscaled => self.clone(),
            Scale::RescaledBySqrtN => {
                let f = self.sqrt_n();
                Self::new(self.points.iter().map(|p| p.scale(f)).collect(), self.n, Scale::Unscaled)
            }
        }
    }

    pub fn count_in(&self, region: &Region<T>) -> usize {
        self.points.iter().filter(|p| region.contains(**p)).count()
    }

    pub fn rotated(&self, angle: T) -> Self {
        Self::new(self.points.iter().map(|p| p.rotate(angle)).collect(), self.n, self.scale)
    }
}

/// Boundary circle of a primitive region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle<T> {
    pub center: ComplexPoint<T>,
    pub r: T,
}

/// Planar regions built from closed disks.
///
/// JSON form: `{"kind":"centered_disk","r":1.0}`,
/// `{"kind":"disk","cx":..,"cy":..,"r":..}`,
/// `{"kind":"annulus","cx":..,"cy":..,"r_in":..,"r_out":..}`,
/// `{"kind":"difference","a":..,"b":..}`,
/// `{"kind":"union","parts":[..],"disjoint":true}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region<T> {
    CenteredDisk {
        r: T,
    },
    Disk {
        cx: T,
        cy: T,
        r: T,
    },
    Annulus {
        cx: T,
        cy: T,
        r_in: T,
        r_out: T,
    },
    Difference {
        a: Box<Region<T>>,
        b: Box<Region<T>>,
    },
    Union {
        parts: Vec<Region<T>>,
        #[serde(default)]
        disjoint: bool,
    },
}

impl<T: Real> Region<T> {
    pub fn centered_disk(r: T) -> Self {
        Region::CenteredDisk { r }
    }

    pub fn disk(center: ComplexPoint<T>, r: T) -> Self {
        Region::Disk { cx: center.re, cy: center.im, r }
    }

    pub fn annulus(center: ComplexPoint<T>, r_in: T, r_out: T) -> Self {
        Region::Annulus { cx: center.re, cy: center.im, r_in, r_out }
    }

    pub fn difference(a: Region<T>, b: Region<T>) -> Self {
        Region::Difference { a: Box::new(a), b: Box::new(b) }
    }

    pub fn union(parts: Vec<Region<T>>, disjoint: bool) -> Self {
        Region::Union { parts, disjoint }
    }

    /// Checks radii are finite and nonnegative and annuli are ordered.
    pub fn validate(&self) -> Result<()> {
        let radius_ok = |r: T| r.is_finite() && r >= T::zero();
        let center_ok = |x: T, y: T| x.is_finite() && y.is_finite();
        match self {
            Region::CenteredDisk { r } if radius_ok(*r) => Ok(()),
            Region::Disk { cx, cy, r } if radius_ok(*r) && center_ok(*cx, *cy) => Ok(()),
            Region::Annulus { cx, cy, r_in, r_out }
                if radius_ok(*r_in) && radius_ok(*r_out) && center_ok(*cx, *cy) =>
            {
                if r_in <= r_out {
                    Ok(())
                } else {
                    Err(Error::InvalidRegion(format!("annulus with r_in {r_in} > r_out {r_out}")))
                }
            }
            Region::Difference { a, b } => {
                a.validate()?;
                b.validate()
            }
            Region::Union { parts, .. } => parts.iter().try_for_each(|p| p.validate()),
            other => Err(Error::InvalidRegion(format!("bad radius or center in {other:?}"))),
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, p: ComplexPoint<T>) -> bool {
        match self {
            Region::CenteredDisk { r } => p.norm_sqr() <= *r * *r,
            Region::Disk { cx, cy, r } => {
                p.dist_sqr(ComplexPoint { re: *cx, im: *cy }) <= *r * *r
            }
            Region::Annulus { cx, cy, r_in, r_out } => {
                let d2 = p.dist_sqr(ComplexPoint { re: *cx, im: *cy });
                d2 >= *r_in * *r_in && d2 <= *r_out * *r_out
            }
            Region::Difference { a, b } => a.contains(p) && !b.contains(p),
            Region::Union { parts, .. } => parts.iter().any(|q| q.contains(p)),
        }
    }

    /// Rotation invariance about the origin.
    pub fn is_radially_symmetric(&self) -> bool {
        self.radial_intervals().is_some()
    }

    /// For an origin-symmetric region, the set of moduli it contains as a
    /// sorted list of disjoint closed intervals.
    pub fn radial_intervals(&self) -> Option<Vec<(T, T)>> {
        let zero = T::zero();
        match self {
            Region::CenteredDisk { r } => Some(normalize(vec![(zero, *r)])),
            Region::Disk { cx, cy, r } if *cx == zero && *cy == zero => Some(normalize(vec![(zero, *r)])),
            Region::Annulus { cx, cy, r_in, r_out } if *cx == zero && *cy == zero => {
                Some(normalize(vec![(*r_in, *r_out)]))
            }
            Region::Union { parts, .. } => {
                let mut all = Vec::new();
                for p in parts {
                    all.extend(p.radial_intervals()?);
                }
                Some(normalize(all))
            }
            Region::Difference { a, b } => Some(difference(&a.radial_intervals()?, &b.radial_intervals()?)),
            _ => None,
        }
    }

    /// All boundary circles of the primitive pieces.
    pub fn circles(&self) -> Vec<Circle<T>> {
        match self {
            Region::CenteredDisk { r } => vec![Circle { center: ComplexPoint::origin(), r: *r }],
            Region::Disk { cx, cy, r } => vec![Circle { center: ComplexPoint { re: *cx, im: *cy }, r: *r }],
            Region::Annulus { cx, cy, r_in, r_out } => {
                let c = ComplexPoint { re: *cx, im: *cy };
                vec![Circle { center: c, r: *r_out }, Circle { center: c, r: *r_in }]
            }
            Region::Difference { a, b } => {
                let mut v = a.circles();
                v.extend(b.circles());
                v
            }
            Region::Union { parts, .. } => parts.iter().flat_map(|p| p.circles()).collect(),
        }
    }

    /// Center used for polar quadrature.
    pub fn natural_center(&self) -> ComplexPoint<T> {
        match self {
            Region::CenteredDisk { .. } => ComplexPoint::origin(),
            Region::Disk { cx, cy, .. } | Region::Annulus { cx, cy, .. } => ComplexPoint { re: *cx, im: *cy },
            Region::Difference { a, .. } => a.natural_center(),
            Region::Union { parts, .. } => {
                parts.first().map(|p| p.natural_center()).unwrap_or_else(ComplexPoint::origin)
            }
        }
    }

    /// Radius of a disk about `c` containing the region.
    pub fn max_radius_about(&self, c: ComplexPoint<T>) -> T {
        match self {
            Region::Difference { a, .. } => a.max_radius_about(c),
            Region::Union { parts, .. } => {
                parts.iter().map(|p| p.max_radius_about(c)).fold(T::zero(), T::max)
            }
            _ => self
                .circles()
                .iter()
                .map(|k| k.center.dist(c) + k.r)
                .fold(T::zero(), T::max),
        }
    }

    /// Upper bound on `|z|` over the region (exact for disks and annuli).
    pub fn sup_modulus(&self) -> T {
        self.max_radius_about(ComplexPoint::origin())
    }

    /// Dilation about the origin.
    pub fn scaled(&self, f: T) -> Self {
        match self {
            Region::CenteredDisk { r } => Region::CenteredDisk { r: *r * f },
            Region::Disk { cx, cy, r } => Region::Disk { cx: *cx * f, cy: *cy * f, r: *r * f },
            Region::Annulus { cx, cy, r_in, r_out } => Region::Annulus {
                cx: *cx * f,
                cy: *cy * f,
                r_in: *r_in * f,
                r_out: *r_out * f,
            },
            Region::Difference { a, b } => Region::difference(a.scaled(f), b.scaled(f)),
            Region::Union { parts, disjoint } => {
                Region::Union { parts: parts.iter().map(|p| p.scaled(f)).collect(), disjoint: *disjoint }
            }
        }
    }

    /// Intersection of the ray `{o + t e^{i theta} : t >= 0}` with the region,
    /// as parameter intervals in `t`.
    pub fn ray_intervals(&self, o: ComplexPoint<T>, theta: T) -> Vec<(T, T)> {
        let (s, c) = theta.sin_cos();
        self.ray_intervals_dir(o, c, s)
    }

    fn ray_intervals_dir(&self, o: ComplexPoint<T>, ux: T, uy: T) -> Vec<(T, T)> {
        let ray_disk = |cx: T, cy: T, r: T| -> Vec<(T, T)> {
            let dx = cx - o.re;
            let dy = cy - o.im;
            let b = ux * dx + uy * dy;
            let disc = b * b - (dx * dx + dy * dy - r * r);
            if disc < T::zero() {
                return Vec::new();
            }
            let h = disc.sqrt();
            let t1 = b + h;
            if t1 < T::zero() {
                return Vec::new();
            }
            vec![((b - h).max(T::zero()), t1)]
        };
        match self {
            Region::CenteredDisk { r } => ray_disk(T::zero(), T::zero(), *r),
            Region::Disk { cx, cy, r } => ray_disk(*cx, *cy, *r),
            Region::Annulus { cx, cy, r_in, r_out } => {
                difference(&ray_disk(*cx, *cy, *r_out), &ray_disk(*cx, *cy, *r_in))
            }
            Region::Difference { a, b } => {
                difference(&a.ray_intervals_dir(o, ux, uy), &b.ray_intervals_dir(o, ux, uy))
            }
            Region::Union { parts, .. } => {
                normalize(parts.iter().flat_map(|p| p.ray_intervals_dir(o, ux, uy)).collect())
            }
        }
    }

    /// Intersection with the vertical line `Re z = x`, as intervals in `Im z`.
    pub fn chord_intervals(&self, x: T) -> Vec<(T, T)> {
        let chord = |cx: T, cy: T, r: T| -> Vec<(T, T)> {
            let h2 = r * r - (x - cx) * (x - cx);
            if h2 < T::zero() {
                Vec::new()
            } else {
                let h = h2.sqrt();
                vec![(cy - h, cy + h)]
            }
        };
        match self {
            Region::CenteredDisk { r } => chord(T::zero(), T::zero(), *r),
            Region::Disk { cx, cy, r } => chord(*cx, *cy, *r),
            Region::Annulus { cx, cy, r_in, r_out } => difference(&chord(*cx, *cy, *r_out), &chord(*cx, *cy, *r_in)),
            Region::Difference { a, b } => difference(&a.chord_intervals(x), &b.chord_intervals(x)),
            Region::Union { parts, .. } => normalize(parts.iter().flat_map(|p| p.chord_intervals(x)).collect()),
        }
    }

    /// Signed disk decomposition for disk-like primitives.
    fn signed_disks(&self) -> Option<Vec<(T, Circle<T>)>> {
        let one = T::one();
        match self {
            Region::CenteredDisk { r } => Some(vec![(one, Circle { center: ComplexPoint::origin(), r: *r })]),
            Region::Disk { cx, cy, r } => Some(vec![(one, Circle { center: ComplexPoint { re: *cx, im: *cy }, r: *r })]),
            Region::Annulus { cx, cy, r_in, r_out } => {
                let c = ComplexPoint { re: *cx, im: *cy };
                Some(vec![(one, Circle { center: c, r: *r_out }), (-one, Circle { center: c, r: *r_in })])
            }
            _ => None,
        }
    }

    /// Lebesgue measure. Closed forms for disks and annuli, additivity for
    /// declared-disjoint unions, `|A| - |A ∩ B|` for differences.
    pub fn area(&self) -> Result<T> {
        self.validate()?;
        self.area_unchecked()
    }

    fn area_unchecked(&self) -> Result<T> {
        let pi = T::PI();
        match self {
            Region::CenteredDisk { r } | Region::Disk { r, .. } => Ok(pi * *r * *r),
            Region::Annulus { r_in, r_out, .. } => Ok(pi * (*r_out * *r_out - *r_in * *r_in)),
            Region::Union { parts, disjoint } => {
                if !*disjoint {
                    return Err(Error::AmbiguousUnion);
                }
                let mut total = T::zero();
                let mut areas = Vec::with_capacity(parts.len());
                for p in parts {
                    let a = p.area_unchecked()?;
                    areas.push(a);
                    total = total + a;
                }
                let tol = lit::<T>(1e-9) * total.max(T::one());
                for i in 0..parts.len() {
                    for j in (i + 1)..parts.len() {
                        if intersection_area(&parts[i], &parts[j])? > tol {
                            return Err(Error::AmbiguousUnion);
                        }
                    }
                }
                Ok(total)
            }
            Region::Difference { a, b } => {
                let whole = a.area_unchecked()?;
                let cut = intersection_area(a, b)?;
                Ok((whole - cut).max(T::zero()))
            }
        }
    }
}

/// `|A ∩ B|`, exact for disk-like pieces and numeric otherwise.
pub fn intersection_area<T: Real>(a: &Region<T>, b: &Region<T>) -> Result<T> {
    if let (Some(da), Some(db)) = (a.signed_disks(), b.signed_disks()) {
        let mut s = T::zero();
        for (sa, ca) in &da {
            for (sb, cb) in &db {
                s = s + *sa * *sb * lens_area(*ca, *cb);
            }
        }
        return Ok(s.max(T::zero()));
    }
    match (a, b) {
        (_, Region::Union { parts, disjoint: true }) => {
            parts.iter().try_fold(T::zero(), |acc, p| Ok(acc + intersection_area(a, p)?))
        }
        (Region::Union { parts, disjoint: true }, _) => {
            parts.iter().try_fold(T::zero(), |acc, p| Ok(acc + intersection_area(p, b)?))
        }
        _ => {
            let mut circles = a.circles();
            circles.extend(b.circles());
            numeric_area(&circles, |x| intersect(&a.chord_intervals(x), &b.chord_intervals(x)))
        }
    }
}

/// Area of the intersection of two closed disks.
pub fn lens_area<T: Real>(a: Circle<T>, b: Circle<T>) -> T {
    let pi = T::PI();
    let two = lit::<T>(2.0);
    let d = a.center.dist(b.center);
    let (r1, r2) = (a.r, b.r);
    if d >= r1 + r2 {
        return T::zero();
    }
    if d <= (r1 - r2).abs() {
        let m = r1.min(r2);
        return pi * m * m;
    }
    let c1 = ((d * d + r1 * r1 - r2 * r2) / (two * d * r1)).max(-T::one()).min(T::one());
    let c2 = ((d * d + r2 * r2 - r1 * r1) / (two * d * r2)).max(-T::one()).min(T::one());
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * c1.acos() + r2 * r2 * c2.acos() - k.max(T::zero()).sqrt() / two
}

/// Adaptive quadrature of exact chord lengths over `x`, split at every
/// abscissa where the chord function can lose smoothness.
fn numeric_area<T: Real, F>(circles: &[Circle<T>], chords: F) -> Result<T>
where
    F: Fn(T) -> Vec<(T, T)>,
{
    if circles.is_empty() {
        return Ok(T::zero());
    }
    let mut breaks: Vec<T> = Vec::new();
    for c in circles {
        breaks.push(c.center.re - c.r);
        breaks.push(c.center.re + c.r);
    }
    for i in 0..circles.len() {
        for j in (i + 1)..circles.len() {
            for p in circle_intersections(circles[i], circles[j]) {
                breaks.push(p.re);
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let length = |x: T| chords(x).iter().fold(T::zero(), |acc, (a, b)| acc + (*b - *a));
    let tol = lit::<T>(1e-12).max(T::epsilon() * lit(1e3));
    let half = lit::<T>(0.5);
    let mut total = T::zero();
    for w in breaks.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        // x = x0 + (x1 - x0)(1 - cos u)/2 absorbs the square-root endpoints
        let seg = |order: usize| -> T {
            let (nodes, weights) = gauss_legendre::<T>(order);
            let pi = T::PI();
            nodes
                .iter()
                .zip(&weights)
                .fold(T::zero(), |acc, (t, wgt)| {
                    let u = (*t + T::one()) * half * pi;
                    let x = x0 + (x1 - x0) * (T::one() - u.cos()) * half;
                    let jac = (x1 - x0) * half * u.sin() * half * pi;
                    acc + *wgt * length(x) * jac
                })
        };
        let mut order = 16;
        let mut prev = seg(order);
        let mut trace = vec![(order, prev.to_f64().unwrap_or(f64::NAN))];
        loop {
            order *= 2;
            let cur = seg(order);
            trace.push((order, cur.to_f64().unwrap_or(f64::NAN)));
            if (cur - prev).abs() <= tol * cur.abs().max(T::one()) {
                total = total + cur;
                break;
            }
            if order >= 2048 {
                return Err(Error::QuadratureNonConvergence { trace });
            }
            prev = cur;
        }
    }
    Ok(total)
}

/// Intersection points of two circles (zero, one or two).
pub fn circle_intersections<T: Real>(a: Circle<T>, b: Circle<T>) -> Vec<ComplexPoint<T>> {
    let d = a.center.dist(b.center);
    if d == T::zero() || d > a.r + b.r || d < (a.r - b.r).abs() {
        return Vec::new();
    }
    let two = lit::<T>(2.0);
    let along = (d * d + a.r * a.r - b.r * b.r) / (two * d);
    let h = (a.r * a.r - along * along).max(T::zero()).sqrt();
    let ex = (b.center.re - a.center.re) / d;
    let ey = (b.center.im - a.center.im) / d;
    let px = a.center.re + along * ex;
    let py = a.center.im + along * ey;
    vec![
        ComplexPoint { re: px - h * ey, im: py + h * ex },
        ComplexPoint { re: px + h * ey, im: py - h * ex },
    ]
}

/// Sorts, drops empty pieces and merges overlapping intervals.
pub fn normalize<T: Real>(mut v: Vec<(T, T)>) -> Vec<(T, T)> {
    v.retain(|(a, b)| b > a);
    v.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut out: Vec<(T, T)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Set difference of two normalized interval lists.
pub fn difference<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> Vec<(T, T)> {
    let b = normalize(b.to_vec());
    let mut out = Vec::new();
    for &(mut lo, hi) in a {
        for &(c, d) in &b {
            if d <= lo || c >= hi {
                continue;
            }
            if c > lo {
                out.push((lo, c));
            }
            lo = lo.max(d);
            if lo >= hi {
                break;
            }
        }
        if lo < hi {
            out.push((lo, hi));
        }
    }
    normalize(out)
}

/// Intersection of two interval lists.
pub fn intersect<T: Real>(a: &[(T, T)], b: &[(T, T)]) -> Vec<(T, T)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    normalize(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(re: f64, im: f64) -> ComplexPoint<f64> {
        ComplexPoint::new(re, im).unwrap()
    }

    #[test]
    fn areas_of_primitives() {
        assert!((Region::centered_disk(1.0).area().unwrap() - PI).abs() < 1e-15);
        let ann = Region::annulus(p(0.0, 0.0), 1.0, 2.0);
        assert!((ann.area().unwrap() - 3.0 * PI).abs() < 1e-14);
        let diff = Region::difference(Region::centered_disk(2.0), Region::centered_disk(1.0));
        assert!((diff.area().unwrap() - 3.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn membership_is_closed() {
        let d = Region::centered_disk(1.0);
        assert!(d.contains(p(0.5, 0.0)));
        assert!(d.contains(p(1.0, 0.0)));
        assert!(!d.contains(p(1.0 + 1e-12, 0.0)));
        assert!(!Region::annulus(p(0.0, 0.0), 1.0, 2.0).contains(p(0.5, 0.0)));
    }

    #[test]
    fn radial_symmetry_flags() {
        assert!(Region::centered_disk(2.0).is_radially_symmetric());
        assert!(!Region::disk(p(1.0, 0.0), 0.5).is_radially_symmetric());
        let r = Region::difference(Region::centered_disk(3.0), Region::annulus(p(0.0, 0.0), 1.0, 2.0));
        assert!(r.is_radially_symmetric());
        assert_eq!(r.radial_intervals().unwrap(), vec![(0.0, 1.0), (2.0, 3.0)]);
    }

    #[test]
    fn overlapping_union_is_rejected() {
        let u = Region::union(vec![Region::centered_disk(1.0), Region::disk(p(0.5, 0.0), 1.0)], false);
        assert_eq!(u.area(), Err(Error::AmbiguousUnion));
        let lying = Region::union(vec![Region::centered_disk(1.0), Region::disk(p(0.5, 0.0), 1.0)], true);
        assert_eq!(lying.area(), Err(Error::AmbiguousUnion));
    }

    #[test]
    fn disjoint_union_adds() {
        let u = Region::union(vec![Region::centered_disk(1.0), Region::disk(p(3.0, 0.0), 0.5)], true);
        let expect = PI + PI * 0.25;
        assert!((u.area().unwrap() - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn lens_matches_numeric_fallback() {
        let a = Region::disk(p(0.0, 0.0), 1.0);
        let b = Region::disk(p(1.2, 0.3), 0.8);
        let exact = intersection_area(&a, &b).unwrap();
        let circles = [Circle { center: p(0.0, 0.0), r: 1.0 }, Circle { center: p(1.2, 0.3), r: 0.8 }];
        let numeric = numeric_area(&circles, |x| intersect(&a.chord_intervals(x), &b.chord_intervals(x))).unwrap();
        assert!((exact - numeric).abs() < 1e-11, "{exact} vs {numeric}");
    }

    #[test]
    fn difference_with_nested_difference_uses_fallback() {
        // disk(2) minus (disk(1.5, offset) minus disk(0.5, offset))
        let hole = Region::difference(Region::disk(p(0.5, 0.0), 1.0), Region::disk(p(0.5, 0.0), 0.5));
        let r = Region::difference(Region::centered_disk(2.0), hole);
        let expect = 4.0 * PI - (PI - 0.25 * PI);
        assert!((r.area().unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn interval_algebra() {
        let a = vec![(0.0, 3.0)];
        let b = vec![(1.0, 2.0)];
        assert_eq!(difference(&a, &b), vec![(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(intersect(&a, &b), vec![(1.0, 2.0)]);
        assert_eq!(normalize(vec![(2.0, 3.0), (0.0, 1.0), (0.5, 2.5)]), vec![(0.0, 3.0)]);
    }

    #[test]
    fn ray_through_annulus() {
        let ann = Region::annulus(p(0.0, 0.0), 1.0, 2.0);
        let iv = ann.ray_intervals(p(0.0, 0.0), 0.3);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 1.0).abs() < 1e-15 && (iv[0].1 - 2.0).abs() < 1e-15);
        let off = Region::disk(p(3.0, 0.0), 1.0);
        let iv = off.ray_intervals(p(0.0, 0.0), 0.0);
        assert!((iv[0].0 - 2.0).abs() < 1e-15 && (iv[0].1 - 4.0).abs() < 1e-15);
        assert!(off.ray_intervals(p(0.0, 0.0), PI).is_empty());
    }

    #[test]
    fn region_json_shapes() {
        let r: Region<f64> = serde_json::from_str(r#"{"kind":"centered_disk","r":1.0}"#).unwrap();
        assert_eq!(r, Region::centered_disk(1.0));
        let r: Region<f64> =
            serde_json::from_str(r#"{"kind":"annulus","cx":0.0,"cy":0.0,"r_in":1.0,"r_out":2.0}"#).unwrap();
        assert_eq!(r, Region::annulus(p(0.0, 0.0), 1.0, 2.0));
        let u: Region<f64> = serde_json::from_str(
            r#"{"kind":"union","parts":[{"kind":"disk","cx":1.0,"cy":2.0,"r":0.5}],"disjoint":true}"#,
        )
        .unwrap();
        assert_eq!(u, Region::union(vec![Region::disk(p(1.0, 2.0), 0.5)], true));
        let d = Region::difference(Region::centered_disk(2.0), Region::centered_disk(1.0));
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(
            s,
            r#"{"kind":"difference","a":{"kind":"centered_disk","r":2.0},"b":{"kind":"centered_disk","r":1.0}}"#
        );
    }

    #[test]
    fn generic_over_f32() {
        let d = Region::<f32>::centered_disk(1.0);
        assert!((d.area().unwrap() - std::f32::consts::PI).abs() < 1e-6);
        assert!(d.contains(ComplexPoint::new(1.0f32, 0.0).unwrap()));
    }

    #[test]
    fn non_finite_points_rejected() {
        assert!(ComplexPoint::new(f64::NAN, 0.0).is_err());
        assert!(ComplexPoint::new(0.0, f64::INFINITY).is_err());
    }
}
