//! Critical radii: the smallest `r` with `n P(no Palm point in B_r(z)) rho_n(z) <= kappa`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::kernel::finite_diagonal;
use crate::vacuum::{ln_centered_disk_product, palm_vacuum_at_order, palm_vacuum_refined};
use crate::{format_float, Point};


const MAX_ITERATIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusQuery {
    pub n: usize,
    /// Unscaled coordinates.
    pub z: Point,
    pub kappa: f64,
    /// Absolute tolerance on `g(r) - kappa`.
    pub tol: f64,
}

impl RadiusQuery {
    pub fn new(n: usize, z: Point, kappa: f64) -> Self {
        Self { n, z, kappa, tol: 1e-9 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("ensemble dimension must be positive".into()));
        }
        if !(self.kappa > 1.0) {
            return Err(Error::InvalidConfig("kappa must exceed 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        if self.z.abs() >= (self.n as f64).sqrt() {
            return Err(Error::Domain(format!("|z| = {} is not below sqrt(n)", self.z.abs())));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusResult {
    pub r: f64,
    pub g_at_r: f64,
    pub iterations: usize,
    /// `g(0+) <= kappa`, so the infimum is zero.
    pub boundary: bool,
    /// Cubature order used for the Palm hole probability; 0 for the closed form.
    pub order: usize,
}

/// `g(r) = n rho_n(z) P(no Palm point in B_r(z))`.
fn g_value(q: &RadiusQuery, r: f64, order: usize) -> Result<f64> {
    let n = q.n as f64;
    let rho = finite_diagonal(q.n, q.z);
    if r == 0.0 {
        return Ok(n * rho);
    }
    if q.z.is_origin() {
        return Ok(n * rho * ln_centered_disk_product(2, q.n, r).exp());
    }
    let v = palm_vacuum_at_order(q.n, q.z, &Region::disk(q.z, r), order)?;
    Ok(n * rho * v)
}

/// Root of the closed form at the origin, used to seed brackets.
fn origin_guess(n: usize, kappa: f64) -> f64 {
    let q = RadiusQuery { n, z: Point::origin(), kappa, tol: 1e-6 };
    let (mut lo, mut hi) = (0.0, 1.0);
    while g_value(&q, hi, 0).unwrap_or(0.0) > kappa && hi < 100.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g_value(&q, mid, 0).unwrap_or(0.0) > kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection on the strictly decreasing `g`.
pub fn solve_rn(q: &RadiusQuery) -> Result<RadiusResult> {
    q.validate()?;
    let g0 = g_value(q, 0.0, 0)?;
    if g0 <= q.kappa {
        return Ok(RadiusResult { r: 0.0, g_at_r: g0, iterations: 0, boundary: true, order: 0 });
    }
    let r_max = 3.0 * (4.0 * (q.n as f64).ln()).max(1.0).sqrt();
    let guess = origin_guess(q.n, q.kappa).max(1e-3);
    let origin = q.z.is_origin();
    // order converged at the upper end of the initial bracket
    let mut order = 0;
    let mut hi = (guess * 1.05).min(r_max);
    let mut g_hi;
    loop {
        if !origin {
            let (_, o) = palm_vacuum_refined(q.n, q.z, &Region::disk(q.z, hi))?;
            order = order.max(o);
        }
        g_hi = g_value(q, hi, order)?;
        if g_hi <= q.kappa {
            break;
        }
        if hi >= r_max {
            return Err(Error::BracketFailure { r_max, g_at_max: g_hi });
        }
        hi = (hi * 1.25).min(r_max);
    }
    let mut lo = guess * 0.95;
    let mut g_lo = if lo < hi { g_value(q, lo, order)? } else { f64::NEG_INFINITY };
    if !(g_lo > q.kappa) {
        lo = 0.0;
        g_lo = g0;
    }
    if g_hi > g_lo {
        return Err(Error::NonMonotone { r: hi, detail: format!("g({lo}) = {g_lo} < g({hi}) = {g_hi}") });
    }
    let mut iterations = 0;
    let (mut r, mut g) = (hi, g_hi);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let gm = g_value(q, mid, order)?;
        if gm > g_lo * (1.0 + 1e-12) + 1e-300 || gm < g_hi * (1.0 - 1e-12) - 1e-300 {
            return Err(Error::NonMonotone {
                r: mid,
                detail: format!("g({mid}) = {gm} outside [g({hi}) = {g_hi}, g({lo}) = {g_lo}]"),
            });
        }
        r = mid;
        g = gm;
        if (gm - q.kappa).abs() <= q.tol || hi - lo <= 1e-15 * hi {
            break;
        }
        if gm > q.kappa {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
            g_hi = gm;
        }
    }
    Ok(RadiusResult { r, g_at_r: g, iterations, boundary: false, order })
}

/// Recomputes `g` at the returned radius with a doubled cubature order and
/// checks `|g - kappa| <= 2 tol`. Boundary results pass trivially.
pub fn verify_requality(result: &RadiusResult, q: &RadiusQuery) -> Result<bool> {
    if result.boundary {
        return Ok(true);
    }
    let order = if result.order == 0 { 0 } else { 2 * result.order };
    let g = g_value(q, result.r, order)?;
    Ok((g - q.kappa).abs() <= 2.0 * q.tol)
}

/// One row of the scaling table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnRow {
    pub n: usize,
    pub kappa: f64,
    pub z: Point,
    pub r: f64,
    /// `r^4 / (4 ln n)`.
    pub ratio: f64,
    pub g_at_r: f64,
    pub boundary: bool,
}

/// `r^4 / (4 ln n)`.
pub fn scaling_ratio(r: f64, n: usize) -> f64 {
    r.powi(4) / (4.0 * (n as f64).ln())
}

/// First-order model of the ratio, `1 - ln(pi kappa) / ln n`.
pub fn scaling_model(n: usize, kappa: f64) -> f64 {
    1.0 - (std::f64::consts::PI * kappa).ln() / (n as f64).ln()
}

/// Critical radii for each `n` at the same point, solved in parallel.
pub fn rn_scaling_table(n_list: &[usize], kappa: f64, z: Point) -> Result<Vec<RnRow>> {
    for &n in n_list {
        if n < 2 {
            return Err(Error::Domain("scaling table needs n >= 2".into()));
        }
        if z.abs() > 0.8 * (n as f64).sqrt() {
            return Err(Error::Domain(format!("|z| exceeds 0.8 sqrt(n) at n = {n}")));
        }
    }
    n_list
        .par_iter()
        .map(|&n| {
            let res = solve_rn(&RadiusQuery::new(n, z, kappa))?;
            Ok(RnRow {
                n,
                kappa,
                z,
                r: res.r,
                ratio: scaling_ratio(res.r, n),
                g_at_r: res.g_at_r,
                boundary: res.boundary,
            })
        })
        .collect()
}

/// Writes `n,kappa,z_re,z_im,r,ratio,g_at_r,boundary_flag` rows.
pub fn write_rn_csv<W: Write>(rows: &[RnRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["n", "kappa", "z_re", "z_im", "r", "ratio", "g_at_r", "boundary_flag"]).map_err(io)?;
    for row in rows {
        w.write_record([
            row.n.to_string(),
            format_float(row.kappa),
            format_float(row.z.re),
            format_float(row.z.im),
            format_float(row.r),
            format_float(row.ratio),
            format_float(row.g_at_r),
            row.boundary.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Source of critical radii for the thinning step.
pub trait RnProvider: Sync {
    /// `r_n(z)` for `z` in unscaled coordinates.
    fn rn(&self, z: Point) -> Result<f64>;
    fn n(&self) -> usize;
    fn kappa(&self) -> f64;
}

/// Solves afresh for every query.
#[derive(Clone, Copy, Debug)]
pub struct DirectRn {
    pub n: usize,
    pub kappa: f64,
    pub tol: f64,
}

impl RnProvider for DirectRn {
    fn rn(&self, z: Point) -> Result<f64> {
        Ok(solve_rn(&RadiusQuery { n: self.n, z, kappa: self.kappa, tol: self.tol })?.r)
    }

    fn n(&self) -> usize {
        self.n
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }
}

/// Relative accuracy the table must reach at every grid midpoint.
pub const TABLE_TOL: f64 = 1e-6;

/// `r_n` on a uniform grid in `|z|` with cubic interpolation, certified
/// against direct solves at every grid midpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnTable {
    pub n: usize,
    pub kappa: f64,
    /// Largest modulus covered, unscaled.
    pub max_modulus: f64,
    pub radii: Vec<f64>,
    /// Largest relative midpoint error observed.
    pub certified_error: f64,
}

impl RnTable {
    /// Builds a table on `[0, max_modulus]`, doubling the grid until every
    /// midpoint interpolant agrees with a direct solve to `TABLE_TOL`.
    pub fn build(n: usize, kappa: f64, max_modulus: f64) -> Result<Self> {
        let sqrt_n = (n as f64).sqrt();
        if !(max_modulus >= 0.0) || max_modulus >= sqrt_n {
            return Err(Error::Domain(format!("table range {max_modulus} must lie in [0, sqrt(n))")));
        }
        let solve = |rho: f64| -> Result<f64> {
            Ok(solve_rn(&RadiusQuery::new(n, Point::real(rho), kappa))?.r)
        };
        let mut cells = 8usize;
        let mut radii: Vec<f64> = (0..=cells)
            .into_par_iter()
            .map(|i| solve(max_modulus * i as f64 / cells as f64))
            .collect::<Result<_>>()?;
        loop {
            let mids: Vec<f64> = (0..cells)
                .into_par_iter()
                .map(|i| solve(max_modulus * (i as f64 + 0.5) / cells as f64))
                .collect::<Result<_>>()?;
            let table = RnTable { n, kappa, max_modulus, radii: radii.clone(), certified_error: 0.0 };
            let mut worst: f64 = 0.0;
            for (i, exact) in mids.iter().enumerate() {
                let approx = table.interpolate(max_modulus * (i as f64 + 0.5) / cells as f64);
                let err = if *exact == 0.0 { approx.abs() } else { ((approx - exact) / exact).abs() };
                worst = worst.max(err);
            }
            if worst <= TABLE_TOL || max_modulus == 0.0 {
                return Ok(RnTable { certified_error: worst, ..table });
            }
            if cells >= 1024 {
                return Err(Error::Numeric(format!("r_n table not certified: midpoint error {worst:e}")));
            }
            let mut merged = Vec::with_capacity(2 * cells + 1);
            for i in 0..cells {
                merged.push(radii[i]);
                merged.push(mids[i]);
            }
            merged.push(radii[cells]);
            radii = merged;
            cells *= 2;
        }
    }

    /// Cubic Lagrange interpolation through the four nearest nodes.
    pub fn interpolate(&self, modulus: f64) -> f64 {
        let cells = self.radii.len() - 1;
        if cells == 0 || self.max_modulus == 0.0 {
            return self.radii[0];
        }
        let h = self.max_modulus / cells as f64;
        let t = (modulus / h).clamp(0.0, cells as f64);
        if cells < 3 {
            let i = (t.floor() as usize).min(cells - 1);
            let f = t - i as f64;
            return self.radii[i] * (1.0 - f) + self.radii[i + 1] * f;
        }
        let i0 = ((t.floor() as isize) - 1).clamp(0, cells as isize - 3) as usize;
        let mut s = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (t - (i0 + b) as f64) / (a as f64 - b as f64);
                }
            }
            s += w * self.radii[i0 + a];
        }
        s
    }
}

impl RnProvider for RnTable {
    fn rn(&self, z: Point) -> Result<f64> {
        let m = z.abs();
        if m > self.max_modulus * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("|z| = {m} outside the table range {}", self.max_modulus)));
        }
        Ok(self.interpolate(m))
    }

    fn n(&self) -> usize {
        self.n
    }

    fn kappa(&self) -> f64 {
        self.kappa
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_gamma_pq_int;

    #[test]
    fn single_point_is_boundary() {
        let res = solve_rn(&RadiusQuery::new(1, Point::real(0.3), 2.0)).unwrap();
        assert!(res.boundary && res.r == 0.0);
        assert!(verify_requality(&res, &RadiusQuery::new(1, Point::real(0.3), 2.0)).unwrap());
    }

    #[test]
    fn origin_root_solves_closed_form() {
        let q = RadiusQuery::new(64, Point::origin(), 2.0);
        let res = solve_rn(&q).unwrap();
        let direct: f64 = (2..=64).map(|k| ln_gamma_pq_int(k, res.r * res.r).1).sum::<f64>().exp();
        assert!((64.0 / std::f64::consts::PI * direct - 2.0).abs() < 1e-8);
        assert!(verify_requality(&res, &q).unwrap());
        let bad = RadiusResult { r: res.r * 1.1, ..res };
        assert!(!verify_requality(&bad, &q).unwrap());
    }

    #[test]
    fn larger_kappa_gives_smaller_radius() {
        let a = solve_rn(&RadiusQuery::new(40, Point::real(1.0), 1.5)).unwrap();
        let b = solve_rn(&RadiusQuery::new(40, Point::real(1.0), 3.0)).unwrap();
        assert!(b.r <= a.r);
    }

    #[test]
    fn rotation_does_not_change_radius() {
        let a = solve_rn(&RadiusQuery::new(30, Point::real(1.5), 2.0)).unwrap();
        let b = solve_rn(&RadiusQuery::new(30, Point::from_polar(1.5, 1.1), 2.0)).unwrap();
        assert!((a.r - b.r).abs() < 1e-8 * a.r, "{} {}", a.r, b.r);
    }

    #[test]
    fn table_interpolates_within_tolerance() {
        let t = RnTable::build(48, 2.0, 3.0).unwrap();
        assert!(t.certified_error <= TABLE_TOL);
        let direct = solve_rn(&RadiusQuery::new(48, Point::real(1.3), 2.0)).unwrap().r;
        assert!(((t.rn(Point::from_polar(1.3, 0.4)).unwrap() - direct) / direct).abs() < 1e-5);
    }

    #[test]
    fn csv_header() {
        let rows = rn_scaling_table(&[16, 32], 2.0, Point::origin()).unwrap();
        let mut buf = Vec::new();
        write_rn_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,kappa,z_re,z_im,r,ratio,g_at_r,boundary_flag\n16,"));
    }
}
