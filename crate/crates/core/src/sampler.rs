//! Exact samplers for the `n`-point Ginibre process.
//!
//! The matrix route diagonalizes a Gaussian matrix. The sequential route is
//! the spectral algorithm for projection processes: points are drawn one at a
//! time from the diagonal of the kernel reduced against the points already
//! placed. The same machinery samples the restriction of the process to a
//! centered disk `B_R(0)`, which is again a projection mixture: the basis
//! functions restricted to the disk stay orthogonal with squared norms
//! `lambda_k = P(Gamma(k,1) <= R^2)`, so each mode is kept independently with
//! probability `lambda_k` and the kept modes, renormalized, form the kernel.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointConfiguration, Region, Scale};
use crate::kernel::finite_diagonal;
use crate::linalg::general_eigenvalues;
use crate::quadrature::polar_rule;
use crate::special::{ln_factorial, ln_gamma_pq_int};
use crate::stream::{RandomStream, StreamDescriptor};
use crate::{format_float, Configuration, Point};

/// How a batch was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    MatrixEigen,
    SequentialDpp,
    KostlanRadii,
    /// Sequential sampling of the restriction to a centered disk.
    Windowed,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::MatrixEigen => "matrix_eigen",
            Route::SequentialDpp => "sequential_dpp",
            Route::KostlanRadii => "kostlan_radii",
            Route::Windowed => "windowed",
        }
    }
}

/// Samples of one route, ordered by trial index.
///
/// Kostlan batches store the moduli on the nonnegative real axis; they carry
/// no angular information and only radially symmetric functionals of them
/// are meaningful.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub configs: Vec<Configuration>,
    pub route: Route,
    pub stream: StreamDescriptor,
    pub n: usize,
}

/// Eigenvalues of an `n x n` matrix of independent standard complex
/// Gaussians, in raw coordinates.
pub fn sample_matrix_route(n: usize, stream: &mut RandomStream) -> Result<Configuration> {
    if n == 0 {
        return Err(Error::Domain("ensemble dimension must be positive".into()));
    }
    let a: Vec<Complex64> = (0..n * n).map(|_| stream.complex_gaussian()).collect();
    let mut retry = RandomStream::new(stream.next_u64(), 0);
    let ev = general_eigenvalues(n, &a, &mut retry)?;
    let points = ev.into_iter().map(Point::from_complex).collect();
    Ok(PointConfiguration::new(points, n, Scale::Unscaled))
}

/// Exactly `n` points by the sequential spectral algorithm.
pub fn sample_sequential_dpp(n: usize, stream: &mut RandomStream) -> Result<Configuration> {
    ProjectionSampler::full(n)?.sample(stream)
}

/// The points of the `n`-point process inside `B_radius(0)`.
pub fn sample_windowed(n: usize, radius: f64, stream: &mut RandomStream) -> Result<Configuration> {
    ProjectionSampler::windowed(n, radius)?.sample(stream)
}

/// Size argument of [`sample_kostlan_radii`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KostlanSize {
    Finite(usize),
    /// The infinite process, truncated to its first `truncation` moduli.
    Infinite { truncation: usize },
}

/// Moduli of the process: the `k`-th entry is `sqrt(G_k)` with independent
/// `G_k ~ Gamma(k, 1)`. The angular law is not represented.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KostlanRadii {
    pub radii: Vec<f64>,
    pub radially_symmetric_only: bool,
}

impl KostlanRadii {
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.radii.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn count_within(&self, r: f64) -> usize {
        self.radii.iter().filter(|x| **x <= r).count()
    }
}

pub fn sample_kostlan_radii(size: KostlanSize, stream: &mut RandomStream) -> Result<KostlanRadii> {
    let m = match size {
        KostlanSize::Finite(n) => n,
        KostlanSize::Infinite { truncation } => truncation,
    };
    if m == 0 {
        return Err(Error::Domain("need at least one modulus".into()));
    }
    let radii = (1..=m).map(|k| stream.gamma(k as f64).sqrt()).collect();
    Ok(KostlanRadii { radii, radially_symmetric_only: true })
}

/// `E N(B_delta(x))` for the `n`-point process.
pub fn expected_count_in_disk(n: usize, x: Point, delta: f64) -> f64 {
    let region = Region::disk(x, delta);
    polar_rule(&region, x, 24, 48).integrate(|z| finite_diagonal(n, z))
}

/// Approximate reduced Palm sample at `anchor`: matrix-route samples are
/// drawn until exactly one point falls in `B_delta(anchor)`, which is then
/// removed. The law is off by `O(delta)`.
pub fn sample_palm_accept_reject(
    n: usize,
    anchor: Point,
    delta: f64,
    stream: &mut RandomStream,
    max_attempts: u64,
) -> Result<Configuration> {
    if max_attempts == 0 || !(delta > 0.0) {
        return Err(Error::Domain("need delta > 0 and max_attempts >= 1".into()));
    }
    let mean = expected_count_in_disk(n, anchor, delta);
    if mean >= 1.0 {
        return Err(Error::Domain(format!("delta too large: expected count {mean} in the anchor disk")));
    }
    for _ in 0..max_attempts {
        let cfg = sample_matrix_route(n, stream)?;
        let near: Vec<usize> = (0..cfg.len()).filter(|&i| cfg.points[i].dist(anchor) <= delta).collect();
        if near.len() == 1 {
            let mut pts = cfg.points;
            pts.remove(near[0]);
            return Ok(PointConfiguration::new(pts, n, Scale::Unscaled));
        }
    }
    Err(Error::PalmAcceptance { attempts: max_attempts, rate: mean })
}

/// Runs `trials` independent draws of `route`, trial `t` on substream `t`,
/// on a pool of `workers` threads.
pub fn sample_batch(
    route: Route,
    n: usize,
    trials: usize,
    stream: &RandomStream,
    workers: usize,
    window: Option<f64>,
) -> Result<SampleBatch> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Numeric(e.to_string()))?;
    let projection = match route {
        Route::SequentialDpp => Some(ProjectionSampler::full(n)?),
        Route::Windowed => {
            let r = window.ok_or_else(|| Error::Domain("windowed route needs a window radius".into()))?;
            Some(ProjectionSampler::windowed(n, r)?)
        }
        _ => None,
    };
    let configs: Result<Vec<Configuration>> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut s = stream.substream(t as u64);
                match route {
                    Route::MatrixEigen => sample_matrix_route(n, &mut s),
                    Route::SequentialDpp | Route::Windowed => projection.as_ref().unwrap().sample(&mut s),
                    Route::KostlanRadii => {
                        let r = sample_kostlan_radii(KostlanSize::Finite(n), &mut s)?;
                        let pts = r.radii.into_iter().map(Point::real).collect();
                        Ok(PointConfiguration::new(pts, n, Scale::Unscaled))
                    }
                }
            })
            .collect()
    });
    Ok(SampleBatch { configs: configs?, route, stream: stream.descriptor(), n })
}

/// Writes `trial_id,route,n,point_index,re,im` rows.
pub fn write_batch_csv<W: Write>(batch: &SampleBatch, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["trial_id", "route", "n", "point_index", "re", "im"]).map_err(io)?;
    for (t, cfg) in batch.configs.iter().enumerate() {
        for (i, p) in cfg.points.iter().enumerate() {
            w.write_record([
                t.to_string(),
                batch.route.as_str().to_string(),
                batch.n.to_string(),
                i.to_string(),
                format_float(p.re),
                format_float(p.im),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Mass below which the ends of a mode vector are dropped, relative to its
/// squared norm.
const TAIL_MASS: f64 = 1e-32;

/// Coefficients below this fraction of the proposal norm are skipped in
/// the residual update.
const SKIP_COEFF: f64 = 1e-17;

/// Cell side of the spatial index that orders the early-rejection pass.
const CELL: f64 = 1.5;

/// Rings of cells visited before the remaining points.
const RINGS: i64 = 2;

/// Sequential spectral sampler for the `n`-point process, optionally
/// restricted to a centered disk.
#[derive(Clone, Debug)]
pub struct ProjectionSampler {
    n: usize,
    /// Squared window radius, infinite for the whole plane.
    r2: f64,
    /// `ln lambda_k` for `k = 1..=n` at index `k - 1`.
    ln_lambda: Vec<f64>,
    lambda: Vec<f64>,
    /// `ln k!` for `k = 0..=n`.
    ln_fact: Vec<f64>,
}

/// A unit vector in mode space, supported on positions `lo..lo + len` of
/// the kept-mode list, stored as split real and imaginary parts.
struct ModeVector {
    lo: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ModeVector {
    fn hi(&self) -> usize {
        self.lo + self.re.len()
    }

    fn overlaps(&self, lo: usize, hi: usize) -> bool {
        self.lo < hi && lo < self.hi()
    }

    /// `<self, other>` for `other` supported from position `other_lo`.
    fn dot(&self, other_lo: usize, ore: &[f64], oim: &[f64]) -> Complex64 {
        let a = self.lo.max(other_lo);
        let b = self.hi().min(other_lo + ore.len());
        if a >= b {
            return Complex64::new(0.0, 0.0);
        }
        let (sa, oa) = (a - self.lo, a - other_lo);
        let len = b - a;
        let (re, im) = conj_dot(&self.re[sa..sa + len], &self.im[sa..sa + len], &ore[oa..oa + len], &oim[oa..oa + len]);
        Complex64::new(re, im)
    }

    /// `target -= c * self` for `target` supported from position `target_lo`.
    fn subtract_from(&self, c: Complex64, target_lo: usize, tre: &mut [f64], tim: &mut [f64]) {
        let off = self.lo - target_lo;
        let len = self.re.len();
        axpy(c, &self.re, &self.im, &mut tre[off..off + len], &mut tim[off..off + len]);
    }
}

/// `sum conj(a) b` over split storage, with independent partial sums so the
/// loop vectorizes.
#[inline(always)]
fn conj_dot_body(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    const W: usize = 8;
    let mut sr = [0.0f64; W];
    let mut si = [0.0f64; W];
    let n = ar.len();
    let full = n - n % W;
    for (((xr, xi), yr), yi) in ar[..full]
        .chunks_exact(W)
        .zip(ai[..full].chunks_exact(W))
        .zip(br[..full].chunks_exact(W))
        .zip(bi[..full].chunks_exact(W))
    {
        for l in 0..W {
            sr[l] += xr[l] * yr[l] + xi[l] * yi[l];
            si[l] += xr[l] * yi[l] - xi[l] * yr[l];
        }
    }
    let mut re: f64 = sr.iter().sum();
    let mut im: f64 = si.iter().sum();
    for p in full..n {
        re += ar[p] * br[p] + ai[p] * bi[p];
        im += ar[p] * bi[p] - ai[p] * br[p];
    }
    (re, im)
}

/// `t -= c e` over split storage.
#[inline(always)]
fn axpy_body(c: Complex64, er: &[f64], ei: &[f64], tr: &mut [f64], ti: &mut [f64]) {
    for (((tr, ti), er), ei) in tr.iter_mut().zip(ti.iter_mut()).zip(er).zip(ei) {
        *tr -= c.re * er - c.im * ei;
        *ti -= c.re * ei + c.im * er;
    }
}

#[cfg(target_arch = "x86_64")]
mod wide {
    use super::*;

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn conj_dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
        conj_dot_body(ar, ai, br, bi)
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn axpy(c: Complex64, er: &[f64], ei: &[f64], tr: &mut [f64], ti: &mut [f64]) {
        axpy_body(c, er, ei, tr, ti)
    }

    pub(super) fn available() -> bool {
        static HAS: std::sync::OnceLock<bool> = std::sync::OnceLock::new();
        *HAS.get_or_init(|| is_x86_feature_detected!("avx2") && is_x86_feature_detected!("fma"))
    }
}

fn conj_dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    #[cfg(target_arch = "x86_64")]
    if wide::available() {
        // SAFETY: the required CPU features were detected at run time.
        return unsafe { wide::conj_dot(ar, ai, br, bi) };
    }
    conj_dot_body(ar, ai, br, bi)
}

fn axpy(c: Complex64, er: &[f64], ei: &[f64], tr: &mut [f64], ti: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    if wide::available() {
        // SAFETY: the required CPU features were detected at run time.
        return unsafe { wide::axpy(c, er, ei, tr, ti) };
    }
    axpy_body(c, er, ei, tr, ti)
}

/// Proposal vector `(conj psi_k(z))` over kept positions `lo..`.
struct Proposal {
    lo: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    norm2: f64,
}

impl ProjectionSampler {
    pub fn full(n: usize) -> Result<Self> {
        Self::build(n, f64::INFINITY)
    }

    pub fn windowed(n: usize, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::WindowTooSmall(format!("radius {radius}")));
        }
        Self::build(n, radius * radius)
    }

    fn build(n: usize, r2: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("ensemble dimension must be positive".into()));
        }
        let ln_lambda: Vec<f64> = (1..=n)
            .map(|k| if r2.is_infinite() { 0.0 } else { ln_gamma_pq_int(k, r2).0 })
            .collect();
        let lambda = ln_lambda.iter().map(|l| l.exp()).collect();
        let ln_fact = (0..=n).map(ln_factorial::<f64>).collect();
        Ok(Self { n, r2, ln_lambda, lambda, ln_fact })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Window radius, infinite for the whole plane.
    pub fn radius(&self) -> f64 {
        self.r2.sqrt()
    }

    /// Expected number of points in the window.
    pub fn expected_count(&self) -> f64 {
        self.lambda.iter().sum()
    }

    /// Squared radius of a draw from mode `k` restricted to the window.
    fn propose_radius2(&self, k: usize, stream: &mut RandomStream) -> f64 {
        let kf = k as f64;
        if self.r2.is_infinite() {
            return stream.gamma(kf);
        }
        let lam = self.lambda[k - 1];
        if lam >= 0.05 {
            loop {
                let x = stream.gamma(kf);
                if x <= self.r2 {
                    return x;
                }
            }
        }
        // inverse distribution function of the truncated law, by bisection
        let target = stream.uniform_open0().ln() + self.ln_lambda[k - 1];
        let (mut lo, mut hi) = (0.0, self.r2);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ln_gamma_pq_int(k, mid).0 < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// `ln |psi_k(z)|^2` for `|z|^2 = x`.
    fn ln_mode_sq(&self, k: usize, x: f64, ln_x: f64) -> f64 {
        -x + (k - 1) as f64 * ln_x - self.ln_fact[k - 1] - std::f64::consts::PI.ln() - self.ln_lambda[k - 1]
    }

    /// The proposal vector over a window of kept positions carrying all but
    /// a `TAIL_MASS` fraction of its squared norm.
    fn proposal(&self, modes: &[usize], z: Point) -> Proposal {
        let x = z.norm_sqr();
        if x == 0.0 {
            // only the first mode is nonzero at the origin
            let v = if modes[0] == 1 { 1.0 / (std::f64::consts::PI * self.lambda[0]) } else { 0.0 };
            return Proposal { lo: 0, re: vec![v.sqrt()], im: vec![0.0], norm2: v };
        }
        let ln_x = x.ln();
        let theta = z.arg();
        let eval = |k: usize| -> (f64, f64, f64) {
            let l = self.ln_mode_sq(k, x, ln_x);
            let (s, c) = ((k - 1) as f64 * theta).sin_cos();
            let m = (0.5 * l).exp();
            (m * c, -m * s, m * m)
        };
        let peak = (x.floor() as usize + 1).min(self.n);
        let p0 = modes.partition_point(|&k| k < peak).min(modes.len() - 1);
        let (r0, i0, t0) = eval(modes[p0]);
        let (mut up_re, mut up_im) = (vec![r0], vec![i0]);
        let (mut dn_re, mut dn_im) = (Vec::new(), Vec::new());
        let mut s = t0;
        let mut p = p0;
        while p > 0 {
            p -= 1;
            let k = modes[p];
            let (r, i, t) = eval(k);
            dn_re.push(r);
            dn_im.push(i);
            s += t;
            let q = (k - 1) as f64 / x;
            if q < 1.0 && t * q / (1.0 - q) <= TAIL_MASS * s {
                break;
            }
        }
        let lo = p;
        let mut p = p0;
        while p + 1 < modes.len() {
            p += 1;
            let k = modes[p];
            let (r, i, t) = eval(k);
            up_re.push(r);
            up_im.push(i);
            s += t;
            let kf = k as f64;
            let q = x / kf + if self.r2.is_infinite() { 0.0 } else { x * (kf + 1.0) / (kf * self.r2) };
            if q < 1.0 && t * q / (1.0 - q) <= TAIL_MASS * s {
                break;
            }
        }
        dn_re.reverse();
        dn_im.reverse();
        dn_re.extend(up_re);
        dn_im.extend(up_im);
        Proposal { lo, re: dn_re, im: dn_im, norm2: s }
    }

    /// One draw: the kept modes, then one point per mode.
    pub fn sample(&self, stream: &mut RandomStream) -> Result<Configuration> {
        let modes: Vec<usize> = (1..=self.n)
            .filter(|&k| {
                let lam = self.lambda[k - 1];
                lam >= 1.0 || stream.bernoulli(lam)
            })
            .collect();
        let points = self.sample_modes(&modes, stream)?;
        Ok(PointConfiguration::new(points, self.n, Scale::Unscaled))
    }

    fn sample_modes(&self, modes: &[usize], stream: &mut RandomStream) -> Result<Vec<Point>> {
        let m = modes.len();
        let mut points: Vec<Point> = Vec::with_capacity(m);
        let mut basis: Vec<ModeVector> = Vec::with_capacity(m);
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let mut stamp: Vec<u64> = Vec::with_capacity(m);
        let mut attempt: u64 = 0;
        let budget = 2000 * m as u64 + 1_000_000;
        // residual workspace over all kept positions; only `touched` is nonzero
        let mut wre = vec![0.0; m];
        let mut wim = vec![0.0; m];
        let mut coeffs: Vec<(usize, Complex64)> = Vec::new();
        while points.len() < m {
            attempt += 1;
            if attempt > budget {
                return Err(Error::RejectionBudget {
                    attempts: attempt - 1,
                    accepted: points.len(),
                    rate: points.len() as f64 / (attempt - 1) as f64,
                });
            }
            let k = modes[stream.below(m)];
            let r2 = self.propose_radius2(k, stream);
            let theta = stream.uniform_range(0.0, std::f64::consts::TAU);
            let z = Point::from_polar(r2.sqrt(), theta);
            let u = stream.uniform();
            let v = self.proposal(modes, z);
            if !(v.norm2 > 0.0) {
                continue;
            }
            let (lo, hi) = (v.lo, v.lo + v.re.len());
            let reject_below = u * v.norm2 * (1.0 - 1e-12);
            let mut remaining = v.norm2;
            coeffs.clear();
            // coefficients against the proposal, nearest points first so that
            // most rejections are decided early
            let mut rejected = false;
            let (cx, cy) = cell_of(z);
            'rings: for ring in 0..=RINGS {
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if dx.abs().max(dy.abs()) != ring {
                            continue;
                        }
                        let Some(list) = grid.get(&(cx + dx, cy + dy)) else { continue };
                        for &j in list {
                            stamp[j] = attempt;
                            if !basis[j].overlaps(lo, hi) {
                                continue;
                            }
                            let c = basis[j].dot(lo, &v.re, &v.im);
                            remaining -= c.norm_sqr();
                            coeffs.push((j, c));
                            if remaining < reject_below {
                                rejected = true;
                                break 'rings;
                            }
                        }
                    }
                }
            }
            if !rejected {
                for (j, e) in basis.iter().enumerate() {
                    if stamp[j] == attempt || !e.overlaps(lo, hi) {
                        continue;
                    }
                    let c = e.dot(lo, &v.re, &v.im);
                    remaining -= c.norm_sqr();
                    coeffs.push((j, c));
                    if remaining < reject_below {
                        rejected = true;
                        break;
                    }
                }
            }
            if rejected {
                continue;
            }
            // explicit residual in the workspace
            wre[lo..hi].copy_from_slice(&v.re);
            wim[lo..hi].copy_from_slice(&v.im);
            let (mut tlo, mut thi) = (lo, hi);
            let skip = SKIP_COEFF * v.norm2.sqrt();
            for &(j, c) in &coeffs {
                if c.norm() > skip {
                    let e = &basis[j];
                    e.subtract_from(c, 0, &mut wre, &mut wim);
                    tlo = tlo.min(e.lo);
                    thi = thi.max(e.hi());
                }
            }
            let mut rn2 = norm2_split(&wre[tlo..thi], &wim[tlo..thi]);
            if rn2 < 1e-4 * v.norm2 {
                // second pass, modified Gram-Schmidt on the residual
                for e in &basis {
                    if !e.overlaps(tlo, thi) {
                        continue;
                    }
                    let c = e.dot(0, &wre, &wim);
                    if c.norm() > SKIP_COEFF * rn2.sqrt() {
                        e.subtract_from(c, 0, &mut wre, &mut wim);
                    }
                }
                rn2 = norm2_split(&wre[tlo..thi], &wim[tlo..thi]);
            }
            if rn2 >= u * v.norm2 {
                let inv = 1.0 / rn2.sqrt();
                let re: Vec<f64> = wre[tlo..thi].iter().map(|c| c * inv).collect();
                let im: Vec<f64> = wim[tlo..thi].iter().map(|c| c * inv).collect();
                let (a, b) = trim(&re, &im);
                let j = basis.len();
                basis.push(ModeVector { lo: tlo + a, re: re[a..b].to_vec(), im: im[a..b].to_vec() });
                stamp.push(0);
                grid.entry(cell_of(z)).or_default().push(j);
                points.push(z);
            }
            wre[tlo..thi].iter_mut().for_each(|c| *c = 0.0);
            wim[tlo..thi].iter_mut().for_each(|c| *c = 0.0);
        }
        Ok(points)
    }
}

fn norm2_split(re: &[f64], im: &[f64]) -> f64 {
    re.iter().zip(im).map(|(a, b)| a * a + b * b).sum()
}

fn cell_of(z: Point) -> (i64, i64) {
    ((z.re / CELL).floor() as i64, (z.im / CELL).floor() as i64)
}

/// Index range keeping all but `TAIL_MASS` of a unit vector's mass.
fn trim(re: &[f64], im: &[f64]) -> (usize, usize) {
    let mass = |p: usize| re[p] * re[p] + im[p] * im[p];
    let mut a = 0;
    let mut acc = 0.0;
    while a + 1 < re.len() && acc + mass(a) <= 0.5 * TAIL_MASS {
        acc += mass(a);
        a += 1;
    }
    let mut b = re.len();
    acc = 0.0;
    while b > a + 1 && acc + mass(b - 1) <= 0.5 * TAIL_MASS {
        acc += mass(b - 1);
        b -= 1;
    }
    (a, b)
}
