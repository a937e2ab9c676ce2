//! Exact hole probabilities and count distributions.
//!
//! The number of points of a determinantal process with a finite-rank
//! projection kernel in a region is a sum of independent Bernoulli variables
//! whose parameters are the eigenvalues of the Gram matrix
//! `G_jk = ∫_region phi_j conj(phi_k)`. For regions invariant under rotation
//! about the origin `G` is diagonal with `G_kk = P(Gamma(k,1) ∈ radial image)`.
//!
//! Nonradial regions are discretized by polar cubature. With `F_ka =
//! phi_k(z_a) sqrt(w_a)` the Gram matrix is `F F*`, which shares its nonzero
//! spectrum with the `Q x Q` matrix `F* F = [sqrt(w_a w_b) K(z_b, z_a)]`; the
//! smaller of the two is used.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{difference, ComplexPoint, Region};
use crate::kernel::{eval_phi_all, finite_diagonal, finite_kernel};
use crate::linalg::{psd_eigenvalues, logdet_identity_minus_contraction};
use crate::quadrature::{polar_rule, PlanarRule};
use crate::special::{gamma_interval_int, ln_add_exp, ln_gamma_pq_int};

type Point = ComplexPoint<f64>;

/// Orders tried by the refinement loops.
const ORDERS: [usize; 10] = [8, 12, 16, 24, 32, 48, 64, 96, 128, 192];

/// Relative agreement required between successive refinements.
pub const REFINE_TOL: f64 = 1e-9;

/// Eigenvalues of the Gram matrix of a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramSpectrum {
    pub n: usize,
    pub region: Region<f64>,
    /// Descending, clamped to `[0, 1]`, padded with zeros to length `n`.
    pub eigenvalues: Vec<f64>,
    /// `1 - eigenvalue`, computed directly where a closed form exists.
    pub complements: Vec<f64>,
    /// 0 for the closed-form diagonal.
    pub quadrature_order: usize,
}

impl GramSpectrum {
    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Law of the number of points in a region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    pub pmf: Vec<f64>,
    pub mean: f64,
}

impl CountDistribution {
    pub fn cdf(&self, k: usize) -> f64 {
        self.pmf.iter().take(k + 1).sum::<f64>().min(1.0)
    }
}

/// Certified value of the infinite-product hole probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfiniteVacuum {
    pub value: f64,
    pub ln_value: f64,
    /// The exact probability lies in `[value (1 - rel_error), value]`.
    pub rel_error: f64,
    pub factors: usize,
}

/// Finite versus infinite hole probability of a centered disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower_ok: bool,
    pub ratio: f64,
    /// `ratio - 1`, computed without cancellation.
    pub excess: f64,
    pub finite: f64,
    pub infinite: f64,
}

type SpectrumCache = RwLock<HashMap<(usize, String, usize), Arc<GramSpectrum>>>;

fn cache() -> &'static SpectrumCache {
    static C: OnceLock<SpectrumCache> = OnceLock::new();
    C.get_or_init(|| RwLock::new(HashMap::new()))
}

fn region_key(region: &Region<f64>) -> String {
    serde_json::to_string(region).expect("regions serialize")
}

/// `(ln P(Gamma(k,1) ∈ S), ln P(Gamma(k,1) ∉ S))` for `k = 1..=n`, where `S`
/// is the set of squared radii of a radially symmetric region.
pub fn radial_mode_log_probs(n: usize, radial: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let inside: Vec<(f64, f64)> = radial.iter().map(|(a, b)| (a * a, b * b)).collect();
    let outside = difference(&[(0.0, f64::INFINITY)], &inside);
    let ln_mass = |k: usize, set: &[(f64, f64)]| -> f64 {
        set.iter().fold(f64::NEG_INFINITY, |acc, &(a, b)| {
            let piece = if b.is_infinite() {
                ln_gamma_pq_int(k, a).1
            } else if a == 0.0 {
                ln_gamma_pq_int(k, b).0
            } else {
                gamma_interval_int(k, a, b).ln()
            };
            ln_add_exp(acc, piece)
        })
    };
    (1..=n)
        .map(|k| {
            let li = ln_mass(k, &inside);
            let lo = ln_mass(k, &outside);
            (li.min(0.0), lo.min(0.0))
        })
        .collect()
}

fn check_bounded(region: &Region<f64>) -> Result<()> {
    region.validate()?;
    Ok(())
}

fn planar_rule(region: &Region<f64>, n: usize, order: usize) -> PlanarRule<f64> {
    polar_rule(region, region.natural_center(), order, (2 * order).max(n + 1))
}

/// Cubature for one refinement step and whether the `n x n` Gram route
/// applies. The Nyström route is used when the base rule has fewer nodes
/// than the dimension.
fn route_rule(region: &Region<f64>, n: usize, order: usize) -> (PlanarRule<f64>, bool) {
    let base = polar_rule(region, region.natural_center(), order, 2 * order);
    if base.len() <= 2 * n {
        (base, false)
    } else {
        (planar_rule(region, n, order), true)
    }
}

/// Gram matrix by polar cubature at a fixed order, row-major `n x n`.
pub fn gram_matrix_quadrature(n: usize, region: &Region<f64>, order: usize) -> Vec<Complex64> {
    let rule = planar_rule(region, n, order);
    let q = rule.len();
    let mut f = vec![Complex64::new(0.0, 0.0); n * q];
    for (a, (p, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let sw = w.sqrt();
        for (k, v) in eval_phi_all(n, *p).into_iter().enumerate() {
            f[k * q + a] = v * sw;
        }
    }
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for k in j..n {
            let fj = &f[j * q..(j + 1) * q];
            let fk = &f[k * q..(k + 1) * q];
            let s: Complex64 = fj.iter().zip(fk).map(|(x, y)| x * y.conj()).sum();
            g[j * n + k] = s;
            g[k * n + j] = s.conj();
        }
    }
    g
}

/// Gram matrix `G_jk = ∫_region phi_j conj(phi_k)`: exact diagonal for
/// radially symmetric regions, polar cubature of the given order otherwise.
pub fn gram_matrix(n: usize, region: &Region<f64>, order: usize) -> Result<Vec<Complex64>> {
    check_bounded(region)?;
    if order < 4 {
        return Err(Error::Domain("quadrature order must be at least 4".into()));
    }
    if let Some(radial) = region.radial_intervals() {
        let mut g = vec![Complex64::new(0.0, 0.0); n * n];
        for (k, (li, _)) in radial_mode_log_probs(n, &radial).into_iter().enumerate() {
            g[k * n + k] = Complex64::new(li.exp(), 0.0);
        }
        return Ok(g);
    }
    Ok(gram_matrix_quadrature(n, region, order))
}

/// Quadrature Gram matrix refined until successive orders agree entrywise
/// to `tol`.
pub fn gram_matrix_converged(n: usize, region: &Region<f64>, tol: f64) -> Result<(Vec<Complex64>, usize)> {
    check_bounded(region)?;
    let mut trace = Vec::new();
    let mut prev: Option<Vec<Complex64>> = None;
    for &order in ORDERS.iter() {
        let g = gram_matrix_quadrature(n, region, order);
        if let Some(p) = &prev {
            let diff = g.iter().zip(p).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            trace.push((order, diff));
            if diff <= tol {
                return Ok((g, order));
            }
        }
        prev = Some(g);
    }
    Err(Error::QuadratureNonConvergence { trace })
}

fn clamp_spectrum(raw: Vec<f64>) -> Result<Vec<f64>> {
    raw.into_iter()
        .map(|l| {
            if (-1e-10..=1.0 + 1e-10).contains(&l) {
                Ok(l.clamp(0.0, 1.0))
            } else {
                Err(Error::Numeric(format!("Gram eigenvalue {l} outside [0, 1]")))
            }
        })
        .collect()
}

/// Spectrum of the Nyström or Gram matrix at one cubature order.
fn spectrum_at_order(n: usize, region: &Region<f64>, order: usize) -> Result<Vec<f64>> {
    let (rule, gram) = route_rule(region, n, order);
    let q = rule.len();
    let raw = if gram {
        psd_eigenvalues(n, &gram_matrix_quadrature(n, region, order))
    } else {
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let mut a = vec![Complex64::new(0.0, 0.0); q * q];
        for i in 0..q {
            a[i * q + i] = Complex64::new(sw[i] * sw[i] * finite_diagonal(n, rule.points[i]), 0.0);
            for j in (i + 1)..q {
                let v = finite_kernel(n, rule.points[j], rule.points[i]) * (sw[i] * sw[j]);
                a[i * q + j] = v;
                a[j * q + i] = v.conj();
            }
        }
        psd_eigenvalues(q, &a)
    };
    let mut ev = clamp_spectrum(raw)?;
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev.resize(n, 0.0);
    ev.truncate(n);
    Ok(ev)
}

/// Gram spectrum, closed form for radial regions, otherwise refined until
/// successive determinants `prod(1 - lambda)` agree to `1e-9` relative.
pub fn gram_spectrum(n: usize, region: &Region<f64>) -> Result<Arc<GramSpectrum>> {
    check_bounded(region)?;
    if n == 0 {
        return Err(Error::Domain("ensemble dimension must be positive".into()));
    }
    let key = (n, region_key(region), 0usize);
    if let Some(hit) = cache().read().expect("cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let spec = if let Some(radial) = region.radial_intervals() {
        let probs = radial_mode_log_probs(n, &radial);
        let mut pairs: Vec<(f64, f64)> = probs.iter().map(|(a, b)| (a.exp(), b.exp())).collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        GramSpectrum {
            n,
            region: region.clone(),
            eigenvalues: pairs.iter().map(|p| p.0).collect(),
            complements: pairs.iter().map(|p| p.1).collect(),
            quadrature_order: 0,
        }
    } else {
        let mut trace = Vec::new();
        let mut prev: Option<f64> = None;
        let mut found = None;
        for &order in ORDERS.iter() {
            let ev = spectrum_at_order(n, region, order)?;
            let det: f64 = ev.iter().map(|l| (1.0 - l).ln()).sum::<f64>().exp();
            if let Some(p) = prev {
                let diff = (det - p).abs();
                trace.push((order, diff));
                if diff <= REFINE_TOL * det.max(1e-300) || diff <= 1e-15 {
                    found = Some((ev, order));
                    break;
                }
            }
            prev = Some(det);
        }
        let (ev, order) = found.ok_or(Error::QuadratureNonConvergence { trace })?;
        GramSpectrum {
            n,
            region: region.clone(),
            complements: ev.iter().map(|l| 1.0 - l).collect(),
            eigenvalues: ev,
            quadrature_order: order,
        }
    };
    let spec = Arc::new(spec);
    cache().write().expect("cache poisoned").insert(key, spec.clone());
    Ok(spec)
}

/// `P(no point of the n-point process in region) = det(I - G)`.
pub fn vacuum_probability(n: usize, region: &Region<f64>) -> Result<f64> {
    Ok(ln_vacuum_probability(n, region)?.exp())
}

/// Natural log of the hole probability.
pub fn ln_vacuum_probability(n: usize, region: &Region<f64>) -> Result<f64> {
    check_bounded(region)?;
    if n == 0 {
        return Err(Error::Domain("ensemble dimension must be positive".into()));
    }
    if let Some(radial) = region.radial_intervals() {
        return Ok(radial_mode_log_probs(n, &radial).iter().map(|p| p.1).sum());
    }
    let spec = gram_spectrum(n, region)?;
    Ok(spec.complements.iter().map(|c| c.ln()).sum())
}

/// Poisson-binomial law of the count, expanded from the generating function
/// `prod(1 - lambda_k + lambda_k z)` in descending-`lambda` order.
pub fn count_distribution(n: usize, region: &Region<f64>) -> Result<CountDistribution> {
    let spec = gram_spectrum(n, region)?;
    Ok(poisson_binomial(&spec.eigenvalues, &spec.complements))
}

/// Law of a sum of independent Bernoulli(`p[k]`) variables with
/// complements `q[k]`.
pub fn poisson_binomial(p: &[f64], q: &[f64]) -> CountDistribution {
    let mut pmf = vec![0.0; p.len() + 1];
    pmf[0] = 1.0;
    for (k, (pk, qk)) in p.iter().zip(q).enumerate() {
        for j in (1..=k + 1).rev() {
            pmf[j] = pmf[j] * qk + pmf[j - 1] * pk;
        }
        pmf[0] *= qk;
    }
    CountDistribution { mean: p.iter().sum(), pmf }
}

/// `ln P(N <= m)` for a sum of independent Bernoulli variables given as
/// `(ln p_k, ln(1 - p_k))`, by elementary symmetric polynomials of the odds
/// in log space. Stays finite when the probability underflows.
pub fn ln_low_count_probability(log_probs: &[(f64, f64)], m: usize) -> f64 {
    let base: f64 = log_probs.iter().map(|p| p.1).sum();
    let mut e = vec![f64::NEG_INFINITY; m + 1];
    e[0] = 0.0;
    for &(lp, lq) in log_probs {
        let lw = lp - lq;
        for j in (1..=m).rev() {
            e[j] = ln_add_exp(e[j], e[j - 1] + lw);
        }
    }
    base + e.iter().fold(f64::NEG_INFINITY, |acc, v| ln_add_exp(acc, *v))
}

/// `-ln P(N(B_s(0)) <= m) / s^4` for the `n`-point process.
pub fn low_count_ratio(n: usize, s: f64, m: usize) -> f64 {
    let probs = radial_mode_log_probs(n, &[(0.0, s)]);
    -ln_low_count_probability(&probs, m) / s.powi(4)
}

/// Chernoff bound `P(Poisson(x) >= k) <= e^(-x) (e x / k)^k`, in log space.
fn ln_chernoff(x: f64, k: usize) -> f64 {
    let kf = k as f64;
    -x + kf * (1.0 + (x / kf).ln())
}

/// `prod_(k>=1) P(Gamma(k,1) > r^2)`, truncated once the omitted factors are
/// certified to change the product by a relative amount below `tol`.
pub fn infinite_centered_disk_vacuum(r: f64, tol: f64) -> Result<InfiniteVacuum> {
    if !(r > 0.0 && r.is_finite()) || !(tol > 0.0) {
        return Err(Error::Domain(format!("need r > 0 and tol > 0, got r={r}, tol={tol}")));
    }
    let x = r * r;
    let max_factors = 1_000_000usize;
    let mut ln_value = 0.0;
    for k in 1..=max_factors {
        ln_value += ln_gamma_pq_int(k, x).1;
        if (k as f64) > std::f64::consts::E * x {
            let next = k + 1;
            let rho = x / next as f64 * (1.0 / next as f64).exp();
            if rho < 1.0 {
                let bound = ln_chernoff(x, next).exp() / (1.0 - rho);
                if bound <= tol {
                    return Ok(InfiniteVacuum { value: ln_value.exp(), ln_value, rel_error: bound, factors: k });
                }
            }
        }
    }
    Err(Error::TruncationUnreachable { tol, max_factors })
}

/// `sum_(k=first..=n) ln P(Gamma(k,1) > r^2)`. Terms are dropped once the
/// Chernoff bound certifies that the remainder is below `1e-17` in absolute
/// value, so very large `n` cost only `O(r^2)` terms.
pub fn ln_centered_disk_product(first: usize, n: usize, r: f64) -> f64 {
    let x = r * r;
    if x == 0.0 || first > n {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in first.max(1)..=n {
        sum += ln_gamma_pq_int(k, x).1;
        let next = k + 1;
        if next <= n && (next as f64) > std::f64::consts::E * x {
            let rho = x / next as f64 * (1.0 / next as f64).exp();
            // -ln(1 - p) <= 2p for p <= 1/2
            if rho < 0.5 && 2.0 * ln_chernoff(x, next).exp() / (1.0 - rho) <= 1e-17 {
                break;
            }
        }
    }
    sum
}

/// `-ln P(no point of the infinite process in B_r(0)) / r^4`.
pub fn hole_ratio(r: f64) -> Result<f64> {
    if r < 1.0 {
        return Err(Error::Domain(format!("hole ratio needs r >= 1, got {r}")));
    }
    let v = infinite_centered_disk_vacuum(r, 1e-10)?;
    Ok(-v.ln_value / r.powi(4))
}

/// Compares the `n`-point and infinite hole probabilities of `B_r(0)`.
pub fn sandwich_check(n: usize, r: f64) -> Result<Sandwich> {
    if n == 0 || !(r > 0.0) || r > 0.9 * (n as f64).sqrt() {
        return Err(Error::Domain(format!("sandwich needs 0 < r <= 0.9 sqrt(n), got n={n}, r={r}")));
    }
    let x = r * r;
    let finite_ln: f64 = (1..=n).map(|k| ln_gamma_pq_int(k, x).1).sum();
    // ln(finite / infinite) = -sum_(k>n) ln(1 - P(k, x))
    let mut excess_ln = 0.0;
    let mut k = n + 1;
    loop {
        let (lp, lq) = ln_gamma_pq_int(k, x);
        excess_ln -= lq;
        let tiny = lp.exp() <= 1e-20 * excess_ln.max(f64::MIN_POSITIVE);
        if tiny && (k as f64) > std::f64::consts::E * x {
            let rho = x / (k + 1) as f64 * (1.0 / (k + 1) as f64).exp();
            if rho < 1.0 && ln_chernoff(x, k + 1).exp() / (1.0 - rho) <= 1e-18 * excess_ln {
                break;
            }
        }
        k += 1;
        if k > n + 1_000_000 {
            return Err(Error::TruncationUnreachable { tol: 1e-18, max_factors: 1_000_000 });
        }
    }
    Ok(Sandwich {
        lower_ok: excess_ln >= 0.0,
        ratio: excess_ln.exp(),
        excess: excess_ln.exp_m1(),
        finite: finite_ln.exp(),
        infinite: (finite_ln - excess_ln).exp(),
    })
}

/// Hole probability of the Palm process at `anchor`, `det(I - P G P)` with
/// `P` the orthogonal projection removing the direction
/// `c_k = phi_k(anchor)`.
///
/// Closed form `prod_(k>=2) P(Gamma(k,1) ∉ S)` when the anchor is the origin
/// and the region is radial; otherwise cubature refined until successive
/// values agree to `1e-9` relative.
pub fn palm_vacuum(n: usize, anchor: Point, region: &Region<f64>) -> Result<f64> {
    Ok(palm_vacuum_refined(n, anchor, region)?.0)
}

/// Like [`palm_vacuum`], also returning the cubature order used (0 for the
/// closed form).
pub fn palm_vacuum_refined(n: usize, anchor: Point, region: &Region<f64>) -> Result<(f64, usize)> {
    check_bounded(region)?;
    if let Some(v) = palm_trivial(n, anchor, region)? {
        return Ok((v, 0));
    }
    let mut trace = Vec::new();
    let mut prev: Option<f64> = None;
    for &order in ORDERS.iter() {
        let v = palm_vacuum_at_order(n, anchor, region, order)?;
        if let Some(p) = prev {
            let diff = (v - p).abs();
            trace.push((order, diff));
            if diff <= REFINE_TOL * v.max(1e-300) || diff <= 1e-16 {
                return Ok((v, order));
            }
        }
        prev = Some(v);
    }
    Err(Error::QuadratureNonConvergence { trace })
}

fn palm_trivial(n: usize, anchor: Point, region: &Region<f64>) -> Result<Option<f64>> {
    if n == 0 {
        return Err(Error::Domain("ensemble dimension must be positive".into()));
    }
    let c2 = std::f64::consts::PI * finite_diagonal(n, anchor);
    if !(c2 > 1e-300) {
        return Err(Error::AnchorUnderflow(c2));
    }
    if n == 1 || region.circles().iter().all(|c| c.r == 0.0) {
        return Ok(Some(1.0));
    }
    if anchor.is_origin() {
        if let Some(radial) = region.radial_intervals() {
            if radial.len() == 1 && radial[0].0 == 0.0 {
                return Ok(Some(ln_centered_disk_product(2, n, radial[0].1).exp()));
            }
            let probs = radial_mode_log_probs(n, &radial);
            return Ok(Some(probs[1..].iter().map(|p| p.1).sum::<f64>().exp()));
        }
    }
    Ok(None)
}

/// Palm hole probability at one cubature order, no refinement.
pub fn palm_vacuum_at_order(n: usize, anchor: Point, region: &Region<f64>, order: usize) -> Result<f64> {
    check_bounded(region)?;
    if let Some(v) = palm_trivial(n, anchor, region)? {
        return Ok(v);
    }
    let (rule, gram) = route_rule(region, n, order);
    let q = rule.len();
    if q == 0 {
        return Ok(1.0);
    }
    let logdet = if gram {
        let g = gram_matrix_quadrature(n, region, order);
        let c: Vec<Complex64> = eval_phi_all(n, anchor);
        let c2: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        // P G P with P = I - c c* / |c|^2
        let gc: Vec<Complex64> = (0..n).map(|j| (0..n).map(|k| g[j * n + k] * c[k]).sum()).collect();
        let cgc: f64 = c.iter().zip(&gc).map(|(a, b)| (a.conj() * b).re).sum();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for k in 0..n {
                m[j * n + k] = g[j * n + k] - gc[j] * c[k].conj() / c2 - c[j] * gc[k].conj() / c2
                    + c[j] * c[k].conj() * (cgc / (c2 * c2));
            }
        }
        logdet_identity_minus_contraction(n, &m)
    } else {
        let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let kxx = finite_diagonal(n, anchor);
        let kx: Vec<Complex64> = rule.points.iter().map(|p| finite_kernel(n, *p, anchor)).collect();
        let mut a = vec![Complex64::new(0.0, 0.0); q * q];
        for i in 0..q {
            let d = finite_diagonal(n, rule.points[i]) - kx[i].norm_sqr() / kxx;
            a[i * q + i] = Complex64::new(d * sw[i] * sw[i], 0.0);
            for j in (i + 1)..q {
                let k = finite_kernel(n, rule.points[i], rule.points[j]) - kx[i] * kx[j].conj() / kxx;
                let v = k * (sw[i] * sw[j]);
                a[i * q + j] = v;
                a[j * q + i] = v.conj();
            }
        }
        logdet_identity_minus_contraction(q, &a)
    };
    Ok(logdet.exp().clamp(0.0, 1.0))
}
