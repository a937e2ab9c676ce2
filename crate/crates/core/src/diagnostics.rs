//! Poisson-approximation diagnostics for thinned counts.
//!
//! The Kantorovich-Rubinstein distance between point-process laws is not
//! estimable from samples. [`kr_proxy`] is a count-based stand-in reported
//! next to the count test, not that distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::TrialResult;
use crate::special::{chi_square_sf, gamma_p_int, gamma_q_int, poisson_pmf};
use crate::stream::RandomStream;
use crate::{Point, Region64};

/// Upper-tail mass beyond which the Poisson law is truncated.
pub const POISSON_TAIL: f64 = 1e-9;

/// Depth of the dyadic partition used by [`kr_proxy`].
pub const PROXY_DEPTH: u32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSample {
    pub counts: Vec<u64>,
    pub target_mean: f64,
}

impl CountSample {
    pub fn new(counts: Vec<u64>, target_mean: f64) -> Result<Self> {
        if !(target_mean >= 0.0) || !target_mean.is_finite() {
            return Err(Error::Domain(format!("target mean {target_mean} must be finite and nonnegative")));
        }
        Ok(Self { counts, target_mean })
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.counts.len() as f64
    }
}

/// Empirical mean and its z-score against the target, using the sample
/// variance.
pub fn intensity_check(sample: &CountSample) -> Result<(f64, f64)> {
    let m = sample.counts.len();
    if m < 30 {
        return Err(Error::Domain(format!("intensity check needs at least 30 trials, got {m}")));
    }
    let mean = sample.mean();
    let var = sample.counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    let diff = mean - sample.target_mean;
    let z = if var > 0.0 {
        diff / (var / m as f64).sqrt()
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok((mean, z))
}

/// Smallest `k` with `P(Poisson(mean) > k) <= POISSON_TAIL`.
pub fn poisson_truncation(mean: f64) -> usize {
    let mut k = 0;
    while gamma_q_int(k + 1, mean) < 1.0 - POISSON_TAIL {
        k += 1;
    }
    k
}

/// Total-variation distance between the empirical count law and
/// Poisson(target), and the chi-square p-value with bins pooled until each
/// expected count is at least 5.
pub fn poisson_count_test(sample: &CountSample) -> Result<(f64, f64)> {
    let m = sample.counts.len();
    if m < 200 {
        return Err(Error::Domain(format!("count test needs at least 200 trials, got {m}")));
    }
    let mean = sample.target_mean;
    let max_count = sample.counts.iter().copied().max().unwrap_or(0) as usize;
    let k_max = poisson_truncation(mean).max(max_count);
    let mut freq = vec![0usize; k_max + 1];
    for &c in &sample.counts {
        freq[c as usize] += 1;
    }
    let pmf: Vec<f64> = (0..=k_max).map(|k| poisson_pmf(k, mean)).collect();
    let tail = gamma_p_int(k_max + 1, mean).max(0.0);
    let mf = m as f64;
    let tv = 0.5 * (freq.iter().zip(&pmf).map(|(&f, &p)| (f as f64 / mf - p).abs()).sum::<f64>() + tail);

    // bins [lo, hi) left to right, the last one open to infinity
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for k in 0..=k_max {
        obs += freq[k] as f64;
        exp += mf * pmf[k];
        if exp >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    exp += mf * tail;
    match bins.last_mut() {
        Some(last) if exp < 5.0 => {
            last.0 += obs;
            last.1 += exp;
        }
        _ => bins.push((obs, exp)),
    }
    let p = if bins.len() < 2 {
        1.0
    } else {
        let stat: f64 = bins.iter().map(|(o, e)| if *e > 0.0 { (o - e).powi(2) / e } else { 0.0 }).sum();
        chi_square_sf(stat, (bins.len() - 1) as f64)
    };
    Ok((tv, p))
}

/// Cells of the depth-`PROXY_DEPTH` dyadic partition of the bounding square
/// of `region` that meet it, as `(x0, y0, side)`.
fn proxy_cells(region: &Region64) -> Vec<(f64, f64, f64)> {
    let c = region.natural_center();
    let half = region.max_radius_about(c);
    let per_axis = 1usize << PROXY_DEPTH;
    let side = 2.0 * half / per_axis as f64;
    let probe = 8;
    let mut cells = Vec::new();
    for iy in 0..per_axis {
        for ix in 0..per_axis {
            let x0 = c.re - half + ix as f64 * side;
            let y0 = c.im - half + iy as f64 * side;
            let meets = (0..=probe).any(|a| {
                (0..=probe).any(|b| {
                    let p = Point { re: x0 + side * a as f64 / probe as f64, im: y0 + side * b as f64 / probe as f64 };
                    region.contains(p)
                })
            });
            if meets {
                cells.push((x0, y0, side));
            }
        }
    }
    cells
}

fn cell_index(cells: &[(f64, f64, f64)], p: Point) -> Option<usize> {
    cells.iter().position(|&(x0, y0, s)| p.re >= x0 && p.re < x0 + s && p.im >= y0 && p.im < y0 + s)
}

fn count_tv(a: &[usize], b: &[usize]) -> f64 {
    let top = a.iter().chain(b).copied().max().unwrap_or(0);
    let (mut fa, mut fb) = (vec![0usize; top + 1], vec![0usize; top + 1]);
    for &x in a {
        fa[x] += 1;
    }
    for &x in b {
        fb[x] += 1;
    }
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    0.5 * fa.iter().zip(&fb).map(|(&x, &y)| (x as f64 / ma - y as f64 / mb).abs()).sum::<f64>()
}

/// Mean over the cells of a depth-3 dyadic partition of `region` of the
/// total-variation distance between the per-cell count laws of the two
/// sample lists. Zero for identical lists, at most 1.
pub fn kr_proxy(samples_a: &[Vec<Point>], samples_b: &[Vec<Point>], region: &Region64) -> Result<f64> {
    if samples_a.len() != samples_b.len() {
        return Err(Error::SizeMismatch(samples_a.len(), samples_b.len()));
    }
    if samples_a.is_empty() {
        return Ok(0.0);
    }
    let cells = proxy_cells(region);
    if cells.is_empty() {
        return Ok(0.0);
    }
    let counts = |samples: &[Vec<Point>]| -> Vec<Vec<usize>> {
        let mut per_cell = vec![vec![0usize; samples.len()]; cells.len()];
        for (t, pts) in samples.iter().enumerate() {
            for p in pts.iter().filter(|p| region.contains(**p)) {
                if let Some(i) = cell_index(&cells, *p) {
                    per_cell[i][t] += 1;
                }
            }
        }
        per_cell
    };
    let (ca, cb) = (counts(samples_a), counts(samples_b));
    Ok(ca.iter().zip(&cb).map(|(a, b)| count_tv(a, b)).sum::<f64>() / cells.len() as f64)
}

/// Homogeneous Poisson process of the given intensity on `region`.
pub fn sample_poisson_process(intensity: f64, region: &Region64, stream: &mut RandomStream) -> Result<Vec<Point>> {
    let area = region.area()?;
    let count = stream.poisson(intensity * area);
    let c = region.natural_center();
    let half = region.max_radius_about(c);
    let mut pts = Vec::with_capacity(count as usize);
    while (pts.len() as u64) < count {
        let p = Point { re: c.re + stream.uniform_range(-half, half), im: c.im + stream.uniform_range(-half, half) };
        if region.contains(p) {
            pts.push(p);
        }
    }
    Ok(pts)
}

/// Ratio of observed to Poisson-expected ordered pairs with separation in
/// `[a, b]`, pooled over samples, and its Poisson standard error. The
/// expectation uses `draws` uniform pairs in `region`.
pub fn pair_count_ratio(
    samples: &[Vec<Point>],
    region: &Region64,
    intensity: f64,
    a: f64,
    b: f64,
    draws: usize,
    stream: &mut RandomStream,
) -> Result<(f64, f64)> {
    let area = region.area()?;
    let c = region.natural_center();
    let half = region.max_radius_about(c);
    let mut uniform = || loop {
        let p = Point { re: c.re + stream.uniform_range(-half, half), im: c.im + stream.uniform_range(-half, half) };
        if region.contains(p) {
            return p;
        }
    };
    let hits = (0..draws)
        .filter(|_| {
            let d = uniform().dist(uniform());
            d >= a && d <= b
        })
        .count();
    let expected = samples.len() as f64 * intensity * intensity * area * area * hits as f64 / draws as f64;
    let observed: usize = samples
        .iter()
        .map(|pts| {
            let mut k = 0;
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    if i != j {
                        let d = pts[i].dist(pts[j]);
                        if d >= a && d <= b {
                            k += 1;
                        }
                    }
                }
            }
            k
        })
        .sum();
    if expected <= 0.0 {
        return Err(Error::Domain("no expected pairs at this separation".into()));
    }
    Ok((observed as f64 / expected, (observed.max(1) as f64).sqrt() / expected))
}

/// JSON report of the count diagnostics at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonReport {
    pub n: usize,
    pub kappa: f64,
    pub region: Region64,
    pub trials: usize,
    pub mean: f64,
    pub z: f64,
    pub tv: f64,
    pub chi2_p: f64,
    /// Count-based proxy, not the Kantorovich-Rubinstein distance.
    pub kr_proxy: f64,
}

/// Diagnostics of the successful trials at dimension `n`. The proxy
/// compares against the same number of synthetic Poisson patterns drawn
/// from `stream`.
pub fn poisson_report(
    results: &[TrialResult],
    n: usize,
    kappa: f64,
    region: &Region64,
    stream: &mut RandomStream,
) -> Result<PoissonReport> {
    let ok: Vec<&TrialResult> = results.iter().filter(|r| r.n == n && r.thinned_count.is_some()).collect();
    let counts: Vec<u64> = ok.iter().map(|r| r.thinned_count.unwrap() as u64).collect();
    let sample = CountSample::new(counts, kappa * region.area()?)?;
    let (mean, z) = intensity_check(&sample)?;
    let (tv, chi2_p) = poisson_count_test(&sample)?;
    let thinned: Vec<Vec<Point>> = ok.iter().map(|r| r.thinned_points.clone()).collect();
    let synthetic: Vec<Vec<Point>> =
        (0..thinned.len()).map(|_| sample_poisson_process(kappa, region, stream)).collect::<Result<_>>()?;
    let kr_proxy = kr_proxy(&thinned, &synthetic, region)?;
    Ok(PoissonReport { n, kappa, region: region.clone(), trials: ok.len(), mean, z, tv, chi2_p, kr_proxy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_tv() {
        let s = CountSample::new(vec![0; 300], 2.0).unwrap();
        let (tv, p) = poisson_count_test(&s).unwrap();
        assert!((tv - (1.0 - (-2.0f64).exp())).abs() < 1e-9);
        assert!(p < 1e-10);
    }

    #[test]
    fn zero_area_target() {
        let s = CountSample::new(vec![0; 40], 0.0).unwrap();
        assert_eq!(intensity_check(&s).unwrap(), (0.0, 0.0));
        let s = CountSample::new([0, 1].repeat(20), 0.0).unwrap();
        assert!(intensity_check(&s).unwrap().1 > 4.0);
    }

    #[test]
    fn poisson_self_test() {
        let mut st = RandomStream::new(7, 0);
        let counts: Vec<u64> = (0..10_000).map(|_| st.poisson(1.5)).collect();
        let s = CountSample::new(counts, 1.5).unwrap();
        let (_, z) = intensity_check(&s).unwrap();
        let (tv, p) = poisson_count_test(&s).unwrap();
        assert!(z.abs() < 4.0 && tv <= 0.05 && p > 0.001, "{z} {tv} {p}");
    }

    #[test]
    fn proxy_extremes() {
        let region = Region64::centered_disk(0.5);
        let mut st = RandomStream::new(3, 0);
        let a: Vec<Vec<Point>> = (0..50).map(|_| sample_poisson_process(2.0, &region, &mut st).unwrap()).collect();
        assert_eq!(kr_proxy(&a, &a, &region).unwrap(), 0.0);
        assert!(kr_proxy(&a, &a[..10], &region).is_err());
        let left: Vec<Vec<Point>> = (0..50).map(|_| vec![Point::real(-0.2); 3]).collect();
        let right: Vec<Vec<Point>> = (0..50).map(|_| vec![Point::real(0.2); 3]).collect();
        let cells = proxy_cells(&region).len() as f64;
        assert!((kr_proxy(&left, &right, &region).unwrap() - 2.0 / cells).abs() < 1e-12);
    }
}
