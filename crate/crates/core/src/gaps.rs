//! Nearest-neighbour distances, the thinning map and the largest-gap
//! statistic, with a parallel Monte Carlo harness.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::geometry::{PointConfiguration, Scale};
use crate::rn::{RnProvider, RnTable};
use crate::sampler::ProjectionSampler;
use crate::stream::RandomStream;
use crate::{format_float, Configuration, Point, Region64};

/// Room left between the gap domain and the sampling window.
pub const GAP_MARGIN: f64 = 4.0;

/// Windows reaching this far past `sqrt(n)` are replaced by the whole plane.
pub const FULL_WINDOW_EXCESS: f64 = 10.0;

/// `d^4 / (4 ln n)`.
pub fn gap_statistic(d: f64, n: usize) -> f64 {
    d.powi(4) / (4.0 * (n as f64).ln())
}

/// Cell side used by the spatial hash, `2 (4 ln n)^{1/4}`.
pub fn default_cell(n: usize) -> f64 {
    2.0 * (4.0 * (n.max(3) as f64).ln()).powf(0.25)
}

/// Uniform bucket grid over a point set.
#[derive(Clone, Debug)]
pub struct NeighborGrid<'a> {
    points: &'a [Point],
    cell: f64,
    x0: f64,
    y0: f64,
    nx: usize,
    ny: usize,
    starts: Vec<u32>,
    members: Vec<u32>,
}

impl<'a> NeighborGrid<'a> {
    pub fn new(points: &'a [Point], cell: f64) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            x0 = x0.min(p.re);
            y0 = y0.min(p.im);
            x1 = x1.max(p.re);
            y1 = y1.max(p.im);
        }
        if points.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let mut cell = cell.max(1e-12);
        let budget = (4 * points.len() + 16) as f64;
        while ((x1 - x0) / cell + 1.0) * ((y1 - y0) / cell + 1.0) > budget {
            cell *= 2.0;
        }
        let nx = ((x1 - x0) / cell) as usize + 1;
        let ny = ((y1 - y0) / cell) as usize + 1;
        let mut grid = Self { points, cell, x0, y0, nx, ny, starts: vec![0; nx * ny + 1], members: Vec::new() };
        let keys: Vec<usize> = points.iter().map(|p| grid.key(grid.cell_of(*p))).collect();
        for &k in &keys {
            grid.starts[k + 1] += 1;
        }
        for i in 0..nx * ny {
            grid.starts[i + 1] += grid.starts[i];
        }
        let mut fill = grid.starts.clone();
        grid.members = vec![0; points.len()];
        for (i, &k) in keys.iter().enumerate() {
            grid.members[fill[k] as usize] = i as u32;
            fill[k] += 1;
        }
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = (((p.re - self.x0) / self.cell).max(0.0) as usize).min(self.nx - 1);
        let cy = (((p.im - self.y0) / self.cell).max(0.0) as usize).min(self.ny - 1);
        (cx, cy)
    }

    fn key(&self, (cx, cy): (usize, usize)) -> usize {
        cy * self.nx + cx
    }

    fn bucket(&self, cx: usize, cy: usize) -> &[u32] {
        let k = self.key((cx, cy));
        &self.members[self.starts[k] as usize..self.starts[k + 1] as usize]
    }

    /// Nearest other point to `points[i]` and its distance.
    pub fn nearest(&self, i: usize) -> Option<(usize, f64)> {
        let p = self.points[i];
        let (cx, cy) = self.cell_of(p);
        let mut best: Option<(usize, f64)> = None;
        let reach = self.nx.max(self.ny);
        for ring in 0..=reach {
            let r = ring as isize;
            for dy in -r..=r {
                let y = cy as isize + dy;
                if y < 0 || y >= self.ny as isize {
                    continue;
                }
                let full_row = dy == -r || dy == r;
                let step = if full_row { 1 } else { (2 * r).max(1) };
                let mut dx = -r;
                while dx <= r {
                    let x = cx as isize + dx;
                    if x >= 0 && x < self.nx as isize {
                        for &j in self.bucket(x as usize, y as usize) {
                            let j = j as usize;
                            if j == i {
                                continue;
                            }
                            let d = p.dist(self.points[j]);
                            if best.is_none_or(|(_, b)| d < b) {
                                best = Some((j, d));
                            }
                        }
                    }
                    dx += step;
                }
            }
            if let Some((_, b)) = best {
                let lo_x = self.x0 + (cx as f64 - ring as f64) * self.cell;
                let hi_x = self.x0 + (cx as f64 + ring as f64 + 1.0) * self.cell;
                let lo_y = self.y0 + (cy as f64 - ring as f64) * self.cell;
                let hi_y = self.y0 + (cy as f64 + ring as f64 + 1.0) * self.cell;
                let clear = (p.re - lo_x).min(hi_x - p.re).min(p.im - lo_y).min(hi_y - p.im);
                if b <= clear {
                    break;
                }
            }
        }
        best
    }
}

/// Distance from each point inside `domain` to its nearest other point in
/// the whole configuration, via the spatial hash.
pub fn nn_distances(config: &Configuration, domain: &Region64) -> Result<Vec<(Point, f64)>> {
    if config.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let grid = NeighborGrid::new(&config.points, default_cell(config.n));
    Ok((0..config.len())
        .filter(|&i| domain.contains(config.points[i]))
        .map(|i| (config.points[i], grid.nearest(i).unwrap().1))
        .collect())
}

/// Quadratic-time reference for [`nn_distances`].
pub fn nn_distances_brute(config: &Configuration, domain: &Region64) -> Result<Vec<(Point, f64)>> {
    if config.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let pts = &config.points;
    Ok((0..pts.len())
        .filter(|&i| domain.contains(pts[i]))
        .map(|i| {
            let d = (0..pts.len()).filter(|&j| j != i).map(|j| pts[i].dist(pts[j])).fold(f64::INFINITY, f64::min);
            (pts[i], d)
        })
        .collect())
}

/// Surviving points of the thinning, in `1/sqrt(n)` coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinnedProcess {
    pub points: Vec<Point>,
    pub n: usize,
    pub kappa: f64,
    /// Critical radius used for each surviving point, unscaled.
    pub radii_used: Vec<f64>,
}

impl ThinnedProcess {
    pub fn count_in(&self, region: &Region64) -> usize {
        self.points.iter().filter(|p| region.contains(**p)).count()
    }
}

/// Keeps the points of `B_sqrt(n)(0)` with no other point within `r_n`.
pub fn thin(config: &Configuration, kappa: f64, provider: &dyn RnProvider) -> Result<ThinnedProcess> {
    thin_observed(config, kappa, provider, f64::INFINITY, None)
}

/// Thinning of a configuration observed only inside `B_window(0)`, decided
/// for the points of `focus` (unscaled). A point whose decision depends on
/// the unobserved part is an error.
pub fn thin_observed(
    config: &Configuration,
    kappa: f64,
    provider: &dyn RnProvider,
    window: f64,
    focus: Option<&Region64>,
) -> Result<ThinnedProcess> {
    if provider.kappa() != kappa {
        return Err(Error::Domain(format!("provider kappa {} differs from {kappa}", provider.kappa())));
    }
    let config = config.unscaled();
    let n = config.n;
    let sqrt_n = (n as f64).sqrt();
    let mut out = ThinnedProcess { points: Vec::new(), n, kappa, radii_used: Vec::new() };
    if config.is_empty() {
        return Ok(out);
    }
    let grid = NeighborGrid::new(&config.points, default_cell(n));
    for (i, &z) in config.points.iter().enumerate() {
        if z.abs() > sqrt_n || focus.is_some_and(|f| !f.contains(z)) {
            continue;
        }
        let d = grid.nearest(i).map_or(f64::INFINITY, |(_, d)| d);
        let r = provider.rn(z)?;
        if d <= r {
            continue;
        }
        if r > window - z.abs() {
            return Err(Error::WindowTooSmall(format!(
                "r_n = {r} at |z| = {} reaches past the window {window}",
                z.abs()
            )));
        }
        debug_assert!(gap_statistic(d, n) >= gap_statistic(r, n));
        out.points.push(z.scale(1.0 / sqrt_n));
        out.radii_used.push(r);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    /// Unscaled.
    pub max_min_distance: f64,
    pub statistic: f64,
    pub argmax_point: Point,
}

/// Largest nearest-neighbour distance over the points of `sqrt(n) B`, with
/// neighbours taken from the whole configuration. `None` when `sqrt(n) B`
/// holds no point.
pub fn max_gap_statistic(config: &Configuration, region: &Region64, s: f64) -> Result<Option<GapSummary>> {
    max_gap_observed(config, region, s, f64::INFINITY)
}

/// As [`max_gap_statistic`] for a configuration observed inside
/// `B_window(0)`; a distance that could be shortened by an unobserved
/// point is an error.
pub fn max_gap_observed(config: &Configuration, region: &Region64, s: f64, window: f64) -> Result<Option<GapSummary>> {
    if !(s < 1.0) {
        return Err(Error::Domain("s must be < 1".into()));
    }
    if region.sup_modulus() > s {
        return Err(Error::Domain(format!("region reaches |z| = {} beyond s = {s}", region.sup_modulus())));
    }
    if config.n < 2 {
        return Err(Error::Domain("gap statistic needs n >= 2".into()));
    }
    let config = config.unscaled();
    let domain = region.scaled((config.n as f64).sqrt());
    if config.count_in(&domain) == 0 {
        return Ok(None);
    }
    let mut best: Option<GapSummary> = None;
    for (z, d) in nn_distances(&config, &domain)? {
        if d > window - z.abs() {
            return Err(Error::WindowTooSmall(format!("gap {d} at |z| = {} is not certified by window {window}", z.abs())));
        }
        if best.is_none_or(|b| d > b.max_min_distance) {
            best = Some(GapSummary { max_min_distance: d, statistic: gap_statistic(d, config.n), argmax_point: z });
        }
    }
    Ok(best)
}

/// Outcome of one Monte Carlo trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: usize,
    pub n: usize,
    pub kappa: f64,
    pub s: f64,
    pub gap: Option<GapSummary>,
    /// Parent points in `sqrt(n) B`.
    pub xi_count: Option<usize>,
    /// Surviving points in `B`.
    pub thinned_count: Option<usize>,
    /// Surviving points in `B`, rescaled.
    pub thinned_points: Vec<Point>,
    pub failure: Option<String>,
}

impl TrialResult {
    pub fn is_null(&self) -> bool {
        self.gap.is_none()
    }
}

/// Sampling plan for one `n`: window radius (infinite for the whole plane)
/// and the critical-radius table over the count region.
#[derive(Clone, Debug)]
pub struct TrialPlan {
    pub n: usize,
    pub window: f64,
    pub table: RnTable,
}

impl TrialPlan {
    pub fn new(n: usize, kappa: f64, s: f64, region: &Region64) -> Result<Self> {
        let sqrt_n = (n as f64).sqrt();
        let reach = region.sup_modulus() * sqrt_n;
        let table = RnTable::build(n, kappa, reach)?;
        let r_max = table.radii.iter().fold(0.0f64, |a, &b| a.max(b));
        let window = (s * sqrt_n + GAP_MARGIN).max(reach + 1.01 * r_max + 0.1);
        let window = if window >= sqrt_n + FULL_WINDOW_EXCESS { f64::INFINITY } else { window };
        Ok(Self { n, window, table })
    }
}

fn run_one(exp: &ExperimentConfig, plan: &TrialPlan, sampler: &ProjectionSampler, t: usize) -> TrialResult {
    let mut stream = RandomStream::new(exp.seed, plan.n as u64).substream(t as u64);
    let mut res = TrialResult {
        trial_id: t,
        n: plan.n,
        kappa: exp.kappa,
        s: exp.s,
        gap: None,
        xi_count: None,
        thinned_count: None,
        thinned_points: Vec::new(),
        failure: None,
    };
    let outcome = (|| -> Result<()> {
        let config = sampler.sample(&mut stream)?;
        let sqrt_n = (plan.n as f64).sqrt();
        let gap_domain = Region64::centered_disk(exp.s);
        let gap = max_gap_observed(&config, &gap_domain, exp.s, plan.window)?;
        let focus = exp.region.scaled(sqrt_n);
        let thinned = thin_observed(&config, exp.kappa, &plan.table, plan.window, Some(&focus))?;
        res.gap = gap;
        res.xi_count = Some(config.count_in(&focus));
        res.thinned_points = thinned.points.into_iter().filter(|p| exp.region.contains(*p)).collect();
        res.thinned_count = Some(res.thinned_points.len());
        Ok(())
    })();
    if let Err(e) = outcome {
        res.failure = Some(e.to_string());
        res.thinned_points.clear();
        res.gap = None;
        res.xi_count = None;
        res.thinned_count = None;
    }
    res
}

/// Runs `exp.trials` trials for every `n`, in order of `exp.n_list` and
/// then trial index. Trial `t` at dimension `n` draws from substream `t` of
/// stream `(seed, n)`, so results do not depend on the worker count. Failed
/// trials are recorded; more than 10% failures at any `n` is an error.
pub fn run_trials(exp: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    let problems = exp.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidConfig(problems.join("; ")));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(exp.workers.max(1))
        .build()
        .map_err(|e| Error::Numeric(e.to_string()))?;
    let mut all = Vec::new();
    for &n in &exp.n_list {
        if exp.trials == 0 {
            continue;
        }
        let results: Result<Vec<TrialResult>> = pool.install(|| {
            let plan = TrialPlan::new(n, exp.kappa, exp.s, &exp.region)?;
            let sampler = if plan.window.is_infinite() {
                ProjectionSampler::full(n)?
            } else {
                ProjectionSampler::windowed(n, plan.window)?
            };
            Ok((0..exp.trials).into_par_iter().map(|t| run_one(exp, &plan, &sampler, t)).collect())
        });
        let results = results?;
        let failed = results.iter().filter(|r| r.failure.is_some()).count();
        if failed * 10 > exp.trials {
            return Err(Error::TooManyFailures { failed, total: exp.trials });
        }
        all.extend(results);
    }
    Ok(all)
}

/// Median of the non-null statistics of trials at dimension `n`.
pub fn median_statistic(results: &[TrialResult], n: usize) -> Option<f64> {
    let mut v: Vec<f64> = results.iter().filter(|r| r.n == n).filter_map(|r| r.gap.map(|g| g.statistic)).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len();
    Some(if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) })
}

/// Writes `trial_id,n,kappa,s,max_min_distance,statistic,xi_count_B,thinned_count_B,null_flag`.
/// Missing values are empty fields.
pub fn write_trials_csv<W: Write>(results: &[TrialResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "trial_id",
        "n",
        "kappa",
        "s",
        "max_min_distance",
        "statistic",
        "xi_count_B",
        "thinned_count_B",
        "null_flag",
    ])
    .map_err(io)?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    for r in results {
        w.write_record([
            r.trial_id.to_string(),
            r.n.to_string(),
            format_float(r.kappa),
            format_float(r.s),
            opt(r.gap.map(|g| format_float(g.max_min_distance))),
            opt(r.gap.map(|g| format_float(g.statistic))),
            opt(r.xi_count.map(|c| c.to_string())),
            opt(r.thinned_count.map(|c| c.to_string())),
            r.is_null().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Configuration in raw coordinates from a list of points.
pub fn configuration(points: Vec<Point>, n: usize) -> Configuration {
    PointConfiguration::new(points, n, Scale::Unscaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rn::DirectRn;

    fn line(xs: &[f64], n: usize) -> Configuration {
        configuration(xs.iter().map(|&x| Point::real(x)).collect(), n)
    }

    #[test]
    fn hand_distances() {
        let c = line(&[0.0, 3.0, 10.0], 16);
        let d: Vec<f64> = nn_distances(&c, &Region64::centered_disk(100.0)).unwrap().iter().map(|x| x.1).collect();
        assert_eq!(d, vec![3.0, 3.0, 7.0]);
        assert_eq!(nn_distances(&line(&[1.0], 16), &Region64::centered_disk(1.0)), Err(Error::TooFewPoints));
    }

    #[test]
    fn hand_statistic() {
        let c = line(&[0.0, 3.0, 10.0], 256);
        let g = max_gap_statistic(&c, &Region64::centered_disk(0.9), 0.9).unwrap().unwrap();
        assert_eq!(g.max_min_distance, 7.0);
        assert!((g.statistic - 2401.0 / (4.0 * 256f64.ln())).abs() < 1e-12);
        let small = line(&[0.0, 3.0, 10.0], 16);
        let g = max_gap_statistic(&small, &Region64::centered_disk(0.9), 0.9).unwrap().unwrap();
        assert_eq!(g.max_min_distance, 3.0);
        assert!(max_gap_statistic(&c, &Region64::centered_disk(0.9), 1.0).is_err());
        let far = line(&[30.0, 40.0], 16);
        assert_eq!(max_gap_statistic(&far, &Region64::centered_disk(0.5), 0.5).unwrap(), None);
    }

    #[test]
    fn thinning_cases() {
        let p = DirectRn { n: 16, kappa: 2.0, tol: 1e-9 };
        let empty = line(&[], 16);
        assert!(thin(&empty, 2.0, &p).unwrap().points.is_empty());
        let close = line(&[0.0, 0.1], 16);
        assert!(thin(&close, 2.0, &p).unwrap().points.is_empty());
        let iso = line(&[1.0, 3.9, -3.9], 16);
        let t = thin(&iso, 2.0, &p).unwrap();
        assert!(t.points.contains(&Point::real(0.25)));
        assert_eq!(t.points.len(), t.radii_used.len());
    }
}
