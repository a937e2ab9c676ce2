//! One function per command, each writing its outputs through [`Outputs`].

use serde::Serialize;

use gingap::diagnostics::{poisson_report, PoissonReport};
use gingap::experiment::{Command, ExperimentConfig, Format};
use gingap::gaps::{median_statistic, run_trials, write_trials_csv, TrialResult};
use gingap::kernel::{decay_margin, eval_kernel, finite_diagonal, finite_kernel, rho_m, KernelSpec};
use gingap::rn::{rn_scaling_table, scaling_model, write_rn_csv, RnRow};
use gingap::special::poisson_pmf;
use gingap::vacuum::{count_distribution, infinite_centered_disk_vacuum, vacuum_probability, REFINE_TOL};
use gingap::{format_float, to_json_string, Error, Point, RandomStream, Region64, Result};

use crate::svg;
use crate::Outputs;

/// Largest count index reported in vacuum rows.
const PMF_REPORT: usize = 20;

pub fn execute(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Numeric(e.to_string()))?;
    pool.install(|| match config.command {
        Command::Vacuum => vacuum(config, out),
        Command::RnTable => rn_table(config, out),
        Command::Gaps => gaps(config, out),
        Command::PoissonTest => poisson_test(config, out),
        Command::KernelChecks => kernel_checks(config, out),
    })
}

fn wants(config: &ExperimentConfig, f: Format) -> bool {
    config.formats.contains(&f)
}

fn csv_bytes<F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>>(fill: F) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        fill(&mut w).map_err(|e| Error::Io(e.to_string()))?;
        w.flush()?;
    }
    Ok(buf)
}

#[derive(Serialize)]
struct VacuumRow {
    region: Region64,
    /// Decimal dimension, or `inf`.
    n: String,
    vacuum: f64,
    pmf: Vec<f64>,
    truncation_error: f64,
}

fn vacuum(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let region = &config.region;
    let mut rows = Vec::new();
    for &n in &config.n_list {
        let v = vacuum_probability(n, region)?;
        let dist = count_distribution(n, region)?;
        let truncation_error = if region.is_radially_symmetric() { 0.0 } else { REFINE_TOL * v };
        rows.push(VacuumRow {
            region: region.clone(),
            n: n.to_string(),
            vacuum: v,
            pmf: dist.pmf.iter().take(n.min(PMF_REPORT) + 1).copied().collect(),
            truncation_error,
        });
    }
    if let Region64::CenteredDisk { r } = region {
        if *r > 0.0 {
            let inf = infinite_centered_disk_vacuum(*r, 1e-12)?;
            let dist = count_distribution(inf.factors, region)?;
            rows.push(VacuumRow {
                region: region.clone(),
                n: "inf".into(),
                vacuum: inf.value,
                pmf: dist.pmf.iter().take(PMF_REPORT + 1).copied().collect(),
                truncation_error: inf.rel_error,
            });
        }
    }
    if wants(config, Format::Csv) {
        let region_json = to_json_string(region)?;
        let mut lines = Vec::new();
        for r in &rows {
            lines.push([
                region_json.clone(),
                r.n.clone(),
                format_float(r.vacuum),
                to_json_string(&r.pmf)?,
                format_float(r.truncation_error),
            ]);
        }
        let bytes = csv_bytes(|w| {
            w.write_record(["region", "n", "vacuum", "pmf", "truncation_error"])?;
            lines.iter().try_for_each(|l| w.write_record(l))
        })?;
        out.write("vacuum.csv", &bytes)?;
    }
    if wants(config, Format::Json) {
        out.write("vacuum.json", to_json_string(&rows)?.as_bytes())?;
    }
    if wants(config, Format::Svg) {
        let series: Vec<(String, Vec<(f64, f64)>)> = rows
            .iter()
            .map(|r| (format!("n = {}", r.n), r.pmf.iter().enumerate().map(|(k, p)| (k as f64, *p)).collect()))
            .collect();
        let refs: Vec<(&str, Vec<(f64, f64)>)> = series.iter().map(|(l, s)| (l.as_str(), s.clone())).collect();
        out.write("vacuum.svg", svg::line_chart("Count distribution in the region", "count", "probability", &refs).as_bytes())?;
    }
    Ok(())
}

fn rn_table(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let rows: Vec<RnRow> = rn_scaling_table(&config.n_list, config.kappa, Point::origin())?;
    if wants(config, Format::Csv) {
        let mut buf = Vec::new();
        write_rn_csv(&rows, &mut buf)?;
        out.write("rn.csv", &buf)?;
    }
    if wants(config, Format::Json) {
        out.write("rn.json", to_json_string(&rows)?.as_bytes())?;
    }
    if wants(config, Format::Svg) {
        let ln = |n: usize| (n as f64).log2();
        let ratio: Vec<(f64, f64)> = rows.iter().map(|r| (ln(r.n), r.ratio)).collect();
        let model: Vec<(f64, f64)> = rows.iter().map(|r| (ln(r.n), scaling_model(r.n, config.kappa))).collect();
        let chart = svg::line_chart(
            "Critical radius scaling at the origin",
            "log2 n",
            "r^4 / (4 ln n)",
            &[("solver", ratio), ("1 - ln(pi kappa)/ln n", model)],
        );
        out.write("rn.svg", chart.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct GapSummaryRow {
    n: usize,
    trials: usize,
    null_trials: usize,
    failed_trials: usize,
    median_statistic: Option<f64>,
    mean_thinned_count: Option<f64>,
}

fn trial_outputs(config: &ExperimentConfig, out: &mut Outputs, results: &[TrialResult]) -> Result<()> {
    if wants(config, Format::Csv) {
        let mut buf = Vec::new();
        write_trials_csv(results, &mut buf)?;
        out.write("trials.csv", &buf)?;
    }
    Ok(())
}

fn gaps(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let results = run_trials(config)?;
    trial_outputs(config, out, &results)?;
    if wants(config, Format::Json) {
        let summary: Vec<GapSummaryRow> = config
            .n_list
            .iter()
            .map(|&n| {
                let mine: Vec<&TrialResult> = results.iter().filter(|r| r.n == n).collect();
                let counts: Vec<usize> = mine.iter().filter_map(|r| r.thinned_count).collect();
                GapSummaryRow {
                    n,
                    trials: mine.len(),
                    null_trials: mine.iter().filter(|r| r.is_null() && r.failure.is_none()).count(),
                    failed_trials: mine.iter().filter(|r| r.failure.is_some()).count(),
                    median_statistic: median_statistic(&results, n),
                    mean_thinned_count: (!counts.is_empty())
                        .then(|| counts.iter().sum::<usize>() as f64 / counts.len() as f64),
                }
            })
            .collect();
        out.write("gaps.json", to_json_string(&summary)?.as_bytes())?;
    }
    if wants(config, Format::Svg) {
        let groups: Vec<(String, Vec<f64>)> = config
            .n_list
            .iter()
            .map(|&n| {
                let v = results.iter().filter(|r| r.n == n).filter_map(|r| r.gap.map(|g| g.statistic)).collect();
                (n.to_string(), v)
            })
            .collect();
        out.write("gaps.svg", svg::box_plot("Largest gap statistic", "max d^4 / (4 ln n)", &groups).as_bytes())?;
    }
    Ok(())
}

fn poisson_test(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let results = run_trials(config)?;
    trial_outputs(config, out, &results)?;
    let reports: Vec<PoissonReport> = config
        .n_list
        .iter()
        .map(|&n| {
            let mut stream = RandomStream::new(config.seed, u64::MAX - n as u64);
            poisson_report(&results, n, config.kappa, &config.region, &mut stream)
        })
        .collect::<Result<_>>()?;
    if wants(config, Format::Json) {
        out.write("diagnostics.json", to_json_string(&reports)?.as_bytes())?;
    }
    if wants(config, Format::Csv) {
        let lines: Vec<[String; 8]> = reports
            .iter()
            .map(|r| {
                [
                    r.n.to_string(),
                    format_float(r.kappa),
                    r.trials.to_string(),
                    format_float(r.mean),
                    format_float(r.z),
                    format_float(r.tv),
                    format_float(r.chi2_p),
                    format_float(r.kr_proxy),
                ]
            })
            .collect();
        let bytes = csv_bytes(|w| {
            w.write_record(["n", "kappa", "trials", "mean", "z", "tv", "chi2_p", "kr_proxy"])?;
            lines.iter().try_for_each(|l| w.write_record(l))
        })?;
        out.write("diagnostics.csv", &bytes)?;
    }
    if wants(config, Format::Svg) {
        let n = *config.n_list.last().unwrap();
        let counts: Vec<usize> = results.iter().filter(|r| r.n == n).filter_map(|r| r.thinned_count).collect();
        let top = counts.iter().copied().max().unwrap_or(0);
        let mut freq = vec![0.0; top + 1];
        for &c in &counts {
            freq[c] += 1.0 / counts.len() as f64;
        }
        let mean = config.kappa * config.region.area()?;
        let reference: Vec<f64> = (0..=top.max(4)).map(|k| poisson_pmf(k, mean)).collect();
        let title = format!("Thinned counts at n = {n} against Poisson({mean:.4})");
        out.write("poisson.svg", svg::histogram(&title, &freq, &reference).as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct KernelCheck {
    check: &'static str,
    n: usize,
    max_error: f64,
}

fn kernel_checks(config: &ExperimentConfig, out: &mut Outputs) -> Result<()> {
    let mut rows = Vec::new();
    for &n in &config.n_list {
        let mut st = RandomStream::new(config.seed, n as u64);
        let sqrt_n = (n as f64).sqrt();
        let mut point = || Point::from_polar(sqrt_n * st.uniform().sqrt(), std::f64::consts::TAU * st.uniform());
        let finite = KernelSpec::finite(n)?;
        let mut worst = [0.0f64; 6];
        worst[0] = (finite_diagonal(n, Point::origin()) - std::f64::consts::FRAC_1_PI).abs();
        for _ in 0..100 {
            let (x, z, w) = (point(), point(), point());
            let palm = KernelSpec::palm(n, x)?;
            worst[1] = worst[1].max(eval_kernel(&palm, x, w).norm());
            worst[2] = worst[2].max((eval_kernel(&finite, z, w) - eval_kernel(&finite, w, z).conj()).norm());
            let r2 = rho_m(&finite, &[z, w])?;
            let mix = (r2 - finite_diagonal(n, z) * finite_diagonal(n, w)).abs();
            worst[3] = worst[3].max((mix - finite_kernel(n, z, w).norm_sqr()).abs());
            let lhs = rho_m(&palm, &[z, w])? * finite_diagonal(n, x);
            let rhs = rho_m(&finite, &[x, z, w])?;
            if rhs > 0.0 {
                worst[4] = worst[4].max(((lhs - rhs) / rhs).abs());
            }
            worst[5] = worst[5].max(decay_margin(n, z.scale(0.5 / sqrt_n), w.scale(0.5 / sqrt_n)));
        }
        let names = ["origin_diagonal", "palm_anchor_zero", "hermitian", "mixing_identity", "palm_triple_relative", "decay_margin"];
        rows.extend(names.iter().zip(worst).map(|(check, max_error)| KernelCheck { check, n, max_error }));
    }
    if wants(config, Format::Csv) {
        let bytes = csv_bytes(|w| {
            w.write_record(["check", "n", "max_error"])?;
            rows.iter().try_for_each(|r| w.write_record([r.check.to_string(), r.n.to_string(), format_float(r.max_error)]))
        })?;
        out.write("kernel_checks.csv", &bytes)?;
    }
    if wants(config, Format::Json) {
        out.write("kernel_checks.json", to_json_string(&rows)?.as_bytes())?;
    }
    if wants(config, Format::Svg) {
        let series: Vec<(&str, Vec<(f64, f64)>)> = ["palm_anchor_zero", "hermitian", "mixing_identity"]
            .iter()
            .map(|name| {
                let pts = rows
                    .iter()
                    .filter(|r| r.check == *name)
                    .map(|r| ((r.n as f64).log2(), r.max_error.max(1e-300).log10()))
                    .collect();
                (*name, pts)
            })
            .collect();
        out.write("kernel_checks.svg", svg::line_chart("Kernel identity residuals", "log2 n", "log10 max error", &series).as_bytes())?;
    }
    Ok(())
}
