use gingap::diagnostics::{intensity_check, poisson_count_test, sample_poisson_process, CountSample};
use gingap::experiment::ExperimentConfig;
use gingap::gaps::{run_trials, thin, write_trials_csv};
use gingap::rn::{RnProvider, RnTable};
use gingap::sampler::{sample_batch, sample_kostlan_radii, KostlanSize, ProjectionSampler, Route};
use gingap::special::ks_test;
use gingap::vacuum::count_distribution;
use gingap::{Point, RandomStream, Region64};

fn chi2_ok(observed: &[usize], pmf: &[f64], total: usize) -> bool {
    // every count class with expected mass at least 20 trials within 4 sigma
    observed.iter().zip(pmf).all(|(&o, &p)| {
        let e = p * total as f64;
        e < 20.0 || (o as f64 - e).abs() <= 4.0 * (e * (1.0 - p)).sqrt()
    })
}

#[test]
fn windowed_counts_follow_exact_law() {
    let (n, window, trials) = (36usize, 3.0, 3000);
    let sampler = ProjectionSampler::windowed(n, window).unwrap();
    let region = Region64::centered_disk(2.0);
    let dist = count_distribution(n, &region).unwrap();
    let mut hist = vec![0usize; n + 1];
    let root = RandomStream::new(21, 0);
    for t in 0..trials {
        let cfg = sampler.sample(&mut root.substream(t as u64)).unwrap();
        assert!(cfg.points.iter().all(|p| p.abs() <= window));
        hist[cfg.count_in(&region)] += 1;
    }
    assert!(chi2_ok(&hist, &dist.pmf, trials), "{hist:?} vs {:?}", dist.pmf);
}

#[test]
fn routes_agree_on_counts() {
    let (n, trials) = (6usize, 4000);
    let region = Region64::disk(Point::real(0.7), 1.1);
    let dist = count_distribution(n, &region).unwrap();
    for route in [Route::MatrixEigen, Route::SequentialDpp] {
        let batch = sample_batch(route, n, trials, &RandomStream::new(22, 0), 1, None).unwrap();
        let mut hist = vec![0usize; n + 1];
        for c in &batch.configs {
            assert_eq!(c.len(), n);
            hist[c.count_in(&region)] += 1;
        }
        assert!(chi2_ok(&hist, &dist.pmf, trials), "{route:?}: {hist:?} vs {:?}", dist.pmf);
    }
}

#[test]
fn kostlan_moduli_match_gamma_laws() {
    let mut st = RandomStream::new(23, 0);
    let k = 3;
    let draws: Vec<f64> = (0..4000)
        .map(|_| sample_kostlan_radii(KostlanSize::Finite(5), &mut st).unwrap().radii[k - 1].powi(2))
        .collect();
    let p = ks_test(&draws, |x| gingap::special::gamma_p_int(k, x));
    assert!(p > 1e-3, "{p}");
    let inf = sample_kostlan_radii(KostlanSize::Infinite { truncation: 50 }, &mut st).unwrap();
    assert!(inf.radially_symmetric_only && inf.radii.len() == 50);
}

#[test]
fn thinned_mean_matches_intensity() {
    let exp = ExperimentConfig {
        n_list: vec![1024],
        kappa: 2.0,
        s: 0.3,
        region: Region64::centered_disk(0.3),
        trials: 400,
        seed: 24,
        workers: 1,
        ..Default::default()
    };
    let results = run_trials(&exp).unwrap();
    let counts: Vec<u64> = results.iter().filter_map(|r| r.thinned_count.map(|c| c as u64)).collect();
    let target = 2.0 * exp.region.area().unwrap();
    let (mean, z) = intensity_check(&CountSample::new(counts, target).unwrap()).unwrap();
    assert!(z.abs() <= 3.0, "mean {mean} vs {target}, z {z}");
}

#[test]
fn thinning_invariants_hold() {
    let n = 49;
    let table = RnTable::build(n, 2.0, 6.5).unwrap();
    let batch = sample_batch(Route::MatrixEigen, n, 20, &RandomStream::new(25, 0), 1, None).unwrap();
    for cfg in &batch.configs {
        let inside: Vec<Point> = cfg.points.iter().copied().filter(|p| p.abs() <= 6.5).collect();
        let sub = gingap::gaps::configuration(inside, n);
        let t = thin(&sub, 2.0, &table).unwrap();
        for (p, r) in t.points.iter().zip(&t.radii_used) {
            let z = p.scale(7.0);
            assert!(cfg.points.iter().any(|q| q.dist(z) < 1e-9));
            assert!((table.rn(z).unwrap() - r).abs() <= 1e-12);
            let nearest = sub.points.iter().filter(|q| q.dist(z) > 1e-9).map(|q| q.dist(z)).fold(f64::INFINITY, f64::min);
            assert!(nearest > *r);
        }
    }
}

#[test]
fn poisson_simulation_passes_its_own_tests() {
    let region = Region64::centered_disk(0.5);
    let mut st = RandomStream::new(26, 0);
    let counts: Vec<u64> = (0..2000).map(|_| sample_poisson_process(2.0, &region, &mut st).unwrap().len() as u64).collect();
    let sample = CountSample::new(counts, 2.0 * region.area().unwrap()).unwrap();
    let (_, z) = intensity_check(&sample).unwrap();
    let (tv, p) = poisson_count_test(&sample).unwrap();
    assert!(z.abs() < 4.0 && p > 1e-3 && tv < 0.05, "{z} {tv} {p}");
}

#[test]
fn empty_trial_list() {
    let exp = ExperimentConfig { trials: 0, ..Default::default() };
    let results = run_trials(&exp).unwrap();
    assert!(results.is_empty());
    let mut buf = Vec::new();
    write_trials_csv(&results, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
}
