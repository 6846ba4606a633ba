use std::path::Path;
use std::process::Command;
use std::sync::Arc;

use sagefista::data::{
    poisson_sample, read_pgm, reference_config, reference_solution, simulate_acquisition, ExperimentSpec, Phantom,
    ReferenceCache, Source,
};
use sagefista::harness::{exit_code, prepare, read_trace_csv, run_experiment, MetricChoice, ProblemKind, RunConfig};
use sagefista::image::Image;
use sagefista::metric::BoxSet;
use sagefista::problems::{CompositeProblem, Quadratic};
use sagefista::prox::{Psi, StructuredNonsmooth};
use sagefista::solver::SolverConfig;
use sagefista::Error;

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
}

#[test]
fn poisson_sampler_matches_moments() {
    for (lambda, seed) in [(5.0, 1), (0.3, 2), (40.0, 3), (170.0, 4)] {
        let n = 10_000;
        let s = poisson_sample(&vec![lambda; n], seed).unwrap();
        assert!(s.iter().all(|v| *v >= 0.0 && v.fract() == 0.0));
        let (m, var) = mean_var(&s);
        let se_mean = (lambda / n as f64).sqrt();
        let se_var = ((lambda + 2.0 * lambda * lambda) / n as f64).sqrt();
        assert!((m - lambda).abs() <= 3.0 * se_mean, "mean {m} for lambda {lambda}");
        assert!((var - lambda).abs() <= 3.0 * se_var, "variance {var} for lambda {lambda}");
    }
    let s = poisson_sample(&vec![5.0; 10_000], 11).unwrap();
    let m = s.iter().sum::<f64>() / 1e4;
    assert!((m - 5.0).abs() <= 0.15);
}

#[test]
fn acquisition_is_deterministic_per_seed() {
    let spec = ExperimentSpec {
        source: Source::Phantom(Phantom::SheppLogan),
        scale: 16,
        intensity_range: (0.0, 50.0),
        sigma_psf: 1.4,
        background: 0.5,
        seed: 9,
    };
    let truth = spec.ground_truth().unwrap();
    let a = simulate_acquisition(&truth, &spec).unwrap();
    let b = simulate_acquisition(&truth, &spec).unwrap();
    assert_eq!(a, b);
    let other = simulate_acquisition(&truth, &ExperimentSpec { seed: 10, ..spec.clone() }).unwrap();
    assert_ne!(a, other);
    let dark = Image::filled(16, 16, 0.0);
    let zero = simulate_acquisition(&dark, &ExperimentSpec { background: 1e-300, ..spec }).unwrap();
    assert!(zero.pixels.iter().all(|v| *v == 0.0));
}

#[test]
fn reference_matches_closed_form_optimum() {
    let diag = vec![1.0, 2.0, 0.5, 4.0];
    let center = vec![3.0, -1.0, -2.0, 0.5];
    let f = Arc::new(Quadratic::new(diag.clone(), center.clone()).unwrap());
    let g = StructuredNonsmooth::new(vec![], Psi::indicator(BoxSet::nonnegative()));
    let problem = CompositeProblem::new(f, g).unwrap();
    let r = reference_solution(&problem, &reference_config(&SolverConfig::default()), &[1.0; 4]).unwrap();
    let optimum: f64 = diag.iter().zip(&center).map(|(d, c)| 0.5 * d * c.min(0.0) * c.min(0.0)).sum();
    assert!((r.f_value - optimum).abs() <= 1e-10, "{} vs {optimum}", r.f_value);
    for (x, c) in r.x.iter().zip(&center) {
        assert!((x - c.max(0.0)).abs() <= 1e-8);
    }
}

fn small_denoise(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::defaults(ProblemKind::Wl2TvDenoise);
    cfg.name = "small".into();
    cfg.spec.scale = 16;
    cfg.solver.max_outer = 40;
    cfg.out = dir.join("run");
    cfg.cache = Some(dir.join("cache"));
    cfg
}

#[test]
fn cache_returns_identical_reference() {
    let dir = tempfile::tempdir().unwrap();
    let p = prepare(&small_denoise(dir.path())).unwrap();
    let cache = ReferenceCache::new(dir.path().join("cache"));
    let key = p.reference_key();
    let first = p.reference(Some(&cache)).unwrap();
    assert!(cache.path_for(&key).exists());
    assert!(cache.path_for(&key).to_string_lossy().ends_with(&format!("{key}.ref")));
    let bytes = std::fs::read(cache.path_for(&key)).unwrap();
    assert_eq!(&bytes[..8], b"SGFREF01");
    let again = cache
        .get_or_compute(&key, || panic!("cached reference must not be recomputed"))
        .unwrap();
    assert_eq!(first, again);
    let fresh = p.reference(None).unwrap();
    assert_eq!(first.f_value.to_bits(), fresh.f_value.to_bits());
    assert!(first.x.iter().zip(&fresh.x).all(|(a, b)| a.to_bits() == b.to_bits()));

    let mut other = small_denoise(dir.path());
    other.lambda = 0.2;
    assert_ne!(prepare(&other).unwrap().reference_key(), key);
}

#[test]
fn reference_lies_below_every_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let cache = ReferenceCache::new(dir.path().join("cache"));
    let mut cfg = small_denoise(dir.path());
    cfg.solver.max_outer = 300;
    for (delta, metric) in [(1.0, MetricChoice::Identity), (0.99, MetricChoice::Identity), (0.99, MetricChoice::Split)] {
        cfg.solver.delta = delta;
        cfg.metric = metric;
        let p = prepare(&cfg).unwrap();
        let r = p.reference(Some(&cache)).unwrap();
        let out = p.solve().unwrap();
        for rec in out.trace.iter() {
            assert!(
                rec.f_value - r.f_value >= -1e-9 * r.f_value.abs(),
                "k={} F={} below F*={}",
                rec.k,
                rec.f_value,
                r.f_value
            );
        }
    }
}

fn without_time(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(9);
            cols.join(",")
        })
        .collect()
}

#[test]
fn run_writes_reproducible_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_denoise(dir.path());
    let outcome = run_experiment(&cfg).unwrap();
    for name in ["config.txt", "trace.csv", "summary.txt", "reference.txt", "ground_truth.pgm", "observed.pgm", "restored.pgm"] {
        assert!(cfg.out.join(name).exists(), "{name} missing");
    }
    let csv = std::fs::read_to_string(cfg.out.join("trace.csv")).unwrap();
    assert!(csv.starts_with("k,F,eF,tau,L_est,bt_trials,inner_iters,gap,eps,time_s,"));
    let trace = read_trace_csv(&cfg.out.join("trace.csv")).unwrap();
    assert_eq!(trace.len(), 41);
    for (a, b) in trace.iter().zip(outcome.output.trace.iter()) {
        assert_eq!(a, b);
    }

    let summary = std::fs::read_to_string(cfg.out.join("summary.txt")).unwrap();
    for key in ["final_eF=", "total_time_s=", "total_inner_iters=", "certificate="] {
        assert!(summary.contains(key), "summary lacks {key}");
    }
    let restored = read_pgm(&cfg.out.join("restored.pgm")).unwrap();
    assert_eq!((restored.rows, restored.cols), (16, 16));

    let echo = std::fs::read_to_string(cfg.out.join("config.txt")).unwrap();
    let pairs = sagefista::harness::parse_config_text(&echo).unwrap();
    let mut again = RunConfig::from_pairs(&pairs).unwrap();
    again.out = dir.path().join("again");
    run_experiment(&again).unwrap();
    let csv2 = std::fs::read_to_string(again.out.join("trace.csv")).unwrap();
    assert_eq!(without_time(&csv), without_time(&csv2));
}

#[test]
fn relative_error_vanishes_at_the_reference() {
    let dir = tempfile::tempdir().unwrap();
    let p = prepare(&small_denoise(dir.path())).unwrap();
    let mut out = p.solve().unwrap();
    let f_star = out.trace.records[7].f_value;
    out.trace.set_reference(f_star).unwrap();
    assert_eq!(out.trace.records[7].rel_error, 0.0);
    assert!(out.trace.iter().all(|r| r.rel_error >= 0.0));
}

#[test]
fn invalid_settings_are_reported_by_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_denoise(dir.path());
    cfg.solver.rho = 1.5;
    let err = run_experiment(&cfg).unwrap_err();
    assert!(matches!(err.root(), Error::InvalidConfig { field, .. } if field == "rho"), "{err}");
    assert_eq!(exit_code(&err), 2);
    let err = RunConfig::from_pairs(&[("colour".into(), "red".into())]).unwrap_err();
    assert!(err.to_string().contains("colour"));
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sagefista")).args(args).output().unwrap()
}

#[test]
fn cli_runs_and_reports_exit_categories() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cli");
    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "# small denoising run\nproblem=wl2tv-denoise\nscale=16\nmaxiter=20\n").unwrap();
    let o = cli(&[
        "--config",
        config.to_str().unwrap(),
        "--lambda",
        "0.2",
        "--metric",
        "split",
        "--s1",
        "10",
        "--s2",
        "1.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("certificate="));
    let echo = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(echo.contains("lambda=0.2") && echo.contains("metric=split"));
    assert_eq!(read_trace_csv(&out.join("trace.csv")).unwrap().len(), 21);

    let bad = cli(&["--rho", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("rho"));
    let missing = cli(&["--config", dir.path().join("nope.cfg").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(4));
    let stuck = cli(&["--scale", "16", "--mu-f", "0", "--L0", "1e-6", "--max-bt", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(stuck.status.code(), Some(3), "{}", String::from_utf8_lossy(&stuck.stderr));
}

#[test]
fn cli_preset_sweeps_delta() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("sweep");
    let o = cli(&["--preset", "moon-armijo-vs-adaptive", "--scale", "16", "--maxiter", "15", "--out", root.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for (run, delta) in [("armijo", "delta=1\n"), ("adaptive", "delta=0.99\n")] {
        let echo = std::fs::read_to_string(root.join(run).join("config.txt")).unwrap();
        assert!(echo.contains(delta), "{run}: {echo}");
        assert!(echo.contains("L0=30") && echo.contains("rho=0.8") && echo.contains("maxiter=15"));
    }
    let cached: Vec<_> = std::fs::read_dir(root.join("cache")).unwrap().collect();
    assert_eq!(cached.len(), 1, "both runs share one reference");
}
