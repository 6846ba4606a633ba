//! Simulate, solve, compare against a reference and write the artifacts of one run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{MetricChoice, Modulus, ProblemKind, RunConfig};
use super::report::{rate_report, RateReport};
use crate::data::reference::{content_key, f64_bytes};
use crate::data::{reference_config, reference_solution, simulate_acquisition, write_pgm_normalized, ReferenceCache};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::metric::{MetricMode, SqueezeSchedule};
use crate::problems::{build_kl_metric, CompositeProblem, KlTvDeblur, WeightedL2Denoise};
use crate::solver::{solve, Reference, SolveOutput, SolverConfig, TraceList, TraceRecord};

/// A run with its data simulated and every setting resolved.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub ground_truth: Image,
    pub observed: Image,
    pub problem: CompositeProblem,
    pub solver: SolverConfig,
    /// Lipschitz constant (or overestimate) of the smooth part.
    pub lipschitz: Option<f64>,
    pub x0: Vec<f64>,
    blur_taps: Vec<f64>,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let ground_truth = cfg.spec.ground_truth()?;
    let observed = simulate_acquisition(&ground_truth, &cfg.spec)?;
    let b = cfg.spec.background;
    let z = &observed.pixels;
    let gamma0 = (1.0 + cfg.s1).sqrt();
    let (problem, lipschitz, mu_f, mu_g, constant, blur_taps) = match cfg.problem {
        ProblemKind::Wl2TvDenoise => {
            if cfg.spec.sigma_psf != 0.0 {
                return Err(Error::config("sigma_psf", "the denoising model has no blur; use 0"));
            }
            if cfg.eps_q != 0.0 {
                return Err(Error::config("eps_q", "the quadratic perturbation belongs to kltv-deblur"));
            }
            let model = WeightedL2Denoise::new(observed.clone(), b, cfg.lambda, true)?;
            let smooth = model.smooth();
            let constant = match cfg.metric {
                MetricChoice::Constant => Some(model.constant_metric()?),
                _ => None,
            };
            (model.problem(), Some(smooth.lipschitz_constant()), smooth.sigma_f(), 0.0, constant, vec![1.0])
        }
        ProblemKind::KlTvDeblur => {
            let blur = cfg.spec.blur(observed.rows, observed.cols)?;
            let taps = blur.kernel().taps().to_vec();
            let model = KlTvDeblur::new(observed.clone(), b, blur, cfg.lambda, cfg.eps_q)?;
            let smooth = model.smooth();
            let constant = match cfg.metric {
                MetricChoice::Constant => Some(build_kl_metric(z, smooth.blur(), gamma0)?),
                _ => None,
            };
            (model.problem(), Some(smooth.lipschitz_overestimate()), 0.0, model.mu_g(), constant, taps)
        }
    };
    let mut solver = cfg.solver.clone();
    solver.mu_f = match cfg.mu_f {
        Modulus::Auto => mu_f,
        Modulus::Value(v) => v,
    };
    solver.mu_g = match cfg.mu_g {
        Modulus::Auto => mu_g,
        Modulus::Value(v) => v,
    };
    solver.eps_mode = cfg.eps.resolve()?;
    solver.metric = match (cfg.metric, constant) {
        (MetricChoice::Identity, _) => MetricMode::Identity,
        (MetricChoice::Split, _) => MetricMode::SplitGradient(
            SqueezeSchedule::new(cfg.s1, cfg.s2).map_err(|e| e.context("split metric (s1, s2)"))?,
        ),
        (MetricChoice::Constant, Some(m)) => MetricMode::Constant(m),
        (MetricChoice::Constant, None) => unreachable!("constant metric is built above"),
    };
    solver.validate()?;
    Ok(Prepared {
        config: cfg.clone(),
        x0: observed.pixels.clone(),
        ground_truth,
        observed,
        problem,
        solver,
        lipschitz,
        blur_taps,
    })
}

impl Prepared {
    /// Settings of the reference run for this problem.
    pub fn reference_settings(&self) -> SolverConfig {
        let mut base = self.solver.clone();
        if let Some(l0) = self.config.reference_l0 {
            base.l0 = l0;
        }
        reference_config(&base)
    }

    /// Content hash of everything the reference solution depends on.
    pub fn reference_key(&self) -> String {
        let rc = self.reference_settings();
        let cfg = &self.config;
        let dims = [self.observed.rows as u64, self.observed.cols as u64];
        let dims: Vec<u8> = dims.iter().flat_map(|d| d.to_le_bytes()).collect();
        let counts: Vec<u8> = [rc.max_outer, rc.max_bt, rc.inner.max_iter]
            .iter()
            .flat_map(|c| (*c as u64).to_le_bytes())
            .collect();
        let model = f64_bytes(&[cfg.lambda, cfg.spec.background, cfg.eps_q, rc.rho, rc.l0]);
        content_key(&[
            b"sagefista-reference-1",
            cfg.problem.name().as_bytes(),
            &dims,
            &f64_bytes(&self.observed.pixels),
            &f64_bytes(&self.blur_taps),
            &model,
            &counts,
            &f64_bytes(&self.x0),
        ])
    }

    /// The reference from `cache` when present there, otherwise computed and stored.
    pub fn reference(&self, cache: Option<&ReferenceCache>) -> Result<Reference> {
        let compute = || {
            reference_solution(&self.problem, &self.reference_settings(), &self.x0)
                .map_err(|e| e.context("reference run"))
        };
        match cache {
            Some(c) => c.get_or_compute(&self.reference_key(), compute),
            None => compute(),
        }
    }

    pub fn solve(&self) -> Result<SolveOutput> {
        solve(&self.problem, &self.solver, &self.x0)
    }
}

/// Headline numbers of a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub name: String,
    pub iterations: usize,
    pub final_f: f64,
    pub f_star: f64,
    pub final_ef: f64,
    pub total_time_s: f64,
    pub total_inner_iters: usize,
    pub first_below_1e4: Option<usize>,
    pub first_below_1e6: Option<usize>,
    /// `max_k (F* - F_k) / |F*|`; positive when the run beat the reference.
    pub reference_deficit: f64,
}

impl Summary {
    pub fn from_trace(name: &str, trace: &TraceList, f_star: f64) -> Self {
        let last = trace.last().expect("a trace has its starting row");
        let deficit = trace
            .iter()
            .map(|r| (f_star - r.f_value) / f_star.abs())
            .fold(f64::NEG_INFINITY, f64::max);
        Summary {
            name: name.to_string(),
            iterations: last.k,
            final_f: last.f_value,
            f_star,
            final_ef: last.rel_error,
            total_time_s: last.elapsed_s,
            total_inner_iters: trace.total_inner_iters(),
            first_below_1e4: trace.first_below(1e-4),
            first_below_1e6: trace.first_below(1e-6),
            reference_deficit: deficit,
        }
    }

    pub fn render(&self) -> String {
        let opt = |v: Option<usize>| v.map_or("never".to_string(), |k| k.to_string());
        format!(
            "run={}\niterations={}\nfinal_F={:.12e}\nF_star={:.12e}\nfinal_eF={:.6e}\ntotal_time_s={:.3}\n\
             total_inner_iters={}\nfirst_k_eF_below_1e-4={}\nfirst_k_eF_below_1e-6={}\nreference_deficit={:.3e}\n",
            self.name,
            self.iterations,
            self.final_f,
            self.f_star,
            self.final_ef,
            self.total_time_s,
            self.total_inner_iters,
            opt(self.first_below_1e4),
            opt(self.first_below_1e6),
            self.reference_deficit,
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub prepared: Prepared,
    pub output: SolveOutput,
    pub reference: Reference,
    pub report: RateReport,
    pub summary: Summary,
    pub trace_path: PathBuf,
}

pub const TRACE_HEADER: [&str; 19] = [
    "k", "F", "eF", "tau", "L_est", "bt_trials", "inner_iters", "gap", "eps", "time_s", "theta", "omega", "t",
    "q", "eta_sup", "e1", "e2", "gamma_prod", "chain_ok",
];

pub fn write_trace_csv(path: &Path, trace: &TraceList) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in trace.iter() {
        w.write_record([
            r.k.to_string(),
            r.f_value.to_string(),
            r.rel_error.to_string(),
            r.tau.to_string(),
            r.l_est.to_string(),
            r.bt_trials.to_string(),
            r.inner_iters.to_string(),
            r.gap.to_string(),
            r.eps.to_string(),
            r.elapsed_s.to_string(),
            r.theta.to_string(),
            r.omega.to_string(),
            r.t.to_string(),
            r.q.to_string(),
            r.eta_sup.to_string(),
            r.e1.to_string(),
            r.e2.to_string(),
            r.gamma_product.to_string(),
            r.chain_ok.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv(path: &Path) -> Result<TraceList> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != TRACE_HEADER {
        return Err(Error::Format(format!("unexpected trace header {header:?}")));
    }
    let mut trace = TraceList::default();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let bad = |i: usize| Error::Format(format!("row {}: cannot parse column {}", line + 1, TRACE_HEADER[i]));
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(i));
        let u = |i: usize| rec[i].parse::<usize>().map_err(|_| bad(i));
        trace.push(TraceRecord {
            k: u(0)?,
            f_value: f(1)?,
            rel_error: f(2)?,
            tau: f(3)?,
            l_est: f(4)?,
            bt_trials: u(5)?,
            inner_iters: u(6)?,
            gap: f(7)?,
            eps: f(8)?,
            elapsed_s: f(9)?,
            theta: f(10)?,
            omega: f(11)?,
            t: f(12)?,
            q: f(13)?,
            eta_sup: f(14)?,
            e1: f(15)?,
            e2: f(16)?,
            gamma_product: f(17)?,
            chain_ok: rec[18].parse().map_err(|_| bad(18))?,
        });
    }
    Ok(trace)
}

/// Runs one experiment and writes `config.txt`, the trace, `summary.txt`,
/// `reference.txt` and (optionally) the images into `cfg.out`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunOutcome> {
    let ctx = |e: Error| e.context(format!("run `{}`", cfg.name));
    let prepared = prepare(cfg).map_err(ctx)?;
    fs::create_dir_all(&cfg.out).map_err(|e| ctx(e.into()))?;

    let mut echo = cfg.clone();
    echo.mu_f = Modulus::Value(prepared.solver.mu_f);
    echo.mu_g = Modulus::Value(prepared.solver.mu_g);
    fs::write(cfg.out.join("config.txt"), echo.echo()).map_err(|e| ctx(e.into()))?;

    let cache = ReferenceCache::new(cfg.cache.clone().unwrap_or_else(|| cfg.out.join("cache")));
    let started = Instant::now();
    let reference = prepared.reference(Some(&cache)).map_err(ctx)?;
    let reference_time = started.elapsed().as_secs_f64();

    let mut output = prepared.solve().map_err(ctx)?;
    output.trace.set_reference(reference.f_value).map_err(ctx)?;
    let report = rate_report(&output, &prepared.solver, prepared.lipschitz, &reference).map_err(ctx)?;
    let summary = Summary::from_trace(&cfg.name, &output.trace, reference.f_value);

    let trace_path = cfg.trace.clone().unwrap_or_else(|| cfg.out.join("trace.csv"));
    if let Some(parent) = trace_path.parent() {
        fs::create_dir_all(parent).map_err(|e| ctx(e.into()))?;
    }
    write_trace_csv(&trace_path, &output.trace).map_err(ctx)?;
    let mut text = summary.render();
    text.push_str(&report.render());
    fs::write(cfg.out.join("summary.txt"), text).map_err(|e| ctx(e.into()))?;

    let key = prepared.reference_key();
    let rc = prepared.reference_settings();
    let sidecar = format!(
        "key={key}\nF_star={:.17e}\nfile={}\niterations={}\nL0={}\ncompute_or_load_s={reference_time:.3}\n",
        reference.f_value,
        cache.path_for(&key).display(),
        rc.max_outer,
        rc.l0,
    );
    fs::write(cfg.out.join("reference.txt"), sidecar).map_err(|e| ctx(e.into()))?;

    if cfg.save_image {
        let (r, c) = (prepared.observed.rows, prepared.observed.cols);
        let restored = Image::new(r, c, output.x.clone()).map_err(ctx)?;
        for (name, img) in [
            ("ground_truth.pgm", &prepared.ground_truth),
            ("observed.pgm", &prepared.observed),
            ("restored.pgm", &restored),
        ] {
            write_pgm_normalized(&cfg.out.join(name), img).map_err(ctx)?;
        }
    }

    Ok(RunOutcome {
        prepared,
        output,
        reference,
        report,
        summary,
        trace_path,
    })
}

/// Process exit status for an error: 2 configuration, 3 solver, 4 input/output.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::InvalidConfig { .. } => 2,
        Error::Io(_) | Error::Csv(_) | Error::Format(_) => 4,
        _ => 3,
    }
}
