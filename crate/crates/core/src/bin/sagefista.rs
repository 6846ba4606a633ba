use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sagefista::harness::{exit_code, parse_config_text, preset, run_experiment, RunConfig};
use sagefista::{Error, Result};

/// Poisson restoration experiments with scaled adaptive FISTA.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Flat key=value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named sweep: moon-armijo-vs-adaptive or deblur-phantom.
    #[arg(long)]
    preset: Option<String>,
    /// wl2tv-denoise or kltv-deblur.
    #[arg(long)]
    problem: Option<String>,
    /// Phantom name (moon, shepp-logan, cells) or PGM path.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    scale: Option<String>,
    /// Intensity range as lo,hi.
    #[arg(long)]
    range: Option<String>,
    #[arg(long = "sigma-psf")]
    sigma_psf: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long = "eps-q")]
    eps_q: Option<String>,
    /// A value or `auto`.
    #[arg(long = "mu-f")]
    mu_f: Option<String>,
    /// A value or `auto`.
    #[arg(long = "mu-g")]
    mu_g: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long = "L0")]
    l0: Option<String>,
    #[arg(long)]
    t0: Option<String>,
    #[arg(long)]
    s1: Option<String>,
    #[arg(long)]
    s2: Option<String>,
    /// identity, split or constant.
    #[arg(long)]
    metric: Option<String>,
    /// exact, theta-adaptive, geometric-squared, quadratic-schedule or geometric.
    #[arg(long = "eps-mode")]
    eps_mode: Option<String>,
    #[arg(long)]
    maxiter: Option<String>,
    #[arg(long = "max-bt")]
    max_bt: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Trace CSV path (default OUT/trace.csv).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Extra key=value settings.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Cli {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let flags = [
            ("problem", &self.problem),
            ("input", &self.input),
            ("scale", &self.scale),
            ("range", &self.range),
            ("sigma_psf", &self.sigma_psf),
            ("lambda", &self.lambda),
            ("b", &self.b),
            ("eps_q", &self.eps_q),
            ("mu_f", &self.mu_f),
            ("mu_g", &self.mu_g),
            ("rho", &self.rho),
            ("delta", &self.delta),
            ("L0", &self.l0),
            ("t0", &self.t0),
            ("s1", &self.s1),
            ("s2", &self.s2),
            ("metric", &self.metric),
            ("eps_mode", &self.eps_mode),
            ("maxiter", &self.maxiter),
            ("max_bt", &self.max_bt),
            ("seed", &self.seed),
        ];
        let mut pairs: Vec<(String, String)> = flags
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        for (k, v) in [("trace", &self.trace), ("out", &self.out), ("cache", &self.cache)] {
            if let Some(p) = v {
                pairs.push((k.to_string(), p.display().to_string()));
            }
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::config("set", format!("expected KEY=VALUE, got `{s}`")))?;
            pairs.push((k.to_string(), v.to_string()));
        }
        Ok(pairs)
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut pairs = match &cli.config {
        Some(path) => parse_config_text(&std::fs::read_to_string(path)?)?,
        None => Vec::new(),
    };
    pairs.extend(cli.overrides()?);
    let configs = match &cli.preset {
        Some(name) => preset(name)?.configs(&pairs)?,
        None => vec![RunConfig::from_pairs(&pairs)?],
    };
    for cfg in &configs {
        let outcome = run_experiment(cfg)?;
        print!("{}", outcome.summary.render());
        println!("certificate={}", if outcome.report.passed() { "PASS" } else { "FAIL" });
        println!("artifacts={}\n", cfg.out.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
