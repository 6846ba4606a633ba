//! Run configuration: flat `key=value` text, presets and flag overrides.

use std::fmt;
use std::path::PathBuf;

use crate::data::{ExperimentSpec, Phantom, Source};
use crate::error::{Error, Result};
use crate::prox::InnerOptions;
use crate::solver::{EpsilonMode, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Wl2TvDenoise,
    KlTvDeblur,
}

impl ProblemKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "wl2tv-denoise" | "denoise" => Ok(ProblemKind::Wl2TvDenoise),
            "kltv-deblur" | "deblur" => Ok(ProblemKind::KlTvDeblur),
            other => Err(Error::config(
                "problem",
                format!("expected wl2tv-denoise or kltv-deblur, got `{other}`"),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::Wl2TvDenoise => "wl2tv-denoise",
            ProblemKind::KlTvDeblur => "kltv-deblur",
        }
    }
}

/// A strong convexity modulus, either given or taken from the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    Auto,
    Value(f64),
}

impl Modulus {
    fn parse(field: &str, s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(Modulus::Auto)
        } else {
            Ok(Modulus::Value(parse_f64(field, s)?))
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulus::Auto => f.write_str("auto"),
            Modulus::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricChoice {
    Identity,
    Split,
    Constant,
}

impl MetricChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(MetricChoice::Identity),
            "split" | "split-gradient" => Ok(MetricChoice::Split),
            "constant" => Ok(MetricChoice::Constant),
            other => Err(Error::config(
                "metric",
                format!("expected identity, split or constant, got `{other}`"),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MetricChoice::Identity => "identity",
            MetricChoice::Split => "split",
            MetricChoice::Constant => "constant",
        }
    }
}

/// Tolerance schedule by name plus its scalars; unused scalars are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonChoice {
    pub mode: String,
    pub scale: f64,
    pub a: f64,
    pub b: f64,
    pub exponent: f64,
}

impl Default for EpsilonChoice {
    fn default() -> Self {
        Self {
            mode: "theta-adaptive".into(),
            scale: 1.0,
            a: 0.1,
            b: 0.9,
            exponent: 2.1,
        }
    }
}

impl EpsilonChoice {
    pub fn resolve(&self) -> Result<EpsilonMode> {
        let (scale, a, b, exponent) = (self.scale, self.a, self.b, self.exponent);
        match self.mode.as_str() {
            "exact" => Ok(EpsilonMode::Exact),
            "theta-adaptive" => Ok(EpsilonMode::ThetaAdaptive { scale, exponent }),
            "geometric-squared" => Ok(EpsilonMode::GeometricSquared { scale, a, b }),
            "quadratic-schedule" => Ok(EpsilonMode::QuadraticSchedule { scale, a, exponent }),
            "geometric" => Ok(EpsilonMode::Geometric { scale, a }),
            other => Err(Error::config(
                "eps_mode",
                format!(
                    "expected exact, theta-adaptive, geometric-squared, quadratic-schedule or geometric, got `{other}`"
                ),
            )),
        }
    }
}

/// Everything needed to simulate data, solve and write artifacts for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub problem: ProblemKind,
    pub spec: ExperimentSpec,
    pub lambda: f64,
    pub eps_q: f64,
    pub mu_f: Modulus,
    pub mu_g: Modulus,
    /// Numeric knobs of the outer loop; `mu_*`, `eps_mode` and `metric` are filled in when the run is prepared.
    pub solver: SolverConfig,
    pub eps: EpsilonChoice,
    pub metric: MetricChoice,
    pub s1: f64,
    pub s2: f64,
    /// Initial Lipschitz estimate of the reference run, when it should differ from `L0`.
    pub reference_l0: Option<f64>,
    pub out: PathBuf,
    pub trace: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub save_image: bool,
}

impl RunConfig {
    /// Desk-scale defaults for each model.
    pub fn defaults(problem: ProblemKind) -> Self {
        let base = RunConfig {
            name: "run".into(),
            problem,
            spec: ExperimentSpec {
                source: Source::Phantom(Phantom::Moon),
                scale: 32,
                intensity_range: (0.0, 20.0),
                sigma_psf: 0.0,
                background: 0.01,
                seed: 7,
            },
            lambda: 0.15,
            eps_q: 0.0,
            mu_f: Modulus::Auto,
            mu_g: Modulus::Auto,
            solver: SolverConfig {
                rho: 0.8,
                delta: 1.0,
                t0: 1.01,
                l0: 30.0,
                max_outer: 300,
                max_bt: 10,
                ..SolverConfig::default()
            },
            eps: EpsilonChoice::default(),
            metric: MetricChoice::Identity,
            s1: 100.0,
            s2: 1.1,
            reference_l0: None,
            out: PathBuf::from("out"),
            trace: None,
            cache: None,
            save_image: true,
        };
        match problem {
            ProblemKind::Wl2TvDenoise => base,
            ProblemKind::KlTvDeblur => RunConfig {
                spec: ExperimentSpec {
                    source: Source::Phantom(Phantom::SheppLogan),
                    intensity_range: (0.0, 1.0),
                    sigma_psf: 1.4,
                    ..base.spec
                },
                lambda: 0.004,
                eps_q: 1e-4,
                solver: SolverConfig {
                    rho: 0.85,
                    l0: 0.1,
                    max_bt: 30,
                    ..base.solver
                },
                s1: 10.0,
                ..base
            },
        }
    }

    /// Defaults for the problem named in `pairs` (or denoising), then every pair in order.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let problem = pairs
            .iter()
            .rev()
            .find(|(k, _)| normalize_key(k) == "problem")
            .map(|(_, v)| ProblemKind::parse(v))
            .transpose()?
            .unwrap_or(ProblemKind::Wl2TvDenoise);
        let mut cfg = RunConfig::defaults(problem);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` setting. Keys accept `-` or `_` as separator.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = normalize_key(key);
        let value = value.trim();
        let k = key.as_str();
        match k {
            "name" => self.name = value.to_string(),
            "problem" => self.problem = ProblemKind::parse(value)?,
            "input" | "source" => self.spec.source = Source::parse(value),
            "scale" => self.spec.scale = parse_usize(k, value)?,
            "range" => {
                let (lo, hi) = value
                    .split_once(',')
                    .ok_or_else(|| Error::config("range", format!("expected `lo,hi`, got `{value}`")))?;
                self.spec.intensity_range = (parse_f64(k, lo.trim())?, parse_f64(k, hi.trim())?);
            }
            "sigma_psf" => self.spec.sigma_psf = parse_f64(k, value)?,
            "b" => self.spec.background = parse_f64(k, value)?,
            "seed" => self.spec.seed = value.parse().map_err(|_| bad_value(k, value))?,
            "lambda" => self.lambda = parse_f64(k, value)?,
            "eps_q" => self.eps_q = parse_f64(k, value)?,
            "mu_f" => self.mu_f = Modulus::parse(k, value)?,
            "mu_g" => self.mu_g = Modulus::parse(k, value)?,
            "rho" => self.solver.rho = parse_f64(k, value)?,
            "delta" => self.solver.delta = parse_f64(k, value)?,
            "l0" => self.solver.l0 = parse_f64("L0", value)?,
            "t0" => self.solver.t0 = parse_f64(k, value)?,
            "maxiter" | "max_outer" => self.solver.max_outer = parse_usize("maxiter", value)?,
            "max_bt" => self.solver.max_bt = parse_usize(k, value)?,
            "max_inner" => self.solver.inner.max_iter = parse_usize(k, value)?,
            "inner_extrapolation" => {
                self.solver.inner = InnerOptions {
                    extrapolation: match value {
                        "none" => None,
                        v => Some(parse_f64(k, v)?),
                    },
                    ..self.solver.inner
                }
            }
            "rel_tol" => {
                self.solver.rel_tol = match value {
                    "none" => None,
                    v => Some(parse_f64(k, v)?),
                }
            }
            "metric" => self.metric = MetricChoice::parse(value)?,
            "s1" => self.s1 = parse_f64(k, value)?,
            "s2" => self.s2 = parse_f64(k, value)?,
            "eps_mode" => {
                self.eps.mode = value.to_string();
                self.eps.resolve()?;
            }
            "eps_scale" => self.eps.scale = parse_f64(k, value)?,
            "eps_a" => self.eps.a = parse_f64(k, value)?,
            "eps_b" => self.eps.b = parse_f64(k, value)?,
            "eps_exponent" => self.eps.exponent = parse_f64(k, value)?,
            "ref_l0" => {
                self.reference_l0 = match value {
                    "none" => None,
                    v => Some(parse_f64("ref_L0", v)?),
                }
            }
            "out" => self.out = PathBuf::from(value),
            "trace" => self.trace = Some(PathBuf::from(value)),
            "cache" => self.cache = Some(PathBuf::from(value)),
            "save_image" => self.save_image = parse_bool(k, value)?,
            _ => return Err(Error::config(&key, "unknown key")),
        }
        Ok(())
    }

    /// All resolved settings as `key=value` lines, readable by [`parse_config_text`].
    pub fn echo(&self) -> String {
        let s = &self.solver;
        let mut lines = vec![
            format!("name={}", self.name),
            format!("problem={}", self.problem.name()),
            format!("input={}", self.spec.source.describe()),
            format!("scale={}", self.spec.scale),
            format!("range={},{}", self.spec.intensity_range.0, self.spec.intensity_range.1),
            format!("sigma_psf={}", self.spec.sigma_psf),
            format!("b={}", self.spec.background),
            format!("seed={}", self.spec.seed),
            format!("lambda={}", self.lambda),
            format!("eps_q={}", self.eps_q),
            format!("mu_f={}", self.mu_f),
            format!("mu_g={}", self.mu_g),
            format!("rho={}", s.rho),
            format!("delta={}", s.delta),
            format!("L0={}", s.l0),
            format!("t0={}", s.t0),
            format!("maxiter={}", s.max_outer),
            format!("max_bt={}", s.max_bt),
            format!("max_inner={}", s.inner.max_iter),
            format!(
                "inner_extrapolation={}",
                s.inner.extrapolation.map_or("none".to_string(), |a| a.to_string())
            ),
            format!("rel_tol={}", s.rel_tol.map_or("none".to_string(), |v| v.to_string())),
            format!("metric={}", self.metric.name()),
            format!("s1={}", self.s1),
            format!("s2={}", self.s2),
            format!("eps_mode={}", self.eps.mode),
            format!("eps_scale={}", self.eps.scale),
            format!("eps_a={}", self.eps.a),
            format!("eps_b={}", self.eps.b),
            format!("eps_exponent={}", self.eps.exponent),
            format!("ref_L0={}", self.reference_l0.map_or("none".to_string(), |v| v.to_string())),
            format!("out={}", self.out.display()),
            format!("save_image={}", self.save_image),
        ];
        if let Some(t) = &self.trace {
            lines.push(format!("trace={}", t.display()));
        }
        if let Some(c) = &self.cache {
            lines.push(format!("cache={}", c.display()));
        }
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_").to_ascii_lowercase()
}

fn bad_value(field: &str, value: &str) -> Error {
    Error::config(field, format!("cannot parse `{value}`"))
}

fn parse_f64(field: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| bad_value(field, value))
}

fn parse_usize(field: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| bad_value(field, value))
}

fn parse_bool(field: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad_value(field, value)),
    }
}

/// Parses flat `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// A named list of runs sharing common settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub common: &'static str,
    pub runs: Vec<(&'static str, &'static str)>,
}

pub const PRESET_NAMES: [&str; 2] = ["moon-armijo-vs-adaptive", "deblur-phantom"];

pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "moon-armijo-vs-adaptive" => Ok(Preset {
            name: "moon-armijo-vs-adaptive",
            common: "problem=wl2tv-denoise\ninput=moon\nscale=32\nrange=0,20\nb=0.01\nlambda=0.15\n\
                     mu_f=auto\nrho=0.8\nL0=30\nt0=1.01\nmaxiter=500\nmax_bt=10\neps_mode=theta-adaptive\n",
            runs: vec![("armijo", "delta=1"), ("adaptive", "delta=0.99")],
        }),
        "deblur-phantom" => Ok(Preset {
            name: "deblur-phantom",
            common: "problem=kltv-deblur\ninput=shepp-logan\nscale=32\nrange=0,1\nsigma_psf=1.4\nb=0.01\n\
                     lambda=0.004\neps_q=1e-4\nmu_f=0\nmu_g=1e-4\nrho=0.85\nL0=0.1\nt0=1.01\nmaxiter=300\n\
                     max_bt=30\neps_mode=theta-adaptive\n",
            runs: vec![("armijo", "delta=1"), ("adaptive", "delta=0.98")],
        }),
        other => Err(Error::config(
            "preset",
            format!("unknown preset `{other}` (known: {})", PRESET_NAMES.join(", ")),
        )),
    }
}

impl Preset {
    /// One config per run: preset settings, then `overrides`, then the run's own settings.
    /// Each run writes into its own subdirectory of the resolved `out`.
    pub fn configs(&self, overrides: &[(String, String)]) -> Result<Vec<RunConfig>> {
        let mut out = Vec::new();
        for (run, settings) in &self.runs {
            let mut pairs = parse_config_text(self.common)?;
            pairs.extend(overrides.iter().cloned());
            pairs.extend(parse_config_text(settings)?);
            let mut cfg = RunConfig::from_pairs(&pairs)?;
            let root = cfg.out.clone();
            cfg.name = format!("{}-{run}", self.name);
            if cfg.cache.is_none() {
                cfg.cache = Some(root.join("cache"));
            }
            cfg.out = root.join(run);
            cfg.trace = cfg.trace.map(|t| root.join(run).join(t.file_name().unwrap_or(t.as_os_str())));
            out.push(cfg);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(text: &str) -> Vec<(String, String)> {
        parse_config_text(text).unwrap()
    }

    #[test]
    fn later_settings_win() {
        let cfg = RunConfig::from_pairs(&pairs("rho=0.5\n# comment\nrho = 0.7\nL0=3")).unwrap();
        assert_eq!(cfg.solver.rho, 0.7);
        assert_eq!(cfg.solver.l0, 3.0);
    }

    #[test]
    fn problem_selects_defaults() {
        let cfg = RunConfig::from_pairs(&pairs("lambda=0.2\nproblem=kltv-deblur")).unwrap();
        assert_eq!(cfg.problem, ProblemKind::KlTvDeblur);
        assert_eq!(cfg.lambda, 0.2);
        assert_eq!(cfg.eps_q, 1e-4);
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::defaults(ProblemKind::KlTvDeblur);
        cfg.set("--eps-mode", "geometric").unwrap();
        cfg.set("mu-f", "0.25").unwrap();
        cfg.set("cache", "/tmp/c").unwrap();
        let back = RunConfig::from_pairs(&pairs(&cfg.echo())).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_values_name_the_field() {
        let err = RunConfig::from_pairs(&pairs("rho=fast")).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref field, .. } if field == "rho"));
        let err = RunConfig::from_pairs(&pairs("colour=blue")).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref field, .. } if field == "colour"));
        assert!(parse_config_text("no equals sign").is_err());
    }

    #[test]
    fn presets_sweep_delta() {
        let p = preset("moon-armijo-vs-adaptive").unwrap();
        let cfgs = p.configs(&[("out".into(), "/tmp/x".into())]).unwrap();
        let deltas: Vec<f64> = cfgs.iter().map(|c| c.solver.delta).collect();
        assert_eq!(deltas, vec![1.0, 0.99]);
        assert_eq!(cfgs[1].out, PathBuf::from("/tmp/x/adaptive"));
        assert_eq!(cfgs[0].solver.l0, 30.0);
        let d = preset("deblur-phantom").unwrap().configs(&[]).unwrap();
        assert_eq!(d[1].solver.delta, 0.98);
        assert_eq!(d[0].solver.max_outer, 300);
        assert!(preset("nope").is_err());
    }
}
