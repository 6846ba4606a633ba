use super::epsilon::{EpsilonMode, ScheduleContext};
use super::params::update_q;
use crate::error::{Error, Result};
use crate::metric::MetricMode;
use crate::prox::InnerOptions;

/// Parameters of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Backtracking decrease factor.
    pub rho: f64,
    /// Step growth factor between outer iterations; `1` gives monotone Armijo.
    pub delta: f64,
    pub t0: f64,
    /// Initial Lipschitz estimate, `tau_0 = 1 / l0`.
    pub l0: f64,
    pub mu_f: f64,
    pub mu_g: f64,
    pub max_outer: usize,
    pub max_bt: usize,
    pub eps_mode: EpsilonMode,
    pub metric: MetricMode,
    pub inner: InnerOptions,
    /// Stop once `|F_{k+1} - F_k| <= rel_tol |F_k|`.
    pub rel_tol: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rho: 0.8,
            delta: 1.0,
            t0: 1.01,
            l0: 1.0,
            mu_f: 0.0,
            mu_g: 0.0,
            max_outer: 500,
            max_bt: 10,
            eps_mode: EpsilonMode::Exact,
            metric: MetricMode::Identity,
            inner: InnerOptions::default(),
            rel_tol: None,
        }
    }
}

impl SolverConfig {
    pub fn tau0(&self) -> f64 {
        1.0 / self.l0
    }

    pub fn schedule_context(&self) -> ScheduleContext {
        ScheduleContext {
            delta: self.delta,
            t0: self.t0,
            tau0: self.tau0(),
            mu_f: self.mu_f,
            mu_g: self.mu_g,
            eta_inf: self.metric.global_bounds().0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be positive and finite, got {v}")))
            }
        };
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::config("rho", format!("must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::config("delta", format!("must lie in (0, 1], got {}", self.delta)));
        }
        positive("L0", self.l0)?;
        for (name, v) in [("mu_f", self.mu_f), ("mu_g", self.mu_g)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(name, format!("must be finite and nonnegative, got {v}")));
            }
        }
        if self.max_outer == 0 {
            return Err(Error::config("max_outer", "must be positive"));
        }
        if self.max_bt == 0 {
            return Err(Error::config("max_bt", "must be positive"));
        }
        if let Some(tol) = self.rel_tol {
            positive("rel_tol", tol)?;
        }
        let (_, eta0) = self.metric.bounds_at(0);
        let tau0 = self.tau0();
        if tau0 * self.mu_f / eta0 >= 1.0 {
            return Err(Error::config(
                "L0",
                format!("tau0 * mu_f / eta_sup = {} must be below 1", tau0 * self.mu_f / eta0),
            ));
        }
        let q0 = update_q(tau0, self.mu_f, self.mu_g, eta0);
        if !(self.t0 >= 1.0) {
            return Err(Error::config("t0", format!("must be at least 1, got {}", self.t0)));
        }
        if q0 > 0.0 && self.t0 > 1.0 / q0.sqrt() {
            return Err(Error::config(
                "t0",
                format!("must not exceed 1 / sqrt(q0) = {}, got {}", 1.0 / q0.sqrt(), self.t0),
            ));
        }
        self.eps_mode.validate(&self.schedule_context())
    }
}
