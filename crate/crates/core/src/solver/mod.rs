//! The outer inertial forward-backward loop.

pub mod certificate;
pub mod config;
pub mod epsilon;
pub mod params;
pub mod trace;

use std::time::Instant;

pub use certificate::{rate_certificate, CertificateReport, CertificateRow, Reference};
pub use config::SolverConfig;
pub use epsilon::{epsilon_schedule, EpsilonMode, ScheduleContext};
pub use params::{
    backtracking_condition, compute_beta, compute_beta_omega, inertial_point, t_ratio, update_q, update_t,
};
pub use trace::{SolveOutput, TraceList, TraceRecord};

use crate::error::{check_len, Error, Result};
use crate::metric::{check_metric_chain, DiagonalMetric};
use crate::problems::CompositeProblem;
use crate::prox::{inexact_prox, DualVector};
use params::sufficient_decrease;

/// Iterates and scalar sequences carried between outer iterations.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub k: usize,
    pub x_curr: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub tau: f64,
    pub tau_prime: f64,
    pub t: f64,
    pub q: f64,
    pub theta: f64,
    pub omega_log_sum: f64,
    pub gamma_product: f64,
    pub e1: f64,
    pub e2: f64,
    pub metric: DiagonalMetric,
    pub eta_sup_curr: f64,
    pub f_value: f64,
    pub dual: Option<DualVector>,
}

impl SolverState {
    /// Validates the configuration and builds the `k = 0` state and trace row.
    pub fn initialize(problem: &CompositeProblem, config: &SolverConfig, x0: &[f64]) -> Result<(Self, TraceRecord)> {
        config.validate()?;
        let n = problem.len();
        check_len(n, x0.len())?;
        let f_value = problem.objective(x0)?;
        if !f_value.is_finite() {
            return Err(Error::Domain("starting point lies outside the domain of the objective".into()));
        }
        let mode = &config.metric;
        let (_, eta0) = mode.bounds_at(0);
        let ratio = if mode.needs_ratio() { problem.smooth.split_ratio(x0) } else { None };
        let metric = mode.build(0, n, ratio.as_deref())?;
        let tau = config.tau0();
        let tau_prime = tau / (1.0 + tau * config.mu_g / eta0);
        let q = update_q(tau, config.mu_f, config.mu_g, eta0);
        let omega = 1.0 - config.t0 * q;
        let theta = omega / (tau_prime * config.t0 * config.t0);
        let state = Self {
            k: 0,
            x_curr: x0.to_vec(),
            x_prev: x0.to_vec(),
            tau,
            tau_prime,
            t: config.t0,
            q,
            theta,
            omega_log_sum: omega.ln(),
            gamma_product: 1.0,
            e1: 0.0,
            e2: 0.0,
            metric,
            eta_sup_curr: eta0,
            f_value,
            dual: None,
        };
        let record = TraceRecord {
            k: 0,
            f_value,
            rel_error: f64::NAN,
            tau,
            l_est: 1.0 / tau,
            bt_trials: 0,
            inner_iters: 0,
            gap: 0.0,
            eps: 0.0,
            elapsed_s: 0.0,
            theta,
            omega,
            t: config.t0,
            q,
            eta_sup: eta0,
            e1: 0.0,
            e2: 0.0,
            gamma_product: 1.0,
            chain_ok: true,
        };
        Ok((state, record))
    }
}

/// One outer iteration with backtracking; on success the state moves to `k + 1`.
pub fn step(state: &mut SolverState, problem: &CompositeProblem, config: &SolverConfig) -> Result<TraceRecord> {
    let k = state.k;
    let n = problem.len();
    let mode = &config.metric;
    let f = problem.smooth.as_ref();
    let g = &problem.nonsmooth;
    let ctx = config.schedule_context();

    let (_, eta_next) = mode.bounds_at(k + 1);
    let gamma_next = mode.transition_gamma(k);
    let mu_f = config.mu_f / eta_next;
    let mu_g = config.mu_g / eta_next;
    let fixed_eps = (!config.eps_mode.depends_on_theta()).then(|| epsilon_schedule(&config.eps_mode, k, 0.0, &ctx));

    let tau_base = state.tau / config.delta;
    let mut inner_total = 0;
    let mut warm = state.dual.take();
    let mut last = (tau_base, f64::NAN, f64::NAN);

    for trial in 0..config.max_bt {
        let tau = tau_base * config.rho.powi(trial as i32);
        if tau * mu_f >= 1.0 {
            last = (tau, f64::NAN, f64::NAN);
            continue;
        }
        let q_next = update_q(tau, config.mu_f, config.mu_g, eta_next);
        let tau_prime = tau / (1.0 + tau * mu_g);
        let r = t_ratio(state.tau_prime, tau_prime, state.eta_sup_curr, eta_next);
        let t_next = update_t(state.q, state.t, r)?;
        let beta = compute_beta(state.t, t_next, tau, mu_f, mu_g)?;

        let y = inertial_point(&state.x_curr, &state.x_prev, beta, &state.metric, g.feasible_set())?;
        let ratio = if mode.needs_ratio() { f.split_ratio(&y) } else { None };
        let metric = mode.build(k + 1, n, ratio.as_deref())?;
        let (f_y, grad_y) = f.value_and_gradient(&y)?;
        let ybar: Vec<f64> = y
            .iter()
            .zip(grad_y.iter().zip(metric.weights()))
            .map(|(y, (gy, w))| y - tau * gy / w)
            .collect();

        let omega = 1.0 - t_next * q_next;
        let omega_log_sum = state.omega_log_sum + omega.ln();
        let theta = (omega_log_sum - tau_prime.ln() - 2.0 * t_next.ln()).exp();
        let eps = fixed_eps.unwrap_or_else(|| epsilon_schedule(&config.eps_mode, k, theta, &ctx));

        let prox = match inexact_prox(&ybar, tau, &metric, g, eps, warm.as_ref(), &config.inner) {
            Ok(p) => p,
            Err(e) => {
                state.dual = warm;
                return Err(e);
            }
        };
        inner_total += prox.inner_iters;
        warm = Some(prox.dual_w);

        let x_new = prox.x_tilde;
        let f_x = f.value(&x_new)?;
        if !f_x.is_finite() {
            state.dual = warm;
            return Err(Error::NonFinite {
                what: "smooth value",
                iteration: k + 1,
            });
        }
        let dist = metric.dist_sq(&x_new, &y)?;
        let breg = f.bregman(&x_new, &y, f_x, f_y, &grad_y)?;
        if !sufficient_decrease(breg, dist, tau) {
            last = (tau, breg, dist / (2.0 * tau));
            continue;
        }

        let f_value = f_x + g.value(&x_new);
        if !f_value.is_finite() {
            state.dual = warm;
            return Err(Error::NonFinite {
                what: "objective",
                iteration: k + 1,
            });
        }
        let certified = prox.gap.max(0.0);
        let chain_ok = check_metric_chain(&state.metric, &metric, gamma_next);

        state.x_prev = std::mem::replace(&mut state.x_curr, x_new);
        state.k = k + 1;
        state.tau = tau;
        state.tau_prime = tau_prime;
        state.t = t_next;
        state.q = q_next;
        state.theta = theta;
        state.omega_log_sum = omega_log_sum;
        state.e1 += (certified / theta).sqrt();
        state.e2 += certified / theta;
        state.gamma_product *= 1.0 + gamma_next;
        state.metric = metric;
        state.eta_sup_curr = eta_next;
        state.f_value = f_value;
        state.dual = warm;

        return Ok(TraceRecord {
            k: k + 1,
            f_value,
            rel_error: f64::NAN,
            tau,
            l_est: 1.0 / tau,
            bt_trials: trial + 1,
            inner_iters: inner_total,
            gap: certified,
            eps: prox.target,
            elapsed_s: 0.0,
            theta,
            omega,
            t: t_next,
            q: q_next,
            eta_sup: eta_next,
            e1: state.e1,
            e2: state.e2,
            gamma_product: state.gamma_product,
            chain_ok,
        });
    }

    state.dual = warm;
    Err(Error::BacktrackingFailed {
        iteration: k + 1,
        trials: config.max_bt,
        last_tau: last.0,
        last_bregman: last.1,
        last_bound: last.2,
    })
}

/// Runs up to `max_outer` iterations from `x0`.
pub fn solve(problem: &CompositeProblem, config: &SolverConfig, x0: &[f64]) -> Result<SolveOutput> {
    let start = Instant::now();
    let (mut state, first) = SolverState::initialize(problem, config, x0)?;
    let initial_metric = state.metric.clone();
    let mut trace = TraceList::default();
    trace.push(first);
    for _ in 0..config.max_outer {
        let previous = state.f_value;
        let mut record = step(&mut state, problem, config)?;
        record.elapsed_s = start.elapsed().as_secs_f64();
        trace.push(record);
        if let Some(tol) = config.rel_tol {
            if (state.f_value - previous).abs() <= tol * previous.abs() {
                break;
            }
        }
    }
    Ok(SolveOutput {
        x: state.x_curr,
        x0: x0.to_vec(),
        initial_metric,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metric::BoxSet;
    use crate::problems::Quadratic;
    use crate::prox::{Psi, StructuredNonsmooth};

    #[test]
    fn converges_to_origin_on_constrained_quadratic() {
        let f = Arc::new(Quadratic::new(vec![1.0; 5], vec![0.0; 5]).unwrap());
        let g = StructuredNonsmooth::new(vec![], Psi::indicator(BoxSet::nonnegative()));
        let p = CompositeProblem::new(f, g).unwrap();
        let cfg = SolverConfig {
            max_outer: 100,
            ..Default::default()
        };
        let out = solve(&p, &cfg, &[1.0, 2.0, 3.0, 0.5, 4.0]).unwrap();
        assert!(crate::linalg::norm(&out.x) <= 1e-8);
        assert!(out.trace.iter().all(|r| r.f_value.is_finite()));
        assert_eq!(out.trace.len(), 101);
    }

    #[test]
    fn backtracking_failure_carries_diagnostics() {
        let f = Arc::new(Quadratic::new(vec![1e6], vec![0.0]).unwrap());
        let g = StructuredNonsmooth::new(vec![], Psi::indicator(BoxSet::whole_space()));
        let p = CompositeProblem::new(f, g).unwrap();
        let cfg = SolverConfig {
            max_bt: 2,
            l0: 1.0,
            ..Default::default()
        };
        match solve(&p, &cfg, &[1.0]) {
            Err(Error::BacktrackingFailed { trials, last_tau, .. }) => {
                assert_eq!(trials, 2);
                assert!((last_tau - 0.8).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
