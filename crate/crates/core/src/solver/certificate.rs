//! Evaluation of the function-value rate bound along a finished run.

use super::{SolveOutput, SolverConfig};
use crate::error::{check_len, Error, Result};

/// A high-accuracy solution used as stand-in for the minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub x: Vec<f64>,
    pub f_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow {
    pub k: usize,
    /// `F(x^(k)) - F*`
    pub excess: f64,
    pub rhs: f64,
    pub theta: f64,
    /// Bound on `theta_k` from the accepted step sizes.
    pub theta_bound_data: f64,
    /// Bound on `theta_k` from the global Lipschitz constant, when known.
    pub theta_bound_global: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub rows: Vec<CertificateRow>,
    /// Final `prod (1 + gamma_i)`, used for every row.
    pub gamma: f64,
    pub rate_holds: bool,
    pub theta_bounds_hold: bool,
    /// `eta_sup^k theta_k` never increases.
    pub eta_theta_monotone: bool,
    pub first_violation: Option<usize>,
    /// `min_k (rhs - excess)`
    pub min_margin: f64,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.rate_holds && self.theta_bounds_hold && self.eta_theta_monotone
    }
}

const REL_TOL: f64 = 1e-10;

/// Checks `F(x^(k)) - F* <= RHS_k` and the two bounds on `theta_k` at every row of the trace.
///
/// `lipschitz` is the global constant of `grad f` (or an overestimate); without it only the
/// data-driven bound on `theta_k` is evaluated.
pub fn rate_certificate(
    output: &SolveOutput,
    config: &SolverConfig,
    reference: Option<&Reference>,
    lipschitz: Option<f64>,
) -> Result<CertificateReport> {
    let reference = reference.ok_or(Error::MissingReference)?;
    let rows = &output.trace.records;
    if rows.len() < 2 {
        return Err(Error::DegenerateTrace("need at least one accepted iteration".into()));
    }
    check_len(output.x0.len(), reference.x.len())?;
    let f_star = reference.f_value;
    let r0 = &rows[0];
    let gamma = rows.last().map(|r| r.gamma_product).unwrap_or(1.0);

    let eta0 = r0.eta_sup;
    let tau0 = r0.tau;
    let tau_prime0 = tau0 / (1.0 + tau0 * config.mu_g / eta0);
    let omega0 = r0.omega;
    let dist0 = output.initial_metric.dist_sq(&output.x0, &reference.x)?.sqrt();
    let excess0 = (r0.f_value - f_star).max(0.0);
    let a = (omega0 / 2.0).sqrt() * dist0;
    let b = (tau_prime0 * r0.t * r0.t * omega0 * excess0).sqrt();

    let (eta_inf, eta_sup) = config.metric.global_bounds();
    let spread = eta_sup / eta_inf;
    let mu = config.mu_f + config.mu_g;
    let l0 = r0.l_est;
    let lin_start = l0 - config.mu_f / eta0;

    let global = lipschitz.map(|lf| {
        let l_cap = (lf / (config.rho * eta_inf)).max(l0);
        let q_min = (mu / eta_sup) / (l_cap + config.mu_g / eta_inf);
        (q_min.sqrt(), l_cap - config.mu_f / eta_sup)
    });

    let mut out = Vec::with_capacity(rows.len() - 1);
    let mut inv_sqrt_sum = 1.0 / (l0 - config.mu_f / eta0).sqrt();
    let mut sqrt_q_sum = 0.0;
    let mut rate_holds = true;
    let mut theta_ok = true;
    let mut first_violation = None;
    let mut min_margin = f64::INFINITY;
    let mut monotone = true;
    let mut prev_eta_theta = r0.eta_sup * r0.theta;

    for (j, r) in rows.iter().enumerate().skip(1) {
        let mu_f_i = config.mu_f / r.eta_sup;
        let mu_g_i = config.mu_g / r.eta_sup;
        inv_sqrt_sum += 1.0 / (r.l_est - mu_f_i).sqrt();
        sqrt_q_sum += (mu / r.eta_sup / (r.l_est + mu_g_i)).sqrt();

        let jj = j as f64;
        let l_bar = ((jj + 1.0) / inv_sqrt_sum).powi(2);
        let q_bar_sqrt = sqrt_q_sum / jj;
        let quad = 4.0 * l_bar / ((jj + 1.0) * (jj + 1.0));
        let lin = lin_start * (1.0 - q_bar_sqrt).powf(jj);
        let data_bound = spread * quad.min(lin);
        let global_bound = global.map(|(sq, lc)| {
            spread * (4.0 * lc / ((jj + 1.0) * (jj + 1.0))).min(lin_start * (1.0 - sq).powf(jj))
        });
        let slack = 1.0 + REL_TOL;
        if r.theta > data_bound * slack || global_bound.is_some_and(|gb| r.theta > gb * slack) {
            theta_ok = false;
        }

        let eta_theta = r.eta_sup * r.theta;
        if eta_theta > prev_eta_theta * slack {
            monotone = false;
        }
        prev_eta_theta = eta_theta;

        let s = a + b + 2.0 * gamma.sqrt() * r.e1 + r.e2.sqrt();
        let rhs = gamma * r.theta * s * s;
        let excess = r.f_value - f_star;
        let holds = excess <= rhs;
        if !holds {
            rate_holds = false;
            first_violation.get_or_insert(r.k);
        }
        min_margin = min_margin.min(rhs - excess);
        out.push(CertificateRow {
            k: r.k,
            excess,
            rhs,
            theta: r.theta,
            theta_bound_data: data_bound,
            theta_bound_global: global_bound,
            holds,
        });
    }

    Ok(CertificateReport {
        rows: out,
        gamma,
        rate_holds,
        theta_bounds_hold: theta_ok,
        eta_theta_monotone: monotone,
        first_violation,
        min_margin,
    })
}
