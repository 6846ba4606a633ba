//! Scalar recursions and per-iteration tests of the outer loop.

use crate::error::{check_len, Error, Result};
use crate::metric::{BoxSet, DiagonalMetric};
use crate::problems::SmoothPart;

/// `q = tau mu / (1 + tau mu_g)` with moduli scaled by `1 / eta_sup`.
pub fn update_q(tau: f64, mu_f: f64, mu_g: f64, eta_sup: f64) -> f64 {
    let mg = mu_g / eta_sup;
    tau * (mu_f + mu_g) / eta_sup / (1.0 + tau * mg)
}

/// Positive root of `t^2 - (1 - q_prev t_prev^2) t - r t_prev^2 = 0`, where
/// `r = (tau'_k / tau'_{k+1}) (eta_{k+1} / eta_k)` stands in for `q_prev / q_next`.
pub fn update_t(q_prev: f64, t_prev: f64, ratio: f64) -> Result<f64> {
    if !(ratio >= 0.0) || !ratio.is_finite() {
        return Err(Error::Domain(format!("extrapolation ratio must be nonnegative, got {ratio}")));
    }
    let a = 1.0 - q_prev * t_prev * t_prev;
    let disc = a * a + 4.0 * ratio * t_prev * t_prev;
    Ok(0.5 * (a + disc.sqrt()))
}

/// Ratio argument of [`update_t`], finite even when both `q` vanish.
pub fn t_ratio(tau_prime_prev: f64, tau_prime_next: f64, eta_prev: f64, eta_next: f64) -> f64 {
    (tau_prime_prev / tau_prime_next) * (eta_next / eta_prev)
}

/// Inertial coefficient.
pub fn compute_beta(t_prev: f64, t_next: f64, tau: f64, mu_f_scaled: f64, mu_g_scaled: f64) -> Result<f64> {
    let tf = tau * mu_f_scaled;
    if tf >= 1.0 {
        return Err(Error::Domain(format!("tau * mu_f = {tf} must stay below 1")));
    }
    let mu = mu_f_scaled + mu_g_scaled;
    Ok((t_prev - 1.0) / t_next * (1.0 + tau * mu_g_scaled - t_next * tau * mu) / (1.0 - tf))
}

/// Same coefficient written through `omega = 1 - t q`.
pub fn compute_beta_omega(t_prev: f64, t_next: f64, tau: f64, mu_f_scaled: f64, mu_g_scaled: f64) -> Result<f64> {
    let tf = tau * mu_f_scaled;
    if tf >= 1.0 {
        return Err(Error::Domain(format!("tau * mu_f = {tf} must stay below 1")));
    }
    let q = tau * (mu_f_scaled + mu_g_scaled) / (1.0 + tau * mu_g_scaled);
    let omega = 1.0 - t_next * q;
    Ok(omega * (t_prev - 1.0) / t_next * (1.0 + tau * mu_g_scaled) / (1.0 - tf))
}

/// `P_{Y,D}(x + beta (x - x_prev))`; for a diagonal metric and a box this is clipping.
pub fn inertial_point(
    x_curr: &[f64],
    x_prev: &[f64],
    beta: f64,
    metric: &DiagonalMetric,
    feasible_set: &BoxSet,
) -> Result<Vec<f64>> {
    check_len(x_curr.len(), x_prev.len())?;
    check_len(metric.len(), x_curr.len())?;
    feasible_set.check_dim(x_curr.len())?;
    let mut y: Vec<f64> = x_curr
        .iter()
        .zip(x_prev)
        .map(|(a, b)| a + beta * (a - b))
        .collect();
    feasible_set.clamp_in_place(&mut y);
    Ok(y)
}

pub(crate) fn sufficient_decrease(bregman: f64, dist_sq: f64, tau: f64) -> bool {
    dist_sq == 0.0 || bregman < dist_sq / (2.0 * tau)
}

/// Strict scaled descent test `D_f(x_new, y) < ||x_new - y||_D^2 / (2 tau)`; `x_new = y` passes.
pub fn backtracking_condition(
    f: &dyn SmoothPart,
    x_new: &[f64],
    y: &[f64],
    tau: f64,
    metric: &DiagonalMetric,
) -> Result<bool> {
    check_len(x_new.len(), y.len())?;
    let dist = metric.dist_sq(x_new, y)?;
    if dist == 0.0 {
        return Ok(true);
    }
    let fx = f.value(x_new)?;
    let (fy, gy) = f.value_and_gradient(y)?;
    if !fx.is_finite() || !fy.is_finite() {
        return Err(Error::NonFinite {
            what: "smooth value at a trial point",
            iteration: 0,
        });
    }
    Ok(sufficient_decrease(f.bregman(x_new, y, fx, fy, &gy)?, dist, tau))
}
