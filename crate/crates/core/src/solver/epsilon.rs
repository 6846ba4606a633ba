//! Accuracy schedules for the inexact proximal steps.

use crate::error::{Error, Result};

/// How the tolerance `eps_{k+1}` of the proximal subproblem is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonMode {
    /// Exact prox, up to the machine-precision floor of the inner solver.
    Exact,
    /// `scale * theta_{k+1} * (k + 1)^(-exponent)`, refreshed at every backtracking trial.
    ThetaAdaptive { scale: f64, exponent: f64 },
    /// `scale * (a * b^k)^(k + 1)`.
    GeometricSquared { scale: f64, a: f64, b: f64 },
    /// `scale * a^(k + 1)` if `delta < 1`, else `scale * (k + 1)^(-exponent) / (k + 1 + t0)^2`.
    QuadraticSchedule { scale: f64, a: f64, exponent: f64 },
    /// `scale * a^(k + 1)`.
    Geometric { scale: f64, a: f64 },
}

impl Default for EpsilonMode {
    fn default() -> Self {
        EpsilonMode::Exact
    }
}

/// Run constants some schedules depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleContext {
    pub delta: f64,
    pub t0: f64,
    pub tau0: f64,
    pub mu_f: f64,
    pub mu_g: f64,
    pub eta_inf: f64,
}

impl EpsilonMode {
    pub fn theta_adaptive() -> Self {
        EpsilonMode::ThetaAdaptive {
            scale: 1.0,
            exponent: 2.1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EpsilonMode::Exact => "exact",
            EpsilonMode::ThetaAdaptive { .. } => "theta-adaptive",
            EpsilonMode::GeometricSquared { .. } => "geometric-squared",
            EpsilonMode::QuadraticSchedule { .. } => "quadratic-schedule",
            EpsilonMode::Geometric { .. } => "geometric",
        }
    }

    pub fn depends_on_theta(&self) -> bool {
        matches!(self, EpsilonMode::ThetaAdaptive { .. })
    }

    /// Checks the decay constraints that make the error sums bounded.
    pub fn validate(&self, ctx: &ScheduleContext) -> Result<()> {
        let check_scale = |s: f64| {
            if s >= 0.0 && s.is_finite() {
                Ok(())
            } else {
                Err(Error::config("eps_scale", format!("must be finite and nonnegative, got {s}")))
            }
        };
        match *self {
            EpsilonMode::Exact => Ok(()),
            EpsilonMode::ThetaAdaptive { scale, exponent } => {
                check_scale(scale)?;
                if !(exponent > 2.0) {
                    return Err(Error::config(
                        "eps_exponent",
                        format!("sqrt(k^-p) is summable only for p > 2, got {exponent}"),
                    ));
                }
                Ok(())
            }
            EpsilonMode::GeometricSquared { scale, a, b } => {
                check_scale(scale)?;
                let cap = if ctx.mu_g > 0.0 {
                    0.5 * ctx.delta * (ctx.eta_inf / (ctx.tau0 * ctx.mu_g)).min(1.0)
                } else {
                    0.5 * ctx.delta
                };
                if !(a > 0.0 && a < cap) {
                    return Err(Error::config("eps_a", format!("need 0 < a < {cap}, got {a}")));
                }
                if !(b > 0.0 && b < ctx.delta.sqrt()) {
                    return Err(Error::config(
                        "eps_b",
                        format!("need 0 < b < sqrt(delta) = {}, got {b}", ctx.delta.sqrt()),
                    ));
                }
                Ok(())
            }
            EpsilonMode::QuadraticSchedule { scale, a, exponent } => {
                check_scale(scale)?;
                if ctx.delta < 1.0 {
                    if !(a > 0.0 && a < ctx.delta) {
                        return Err(Error::config("eps_a", format!("need 0 < a < delta = {}, got {a}", ctx.delta)));
                    }
                } else if !(exponent > 2.0) {
                    return Err(Error::config(
                        "eps_exponent",
                        format!("sqrt(k^-p) is summable only for p > 2, got {exponent}"),
                    ));
                }
                Ok(())
            }
            EpsilonMode::Geometric { scale, a } => {
                check_scale(scale)?;
                let mu = ctx.mu_f + ctx.mu_g;
                let q = ctx.tau0 * mu / (ctx.eta_inf + ctx.tau0 * ctx.mu_g);
                let cap = 1.0 - q.sqrt();
                if !(a > 0.0 && a < cap) {
                    return Err(Error::config("eps_a", format!("need 0 < a < 1 - sqrt(q) = {cap}, got {a}")));
                }
                Ok(())
            }
        }
    }
}

/// `eps_{k+1}` for the step that produces `x^(k+1)`.
pub fn epsilon_schedule(mode: &EpsilonMode, k: usize, theta_next: f64, ctx: &ScheduleContext) -> f64 {
    let n = (k + 1) as f64;
    match *mode {
        EpsilonMode::Exact => 0.0,
        EpsilonMode::ThetaAdaptive { scale, exponent } => scale * theta_next * n.powf(-exponent),
        EpsilonMode::GeometricSquared { scale, a, b } => {
            // (a b^k)^(k+1) in log space
            scale * (n * (a.ln() + k as f64 * b.ln())).exp()
        }
        EpsilonMode::QuadraticSchedule { scale, a, exponent } => {
            if ctx.delta < 1.0 {
                scale * a.powf(n)
            } else {
                scale * n.powf(-exponent) / (n + ctx.t0).powi(2)
            }
        }
        EpsilonMode::Geometric { scale, a } => scale * a.powf(n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(delta: f64) -> ScheduleContext {
        ScheduleContext {
            delta,
            t0: 1.0,
            tau0: 1.0,
            mu_f: 0.0,
            mu_g: 0.1,
            eta_inf: 1.0,
        }
    }

    #[test]
    fn schedule_examples() {
        let c = ctx(1.0);
        for k in [0, 3, 100] {
            assert_eq!(epsilon_schedule(&EpsilonMode::Exact, k, 0.7, &c), 0.0);
        }
        let e = epsilon_schedule(&EpsilonMode::theta_adaptive(), 0, 0.5, &c);
        assert!((e - 0.5).abs() < 1e-15);
        let g = EpsilonMode::Geometric { scale: 3.0, a: 0.5 };
        assert!((epsilon_schedule(&g, 2, 0.0, &c) - 3.0 * 0.125).abs() < 1e-15);
        let s = EpsilonMode::GeometricSquared { scale: 1.0, a: 0.4, b: 0.9 };
        assert!((epsilon_schedule(&s, 2, 0.0, &c) - (0.4f64 * 0.81).powi(3)).abs() < 1e-15);
        let quad = EpsilonMode::QuadraticSchedule { scale: 1.0, a: 0.5, exponent: 3.0 };
        assert!((epsilon_schedule(&quad, 1, 0.0, &c) - 1.0 / 8.0 / 9.0).abs() < 1e-15);
        assert!((epsilon_schedule(&quad, 1, 0.0, &ctx(0.9)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn constraints_are_enforced() {
        let c = ctx(0.9);
        assert!(EpsilonMode::ThetaAdaptive { scale: 1.0, exponent: 2.0 }.validate(&c).is_err());
        assert!(EpsilonMode::GeometricSquared { scale: 1.0, a: 0.44, b: 0.9 }.validate(&c).is_ok());
        assert!(EpsilonMode::GeometricSquared { scale: 1.0, a: 0.46, b: 0.9 }.validate(&c).is_err());
        assert!(EpsilonMode::GeometricSquared { scale: 1.0, a: 0.4, b: 0.95 }.validate(&c).is_err());
        assert!(EpsilonMode::QuadraticSchedule { scale: 1.0, a: 0.95, exponent: 3.0 }.validate(&c).is_err());
        assert!(EpsilonMode::QuadraticSchedule { scale: 1.0, a: 0.95, exponent: 1.5 }
            .validate(&ctx(1.0))
            .is_err());
        // q = 0.1 / 1.1, 1 - sqrt(q) ~ 0.6985
        assert!(EpsilonMode::Geometric { scale: 1.0, a: 0.69 }.validate(&c).is_ok());
        assert!(EpsilonMode::Geometric { scale: 1.0, a: 0.70 }.validate(&c).is_err());
    }
}
