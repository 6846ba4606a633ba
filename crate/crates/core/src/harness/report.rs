//! Empirical rate fits on a trace, next to the theoretical bounds.

use crate::error::{Error, Result};
use crate::solver::{rate_certificate, CertificateReport, Reference, SolveOutput, SolverConfig, TraceList};

/// Relative errors below this are treated as unresolved by the reference and left out of fits.
pub const EF_FLOOR: f64 = 1e-11;

/// `1 - sqrt(mu rho / (L_f eta_sup + mu_g rho))`
pub fn contraction_factor(mu: f64, rho: f64, lipschitz: f64, eta_sup: f64, mu_g: f64) -> f64 {
    1.0 - (mu * rho / (lipschitz * eta_sup + mu_g * rho)).sqrt()
}

/// Slope and intercept of the least-squares line through `(x_i, y_i)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Rows `k` of the final third of a trace with `K` iterations.
pub fn final_third(trace: &TraceList) -> std::ops::RangeInclusive<usize> {
    let last = trace.len().saturating_sub(1);
    (last - last / 3)..=last
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFits {
    /// Slope of `log eF_k` against `k` over the tail.
    pub loglinear_slope: f64,
    /// Slope of `log eF_k` against `log k` over the tail.
    pub loglog_slope: f64,
    /// Largest `eF_{k+1} / eF_k` over consecutive resolved tail rows.
    pub max_tail_ratio: Option<f64>,
    /// `max k^2 eF_k` over the tail divided by its maximum over the earlier rows.
    pub k2_growth: f64,
    /// Number of tail rows above [`EF_FLOOR`].
    pub tail_points: usize,
}

/// Fits both regimes on the final third of the trace. Needs relative errors to be set.
pub fn fit_rates(trace: &TraceList) -> Result<RateFits> {
    let e = trace.rel_errors();
    let tail = final_third(trace);
    let start = *tail.start();
    let pts: Vec<(f64, f64)> = tail
        .clone()
        .filter(|&k| k >= 1 && e[k] > EF_FLOOR)
        .map(|k| (k as f64, e[k]))
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateTrace(format!(
            "only {} tail rows above the resolution floor {EF_FLOOR:e}",
            pts.len()
        )));
    }
    if pts.iter().all(|p| p.1 == pts[0].1) {
        return Err(Error::DegenerateTrace("all tail values are equal".into()));
    }
    let ks: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let logs: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let log_ks: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
    let degenerate = || Error::DegenerateTrace("tail rows do not span a range".into());
    let (loglinear_slope, _) = linear_fit(&ks, &logs).ok_or_else(degenerate)?;
    let (loglog_slope, _) = linear_fit(&log_ks, &logs).ok_or_else(degenerate)?;

    let max_tail_ratio = tail
        .clone()
        .filter(|&k| k < *tail.end() && e[k] > EF_FLOOR && e[k + 1] > 0.0)
        .map(|k| e[k + 1] / e[k])
        .reduce(f64::max);

    let k2 = |k: usize| (k * k) as f64 * e[k];
    let early = (1..start).map(k2).fold(0.0, f64::max);
    let late = tail.filter(|&k| k >= 1).map(k2).fold(0.0, f64::max);
    let k2_growth = if early > 0.0 { late / early } else { f64::INFINITY };

    Ok(RateFits {
        loglinear_slope,
        loglog_slope,
        max_tail_ratio,
        k2_growth,
        tail_points: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub fits: Option<RateFits>,
    /// Why the fits are missing, if they are.
    pub fit_error: Option<String>,
    /// Theoretical linear factor, when `mu > 0` and a Lipschitz constant is known.
    pub contraction: Option<f64>,
    pub certificate: CertificateReport,
}

impl RateReport {
    /// The certificate verdict; fits are descriptive.
    pub fn passed(&self) -> bool {
        self.certificate.passed()
    }

    /// Tail ratios stay below the contraction factor plus `slack`.
    pub fn linear_rate_ok(&self, slack: f64) -> Option<bool> {
        let c = self.contraction?;
        let r = self.fits.as_ref()?.max_tail_ratio?;
        Some(r <= c + slack)
    }

    /// Log-log slope is at most `max_slope` and `k^2 eF_k` does not grow.
    pub fn quadratic_rate_ok(&self, max_slope: f64) -> Option<bool> {
        let f = self.fits.as_ref()?;
        Some(f.loglog_slope <= max_slope && f.k2_growth <= 1.0)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        match &self.fits {
            Some(f) => {
                s.push_str(&format!("loglinear_slope={:.6e}\n", f.loglinear_slope));
                s.push_str(&format!("per_iteration_factor={:.6}\n", f.loglinear_slope.exp()));
                s.push_str(&format!("loglog_slope={:.4}\n", f.loglog_slope));
                if let Some(r) = f.max_tail_ratio {
                    s.push_str(&format!("max_tail_ratio={r:.6}\n"));
                }
                s.push_str(&format!("k2_growth={:.4}\n", f.k2_growth));
                s.push_str(&format!("tail_points={}\n", f.tail_points));
            }
            None => s.push_str(&format!(
                "fits=unavailable ({})\n",
                self.fit_error.as_deref().unwrap_or("unknown")
            )),
        }
        if let Some(c) = self.contraction {
            s.push_str(&format!("contraction_factor={c:.6}\n"));
        }
        let c = &self.certificate;
        s.push_str(&format!("certificate_rows={}\n", c.rows.len()));
        s.push_str(&format!("certificate_min_margin={:.6e}\n", c.min_margin));
        s.push_str(&format!("rate_bound_holds={}\n", c.rate_holds));
        s.push_str(&format!("theta_bounds_hold={}\n", c.theta_bounds_hold));
        s.push_str(&format!("eta_theta_monotone={}\n", c.eta_theta_monotone));
        s.push_str(&format!("certificate={}\n", if self.passed() { "PASS" } else { "FAIL" }));
        s
    }
}

/// Certificate plus fits for a finished run whose trace carries relative errors.
pub fn rate_report(
    output: &SolveOutput,
    config: &SolverConfig,
    lipschitz: Option<f64>,
    reference: &Reference,
) -> Result<RateReport> {
    let certificate = rate_certificate(output, config, Some(reference), lipschitz)?;
    let (fits, fit_error) = match fit_rates(&output.trace) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mu = config.mu_f + config.mu_g;
    let eta_sup = output.trace.iter().map(|r| r.eta_sup).fold(0.0, f64::max);
    let contraction = match lipschitz {
        Some(l) if mu > 0.0 => Some(contraction_factor(mu, config.rho, l, eta_sup, config.mu_g)),
        _ => None,
    };
    Ok(RateReport {
        fits,
        fit_error,
        contraction,
        certificate,
    })
}
