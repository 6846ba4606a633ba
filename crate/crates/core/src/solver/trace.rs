use crate::error::{Error, Result};
use crate::metric::DiagonalMetric;

/// Diagnostics of one outer iteration; row `k = 0` describes the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub f_value: f64,
    /// `(F_k - F*) / F*`, filled in once a reference is known.
    pub rel_error: f64,
    pub tau: f64,
    pub l_est: f64,
    pub bt_trials: usize,
    pub inner_iters: usize,
    pub gap: f64,
    pub eps: f64,
    pub elapsed_s: f64,
    pub theta: f64,
    pub omega: f64,
    pub t: f64,
    pub q: f64,
    pub eta_sup: f64,
    pub e1: f64,
    pub e2: f64,
    pub gamma_product: f64,
    /// Whether the metric transition into this iteration passed the chain check.
    pub chain_ok: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceList {
    pub records: Vec<TraceRecord>,
}

impl TraceList {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, r: TraceRecord) {
        self.records.push(r);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TraceRecord> {
        self.records.iter()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn f_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f_value).collect()
    }

    pub fn rel_errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.rel_error).collect()
    }

    /// Accepted Lipschitz estimates `1 / tau_k`.
    pub fn lipschitz_history(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.l_est).collect()
    }

    pub fn set_reference(&mut self, f_star: f64) -> Result<()> {
        if !f_star.is_finite() || f_star == 0.0 {
            return Err(Error::Domain(format!("reference value must be finite and nonzero, got {f_star}")));
        }
        for r in &mut self.records {
            r.rel_error = ((r.f_value - f_star) / f_star.abs()).max(0.0);
        }
        Ok(())
    }

    pub fn total_inner_iters(&self) -> usize {
        self.records.iter().map(|r| r.inner_iters).sum()
    }

    /// First `k` with relative error at or below `level`.
    pub fn first_below(&self, level: f64) -> Option<usize> {
        self.records.iter().find(|r| r.rel_error <= level).map(|r| r.k)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub x: Vec<f64>,
    pub x0: Vec<f64>,
    pub initial_metric: DiagonalMetric,
    pub trace: TraceList,
}
