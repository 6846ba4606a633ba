//! Diagonal variable metrics.
//!
//! A [`DiagonalMetric`] carries positive per-coordinate weights together with
//! certified spectral bounds `eta_inf <= w_i <= eta_sup`. The solver only ever
//! consumes the certified bounds, never the raw extremes of the weights, so a
//! metric built from a thresholding window reports the window edges.
//!
//! [`MetricMode`] describes how the sequence `D_k` is generated along a run and
//! which per-transition factor `gamma_{k+1}` certifies
//! `D_{k+1} <= (1 + gamma_{k+1}) D_k` and `eta_sup^{k+1} / eta_sup^k <= 1 + gamma_{k+1}`.

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric {
    weights: Vec<f64>,
    eta_inf: f64,
    eta_sup: f64,
}

impl DiagonalMetric {
    /// Builds a metric with explicit certified bounds.
    pub fn new(weights: Vec<f64>, eta_inf: f64, eta_sup: f64) -> Result<Self> {
        if !(eta_inf > 0.0 && eta_inf <= eta_sup && eta_sup.is_finite()) {
            return Err(Error::Domain(format!(
                "invalid spectral bounds [{eta_inf}, {eta_sup}]"
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Domain(format!("weight {i} is not positive: {w}")));
            }
            // a few ulps of slack for weights computed as 1 / clamp(..)
            let slack = 4.0 * f64::EPSILON;
            if w < eta_inf * (1.0 - slack) || w > eta_sup * (1.0 + slack) {
                return Err(Error::Domain(format!(
                    "weight {i} = {w} outside certified bounds [{eta_inf}, {eta_sup}]"
                )));
            }
        }
        Ok(Self {
            weights,
            eta_inf,
            eta_sup,
        })
    }

    /// Bounds taken as the exact extremes of the weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("empty metric".into()));
        }
        let lo = crate::linalg::min(&weights);
        let hi = crate::linalg::max(&weights);
        Self::new(weights, lo, hi)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            weights: vec![1.0; n],
            eta_inf: 1.0,
            eta_sup: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eta_inf(&self) -> f64 {
        self.eta_inf
    }

    pub fn eta_sup(&self) -> f64 {
        self.eta_sup
    }

    /// `<D x, y>`
    pub fn inner(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.len(), x.len())?;
        check_len(self.len(), y.len())?;
        Ok(self
            .weights
            .iter()
            .zip(x.iter().zip(y))
            .map(|(w, (a, b))| w * a * b)
            .sum())
    }

    /// `||x||_D^2`
    pub fn norm_sq(&self, x: &[f64]) -> Result<f64> {
        self.inner(x, x)
    }

    /// `||x - y||_D^2` without allocating the difference.
    pub fn dist_sq(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.len(), x.len())?;
        check_len(self.len(), y.len())?;
        Ok(self
            .weights
            .iter()
            .zip(x.iter().zip(y))
            .map(|(w, (a, b))| w * (a - b) * (a - b))
            .sum())
    }

    /// Largest entry of `D^{-1}` as certified by the bounds.
    pub fn inverse_norm_bound(&self) -> f64 {
        1.0 / self.eta_inf
    }
}

/// Free function form of [`DiagonalMetric::norm_sq`].
pub fn d_norm_sq(x: &[f64], metric: &DiagonalMetric) -> Result<f64> {
    metric.norm_sq(x)
}

/// Free function form of [`DiagonalMetric::inner`].
pub fn d_inner(x: &[f64], y: &[f64], metric: &DiagonalMetric) -> Result<f64> {
    metric.inner(x, y)
}

#[derive(Debug, Clone, PartialEq)]
enum Bounds {
    Uniform(f64, f64),
    PerCoordinate(Vec<f64>, Vec<f64>),
}

/// A separable box `{ x : lower_i <= x_i <= upper_i }`; infinite bounds allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    bounds: Bounds,
}

impl BoxSet {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(Error::Domain(format!("empty box [{lower}, {upper}]")));
        }
        Ok(Self {
            bounds: Bounds::Uniform(lower, upper),
        })
    }

    pub fn per_coordinate(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len(lower.len(), upper.len())?;
        if let Some(i) = lower
            .iter()
            .zip(&upper)
            .position(|(l, u)| l > u || l.is_nan() || u.is_nan())
        {
            return Err(Error::Domain(format!(
                "empty box on coordinate {i}: [{}, {}]",
                lower[i], upper[i]
            )));
        }
        Ok(Self {
            bounds: Bounds::PerCoordinate(lower, upper),
        })
    }

    pub fn whole_space() -> Self {
        Self {
            bounds: Bounds::Uniform(f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn nonnegative() -> Self {
        Self {
            bounds: Bounds::Uniform(0.0, f64::INFINITY),
        }
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self.bounds, Bounds::Uniform(l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY)
    }

    #[inline]
    pub fn bounds_at(&self, i: usize) -> (f64, f64) {
        match &self.bounds {
            Bounds::Uniform(l, u) => (*l, *u),
            Bounds::PerCoordinate(l, u) => (l[i], u[i]),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, &v)| {
            let (l, u) = self.bounds_at(i);
            v >= l && v <= u
        })
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        match &self.bounds {
            Bounds::Uniform(..) => Ok(()),
            Bounds::PerCoordinate(l, _) => check_len(l.len(), n),
        }
    }

    /// Componentwise clamp in place.
    pub fn clamp_in_place(&self, x: &mut [f64]) {
        match &self.bounds {
            Bounds::Uniform(l, u) => {
                if *l == f64::NEG_INFINITY && *u == f64::INFINITY {
                    return;
                }
                for v in x.iter_mut() {
                    *v = v.max(*l).min(*u);
                }
            }
            Bounds::PerCoordinate(l, u) => {
                for ((v, lo), hi) in x.iter_mut().zip(l).zip(u) {
                    *v = v.max(*lo).min(*hi);
                }
            }
        }
    }
}

/// Projection onto a box in the norm induced by a diagonal metric.
///
/// The weighted objective separates per coordinate with positive weights, so
/// the minimizer is the Euclidean clamp whatever the weights are.
pub fn scaled_project_box(x: &[f64], set: &BoxSet, metric: &DiagonalMetric) -> Result<Vec<f64>> {
    check_len(metric.len(), x.len())?;
    set.check_dim(x.len())?;
    let mut out = x.to_vec();
    set.clamp_in_place(&mut out);
    Ok(out)
}

/// Thresholding exponents for `gamma_k = sqrt(1 + s1 / (k+1)^s2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeSchedule {
    pub s1: f64,
    pub s2: f64,
}

impl SqueezeSchedule {
    pub fn new(s1: f64, s2: f64) -> Result<Self> {
        if !(s1 >= 0.0 && s1.is_finite()) {
            return Err(Error::config("s1", format!("must be a finite nonnegative number, got {s1}")));
        }
        if s1 > 0.0 && !(s2 > 1.0) {
            return Err(Error::config("s2", format!("must exceed 1 when s1 > 0, got {s2}")));
        }
        Ok(Self { s1, s2 })
    }

    pub fn gamma(&self, k: usize) -> f64 {
        gamma_threshold(k, self)
    }
}

pub fn gamma_threshold(k: usize, schedule: &SqueezeSchedule) -> f64 {
    if schedule.s1 == 0.0 {
        return 1.0;
    }
    (1.0 + schedule.s1 / ((k + 1) as f64).powf(schedule.s2)).sqrt()
}

/// Band squeezing: weights constrained to `[eta - nu_inf_k, eta + nu_sup_k]`.
///
/// Sequences shorter than the run are padded with zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeBand {
    pub eta: f64,
    pub nu_inf: Vec<f64>,
    pub nu_sup: Vec<f64>,
}

impl SqueezeBand {
    pub fn new(eta: f64, nu_inf: Vec<f64>, nu_sup: Vec<f64>) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::config("eta", "must be positive"));
        }
        if nu_inf.iter().any(|&v| !(0.0..eta).contains(&v)) {
            return Err(Error::config("nu_inf", "entries must lie in [0, eta)"));
        }
        if nu_sup.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::config("nu_sup", "entries must be finite and nonnegative"));
        }
        Ok(Self { eta, nu_inf, nu_sup })
    }

    fn nu_inf_at(&self, k: usize) -> f64 {
        self.nu_inf.get(k).copied().unwrap_or(0.0)
    }

    fn nu_sup_at(&self, k: usize) -> f64 {
        self.nu_sup.get(k).copied().unwrap_or(0.0)
    }

    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.eta - self.nu_inf_at(k), self.eta + self.nu_sup_at(k))
    }
}

/// `D = diag(clamp(y / V, 1/gamma, gamma))^{-1}`, certified in `[1/gamma, gamma]`.
pub fn split_gradient_metric(y: &[f64], v: &[f64], gamma: f64) -> Result<DiagonalMetric> {
    check_len(y.len(), v.len())?;
    if let Some(i) = v.iter().position(|&vi| !(vi > 0.0)) {
        return Err(Error::Domain(format!("split-gradient denominator {i} is not positive: {}", v[i])));
    }
    let ratio: Vec<f64> = y.iter().zip(v).map(|(a, b)| a / b).collect();
    clamped_inverse_metric(&ratio, gamma)
}

/// `diag(clamp(ratio, 1/gamma, gamma))^{-1}`
pub(crate) fn clamped_inverse_metric(ratio: &[f64], gamma: f64) -> Result<DiagonalMetric> {
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("threshold gamma must be >= 1, got {gamma}")));
    }
    let lo = 1.0 / gamma;
    let weights = ratio
        .iter()
        .map(|&r| {
            // NaN ratios (0/0) fall back to the window centre
            let r = if r.is_nan() { 1.0 } else { r };
            1.0 / r.max(lo).min(gamma)
        })
        .collect();
    DiagonalMetric::new(weights, lo, gamma)
}

/// `D_next <= (1 + gamma_next) D_prev` entrywise and `eta_sup` growth bounded
/// by the same factor.
pub fn check_metric_chain(prev: &DiagonalMetric, next: &DiagonalMetric, gamma_next: f64) -> bool {
    if prev.len() != next.len() || gamma_next < 0.0 {
        return false;
    }
    let factor = 1.0 + gamma_next;
    let tol = 1.0 + 8.0 * f64::EPSILON;
    let loewner = next
        .weights
        .iter()
        .zip(&prev.weights)
        .all(|(n, p)| *n <= factor * p * tol);
    loewner && next.eta_sup <= factor * prev.eta_sup * tol
}

/// How the metric sequence is generated during a run.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricMode {
    /// `D_k = I` for every `k`.
    Identity,
    /// A fixed metric (`gamma_k = 0`).
    Constant(DiagonalMetric),
    /// Split-gradient scaling thresholded by `gamma_k`.
    SplitGradient(SqueezeSchedule),
    /// Split-gradient scaling with explicit squeezing bands.
    Band(SqueezeBand),
}

impl MetricMode {
    /// Whether the problem has to supply the split-gradient ratio `y / V(y)`.
    pub fn needs_ratio(&self) -> bool {
        matches!(self, MetricMode::SplitGradient(s) if s.s1 > 0.0) || matches!(self, MetricMode::Band(_))
    }

    /// Certified `(eta_inf, eta_sup)` of `D_k`.
    pub fn bounds_at(&self, k: usize) -> (f64, f64) {
        match self {
            MetricMode::Identity => (1.0, 1.0),
            MetricMode::Constant(m) => (m.eta_inf, m.eta_sup),
            MetricMode::SplitGradient(s) => {
                let g = s.gamma(k);
                (1.0 / g, g)
            }
            MetricMode::Band(b) => b.interval(k),
        }
    }

    /// Bounds valid for every `k`.
    pub fn global_bounds(&self) -> (f64, f64) {
        match self {
            MetricMode::Band(b) => {
                let max_inf = b.nu_inf.iter().copied().fold(0.0, f64::max);
                let max_sup = b.nu_sup.iter().copied().fold(0.0, f64::max);
                (b.eta - max_inf, b.eta + max_sup)
            }
            // gamma_k is non-increasing, so k = 0 is the widest window
            other => other.bounds_at(0),
        }
    }

    /// Factor `gamma_{k+1}` certifying the transition `D_k -> D_{k+1}`.
    pub fn transition_gamma(&self, k: usize) -> f64 {
        match self {
            MetricMode::Identity | MetricMode::Constant(_) => 0.0,
            MetricMode::SplitGradient(s) => s.gamma(k) * s.gamma(k + 1) - 1.0,
            MetricMode::Band(b) => {
                (b.nu_sup_at(k + 1) + b.nu_inf_at(k)) / (b.eta - b.nu_inf_at(k))
            }
        }
    }

    /// Builds `D_k` given the split-gradient ratio (ignored by identity/constant modes).
    pub fn build(&self, k: usize, n: usize, ratio: Option<&[f64]>) -> Result<DiagonalMetric> {
        match self {
            MetricMode::Identity => Ok(DiagonalMetric::identity(n)),
            MetricMode::Constant(m) => {
                check_len(n, m.len())?;
                Ok(m.clone())
            }
            MetricMode::SplitGradient(s) => {
                if s.s1 == 0.0 {
                    return Ok(DiagonalMetric::identity(n));
                }
                let ratio = ratio.ok_or_else(|| {
                    Error::config("metric", "problem does not provide a split-gradient ratio")
                })?;
                check_len(n, ratio.len())?;
                clamped_inverse_metric(ratio, s.gamma(k))
            }
            MetricMode::Band(b) => {
                let ratio = ratio.ok_or_else(|| {
                    Error::config("metric", "problem does not provide a split-gradient ratio")
                })?;
                check_len(n, ratio.len())?;
                let (lo, hi) = b.interval(k);
                let weights = ratio
                    .iter()
                    .map(|&r| {
                        let w = if r.is_nan() || r == 0.0 { hi } else { 1.0 / r };
                        w.max(lo).min(hi)
                    })
                    .collect();
                DiagonalMetric::new(weights, lo, hi)
            }
        }
    }
}
