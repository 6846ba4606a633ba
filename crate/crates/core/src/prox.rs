//! Certified inexact proximal-gradient points.
//!
//! The nonsmooth part is `g(x) = sum_i lambda_i ||M_i x|| + psi(x)` with
//! `psi = iota_Y + (eps_q / 2) ||x||^2` for a box `Y`. For a given forward
//! point `ybar`, step `tau` and metric `D` the primal subproblem is
//!
//! ```text
//! P(x) = sum_i phi_i(M_i x) + psi(x) + ||x - ybar||_D^2 / (2 tau)
//! ```
//!
//! and its dual `Q(w)` is maximized by accelerated projected gradient ascent.
//! Every dual iterate `w` produces the primal point `x(w) = prox^D_{tau psi}(ybar - tau D^{-1} M^* w)`;
//! iterations stop at the first `l` with `P(x(w_l)) - Q(w_l) <= eps`, which by
//! weak duality bounds the suboptimality of `x(w_l)` in the surrogate.

use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::metric::{BoxSet, DiagonalMetric};
use crate::operator::LinearOperator;

/// Norm used by a block `phi(v) = lambda ||v||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockNorm {
    L1,
    /// Sum of Euclidean norms over consecutive groups of `group` entries.
    GroupL2 { group: usize },
}

#[derive(Debug, Clone)]
pub struct NormBlock {
    pub lambda: f64,
    pub norm: BlockNorm,
    pub op: Arc<dyn LinearOperator>,
}

impl NormBlock {
    pub fn new(lambda: f64, norm: BlockNorm, op: Arc<dyn LinearOperator>) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::config("lambda", format!("must be finite and nonnegative, got {lambda}")));
        }
        if let BlockNorm::GroupL2 { group } = norm {
            if group == 0 || op.output_len() % group != 0 {
                return Err(Error::config("group", "group size must divide the operator range"));
            }
        }
        Ok(Self { lambda, norm, op })
    }

    /// `phi(v)`
    pub fn value(&self, v: &[f64]) -> f64 {
        match self.norm {
            BlockNorm::L1 => self.lambda * v.iter().map(|a| a.abs()).sum::<f64>(),
            BlockNorm::GroupL2 { group } => {
                self.lambda
                    * v.chunks_exact(group)
                        .map(|c| c.iter().map(|a| a * a).sum::<f64>().sqrt())
                        .sum::<f64>()
            }
        }
    }

    /// `phi^*(w)`: zero on the dual ball of radius `lambda`, infinite outside.
    pub fn conjugate(&self, w: &[f64]) -> f64 {
        let tol = self.lambda * (1.0 + 1e-12) + 1e-300;
        let inside = match self.norm {
            BlockNorm::L1 => w.iter().all(|a| a.abs() <= tol),
            BlockNorm::GroupL2 { group } => w
                .chunks_exact(group)
                .all(|c| c.iter().map(|a| a * a).sum::<f64>().sqrt() <= tol),
        };
        if inside {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Projection onto the dual ball (the prox of `phi^*`).
    pub fn project_dual(&self, w: &mut [f64]) {
        match self.norm {
            BlockNorm::L1 => {
                for a in w.iter_mut() {
                    *a = a.max(-self.lambda).min(self.lambda);
                }
            }
            BlockNorm::GroupL2 { group } => {
                for c in w.chunks_exact_mut(group) {
                    let nrm = c.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if nrm > self.lambda {
                        let s = self.lambda / nrm;
                        c.iter_mut().for_each(|a| *a *= s);
                    }
                }
            }
        }
    }

    /// `(phi(v) - <v, w>, phi(v))` for `w` in the dual ball, with the residual
    /// summed groupwise so that every term is nonnegative.
    fn fenchel_residual(&self, v: &[f64], w: &[f64]) -> (f64, f64) {
        let mut residual = 0.0;
        let mut value = 0.0;
        match self.norm {
            BlockNorm::L1 => {
                for (a, b) in v.iter().zip(w) {
                    let phi = self.lambda * a.abs();
                    residual += (phi - a * b).max(0.0);
                    value += phi;
                }
            }
            BlockNorm::GroupL2 { group } => {
                for (a, b) in v.chunks_exact(group).zip(w.chunks_exact(group)) {
                    let nrm = a.iter().map(|t| t * t).sum::<f64>().sqrt();
                    let inner: f64 = a.iter().zip(b).map(|(s, t)| s * t).sum();
                    let phi = self.lambda * nrm;
                    residual += (phi - inner).max(0.0);
                    value += phi;
                }
            }
        }
        (residual, value)
    }
}

/// `psi(x) = iota_Y(x) + (eps_q / 2) ||x||^2`
#[derive(Debug, Clone, PartialEq)]
pub struct Psi {
    pub set: BoxSet,
    pub eps_q: f64,
}

impl Psi {
    pub fn indicator(set: BoxSet) -> Self {
        Self { set, eps_q: 0.0 }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        if !self.set.contains(x) {
            return f64::INFINITY;
        }
        if self.eps_q == 0.0 {
            0.0
        } else {
            0.5 * self.eps_q * crate::linalg::norm_sq(x)
        }
    }

    /// `prox^D_{tau psi}(z)` through the rescaled projection.
    pub fn prox(&self, z: &[f64], tau: f64, metric: &DiagonalMetric) -> Vec<f64> {
        let mut out = z.to_vec();
        self.prox_in_place(&mut out, tau, metric);
        out
    }

    pub(crate) fn prox_in_place(&self, z: &mut [f64], tau: f64, metric: &DiagonalMetric) {
        if self.eps_q > 0.0 {
            let shift = tau * self.eps_q;
            for (v, w) in z.iter_mut().zip(metric.weights()) {
                *v *= w / (w + shift);
            }
        }
        self.set.clamp_in_place(z);
    }
}

/// Right-hand side of the perturbed scaled prox identity:
/// `prox^D_{tau (h + eps/2 ||.||^2)}(z) = prox^{D + tau eps I}_{tau h}((D / (D + tau eps I)) z)`.
///
/// `h_prox(z, tau, metric)` must evaluate `prox^{metric}_{tau h}(z)`.
pub fn perturbed_scaled_prox<F>(
    h_prox: F,
    z: &[f64],
    tau: f64,
    eps_q: f64,
    metric: &DiagonalMetric,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64], f64, &DiagonalMetric) -> Result<Vec<f64>>,
{
    check_len(metric.len(), z.len())?;
    if eps_q == 0.0 {
        return h_prox(z, tau, metric);
    }
    let shift = tau * eps_q;
    let shifted = DiagonalMetric::new(
        metric.weights().iter().map(|w| w + shift).collect(),
        metric.eta_inf() + shift,
        metric.eta_sup() + shift,
    )?;
    let rescaled: Vec<f64> = z
        .iter()
        .zip(metric.weights())
        .map(|(v, w)| v * w / (w + shift))
        .collect();
    h_prox(&rescaled, tau, &shifted)
}

/// `g = sum_i phi_i(M_i x) + psi(x)`.
#[derive(Debug, Clone)]
pub struct StructuredNonsmooth {
    pub blocks: Vec<NormBlock>,
    pub psi: Psi,
}

/// One dual vector per block.
pub type DualVector = Vec<Vec<f64>>;

impl StructuredNonsmooth {
    pub fn new(blocks: Vec<NormBlock>, psi: Psi) -> Self {
        Self { blocks, psi }
    }

    /// Strong convexity modulus contributed by the quadratic perturbation.
    pub fn mu_g(&self) -> f64 {
        self.psi.eps_q
    }

    /// `||M||^2 <= sum_i ||M_i||^2`
    pub fn operator_norm_sq_bound(&self) -> f64 {
        self.blocks.iter().map(|b| b.op.norm_sq_bound()).sum()
    }

    pub fn feasible_set(&self) -> &BoxSet {
        &self.psi.set
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let psi = self.psi.value(x);
        if !psi.is_finite() {
            return psi;
        }
        psi + self
            .blocks
            .iter()
            .map(|b| b.value(&b.op.apply_vec(x)))
            .sum::<f64>()
    }

    pub fn zero_dual(&self) -> DualVector {
        self.blocks.iter().map(|b| vec![0.0; b.op.output_len()]).collect()
    }

    /// `M^* w`
    fn adjoint_sum(&self, w: &DualVector, n: usize) -> Vec<f64> {
        let mut acc = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        for (b, wi) in self.blocks.iter().zip(w) {
            b.op.adjoint(wi, &mut tmp);
            crate::linalg::axpy(1.0, &tmp, &mut acc);
        }
        acc
    }

    fn check_dual(&self, w: &DualVector) -> Result<()> {
        check_len(self.blocks.len(), w.len())?;
        for (b, wi) in self.blocks.iter().zip(w) {
            check_len(b.op.output_len(), wi.len())?;
        }
        Ok(())
    }
}

/// `P(x) = sum phi_i(M_i x) + psi(x) + ||x - ybar||_D^2 / (2 tau)`; `+inf` outside `dom(psi)`.
pub fn primal_value(
    x: &[f64],
    ybar: &[f64],
    tau: f64,
    metric: &DiagonalMetric,
    g: &StructuredNonsmooth,
) -> Result<f64> {
    let q = metric.dist_sq(x, ybar)?;
    Ok(g.value(x) + q / (2.0 * tau))
}

/// `u(w) = ybar - tau D^{-1} M^* w`
fn dual_shifted_point(
    w: &DualVector,
    ybar: &[f64],
    tau: f64,
    metric: &DiagonalMetric,
    g: &StructuredNonsmooth,
) -> Vec<f64> {
    let mw = g.adjoint_sum(w, ybar.len());
    ybar.iter()
        .zip(mw.iter().zip(metric.weights()))
        .map(|(y, (m, d))| y - tau * m / d)
        .collect()
}

/// Dual objective `Q(w) = -sum phi_i^*(w_i) + Phi(w)` evaluated term by term.
pub fn dual_value(
    w: &DualVector,
    ybar: &[f64],
    tau: f64,
    metric: &DiagonalMetric,
    g: &StructuredNonsmooth,
) -> Result<f64> {
    check_len(metric.len(), ybar.len())?;
    g.check_dual(w)?;
    let conj: f64 = g.blocks.iter().zip(w).map(|(b, wi)| b.conjugate(wi)).sum();
    if conj.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    let u = dual_shifted_point(w, ybar, tau, metric, g);
    let p = g.psi.prox(&u, tau, metric);
    let two_tau = 2.0 * tau;
    let phi = g.psi.value(&p) - metric.norm_sq(&u)? / two_tau
        + metric.norm_sq(ybar)? / two_tau
        + metric.dist_sq(&p, &u)? / two_tau;
    Ok(phi - conj)
}

/// `x(w) = prox^D_{tau psi}(ybar - tau D^{-1} M^* w)`
pub fn primal_from_dual(
    w: &DualVector,
    ybar: &[f64],
    tau: f64,
    metric: &DiagonalMetric,
    g: &StructuredNonsmooth,
) -> Result<Vec<f64>> {
    check_len(metric.len(), ybar.len())?;
    g.check_dual(w)?;
    let mut u = dual_shifted_point(w, ybar, tau, metric, g);
    g.psi.prox_in_place(&mut u, tau, metric);
    Ok(u)
}

#[derive(Debug, Clone)]
pub struct ProxResult {
    pub x_tilde: Vec<f64>,
    pub dual_w: DualVector,
    pub gap: f64,
    pub inner_iters: usize,
    /// Tolerance the gap was tested against (after the machine-precision floor).
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    pub max_iter: usize,
    /// Extrapolation `(l - 1) / (l + a)`; `a > 2` keeps the iterates convergent.
    /// `None` runs plain projected gradient ascent.
    pub extrapolation: Option<f64>,
}

impl Default for InnerOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            extrapolation: Some(3.0),
        }
    }
}

/// Smallest gap that can be certified in double precision for a pair whose
/// regularizer value is `phi_scale`.
pub fn gap_floor(phi_scale: f64) -> f64 {
    (64.0 * f64::EPSILON * phi_scale.abs()).max(1e-12)
}

/// Buffers reused across inner iterations.
struct Workspace {
    u: Vec<f64>,
    u_prev: Vec<f64>,
    uv: Vec<f64>,
    x: Vec<f64>,
    xv: Vec<f64>,
    tmp: Vec<f64>,
    mx: DualVector,
    mxv: DualVector,
}

impl Workspace {
    fn new(n: usize, g: &StructuredNonsmooth) -> Self {
        Self {
            u: vec![0.0; n],
            u_prev: vec![0.0; n],
            uv: vec![0.0; n],
            x: vec![0.0; n],
            xv: vec![0.0; n],
            tmp: vec![0.0; n],
            mx: g.zero_dual(),
            mxv: g.zero_dual(),
        }
    }
}

/// `out = ybar - tau D^{-1} M^* w`
fn shifted_point_into(
    w: &DualVector,
    ybar: &[f64],
    tau: f64,
    metric: &DiagonalMetric,
    g: &StructuredNonsmooth,
    tmp: &mut [f64],
    out: &mut [f64],
) {
    out.copy_from_slice(ybar);
    for (b, wi) in g.blocks.iter().zip(w) {
        b.op.adjoint(wi, tmp);
        for ((o, t), d) in out.iter_mut().zip(tmp.iter()).zip(metric.weights()) {
            *o -= tau * t / d;
        }
    }
}

fn apply_blocks(g: &StructuredNonsmooth, x: &[f64], out: &mut DualVector) {
    for (b, o) in g.blocks.iter().zip(out.iter_mut()) {
        b.op.apply(x, o);
    }
}

/// `(sum_i phi_i(v_i) - <v_i, w_i>, sum_i phi_i(v_i))`
fn gap_terms(g: &StructuredNonsmooth, mx: &DualVector, w: &DualVector) -> (f64, f64) {
    let mut gap = 0.0;
    let mut phi = 0.0;
    for ((b, v), wi) in g.blocks.iter().zip(mx).zip(w) {
        let (r, p) = b.fenchel_residual(v, wi);
        gap += r;
        phi += p;
    }
    (gap, phi)
}

/// Computes an `eps`-approximation of `prox^D_{tau g}(ybar)` certified by the duality gap.
///
/// `warm_dual` seeds the dual iterate; it is projected onto the dual ball first.
pub fn inexact_prox(
    ybar: &[f64],
    tau: f64,
    metric: &DiagonalMetric,
    g: &StructuredNonsmooth,
    eps: f64,
    warm_dual: Option<&DualVector>,
    options: &InnerOptions,
) -> Result<ProxResult> {
    check_len(metric.len(), ybar.len())?;
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("tolerance must be nonnegative, got {eps}")));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {tau}")));
    }
    if g.blocks.is_empty() {
        let x = g.psi.prox(ybar, tau, metric);
        return Ok(ProxResult {
            x_tilde: x,
            dual_w: Vec::new(),
            gap: 0.0,
            inner_iters: 0,
            target: eps,
        });
    }

    let n = ybar.len();
    let mut w = match warm_dual {
        Some(w0) => {
            g.check_dual(w0)?;
            w0.clone()
        }
        None => g.zero_dual(),
    };
    for (b, wi) in g.blocks.iter().zip(w.iter_mut()) {
        b.project_dual(wi);
    }
    let step = 1.0 / (tau * g.operator_norm_sq_bound() * metric.inverse_norm_bound());
    let mut ws = Workspace::new(n, g);
    let mut w_prev = w.clone();

    shifted_point_into(&w, ybar, tau, metric, g, &mut ws.tmp, &mut ws.u);
    let mut best_gap = f64::INFINITY;
    let mut l = 0usize;
    loop {
        ws.x.copy_from_slice(&ws.u);
        g.psi.prox_in_place(&mut ws.x, tau, metric);
        apply_blocks(g, &ws.x, &mut ws.mx);
        let (gap, phi) = gap_terms(g, &ws.mx, &w);
        let floor = gap_floor(phi);
        let target = if eps < floor { floor } else { eps };
        best_gap = best_gap.min(gap);
        if gap <= target {
            return Ok(ProxResult {
                x_tilde: ws.x,
                dual_w: w,
                gap,
                inner_iters: l,
                target,
            });
        }
        if l >= options.max_iter {
            return Err(Error::InnerCapExceeded {
                iterations: l,
                best_gap,
                target,
            });
        }
        l += 1;

        let beta = match options.extrapolation {
            Some(a) => (l as f64 - 1.0) / (l as f64 + a),
            None => 0.0,
        };
        // the dual gradient at the extrapolated point is M x(v); u is affine in w
        let grad = if beta == 0.0 {
            &ws.mx
        } else {
            for ((uv, u), up) in ws.uv.iter_mut().zip(&ws.u).zip(&ws.u_prev) {
                *uv = u + beta * (u - up);
            }
            ws.xv.copy_from_slice(&ws.uv);
            g.psi.prox_in_place(&mut ws.xv, tau, metric);
            apply_blocks(g, &ws.xv, &mut ws.mxv);
            &ws.mxv
        };
        for (((b, wi), wpi), gi) in g.blocks.iter().zip(w.iter_mut()).zip(w_prev.iter_mut()).zip(grad) {
            for ((a, p), d) in wi.iter_mut().zip(wpi.iter_mut()).zip(gi) {
                let v = *a + beta * (*a - *p);
                *p = *a;
                *a = v + step * d;
            }
            b.project_dual(wi);
        }
        std::mem::swap(&mut ws.u, &mut ws.u_prev);
        shifted_point_into(&w, ybar, tau, metric, g, &mut ws.tmp, &mut ws.u);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::IdentityOperator;

    fn l1_identity(n: usize, lambda: f64) -> StructuredNonsmooth {
        let op: Arc<dyn LinearOperator> = Arc::new(IdentityOperator { n });
        StructuredNonsmooth::new(
            vec![NormBlock::new(lambda, BlockNorm::L1, op).unwrap()],
            Psi::indicator(BoxSet::whole_space()),
        )
    }

    #[test]
    fn primal_value_one_dimensional() {
        let g = l1_identity(1, 1.0);
        let id = DiagonalMetric::identity(1);
        let v = primal_value(&[1.0], &[2.0], 1.0, &id, &g).unwrap();
        assert!((v - 1.5).abs() < 1e-15);
    }

    #[test]
    fn primal_value_at_ybar_is_psi() {
        let g = StructuredNonsmooth::new(
            vec![],
            Psi {
                set: BoxSet::nonnegative(),
                eps_q: 2.0,
            },
        );
        let id = DiagonalMetric::identity(2);
        let v = primal_value(&[1.0, 2.0], &[1.0, 2.0], 0.3, &id, &g).unwrap();
        assert!((v - 5.0).abs() < 1e-15);
        assert_eq!(primal_value(&[-1.0, 2.0], &[1.0, 2.0], 0.3, &id, &g).unwrap(), f64::INFINITY);
    }

    #[test]
    fn dual_value_without_blocks_matches_primal() {
        let g = StructuredNonsmooth::new(vec![], Psi::indicator(BoxSet::whole_space()));
        let m = DiagonalMetric::new(vec![0.5, 2.0], 0.5, 2.0).unwrap();
        let ybar = [0.3, -1.2];
        let q = dual_value(&vec![], &ybar, 0.7, &m, &g).unwrap();
        let p = primal_value(&ybar, &ybar, 0.7, &m, &g).unwrap();
        assert!((p - q).abs() < 1e-14);
    }

    #[test]
    fn soft_threshold_is_recovered_in_one_step() {
        let g = l1_identity(3, 0.5);
        let id = DiagonalMetric::identity(3);
        let ybar = [2.0, -0.1, -3.0];
        let r = inexact_prox(&ybar, 1.0, &id, &g, 0.0, None, &InnerOptions::default()).unwrap();
        let expect = [1.5, 0.0, -2.5];
        for (a, b) in r.x_tilde.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(r.inner_iters <= 1);
    }

    #[test]
    fn indicator_only_is_closed_form() {
        let g = StructuredNonsmooth::new(vec![], Psi::indicator(BoxSet::nonnegative()));
        let m = DiagonalMetric::new(vec![3.0, 0.5], 0.5, 3.0).unwrap();
        let r = inexact_prox(&[-1.0, 4.0], 0.2, &m, &g, 1e-8, None, &InnerOptions::default()).unwrap();
        assert_eq!(r.x_tilde, vec![0.0, 4.0]);
        assert_eq!(r.inner_iters, 0);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn perturbed_prox_examples() {
        let id = DiagonalMetric::identity(1);
        let clamp = |z: &[f64], _t: f64, _m: &DiagonalMetric| -> Result<Vec<f64>> {
            Ok(z.iter().map(|v| v.max(0.0)).collect())
        };
        let x = perturbed_scaled_prox(clamp, &[4.0], 1.0, 1.0, &id).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15);
        let x = perturbed_scaled_prox(clamp, &[-4.0], 1.0, 0.0, &id).unwrap();
        assert_eq!(x, vec![0.0]);
        let m = DiagonalMetric::new(vec![2.0, 0.5], 0.5, 2.0).unwrap();
        let zero = |z: &[f64], _t: f64, _m: &DiagonalMetric| -> Result<Vec<f64>> { Ok(z.to_vec()) };
        let x = perturbed_scaled_prox(zero, &[1.0, 1.0], 0.5, 2.0, &m).unwrap();
        assert!((x[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn group_projection_is_radial() {
        let op: Arc<dyn LinearOperator> = Arc::new(IdentityOperator { n: 2 });
        let b = NormBlock::new(1.0, BlockNorm::GroupL2 { group: 2 }, op).unwrap();
        let mut w = vec![3.0, 4.0];
        b.project_dual(&mut w);
        assert!((w[0] - 0.6).abs() < 1e-15 && (w[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn large_tolerance_returns_first_iterate() {
        let g = l1_identity(2, 1.0);
        let id = DiagonalMetric::identity(2);
        let r = inexact_prox(&[5.0, -5.0], 1.0, &id, &g, 1e6, None, &InnerOptions::default()).unwrap();
        assert_eq!(r.inner_iters, 0);
        assert_eq!(r.x_tilde, vec![5.0, -5.0]);
        assert!((r.gap - 10.0).abs() < 1e-12);
    }

    #[test]
    fn inner_cap_is_reported() {
        let g = l1_identity(2, 1.0);
        let id = DiagonalMetric::identity(2);
        let opts = InnerOptions {
            max_iter: 0,
            extrapolation: None,
        };
        match inexact_prox(&[5.0, -5.0], 1.0, &id, &g, 1e-3, None, &opts) {
            Err(Error::InnerCapExceeded { best_gap, .. }) => assert!((best_gap - 10.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }
}
