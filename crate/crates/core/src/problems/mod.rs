//! Smooth parts, composite problems and the two Poisson restoration models.

pub mod convolution;
pub mod deblur;
pub mod denoise;
pub mod tv;

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::metric::DiagonalMetric;
use crate::prox::StructuredNonsmooth;

pub use convolution::{convolve, convolve_adjoint, default_psf_size, gaussian_psf, Convolution, Kernel};
pub use deblur::{build_kl_metric, kl_grad, kl_value, KlDivergence, KlTvDeblur};
pub use denoise::{build_wl2_metric, wl2_f_grad, wl2_f_value, WeightedL2, WeightedL2Denoise};
pub use tv::{div_adjoint, grad_op, tv_value, Gradient2d};

/// Differentiable convex part `f` of a composite objective.
pub trait SmoothPart: Debug + Send + Sync {
    fn len(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; self.len()];
        self.gradient(x, &mut g)?;
        Ok((self.value(x)?, g))
    }

    /// Bregman distance `f(x) - f(y) - <grad f(y), x - y>`.
    ///
    /// The default evaluates the definition and returns 0 when the result is below
    /// the rounding error of its terms.
    fn bregman(&self, x: &[f64], y: &[f64], f_x: f64, f_y: f64, grad_y: &[f64]) -> Result<f64> {
        check_len(self.len(), x.len())?;
        check_len(self.len(), y.len())?;
        let lin: f64 = grad_y.iter().zip(x.iter().zip(y)).map(|(g, (a, b))| g * (a - b)).sum();
        let d = f_x - f_y - lin;
        let noise = 4.0 * f64::EPSILON * (f_x.abs() + f_y.abs() + lin.abs());
        Ok(if d.abs() <= noise { 0.0 } else { d })
    }

    /// Strong convexity modulus of `f` (0 if unknown).
    fn strong_convexity(&self) -> f64 {
        0.0
    }

    /// A Lipschitz constant of the gradient on the feasible set, if known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Split-gradient ratio `y / V(y)` where `-grad f = U - V` with `V > 0`.
    fn split_ratio(&self, _y: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

/// `F = f + g`
#[derive(Debug, Clone)]
pub struct CompositeProblem {
    pub smooth: Arc<dyn SmoothPart>,
    pub nonsmooth: StructuredNonsmooth,
}

impl CompositeProblem {
    pub fn new(smooth: Arc<dyn SmoothPart>, nonsmooth: StructuredNonsmooth) -> Result<Self> {
        let n = smooth.len();
        for b in &nonsmooth.blocks {
            check_len(n, b.op.input_len())?;
        }
        nonsmooth.psi.set.check_dim(n)?;
        Ok(Self { smooth, nonsmooth })
    }

    pub fn len(&self) -> usize {
        self.smooth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `F(x)`; `+inf` outside the domain of `g`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let g = self.nonsmooth.value(x);
        if g.is_infinite() {
            return Ok(g);
        }
        Ok(self.smooth.value(x)? + g)
    }
}

/// `f(x) = sum_i d_i (x_i - c_i)^2 / 2`
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    diag: Vec<f64>,
    center: Vec<f64>,
}

impl Quadratic {
    pub fn new(diag: Vec<f64>, center: Vec<f64>) -> Result<Self> {
        check_len(diag.len(), center.len())?;
        if diag.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::Domain("curvatures must be nonnegative".into()));
        }
        Ok(Self { diag, center })
    }
}

impl SmoothPart for Quadratic {
    fn len(&self) -> usize {
        self.diag.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_len(self.len(), x.len())?;
        Ok(0.5
            * x.iter()
                .zip(&self.center)
                .zip(&self.diag)
                .map(|((x, c), d)| d * (x - c) * (x - c))
                .sum::<f64>())
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.len(), x.len())?;
        for (o, ((x, c), d)) in out.iter_mut().zip(x.iter().zip(&self.center).zip(&self.diag)) {
            *o = d * (x - c);
        }
        Ok(())
    }

    fn bregman(&self, x: &[f64], y: &[f64], _: f64, _: f64, _: &[f64]) -> Result<f64> {
        check_len(self.len(), x.len())?;
        check_len(self.len(), y.len())?;
        Ok(0.5
            * x.iter()
                .zip(y)
                .zip(&self.diag)
                .map(|((a, b), d)| d * (a - b) * (a - b))
                .sum::<f64>())
    }

    fn strong_convexity(&self) -> f64 {
        crate::linalg::min(&self.diag).max(0.0)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(crate::linalg::max(&self.diag))
    }
}

/// `f(x) = ||A x - b||^2 / 2` for a dense row-major `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LeastSquares {
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, a.len())?;
        check_len(rows, b.len())?;
        Ok(Self { rows, cols, a, b })
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .chunks_exact(self.cols)
            .zip(&self.b)
            .map(|(row, b)| crate::linalg::dot(row, x) - b)
            .collect()
    }

    /// Frobenius bound on `||A^T A||`.
    fn frobenius_sq(&self) -> f64 {
        crate::linalg::norm_sq(&self.a)
    }
}

impl SmoothPart for LeastSquares {
    fn len(&self) -> usize {
        self.cols
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_len(self.cols, x.len())?;
        Ok(0.5 * crate::linalg::norm_sq(&self.residual(x)))
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.cols, x.len())?;
        let r = self.residual(x);
        out.iter_mut().for_each(|v| *v = 0.0);
        for (row, ri) in self.a.chunks_exact(self.cols).zip(&r) {
            crate::linalg::axpy(*ri, row, out);
        }
        Ok(())
    }

    fn bregman(&self, x: &[f64], y: &[f64], _: f64, _: f64, _: &[f64]) -> Result<f64> {
        check_len(self.cols, x.len())?;
        check_len(self.cols, y.len())?;
        let d = crate::linalg::sub(x, y);
        Ok(0.5
            * self
                .a
                .chunks_exact(self.cols)
                .map(|row| crate::linalg::dot(row, &d).powi(2))
                .sum::<f64>())
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.frobenius_sq())
    }
}

/// Clamped inverse of a split-gradient ratio, `diag(clamp(ratio, 1/gamma, gamma))^{-1}`.
pub(crate) fn ratio_metric(ratio: &[f64], gamma: f64) -> Result<DiagonalMetric> {
    if !(gamma >= 1.0) {
        return Err(Error::Domain(format!("threshold must be at least 1, got {gamma}")));
    }
    crate::metric::clamped_inverse_metric(ratio, gamma)
}
