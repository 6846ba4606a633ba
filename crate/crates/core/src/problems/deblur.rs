//! Kullback-Leibler plus TV deblurring with a small quadratic perturbation.

use std::sync::Arc;

use super::{ratio_metric, CompositeProblem, Convolution, Gradient2d, SmoothPart};
use crate::error::{check_len, Error, Result};
use crate::image::Image;
use crate::metric::{BoxSet, DiagonalMetric};
use crate::operator::LinearOperator;
use crate::prox::{BlockNorm, NormBlock, Psi, StructuredNonsmooth};

/// `f(x) = KL(Hx + b; z) = sum_i z_i log(z_i / (Hx + b)_i) + (Hx + b)_i - z_i`
#[derive(Debug, Clone)]
pub struct KlDivergence {
    z: Vec<f64>,
    b: f64,
    blur: Arc<Convolution>,
}

impl KlDivergence {
    pub fn new(z: Vec<f64>, b: f64, blur: Arc<Convolution>) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::config("b", format!("background must be positive, got {b}")));
        }
        check_len(blur.input_len(), z.len())?;
        if z.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain("data must be finite and nonnegative".into()));
        }
        if blur.kernel().sum() <= 0.0 || blur.column_sums().iter().any(|c| *c <= 0.0) {
            return Err(Error::Domain("blur needs positive row and column sums".into()));
        }
        Ok(Self { z, b, blur })
    }

    pub fn blur(&self) -> &Convolution {
        &self.blur
    }

    /// `Hx + b`, rejecting nonpositive entries.
    fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.z.len(), x.len())?;
        let mut w = self.blur.apply_vec(x);
        for v in w.iter_mut() {
            *v += self.b;
            if !(*v > 0.0) {
                return Err(Error::Domain("blurred estimate plus background must stay positive".into()));
            }
        }
        Ok(w)
    }

    /// `(max z / b^2) max(H^T e) max(H e)`
    pub fn lipschitz_overestimate(&self) -> f64 {
        let zmax = crate::linalg::max(&self.z);
        zmax / (self.b * self.b)
            * crate::linalg::max(self.blur.column_sums())
            * crate::linalg::max(&self.blur.row_sums())
    }
}

/// `u - log(1 + u)`, by its Taylor series near zero.
fn u_minus_log1p(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        let mut term = u * u;
        let mut sum = 0.0;
        for k in 2..10 {
            sum += term / k as f64;
            term *= -u;
        }
        sum
    } else {
        u - u.ln_1p()
    }
}

pub fn kl_value(x: &[f64], f: &KlDivergence) -> Result<f64> {
    let w = f.forward(x)?;
    Ok(f.z
        .iter()
        .zip(&w)
        .map(|(z, w)| if *z > 0.0 { z * (z / w).ln() + w - z } else { *w })
        .sum())
}

pub fn kl_grad(x: &[f64], f: &KlDivergence) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    f.gradient(x, &mut g)?;
    Ok(g)
}

impl SmoothPart for KlDivergence {
    fn len(&self) -> usize {
        self.z.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        kl_value(x, self)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let w = self.forward(x)?;
        // H^T e - H^T (z / w) = H^T (1 - z / w)
        let r: Vec<f64> = self.z.iter().zip(&w).map(|(z, w)| 1.0 - z / w).collect();
        self.blur.adjoint(&r, out);
        Ok(())
    }

    /// `sum_i z_i (u_i - log(1 + u_i))` with `u = H(x - y) / (Hy + b)`.
    fn bregman(&self, x: &[f64], y: &[f64], _: f64, _: f64, _: &[f64]) -> Result<f64> {
        check_len(self.z.len(), x.len())?;
        let w_y = self.forward(y)?;
        let hd = self.blur.apply_vec(&crate::linalg::sub(x, y));
        let mut total = 0.0;
        for ((z, d), w) in self.z.iter().zip(&hd).zip(&w_y) {
            if *z == 0.0 {
                continue;
            }
            let u = d / w;
            if !(u > -1.0) {
                return Err(Error::Domain("blurred estimate plus background must stay positive".into()));
            }
            total += z * u_minus_log1p(u);
        }
        Ok(total)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz_overestimate())
    }

    /// `y / (H^T e)`
    fn split_ratio(&self, y: &[f64]) -> Option<Vec<f64>> {
        Some(y.iter().zip(self.blur.column_sums()).map(|(y, v)| y / v).collect())
    }
}

/// `diag(clamp(y / (H^T e), 1/gamma, gamma))^{-1}`
pub fn build_kl_metric(y: &[f64], blur: &Convolution, gamma: f64) -> Result<DiagonalMetric> {
    check_len(blur.input_len(), y.len())?;
    let ratio: Vec<f64> = y.iter().zip(blur.column_sums()).map(|(y, v)| y / v).collect();
    ratio_metric(&ratio, gamma)
}

/// `min_x KL(Hx + b; z) + lambda TV(x) + (eps_q / 2) ||x||^2 + iota_{x >= 0}(x)`
#[derive(Debug, Clone)]
pub struct KlTvDeblur {
    pub data: Image,
    pub b: f64,
    pub blur: Arc<Convolution>,
    pub lambda: f64,
    pub eps_q: f64,
}

impl KlTvDeblur {
    pub fn new(data: Image, b: f64, blur: Convolution, lambda: f64, eps_q: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::config("lambda", format!("must be positive, got {lambda}")));
        }
        if !(eps_q >= 0.0 && eps_q.is_finite()) {
            return Err(Error::config("eps_q", format!("must be nonnegative, got {eps_q}")));
        }
        if blur.rows() != data.rows || blur.cols() != data.cols {
            return Err(Error::ShapeMismatch {
                expected: data.len(),
                found: blur.input_len(),
            });
        }
        let blur = Arc::new(blur);
        KlDivergence::new(data.pixels.clone(), b, blur.clone())?;
        Ok(Self {
            data,
            b,
            blur,
            lambda,
            eps_q,
        })
    }

    pub fn smooth(&self) -> KlDivergence {
        KlDivergence {
            z: self.data.pixels.clone(),
            b: self.b,
            blur: self.blur.clone(),
        }
    }

    pub fn mu_g(&self) -> f64 {
        self.eps_q
    }

    pub fn nonsmooth(&self) -> StructuredNonsmooth {
        let grad: Arc<dyn LinearOperator> = Arc::new(Gradient2d::new(self.data.rows, self.data.cols));
        let block = NormBlock::new(self.lambda, BlockNorm::GroupL2 { group: 2 }, grad)
            .expect("gradient range is a multiple of 2");
        StructuredNonsmooth::new(
            vec![block],
            Psi {
                set: BoxSet::nonnegative(),
                eps_q: self.eps_q,
            },
        )
    }

    pub fn problem(&self) -> CompositeProblem {
        CompositeProblem::new(Arc::new(self.smooth()), self.nonsmooth())
            .expect("dimensions agree by construction")
    }
}
