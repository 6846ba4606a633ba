//! Weighted least-squares plus TV denoising under Poisson noise.

use std::sync::Arc;

use super::{ratio_metric, CompositeProblem, Gradient2d, SmoothPart};
use crate::error::{check_len, Error, Result};
use crate::image::Image;
use crate::metric::{BoxSet, DiagonalMetric};
use crate::operator::LinearOperator;
use crate::prox::{BlockNorm, NormBlock, Psi, StructuredNonsmooth};

/// `f(x) = sum_i (x_i - z_i + b)^2 / (2 (z_i + b))`
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedL2 {
    z: Vec<f64>,
    b: f64,
    use_strong_convexity: bool,
}

impl WeightedL2 {
    pub fn new(z: Vec<f64>, b: f64, use_strong_convexity: bool) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::config("b", format!("background must be positive, got {b}")));
        }
        if z.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Domain("data must be finite and nonnegative".into()));
        }
        Ok(Self {
            z,
            b,
            use_strong_convexity,
        })
    }

    /// `1 / (max z + b)`
    pub fn sigma_f(&self) -> f64 {
        1.0 / (crate::linalg::max(&self.z) + self.b)
    }

    /// `1 / (min z + b)`
    pub fn lipschitz_constant(&self) -> f64 {
        1.0 / (crate::linalg::min(&self.z) + self.b)
    }
}

pub fn wl2_f_value(x: &[f64], f: &WeightedL2) -> Result<f64> {
    check_len(f.z.len(), x.len())?;
    Ok(0.5
        * x.iter()
            .zip(&f.z)
            .map(|(x, z)| {
                let r = x - z + f.b;
                r * r / (z + f.b)
            })
            .sum::<f64>())
}

pub fn wl2_f_grad(x: &[f64], f: &WeightedL2) -> Result<Vec<f64>> {
    let mut g = vec![0.0; x.len()];
    f.gradient(x, &mut g)?;
    Ok(g)
}

impl SmoothPart for WeightedL2 {
    fn len(&self) -> usize {
        self.z.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        wl2_f_value(x, self)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.z.len(), x.len())?;
        for ((o, x), z) in out.iter_mut().zip(x).zip(&self.z) {
            *o = (x - z + self.b) / (z + self.b);
        }
        Ok(())
    }

    fn bregman(&self, x: &[f64], y: &[f64], _: f64, _: f64, _: &[f64]) -> Result<f64> {
        check_len(self.z.len(), x.len())?;
        check_len(self.z.len(), y.len())?;
        Ok(0.5
            * x.iter()
                .zip(y)
                .zip(&self.z)
                .map(|((a, b), z)| (a - b) * (a - b) / (z + self.b))
                .sum::<f64>())
    }

    fn strong_convexity(&self) -> f64 {
        if self.use_strong_convexity {
            self.sigma_f()
        } else {
            0.0
        }
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.lipschitz_constant())
    }

    /// Depends only on the data: `z + b`.
    fn split_ratio(&self, _y: &[f64]) -> Option<Vec<f64>> {
        Some(self.z.iter().map(|z| z + self.b).collect())
    }
}

/// `diag(clamp(z + b, 1/gamma, gamma))^{-1}`
pub fn build_wl2_metric(z: &[f64], b: f64, gamma: f64) -> Result<DiagonalMetric> {
    let ratio: Vec<f64> = z.iter().map(|v| v + b).collect();
    ratio_metric(&ratio, gamma)
}

/// `min_x f(x) + lambda TV(x) + iota_{x >= 0}(x)` with `f` the weighted least-squares fit.
#[derive(Debug, Clone)]
pub struct WeightedL2Denoise {
    pub data: Image,
    pub b: f64,
    pub lambda: f64,
    pub use_strong_convexity: bool,
}

impl WeightedL2Denoise {
    pub fn new(data: Image, b: f64, lambda: f64, use_strong_convexity: bool) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::config("lambda", format!("must be positive, got {lambda}")));
        }
        WeightedL2::new(data.pixels.clone(), b, use_strong_convexity)?;
        Ok(Self {
            data,
            b,
            lambda,
            use_strong_convexity,
        })
    }

    pub fn smooth(&self) -> WeightedL2 {
        WeightedL2 {
            z: self.data.pixels.clone(),
            b: self.b,
            use_strong_convexity: self.use_strong_convexity,
        }
    }

    pub fn nonsmooth(&self) -> StructuredNonsmooth {
        let grad: Arc<dyn LinearOperator> = Arc::new(Gradient2d::new(self.data.rows, self.data.cols));
        let block = NormBlock::new(self.lambda, BlockNorm::GroupL2 { group: 2 }, grad)
            .expect("gradient range is a multiple of 2");
        StructuredNonsmooth::new(vec![block], Psi::indicator(BoxSet::nonnegative()))
    }

    pub fn problem(&self) -> CompositeProblem {
        CompositeProblem::new(Arc::new(self.smooth()), self.nonsmooth())
            .expect("dimensions agree by construction")
    }

    /// The fixed Newton-type metric `diag(z + b)^{-1}`.
    pub fn constant_metric(&self) -> Result<DiagonalMetric> {
        DiagonalMetric::from_weights(self.data.pixels.iter().map(|z| 1.0 / (z + self.b)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_and_gradient_examples() {
        let f = WeightedL2::new(vec![0.0], 1.0, false).unwrap();
        assert!((f.value(&[1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(wl2_f_grad(&[1.0], &f).unwrap(), vec![2.0]);
        let f = WeightedL2::new(vec![3.0, 5.0], 1.0, true).unwrap();
        assert_eq!(f.value(&[2.0, 4.0]).unwrap(), 0.0);
        assert_eq!(wl2_f_grad(&[2.0, 4.0], &f).unwrap(), vec![0.0, 0.0]);
        assert!((f.strong_convexity() - 1.0 / 6.0).abs() < 1e-15);
        assert!((f.lipschitz().unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn metric_examples() {
        let m = build_wl2_metric(&[3.0, 0.1, 50.0], 1.0, 1.0).unwrap();
        assert_eq!(m.weights(), &[1.0, 1.0, 1.0]);
        let m = build_wl2_metric(&[3.0], 1.0, 10.0).unwrap();
        assert!((m.weights()[0] - 0.25).abs() < 1e-15);
        assert_eq!(m.eta_inf(), 0.1);
        assert_eq!(m.eta_sup(), 10.0);
    }
}
