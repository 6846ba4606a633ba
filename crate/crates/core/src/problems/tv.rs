//! Forward-difference image gradient with reflexive boundaries.

use crate::operator::LinearOperator;

/// `x -> (d_rows x, d_cols x)` stored as interleaved pairs per pixel.
///
/// Differences that would leave the image are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gradient2d {
    pub rows: usize,
    pub cols: usize,
}

impl Gradient2d {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    fn pixels(&self) -> usize {
        self.rows * self.cols
    }
}

impl LinearOperator for Gradient2d {
    fn input_len(&self) -> usize {
        self.pixels()
    }

    fn output_len(&self) -> usize {
        2 * self.pixels()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let (r, c) = (self.rows, self.cols);
        for i in 0..r {
            let row = &x[i * c..(i + 1) * c];
            let dst = &mut out[2 * i * c..2 * (i + 1) * c];
            if i + 1 < r {
                let next = &x[(i + 1) * c..(i + 2) * c];
                for ((d, a), b) in dst.chunks_exact_mut(2).zip(row).zip(next) {
                    d[0] = b - a;
                }
            } else {
                dst.chunks_exact_mut(2).for_each(|d| d[0] = 0.0);
            }
            for (d, pair) in dst.chunks_exact_mut(2).zip(row.windows(2)) {
                d[1] = pair[1] - pair[0];
            }
            dst[2 * c - 1] = 0.0;
        }
    }

    fn adjoint(&self, w: &[f64], out: &mut [f64]) {
        let (r, c) = (self.rows, self.cols);
        for i in 0..r {
            let src = &w[2 * i * c..2 * (i + 1) * c];
            let dst = &mut out[i * c..(i + 1) * c];
            let mut left = 0.0;
            for (o, p) in dst.iter_mut().zip(src.chunks_exact(2)) {
                *o = left - p[1];
                left = p[1];
            }
            dst[c - 1] += src[2 * c - 1];
            if i + 1 < r {
                dst.iter_mut().zip(src.chunks_exact(2)).for_each(|(o, p)| *o -= p[0]);
            }
            if i > 0 {
                let above = &w[2 * (i - 1) * c..2 * i * c];
                dst.iter_mut().zip(above.chunks_exact(2)).for_each(|(o, p)| *o += p[0]);
            }
        }
    }

    fn norm_sq_bound(&self) -> f64 {
        8.0
    }
}

/// Per-pixel gradient pairs.
pub fn grad_op(x: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    Gradient2d::new(rows, cols).apply_vec(x)
}

/// Adjoint of [`grad_op`] (the negative discrete divergence).
pub fn div_adjoint(w: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    Gradient2d::new(rows, cols).adjoint_vec(w)
}

/// Isotropic total variation `lambda * sum_i ||grad_i x||_2`.
pub fn tv_value(x: &[f64], rows: usize, cols: usize, lambda: f64) -> f64 {
    let g = grad_op(x, rows, cols);
    lambda
        * g.chunks_exact(2)
            .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        assert_eq!(tv_value(&[3.0; 12], 3, 4, 1.0), 0.0);
        assert!((tv_value(&[0.0, 1.0, 0.0, 1.0], 2, 2, 1.0) - 2.0).abs() < 1e-15);
        let x = [0.3, -1.0, 2.0, 0.5, 0.0, 4.0];
        let scaled: Vec<f64> = x.iter().map(|v| -2.5 * v).collect();
        assert!((tv_value(&scaled, 2, 3, 0.7) - 2.5 * tv_value(&x, 2, 3, 0.7)).abs() < 1e-12);
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        assert!(grad_op(&[1.5; 20], 4, 5).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn norm_bound_holds_on_16x16() {
        let op = Gradient2d::new(16, 16);
        let est = crate::operator::power_iteration_norm_sq(&op, 500, 3);
        assert!(est <= 8.0 && est > 7.0, "{est}");
    }

    #[test]
    fn adjoint_matches_apply() {
        let (r, c) = (3, 5);
        let x: Vec<f64> = (0..r * c).map(|i| ((i * 7) % 11) as f64 - 4.0).collect();
        let w: Vec<f64> = (0..2 * r * c).map(|i| ((i * 5) % 13) as f64 * 0.3 - 1.0).collect();
        let lhs = crate::linalg::dot(&grad_op(&x, r, c), &w);
        let rhs = crate::linalg::dot(&x, &div_adjoint(&w, r, c));
        assert!((lhs - rhs).abs() < 1e-12, "{lhs} {rhs}");
    }
}
