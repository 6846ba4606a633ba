//! Spatially invariant blur with half-sample symmetric boundaries.

use crate::error::{Error, Result};
use crate::operator::LinearOperator;

/// A square, odd-sized, row-major 2-D kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    taps: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size % 2 == 0 {
            return Err(Error::config("psf", format!("kernel size must be odd, got {size}")));
        }
        crate::error::check_len(size * size, taps.len())?;
        if taps.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Domain("kernel taps must be finite and nonnegative".into()));
        }
        Ok(Self { size, taps })
    }

    pub fn delta() -> Self {
        Self {
            size: 1,
            taps: vec![1.0],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn half(&self) -> usize {
        self.size / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn rotated(&self) -> Self {
        let mut taps = self.taps.clone();
        taps.reverse();
        Self {
            size: self.size,
            taps,
        }
    }
}

/// Default support `2 * ceil(3 sigma) + 1`.
pub fn default_psf_size(sigma: f64) -> usize {
    2 * (3.0 * sigma).ceil().max(0.0) as usize + 1
}

/// Sampled isotropic Gaussian normalized to unit sum; `sigma = 0` gives the delta kernel.
pub fn gaussian_psf(sigma: f64, size: usize) -> Result<Kernel> {
    if size % 2 == 0 {
        return Err(Error::config("psf_size", format!("must be odd, got {size}")));
    }
    if sigma == 0.0 {
        let mut taps = vec![0.0; size * size];
        taps[size * size / 2] = 1.0;
        return Kernel::new(size, taps);
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::config("sigma_psf", format!("must be positive, got {sigma}")));
    }
    let h = (size / 2) as f64;
    let mut taps = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let (di, dj) = (i as f64 - h, j as f64 - h);
            taps.push((-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp());
        }
    }
    let s: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= s);
    Kernel::new(size, taps)
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    if i < 0 {
        (-i - 1) as usize
    } else if i >= n {
        (2 * n - 1 - i) as usize
    } else {
        i as usize
    }
}

/// `H x`: correlation of the image with the kernel under reflexive padding.
#[derive(Debug, Clone)]
pub struct Convolution {
    rows: usize,
    cols: usize,
    kernel: Kernel,
    row_idx: Vec<usize>,
    col_idx: Vec<usize>,
    column_sums: Vec<f64>,
}

impl Convolution {
    pub fn new(rows: usize, cols: usize, kernel: Kernel) -> Result<Self> {
        let h = kernel.half();
        if h > rows || h > cols {
            return Err(Error::Domain(format!(
                "kernel of size {} does not fit a {rows}x{cols} image",
                kernel.size()
            )));
        }
        let s = kernel.size();
        // padded index tables: entry (i, a) is the source row of output row i for tap a
        let row_idx = (0..rows)
            .flat_map(|i| (0..s).map(move |a| reflect(i as isize + a as isize - h as isize, rows)))
            .collect();
        let col_idx = (0..cols)
            .flat_map(|j| (0..s).map(move |b| reflect(j as isize + b as isize - h as isize, cols)))
            .collect();
        let mut op = Self {
            rows,
            cols,
            kernel,
            row_idx,
            col_idx,
            column_sums: Vec::new(),
        };
        op.column_sums = op.adjoint_vec(&vec![1.0; rows * cols]);
        Ok(op)
    }

    pub fn identity(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, Kernel::delta()).expect("delta kernel always fits")
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `H^T e`
    pub fn column_sums(&self) -> &[f64] {
        &self.column_sums
    }

    /// `H e`
    pub fn row_sums(&self) -> Vec<f64> {
        self.apply_vec(&vec![1.0; self.rows * self.cols])
    }
}

impl LinearOperator for Convolution {
    fn input_len(&self) -> usize {
        self.rows * self.cols
    }

    fn output_len(&self) -> usize {
        self.rows * self.cols
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let s = self.kernel.size;
        let taps = &self.kernel.taps;
        for i in 0..self.rows {
            let ri = &self.row_idx[i * s..(i + 1) * s];
            for j in 0..self.cols {
                let cj = &self.col_idx[j * s..(j + 1) * s];
                let mut acc = 0.0;
                for (a, &src_r) in ri.iter().enumerate() {
                    let row = &x[src_r * self.cols..(src_r + 1) * self.cols];
                    let kr = &taps[a * s..(a + 1) * s];
                    for (k, &src_c) in kr.iter().zip(cj) {
                        acc += k * row[src_c];
                    }
                }
                out[i * self.cols + j] = acc;
            }
        }
    }

    fn adjoint(&self, w: &[f64], out: &mut [f64]) {
        let s = self.kernel.size;
        let taps = &self.kernel.taps;
        out.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.rows {
            let ri = &self.row_idx[i * s..(i + 1) * s];
            for j in 0..self.cols {
                let cj = &self.col_idx[j * s..(j + 1) * s];
                let wij = w[i * self.cols + j];
                if wij == 0.0 {
                    continue;
                }
                for (a, &src_r) in ri.iter().enumerate() {
                    let kr = &taps[a * s..(a + 1) * s];
                    let base = src_r * self.cols;
                    for (k, &src_c) in kr.iter().zip(cj) {
                        out[base + src_c] += k * wij;
                    }
                }
            }
        }
    }

    /// `||H||^2 <= ||H||_1 ||H||_inf`
    fn norm_sq_bound(&self) -> f64 {
        let col = crate::linalg::max(&self.column_sums);
        let row = crate::linalg::max(&self.row_sums());
        col * row
    }
}

/// `H x`
pub fn convolve(x: &[f64], h: &Convolution) -> Vec<f64> {
    h.apply_vec(x)
}

/// `H^T w`
pub fn convolve_adjoint(w: &[f64], h: &Convolution) -> Vec<f64> {
    h.adjoint_vec(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psf_examples() {
        assert_eq!(gaussian_psf(0.0, 1).unwrap(), Kernel::delta());
        for (s, n) in [(1.4, 9), (3.2, 17)] {
            let k = gaussian_psf(s, n).unwrap();
            assert!((k.sum() - 1.0).abs() < 1e-14);
            for (a, b) in k.taps().iter().zip(k.rotated().taps()) {
                assert!((a - b).abs() < 1e-18);
            }
        }
        assert!(gaussian_psf(-1.0, 5).is_err());
        assert!(gaussian_psf(1.0, 4).is_err());
        assert_eq!(default_psf_size(1.4), 11);
        assert_eq!(default_psf_size(0.0), 1);
    }

    #[test]
    fn identity_and_constants() {
        let x: Vec<f64> = (0..12).map(|v| v as f64 * 0.3).collect();
        assert_eq!(convolve(&x, &Convolution::identity(3, 4)), x);
        let h = Convolution::new(6, 7, gaussian_psf(1.0, 7).unwrap()).unwrap();
        for v in convolve(&[2.5; 42], &h) {
            assert!((v - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn oversized_kernel_is_rejected() {
        assert!(Convolution::new(3, 3, gaussian_psf(2.0, 13).unwrap()).is_err());
    }
}
