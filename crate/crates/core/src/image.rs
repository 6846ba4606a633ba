use crate::error::{check_len, Error, Result};

/// A single-channel row-major image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

impl Image {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, pixels.len())?;
        Ok(Self { rows, cols, pixels })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            pixels: vec![value; rows * cols],
        }
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.cols + c]
    }

    pub fn min_max(&self) -> (f64, f64) {
        (crate::linalg::min(&self.pixels), crate::linalg::max(&self.pixels))
    }

    /// Affine map of the pixel range onto `[lo, hi]`; a flat image maps to `lo`.
    pub fn rescaled(&self, lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo && lo >= 0.0) {
            return Err(Error::config("range", format!("need hi > lo >= 0, got [{lo}, {hi}]")));
        }
        let (a, b) = self.min_max();
        let span = b - a;
        let pixels = self
            .pixels
            .iter()
            .map(|v| if span > 0.0 { lo + (v - a) / span * (hi - lo) } else { lo })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            pixels,
        })
    }

    /// Area-averaging resample to `rows x cols`.
    pub fn resized(&self, rows: usize, cols: usize) -> Self {
        if rows == self.rows && cols == self.cols {
            return self.clone();
        }
        let mut pixels = vec![0.0; rows * cols];
        let sr = self.rows as f64 / rows as f64;
        let sc = self.cols as f64 / cols as f64;
        for i in 0..rows {
            let r0 = (i as f64 * sr).floor() as usize;
            let r1 = (((i + 1) as f64 * sr).ceil() as usize).clamp(r0 + 1, self.rows);
            for j in 0..cols {
                let c0 = (j as f64 * sc).floor() as usize;
                let c1 = (((j + 1) as f64 * sc).ceil() as usize).clamp(c0 + 1, self.cols);
                let mut acc = 0.0;
                for r in r0..r1 {
                    for c in c0..c1 {
                        acc += self.at(r, c);
                    }
                }
                pixels[i * cols + j] = acc / ((r1 - r0) * (c1 - c0)) as f64;
            }
        }
        Self { rows, cols, pixels }
    }
}
