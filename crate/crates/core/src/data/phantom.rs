//! Synthetic ground-truth images.

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phantom {
    /// Piecewise-constant head phantom built from ellipses.
    SheppLogan,
    /// Smooth Gaussian blobs, cell-like.
    Cells,
    /// Bright disc with darker craters.
    Moon,
}

impl Phantom {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "shepp-logan" | "phantom" => Ok(Phantom::SheppLogan),
            "cells" | "micro" => Ok(Phantom::Cells),
            "moon" => Ok(Phantom::Moon),
            other => Err(Error::config("source", format!("unknown phantom `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Phantom::SheppLogan => "shepp-logan",
            Phantom::Cells => "cells",
            Phantom::Moon => "moon",
        }
    }

    /// Renders the phantom on an `n x n` grid with values in `[0, 1]`.
    pub fn render(&self, n: usize) -> Image {
        match self {
            Phantom::SheppLogan => shepp_logan(n),
            Phantom::Cells => cells(n),
            Phantom::Moon => moon(n),
        }
    }
}

fn coords(n: usize, i: usize) -> f64 {
    // pixel centres in [-1, 1]
    (2.0 * i as f64 + 1.0) / n as f64 - 1.0
}

/// Modified Shepp-Logan phantom.
pub fn shepp_logan(n: usize) -> Image {
    // (intensity, a, b, x0, y0, angle in degrees)
    const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
        (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
        (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
        (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
        (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
        (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
        (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
        (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
        (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
        (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
        (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
    ];
    let mut pixels = vec![0.0; n * n];
    for r in 0..n {
        let y = -coords(n, r);
        for c in 0..n {
            let x = coords(n, c);
            let mut v = 0.0;
            for &(a0, a, b, x0, y0, deg) in &ELLIPSES {
                let th = deg.to_radians();
                let (dx, dy) = (x - x0, y - y0);
                let u = dx * th.cos() + dy * th.sin();
                let w = -dx * th.sin() + dy * th.cos();
                if (u / a).powi(2) + (w / b).powi(2) <= 1.0 {
                    v += a0;
                }
            }
            pixels[r * n + c] = v;
        }
    }
    Image { rows: n, cols: n, pixels }.rescaled(0.0, 1.0).expect("valid range")
}

/// Sum of anisotropic Gaussian blobs at fixed positions.
pub fn cells(n: usize) -> Image {
    const BLOBS: [(f64, f64, f64, f64, f64); 7] = [
        (-0.45, -0.40, 0.18, 0.12, 1.0),
        (0.35, -0.50, 0.10, 0.16, 0.8),
        (0.05, 0.05, 0.22, 0.20, 0.6),
        (-0.55, 0.45, 0.12, 0.12, 0.9),
        (0.55, 0.35, 0.15, 0.09, 0.7),
        (0.20, 0.70, 0.07, 0.07, 1.0),
        (-0.10, -0.75, 0.08, 0.05, 0.5),
    ];
    let mut pixels = vec![0.0; n * n];
    for r in 0..n {
        let y = coords(n, r);
        for c in 0..n {
            let x = coords(n, c);
            pixels[r * n + c] = BLOBS
                .iter()
                .map(|&(cx, cy, sx, sy, amp)| {
                    amp * (-0.5 * (((x - cx) / sx).powi(2) + ((y - cy) / sy).powi(2))).exp()
                })
                .sum();
        }
    }
    Image { rows: n, cols: n, pixels }.rescaled(0.0, 1.0).expect("valid range")
}

/// A shaded disc with a few darker craters on a black sky.
pub fn moon(n: usize) -> Image {
    const CRATERS: [(f64, f64, f64, f64); 5] = [
        (-0.30, -0.25, 0.22, 0.45),
        (0.35, 0.10, 0.15, 0.35),
        (0.05, 0.45, 0.18, 0.40),
        (-0.15, 0.25, 0.08, 0.30),
        (0.30, -0.45, 0.10, 0.50),
    ];
    let mut pixels = vec![0.0; n * n];
    for r in 0..n {
        let y = coords(n, r);
        for c in 0..n {
            let x = coords(n, c);
            let rho2 = x * x + y * y;
            if rho2 > 0.81 {
                continue;
            }
            let mut v = 0.6 + 0.4 * (1.0 - rho2 / 0.81).sqrt();
            for &(cx, cy, rad, depth) in &CRATERS {
                if (x - cx).powi(2) + (y - cy).powi(2) <= rad * rad {
                    v *= 1.0 - depth;
                }
            }
            pixels[r * n + c] = v;
        }
    }
    Image { rows: n, cols: n, pixels }.rescaled(0.0, 1.0).expect("valid range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phantoms_span_unit_range() {
        for p in [Phantom::SheppLogan, Phantom::Cells, Phantom::Moon] {
            let img = p.render(32);
            let (lo, hi) = img.min_max();
            assert_eq!((lo, hi), (0.0, 1.0), "{}", p.name());
            assert_eq!(Phantom::from_name(p.name()).unwrap(), p);
        }
    }
}
