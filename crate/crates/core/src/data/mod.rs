//! Synthetic acquisitions and reference solutions.

pub mod pgm;
pub mod phantom;
pub mod poisson;
pub mod reference;

use std::path::PathBuf;

pub use pgm::{read_pgm, write_pgm, write_pgm_normalized};
pub use phantom::Phantom;
pub use poisson::poisson_sample;
pub use reference::{reference_config, reference_solution, ReferenceCache};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::operator::LinearOperator;
use crate::problems::{default_psf_size, gaussian_psf, Convolution};

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Phantom(Phantom),
    File(PathBuf),
}

impl Source {
    /// A phantom name, or anything else as a PGM path.
    pub fn parse(s: &str) -> Self {
        match Phantom::from_name(s) {
            Ok(p) => Source::Phantom(p),
            Err(_) => Source::File(PathBuf::from(s)),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Source::Phantom(p) => p.name().to_string(),
            Source::File(p) => p.display().to_string(),
        }
    }
}

/// How a noisy observation is simulated.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: Source,
    /// Number of rows of the working grid.
    pub scale: usize,
    pub intensity_range: (f64, f64),
    pub sigma_psf: f64,
    pub background: f64,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.intensity_range;
        if !(hi > lo && lo >= 0.0) {
            return Err(Error::config("range", format!("need hi > lo >= 0, got [{lo}, {hi}]")));
        }
        if self.scale < 8 {
            return Err(Error::config("scale", format!("must be at least 8, got {}", self.scale)));
        }
        if !(self.sigma_psf >= 0.0 && self.sigma_psf.is_finite()) {
            return Err(Error::config("sigma_psf", format!("must be nonnegative, got {}", self.sigma_psf)));
        }
        if !(self.background > 0.0 && self.background.is_finite()) {
            return Err(Error::config("b", format!("must be positive, got {}", self.background)));
        }
        if let Source::File(p) = &self.source {
            if !p.exists() {
                return Err(Error::config("input", format!("file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Ground truth resampled to the working grid and mapped onto the intensity range.
    pub fn ground_truth(&self) -> Result<Image> {
        self.validate()?;
        let base = match &self.source {
            Source::Phantom(p) => p.render(self.scale),
            Source::File(path) => {
                let img = read_pgm(path)?;
                let cols = ((self.scale as f64) * img.cols as f64 / img.rows as f64).round().max(1.0) as usize;
                img.resized(self.scale, cols)
            }
        };
        let (lo, hi) = self.intensity_range;
        base.rescaled(lo, hi)
    }

    pub fn blur(&self, rows: usize, cols: usize) -> Result<Convolution> {
        let psf = gaussian_psf(self.sigma_psf, default_psf_size(self.sigma_psf))?;
        Convolution::new(rows, cols, psf)
    }
}

/// `z ~ Poisson(H x + b)` with the blur and background of `spec`.
pub fn simulate_acquisition(ground_truth: &Image, spec: &ExperimentSpec) -> Result<Image> {
    if ground_truth.pixels.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain("ground truth must be nonnegative".into()));
    }
    let h = spec.blur(ground_truth.rows, ground_truth.cols)?;
    let mut mean = h.apply_vec(&ground_truth.pixels);
    mean.iter_mut().for_each(|m| *m += spec.background);
    let counts = poisson_sample(&mean, spec.seed)?;
    Image::new(ground_truth.rows, ground_truth.cols, counts)
}
