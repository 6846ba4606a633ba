//! Seeded Poisson acquisition model `z ~ Poisson(Hx + b)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// One Poisson draw per mean, deterministic for a given seed.
pub fn poisson_sample(means: &[f64], seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    means
        .iter()
        .map(|&m| {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::Domain(format!("Poisson mean must be finite and nonnegative, got {m}")));
            }
            if m == 0.0 {
                return Ok(0.0);
            }
            let d = Poisson::new(m).map_err(|e| Error::Domain(e.to_string()))?;
            Ok(d.sample(&mut rng))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mean_gives_zero_counts() {
        assert!(poisson_sample(&[0.0; 50], 1).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn negative_mean_is_rejected() {
        assert!(poisson_sample(&[1.0, -0.5], 1).is_err());
    }
}
