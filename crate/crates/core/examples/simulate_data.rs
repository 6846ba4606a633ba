//! Phantoms, Gaussian blur and seeded Poisson noise, written out as PGM files.
//!
//! `cargo run --example simulate_data -- [out_dir]`

use std::path::PathBuf;

use sagefista::data::{simulate_acquisition, write_pgm_normalized, ExperimentSpec, Phantom, Source};

fn main() -> sagefista::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "simulated".into()));
    std::fs::create_dir_all(&dir)?;
    for (phantom, range, sigma, b) in [
        (Phantom::Moon, (0.0, 20.0), 0.0, 0.01),
        (Phantom::SheppLogan, (0.0, 1.0), 1.4, 0.01),
        (Phantom::Cells, (0.0, 92.0), 3.2, 0.5),
    ] {
        let spec = ExperimentSpec {
            source: Source::Phantom(phantom),
            scale: 64,
            intensity_range: range,
            sigma_psf: sigma,
            background: b,
            seed: 7,
        };
        let truth = spec.ground_truth()?;
        let noisy = simulate_acquisition(&truth, &spec)?;
        let (lo, hi) = noisy.min_max();
        println!("{:12} counts in [{lo}, {hi}], mean {:.3}", phantom.name(), noisy.pixels.iter().sum::<f64>() / noisy.len() as f64);
        write_pgm_normalized(&dir.join(format!("{}_truth.pgm", phantom.name())), &truth)?;
        write_pgm_normalized(&dir.join(format!("{}_noisy.pgm", phantom.name())), &noisy)?;
    }
    println!("wrote images to {}", dir.display());
    Ok(())
}
