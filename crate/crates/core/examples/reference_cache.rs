//! Reference solutions are cached on disk under a content hash of the problem data.
//!
//! `cargo run --example reference_cache -- [cache_dir]`

use std::time::Instant;

use sagefista::data::reference::{content_key, f64_bytes};
use sagefista::data::{reference_config, reference_solution, simulate_acquisition, ExperimentSpec, Phantom, ReferenceCache, Source};
use sagefista::problems::WeightedL2Denoise;
use sagefista::solver::SolverConfig;

fn main() -> sagefista::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "reference-cache".into());
    let spec = ExperimentSpec {
        source: Source::Phantom(Phantom::Moon),
        scale: 16,
        intensity_range: (0.0, 20.0),
        sigma_psf: 0.0,
        background: 0.01,
        seed: 7,
    };
    let z = simulate_acquisition(&spec.ground_truth()?, &spec)?;
    let problem = WeightedL2Denoise::new(z.clone(), spec.background, 0.15, false)?.problem();
    let config = reference_config(&SolverConfig { l0: 30.0, ..SolverConfig::default() });

    let key = content_key(&[b"moon-16", &f64_bytes(&z.pixels), &f64_bytes(&[0.15, spec.background, config.l0])]);
    let cache = ReferenceCache::new(&dir);
    for attempt in 1..=2 {
        let start = Instant::now();
        let r = cache.get_or_compute(&key, || reference_solution(&problem, &config, &z.pixels))?;
        println!("attempt {attempt}: F* = {:.15}  ({:.2?})", r.f_value, start.elapsed());
    }
    println!("cache file: {}", cache.path_for(&key).display());
    Ok(())
}
