//! How the tolerance schedule of the proximal steps trades inner iterations for accuracy.

use sagefista::data::{reference_config, reference_solution, simulate_acquisition, ExperimentSpec, Phantom, Source};
use sagefista::problems::WeightedL2Denoise;
use sagefista::prox::InnerOptions;
use sagefista::solver::{solve, EpsilonMode, SolverConfig};

fn main() -> sagefista::Result<()> {
    let spec = ExperimentSpec {
        source: Source::Phantom(Phantom::Moon),
        scale: 24,
        intensity_range: (0.0, 20.0),
        sigma_psf: 0.0,
        background: 0.01,
        seed: 3,
    };
    let z = simulate_acquisition(&spec.ground_truth()?, &spec)?;
    let model = WeightedL2Denoise::new(z.clone(), spec.background, 0.15, true)?;
    let problem = model.problem();
    let base = SolverConfig {
        rho: 0.8,
        l0: 30.0,
        t0: 1.01,
        mu_f: model.smooth().sigma_f(),
        max_outer: 200,
        inner: InnerOptions {
            max_iter: 20_000,
            ..InnerOptions::default()
        },
        ..SolverConfig::default()
    };
    let reference = reference_solution(&problem, &reference_config(&base), &z.pixels)?;

    let modes = [
        EpsilonMode::Exact,
        EpsilonMode::theta_adaptive(),
        EpsilonMode::QuadraticSchedule { scale: 1.0, a: 0.5, exponent: 2.1 },
        EpsilonMode::GeometricSquared { scale: 1.0, a: 0.4, b: 0.99 },
        EpsilonMode::Geometric { scale: 1.0, a: 0.9 },
    ];
    for eps_mode in modes {
        let config = SolverConfig { eps_mode, ..base.clone() };
        config.validate()?;
        let mut out = solve(&problem, &config, &z.pixels)?;
        out.trace.set_reference(reference.f_value)?;
        println!(
            "{:20} eF_200={:.2e}  inner iterations={:6}  last eps={:.1e}",
            eps_mode.name(),
            out.trace.last().unwrap().rel_error,
            out.trace.total_inner_iters(),
            out.trace.last().unwrap().eps
        );
    }
    Ok(())
}
