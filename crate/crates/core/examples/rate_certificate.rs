//! Checks the function-value rate bound and the theta bounds along a run, then fits the
//! observed linear and sublinear rates.

use sagefista::data::{reference_config, reference_solution, simulate_acquisition, ExperimentSpec, Phantom, Source};
use sagefista::harness::rate_report;
use sagefista::problems::WeightedL2Denoise;
use sagefista::solver::{solve, EpsilonMode, SolverConfig};

fn main() -> sagefista::Result<()> {
    let spec = ExperimentSpec {
        source: Source::Phantom(Phantom::Moon),
        scale: 32,
        intensity_range: (0.0, 20.0),
        sigma_psf: 0.0,
        background: 0.01,
        seed: 7,
    };
    let z = simulate_acquisition(&spec.ground_truth()?, &spec)?;
    let model = WeightedL2Denoise::new(z.clone(), spec.background, 0.15, true)?;
    let problem = model.problem();
    let l_f = model.smooth().lipschitz_constant();
    let base = SolverConfig {
        rho: 0.8,
        l0: 30.0,
        t0: 1.01,
        max_outer: 300,
        eps_mode: EpsilonMode::theta_adaptive(),
        ..SolverConfig::default()
    };
    let reference = reference_solution(&problem, &reference_config(&base), &z.pixels)?;

    for (label, mu_f) in [("strongly convex", model.smooth().sigma_f()), ("mu = 0", 0.0)] {
        let config = SolverConfig { mu_f, ..base.clone() };
        let mut out = solve(&problem, &config, &z.pixels)?;
        out.trace.set_reference(reference.f_value)?;
        let report = rate_report(&out, &config, Some(l_f), &reference)?;
        println!("== {label}");
        print!("{}", report.render());
        let worst = report.certificate.rows.iter().map(|r| r.excess / r.rhs).fold(0.0, f64::max);
        println!("largest excess / bound = {worst:.3e}\n");
    }
    Ok(())
}
