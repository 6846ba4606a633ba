//! A deliberately pessimistic initial Lipschitz estimate: monotone Armijo keeps it,
//! adaptive backtracking walks it down.

use sagefista::data::{reference_config, reference_solution, simulate_acquisition, ExperimentSpec, Phantom, Source};
use sagefista::problems::KlTvDeblur;
use sagefista::solver::{solve, EpsilonMode, SolverConfig};

fn main() -> sagefista::Result<()> {
    let spec = ExperimentSpec {
        source: Source::Phantom(Phantom::Cells),
        scale: 32,
        intensity_range: (0.0, 170.0),
        sigma_psf: 3.2,
        background: 0.5,
        seed: 7,
    };
    let z = simulate_acquisition(&spec.ground_truth()?, &spec)?;
    let model = KlTvDeblur::new(z.clone(), spec.background, spec.blur(32, 32)?, 0.001, 5e-4)?;
    let problem = model.problem();
    let l_f = model.smooth().lipschitz_overestimate();
    let base = SolverConfig {
        rho: 0.85,
        l0: 100.0 * l_f,
        t0: 1.01,
        mu_g: model.mu_g(),
        max_outer: 300,
        max_bt: 30,
        eps_mode: EpsilonMode::theta_adaptive(),
        ..SolverConfig::default()
    };
    let reference = reference_solution(&problem, &reference_config(&SolverConfig { l0: 1e-2, ..base.clone() }), &z.pixels)?;

    for delta in [1.0, 0.98, 0.9] {
        let mut out = solve(&problem, &SolverConfig { delta, ..base.clone() }, &z.pixels)?;
        out.trace.set_reference(reference.f_value)?;
        let ls = out.trace.lipschitz_history();
        println!(
            "delta={delta:<4} L_0={:.3e}  L_100={:.3e}  L_300={:.3e}  eF<=1e-4 at k={:?}",
            ls[0],
            ls[100],
            ls[300],
            out.trace.first_below(1e-4)
        );
    }
    Ok(())
}
