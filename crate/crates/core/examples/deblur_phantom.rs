//! Kullback-Leibler + TV deblurring of a blurred Shepp-Logan phantom, Armijo against
//! adaptive backtracking, with and without split-gradient scaling.

use sagefista::data::{reference_config, reference_solution, simulate_acquisition, ExperimentSpec, Phantom, Source};
use sagefista::metric::{MetricMode, SqueezeSchedule};
use sagefista::problems::KlTvDeblur;
use sagefista::solver::{solve, EpsilonMode, SolverConfig};

fn main() -> sagefista::Result<()> {
    let spec = ExperimentSpec {
        source: Source::Phantom(Phantom::SheppLogan),
        scale: 32,
        intensity_range: (0.0, 1.0),
        sigma_psf: 1.4,
        background: 0.01,
        seed: 7,
    };
    let z = simulate_acquisition(&spec.ground_truth()?, &spec)?;
    let model = KlTvDeblur::new(z.clone(), spec.background, spec.blur(32, 32)?, 0.004, 1e-4)?;
    let problem = model.problem();
    println!("L_f overestimate: {:.1}", model.smooth().lipschitz_overestimate());
    let base = SolverConfig {
        rho: 0.85,
        l0: 0.1,
        t0: 1.01,
        mu_g: model.mu_g(),
        max_outer: 300,
        max_bt: 30,
        eps_mode: EpsilonMode::theta_adaptive(),
        ..SolverConfig::default()
    };
    let reference = reference_solution(&problem, &reference_config(&base), &z.pixels)?;

    for delta in [1.0, 0.98] {
        for (label, metric) in [
            ("identity", MetricMode::Identity),
            ("split s1=10 s2=1.1", MetricMode::SplitGradient(SqueezeSchedule::new(10.0, 1.1)?)),
        ] {
            let config = SolverConfig { delta, metric, ..base.clone() };
            let mut out = solve(&problem, &config, &z.pixels)?;
            out.trace.set_reference(reference.f_value)?;
            println!(
                "delta={delta:<4} {label:20} eF_300={:.2e}  eF<=1e-6 at k={:?}  final L_est={:.3}",
                out.trace.last().unwrap().rel_error,
                out.trace.first_below(1e-6),
                out.trace.last().unwrap().l_est
            );
        }
    }
    Ok(())
}
