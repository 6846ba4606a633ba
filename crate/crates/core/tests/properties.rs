use std::sync::Arc;

use proptest::collection::vec;
use proptest::prelude::*;
use sagefista::data::reference::{decode_reference, encode_reference};
use sagefista::harness::{parse_config_text, MetricChoice, Modulus, ProblemKind, RunConfig};
use sagefista::image::Image;
use sagefista::metric::{
    check_metric_chain, d_inner, d_norm_sq, scaled_project_box, split_gradient_metric, BoxSet, DiagonalMetric,
    MetricMode, SqueezeSchedule,
};
use sagefista::operator::LinearOperator;
use sagefista::problems::{
    build_wl2_metric, Convolution, Gradient2d, Kernel, KlDivergence, SmoothPart, WeightedL2, WeightedL2Denoise,
};
use sagefista::prox::{
    dual_value, inexact_prox, perturbed_scaled_prox, primal_value, BlockNorm, InnerOptions, NormBlock, Psi,
    StructuredNonsmooth,
};
use sagefista::solver::{
    backtracking_condition, compute_beta, compute_beta_omega, solve, t_ratio, update_q, update_t, EpsilonMode,
    Reference, SolverConfig,
};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    vec(0.05f64..20.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn t_recursion_keeps_q_t_squared_below_one(
        q_prev in 0.0f64..0.99,
        q_next in 1e-6f64..0.99,
        frac in 0.0f64..=1.0,
    ) {
        // any t_prev in [1, 1/sqrt(q_prev)]
        let t_max = if q_prev > 0.0 { 1.0 / q_prev.sqrt() } else { 10.0 };
        let t_prev = 1.0 + frac * (t_max - 1.0);
        let t = update_t(q_prev, t_prev, q_prev / q_next).unwrap();
        prop_assert!(q_next * t * t <= 1.0 + 1e-12);
        prop_assert!(q_next * t < 1.0);
        if q_prev <= q_next {
            prop_assert!(t >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn beta_forms_agree(
        t_prev in 1.0f64..50.0,
        ratio in 0.1f64..10.0,
        tau in 1e-3f64..10.0,
        mu_f_frac in 0.0f64..0.99,
        mu_g in 0.0f64..5.0,
    ) {
        let mu_f = mu_f_frac / tau;
        let q_prev = update_q(tau, mu_f, mu_g, 1.0);
        let t_prev = t_prev.min(if q_prev > 0.0 { 1.0 / q_prev.sqrt() } else { t_prev });
        let t_next = update_t(q_prev, t_prev, ratio).unwrap();
        let a = compute_beta(t_prev, t_next, tau, mu_f, mu_g).unwrap();
        let b = compute_beta_omega(t_prev, t_next, tau, mu_f, mu_g).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300) + 1e-15, "{a} vs {b}");
    }

    #[test]
    fn scalar_sequences_stay_admissible(
        seed in any::<u64>(),
        mu_f in 0.0f64..0.5,
        mu_g in 0.0f64..0.5,
        delta in 0.5f64..=1.0,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut eta = rng.random_range(1.0..4.0);
        let mut tau = rng.random_range(0.1..1.0);
        let mut tau_prime = tau / (1.0 + tau * mu_g / eta);
        let mut q = update_q(tau, mu_f, mu_g, eta);
        let mut t: f64 = 1.0;
        let mut log_eta_theta = f64::INFINITY;
        let mut log_omega = (1.0 - t * q).ln();
        for _ in 0..1000 {
            let eta_next = 1.0 + (eta - 1.0) * rng.random_range(0.5..1.0);
            let mut tau_next = tau / delta * rng.random_range(0.3..1.0);
            while tau_next * mu_f / eta_next >= 1.0 {
                tau_next *= 0.5;
            }
            let q_next = update_q(tau_next, mu_f, mu_g, eta_next);
            let tp_next = tau_next / (1.0 + tau_next * mu_g / eta_next);
            let t_next = update_t(q, t, t_ratio(tau_prime, tp_next, eta, eta_next)).unwrap();
            let omega = 1.0 - t_next * q_next;
            prop_assert!(q_next * t_next * t_next <= 1.0 + 1e-12);
            prop_assert!(q_next * t_next < 1.0);
            prop_assert!(t_next >= 1.0 - 1e-12);
            prop_assert!(omega > 0.0);
            log_omega += omega.ln();
            let log_theta = log_omega - tp_next.ln() - 2.0 * t_next.ln();
            prop_assert!(log_theta.is_finite());
            let next = eta_next.ln() + log_theta;
            prop_assert!(next <= log_eta_theta + 1e-12);
            log_eta_theta = next;
            (eta, tau, tau_prime, q, t) = (eta_next, tau_next, tp_next, q_next, t_next);
        }
    }

    #[test]
    fn metric_norm_is_sandwiched(w in weights(8), x in vec(-10.0f64..10.0, 8), y in vec(-10.0f64..10.0, 8)) {
        let m = DiagonalMetric::from_weights(w).unwrap();
        let n = d_norm_sq(&x, &m).unwrap();
        let e = dot(&x, &x);
        prop_assert!(m.eta_inf() * e <= n * (1.0 + 1e-14));
        prop_assert!(n <= m.eta_sup() * e * (1.0 + 1e-14));
        let xy = d_inner(&x, &y, &m).unwrap();
        prop_assert!((xy - d_inner(&y, &x, &m).unwrap()).abs() <= 1e-12 * (1.0 + xy.abs()));
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.0 * a + b).collect();
        let lin = 2.0 * d_norm_sq(&x, &m).unwrap() + xy;
        prop_assert!((d_inner(&sum, &x, &m).unwrap() - lin).abs() <= 1e-9 * (1.0 + lin.abs()));
    }

    #[test]
    fn split_metric_respects_its_window(
        y in vec(0.0f64..50.0, 10),
        v in vec(0.01f64..5.0, 10),
        gamma in 1.0f64..20.0,
    ) {
        let m = split_gradient_metric(&y, &v, gamma).unwrap();
        prop_assert_eq!(m.eta_inf(), 1.0 / gamma);
        prop_assert_eq!(m.eta_sup(), gamma);
        for w in m.weights() {
            prop_assert!(*w >= 1.0 / gamma * (1.0 - 1e-15) && *w <= gamma * (1.0 + 1e-15));
        }
    }

    #[test]
    fn consecutive_split_metrics_form_a_chain(
        ratios in vec(vec(0.0f64..100.0, 6), 2..20),
        s1 in 0.0f64..100.0,
        s2 in 1.01f64..3.0,
    ) {
        let mode = MetricMode::SplitGradient(SqueezeSchedule::new(s1, s2).unwrap());
        let metrics: Vec<DiagonalMetric> =
            ratios.iter().enumerate().map(|(k, r)| mode.build(k, 6, Some(r)).unwrap()).collect();
        for k in 0..metrics.len() - 1 {
            prop_assert!(check_metric_chain(&metrics[k], &metrics[k + 1], mode.transition_gamma(k)));
        }
    }

    #[test]
    fn box_projection_is_idempotent(
        x in vec(-5.0f64..5.0, 6),
        lo in vec(-2.0f64..0.0, 6),
        width in vec(0.0f64..3.0, 6),
        w in weights(6),
    ) {
        let up: Vec<f64> = lo.iter().zip(&width).map(|(l, d)| l + d).collect();
        let set = BoxSet::per_coordinate(lo, up).unwrap();
        let m = DiagonalMetric::from_weights(w).unwrap();
        let p = scaled_project_box(&x, &set, &m).unwrap();
        prop_assert!(set.contains(&p));
        prop_assert_eq!(scaled_project_box(&p, &set, &m).unwrap(), p);
    }

    #[test]
    fn perturbed_prox_matches_direct_minimizer(
        w in weights(5),
        z in vec(-10.0f64..10.0, 5),
        tau in 0.01f64..10.0,
        eps_q in 0.0f64..5.0,
    ) {
        let m = DiagonalMetric::from_weights(w.clone()).unwrap();
        let composed = perturbed_scaled_prox(
            |v: &[f64], _: f64, _: &DiagonalMetric| Ok(v.iter().map(|x| x.max(0.0)).collect()),
            &z, tau, eps_q, &m,
        ).unwrap();
        for i in 0..5 {
            let direct = (w[i] * z[i] / (w[i] + tau * eps_q)).max(0.0);
            prop_assert!((composed[i] - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
        }
    }

    #[test]
    fn gradient_adjoint_on_random_grids(
        rows in 1usize..9,
        cols in 1usize..9,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let op = Gradient2d::new(rows, cols);
        let x: Vec<f64> = (0..op.input_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..op.output_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&op.apply_vec(&x), &w);
        let rhs = dot(&x, &op.adjoint_vec(&w));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (dot(&x, &x) * dot(&w, &w)).sqrt());
    }

    #[test]
    fn convolution_adjoint_on_random_kernels(
        taps in vec(0.0f64..1.0, 9),
        rows in 3usize..12,
        cols in 3usize..12,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        prop_assume!(taps.iter().sum::<f64>() > 0.1);
        let s: f64 = taps.iter().sum();
        let kernel = Kernel::new(3, taps.iter().map(|t| t / s).collect()).unwrap();
        let h = Convolution::new(rows, cols, kernel).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lhs = dot(&h.apply_vec(&x), &w);
        let rhs = dot(&x, &h.adjoint_vec(&w));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (dot(&x, &x) * dot(&w, &w)).sqrt());
    }

    #[test]
    fn weak_duality_on_3x3_tv(
        ybar in vec(-1.0f64..3.0, 9),
        x in vec(0.0f64..3.0, 9),
        w in vec(-1.0f64..1.0, 18),
        d in weights(9),
        tau in 0.05f64..5.0,
    ) {
        let grad: Arc<dyn LinearOperator> = Arc::new(Gradient2d::new(3, 3));
        let block = NormBlock::new(0.4, BlockNorm::GroupL2 { group: 2 }, grad).unwrap();
        let mut w = w;
        block.project_dual(&mut w);
        let g = StructuredNonsmooth::new(vec![block], Psi { set: BoxSet::nonnegative(), eps_q: 0.1 });
        let m = DiagonalMetric::from_weights(d).unwrap();
        let p = primal_value(&x, &ybar, tau, &m, &g).unwrap();
        let q = dual_value(&vec![w], &ybar, tau, &m, &g).unwrap();
        prop_assert!(q <= p + 1e-12 * p.abs().max(1.0), "{q} > {p}");
    }

    #[test]
    fn warm_started_prox_keeps_its_certificate(
        ybar in vec(-1.0f64..3.0, 16),
        warm in vec(-2.0f64..2.0, 32),
        eps in prop::sample::select(vec![1e-2, 1e-5, 1e-9]),
    ) {
        let grad: Arc<dyn LinearOperator> = Arc::new(Gradient2d::new(4, 4));
        let block = NormBlock::new(0.3, BlockNorm::GroupL2 { group: 2 }, grad).unwrap();
        let g = StructuredNonsmooth::new(vec![block], Psi::indicator(BoxSet::nonnegative()));
        let m = DiagonalMetric::identity(16);
        let opts = InnerOptions { max_iter: 50_000, ..InnerOptions::default() };
        let warm = vec![warm];
        for (start, extrapolation) in [(None, Some(3.0)), (Some(&warm), Some(3.0)), (Some(&warm), None)] {
            let opts = InnerOptions { extrapolation, ..opts };
            let r = inexact_prox(&ybar, 0.5, &m, &g, eps, start, &opts).unwrap();
            prop_assert!(r.gap >= 0.0 && r.gap <= r.target && r.target >= eps);
            prop_assert!(g.feasible_set().contains(&r.x_tilde));
        }
    }

    #[test]
    fn weighted_l2_is_strongly_convex(
        z in vec(0.0f64..20.0, 12),
        x in vec(0.0f64..20.0, 12),
        y in vec(0.0f64..20.0, 12),
        b in 0.01f64..2.0,
    ) {
        let f = WeightedL2::new(z, b, true).unwrap();
        let sigma = f.sigma_f();
        let (fx, gx) = f.value_and_gradient(&x).unwrap();
        let fy = f.value(&y).unwrap();
        let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let lower = fx + dot(&gx, &d) + 0.5 * sigma * dot(&d, &d);
        prop_assert!(fy >= lower - 1e-10 * fy.abs().max(1.0));
    }

    #[test]
    fn descent_lemma_step_passes_backtracking(
        z in vec(0.0f64..20.0, 12),
        x in vec(0.0f64..20.0, 12),
        y in vec(0.0f64..20.0, 12),
        gamma in 1.0f64..30.0,
    ) {
        let b = 0.1;
        let f = WeightedL2::new(z.clone(), b, true).unwrap();
        let m = build_wl2_metric(&z, b, gamma).unwrap();
        let tau = m.eta_inf() / f.lipschitz_constant();
        prop_assert!(backtracking_condition(&f, &x, &y, tau, &m).unwrap());
    }

    #[test]
    fn kl_overestimate_step_passes_backtracking(
        z in vec(0.0f64..30.0, 36),
        x in vec(0.0f64..30.0, 36),
        y in vec(0.0f64..30.0, 36),
    ) {
        let blur = Arc::new(Convolution::new(6, 6, sagefista::problems::gaussian_psf(0.8, 5).unwrap()).unwrap());
        let f = KlDivergence::new(z, 0.5, blur).unwrap();
        let m = DiagonalMetric::identity(36);
        let tau = 1.0 / f.lipschitz_overestimate();
        prop_assert!(backtracking_condition(&f, &x, &y, tau, &m).unwrap());
    }

    #[test]
    fn reference_encoding_round_trips(x in vec(any::<f64>(), 0..40), f in any::<f64>()) {
        let r = Reference { x, f_value: f };
        let back = decode_reference(&encode_reference(&r)).unwrap();
        prop_assert_eq!(back.f_value.to_bits(), r.f_value.to_bits());
        prop_assert!(back.x.iter().zip(&r.x).all(|(a, b)| a.to_bits() == b.to_bits()));
        prop_assert_eq!(back.x.len(), r.x.len());
    }

    #[test]
    fn config_echo_round_trips(
        deblur in any::<bool>(),
        lambda in 1e-4f64..1.0,
        rho in 0.05f64..0.95,
        delta in 0.5f64..=1.0,
        l0 in 0.01f64..100.0,
        seed in any::<u64>(),
        metric in prop::sample::select(vec![MetricChoice::Identity, MetricChoice::Split, MetricChoice::Constant]),
        mu in prop::option::of(0.0f64..1e-2),
    ) {
        let mut cfg = RunConfig::defaults(if deblur { ProblemKind::KlTvDeblur } else { ProblemKind::Wl2TvDenoise });
        cfg.lambda = lambda;
        cfg.solver.rho = rho;
        cfg.solver.delta = delta;
        cfg.solver.l0 = l0;
        cfg.spec.seed = seed;
        cfg.metric = metric;
        cfg.mu_f = mu.map_or(Modulus::Auto, Modulus::Value);
        let back = RunConfig::from_pairs(&parse_config_text(&cfg.echo()).unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn theta_recursion_matches_log_form(
        seed in any::<u64>(),
        split in any::<bool>(),
        delta in 0.8f64..=1.0,
        strongly_convex in any::<bool>(),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..25).map(|_| rng.random_range(0.0..10.0)).collect();
        let model = WeightedL2Denoise::new(Image::new(5, 5, z.clone()).unwrap(), 0.1, 0.2, true).unwrap();
        let metric = if split {
            MetricMode::SplitGradient(SqueezeSchedule::new(5.0, 1.5).unwrap())
        } else {
            MetricMode::Identity
        };
        let config = SolverConfig {
            delta,
            l0: 20.0,
            mu_f: if strongly_convex { model.smooth().sigma_f() } else { 0.0 },
            max_outer: 60,
            max_bt: 40,
            eps_mode: EpsilonMode::theta_adaptive(),
            metric,
            ..SolverConfig::default()
        };
        let out = solve(&model.problem(), &config, &z).unwrap();
        let recs = &out.trace.records;
        for w in recs.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let recursive = a.theta * (a.eta_sup / b.eta_sup) * (1.0 - 1.0 / b.t);
            prop_assert!((b.theta - recursive).abs() <= 1e-10 * b.theta, "k={}: {} vs {}", b.k, b.theta, recursive);
            if config.delta == 1.0 {
                prop_assert!(b.tau <= a.tau);
            } else {
                prop_assert!(b.tau <= a.tau / config.delta * (1.0 + 1e-15));
            }
            prop_assert!(b.bt_trials <= config.max_bt);
            prop_assert!(b.gap <= b.eps);
        }
    }
}
