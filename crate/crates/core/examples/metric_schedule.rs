//! Thresholded split-gradient metrics and the runtime check on consecutive metrics.

use sagefista::metric::{check_metric_chain, gamma_threshold, split_gradient_metric, MetricMode, SqueezeSchedule};

fn main() -> sagefista::Result<()> {
    let y: Vec<f64> = (0..16).map(|i| 0.05 + i as f64).collect();
    let v = vec![1.0; 16];
    for (s1, s2) in [(1.0, 1.1), (10.0, 1.1), (10.0, 2.0)] {
        let schedule = SqueezeSchedule::new(s1, s2)?;
        let mode = MetricMode::SplitGradient(schedule.clone());
        let mut prev = split_gradient_metric(&y, &v, gamma_threshold(0, &schedule))?;
        let mut sum = 0.0;
        let mut all_ok = true;
        for k in 0..300 {
            let next = split_gradient_metric(&y, &v, gamma_threshold(k + 1, &schedule))?;
            let gamma = mode.transition_gamma(k);
            all_ok &= check_metric_chain(&prev, &next, gamma);
            sum += gamma;
            prev = next;
        }
        println!(
            "s1={s1:<4} s2={s2:<3}  gamma_0={:.3}  gamma_300={:.5}  sum gamma={sum:.4}  chain ok: {all_ok}",
            schedule.gamma(0),
            schedule.gamma(300)
        );
    }
    Ok(())
}
