//! Duality-gap certified TV proximal steps at decreasing tolerances, with warm starts.

use std::sync::Arc;

use sagefista::metric::{BoxSet, DiagonalMetric};
use sagefista::problems::Gradient2d;
use sagefista::prox::{inexact_prox, primal_value, BlockNorm, InnerOptions, NormBlock, Psi, StructuredNonsmooth};

fn main() -> sagefista::Result<()> {
    let (rows, cols) = (8, 8);
    let ybar: Vec<f64> = (0..rows * cols)
        .map(|i| if (i / cols < 4) ^ (i % cols < 4) { 1.0 } else { 0.0 } + 0.3 * ((i * 37 % 11) as f64 / 11.0 - 0.5))
        .collect();
    let tv = NormBlock::new(0.2, BlockNorm::GroupL2 { group: 2 }, Arc::new(Gradient2d::new(rows, cols)))?;
    let g = StructuredNonsmooth::new(vec![tv], Psi::indicator(BoxSet::nonnegative()));
    let metric = DiagonalMetric::from_weights((0..rows * cols).map(|i| 1.0 + 0.5 * (i % 3) as f64).collect())?;
    let options = InnerOptions {
        max_iter: 50_000,
        ..InnerOptions::default()
    };

    let mut warm = None;
    for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
        let cold = inexact_prox(&ybar, 0.5, &metric, &g, eps, None, &options)?;
        let hot = inexact_prox(&ybar, 0.5, &metric, &g, eps, warm.as_ref(), &options)?;
        let p = primal_value(&hot.x_tilde, &ybar, 0.5, &metric, &g)?;
        println!(
            "eps={eps:.0e}  gap={:.3e}  cold iters={:5}  warm iters={:5}  P(x)={p:.10}",
            hot.gap, cold.inner_iters, hot.inner_iters
        );
        warm = Some(hot.dual_w);
    }
    Ok(())
}
