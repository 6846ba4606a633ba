//! Sparse least squares `min 0.5 ||Ax - b||^2 + lambda ||x||_1` with the default solver.

use std::sync::Arc;

use sagefista::prelude::*;
use sagefista::problems::LeastSquares;

fn main() -> Result<()> {
    let a = vec![
        1.0, 0.2, 0.0, 0.5, //
        0.3, 1.0, 0.1, 0.0, //
        0.0, 0.4, 1.0, 0.2, //
        0.6, 0.0, 0.3, 1.0, //
        0.1, 0.1, 0.1, 0.1,
    ];
    let b = vec![1.0, -0.5, 0.25, 2.0, 0.3];
    let f = Arc::new(LeastSquares::new(5, 4, a, b)?);
    let l1 = NormBlock::new(0.1, BlockNorm::L1, Arc::new(IdentityOperator { n: 4 }))?;
    let g = StructuredNonsmooth::new(vec![l1], Psi::indicator(BoxSet::whole_space()));
    let problem = CompositeProblem::new(f, g)?;

    let config = SolverConfig {
        l0: 1.0,
        max_outer: 200,
        ..SolverConfig::default()
    };
    let out = solve(&problem, &config, &[0.0; 4])?;
    for r in out.trace.iter().filter(|r| r.k % 40 == 0) {
        println!("k={:3}  F={:.12}  L_est={:.3}  bt={}", r.k, r.f_value, r.l_est, r.bt_trials);
    }
    println!("x = {:?}", out.x);
    Ok(())
}
