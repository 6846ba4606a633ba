//! Plugging a user-defined smooth term into the solver: l1-regularized logistic regression.

use std::sync::Arc;

use sagefista::prelude::*;

#[derive(Debug)]
struct Logistic {
    features: Vec<Vec<f64>>,
    labels: Vec<f64>,
}

impl SmoothPart for Logistic {
    fn len(&self) -> usize {
        self.features[0].len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self
            .features
            .iter()
            .zip(&self.labels)
            .map(|(a, y)| {
                let m = -y * a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
                m.max(0.0) + (-m.abs()).exp().ln_1p()
            })
            .sum())
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (a, y) in self.features.iter().zip(&self.labels) {
            let m = y * a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
            let s = -y / (1.0 + m.exp());
            for (o, p) in out.iter_mut().zip(a) {
                *o += s * p;
            }
        }
        Ok(())
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(0.25 * self.features.iter().flatten().map(|v| v * v).sum::<f64>())
    }
}

fn main() -> Result<()> {
    let features = vec![
        vec![1.0, 0.5, -0.2],
        vec![0.8, -1.0, 0.1],
        vec![-0.3, 0.2, 1.0],
        vec![-1.0, -0.4, 0.6],
        vec![0.2, 0.9, -0.8],
    ];
    let labels = vec![1.0, 1.0, -1.0, -1.0, 1.0];
    let f = Logistic { features, labels };
    let l_f = f.lipschitz().unwrap();
    let l1 = NormBlock::new(0.05, BlockNorm::L1, Arc::new(IdentityOperator { n: 3 }))?;
    let g = StructuredNonsmooth::new(vec![l1], Psi::indicator(BoxSet::whole_space()));
    let problem = CompositeProblem::new(Arc::new(f), g)?;

    let config = SolverConfig {
        l0: 0.1 * l_f,
        delta: 0.95,
        max_outer: 300,
        ..SolverConfig::default()
    };
    let out = solve(&problem, &config, &[0.0; 3])?;
    let last = out.trace.last().unwrap();
    println!("F = {:.10} after {} iterations (L_est {:.3}, global L {:.3})", last.f_value, last.k, last.l_est, l_f);
    println!("weights = {:?}", out.x);
    Ok(())
}
