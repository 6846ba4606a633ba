use std::fmt::Debug;

/// A real linear map `M : R^n -> R^m` together with its adjoint.
pub trait LinearOperator: Debug + Send + Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    /// `out = M x`
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = M^* w`
    fn adjoint(&self, w: &[f64], out: &mut [f64]);
    /// An upper bound on `||M||^2`.
    fn norm_sq_bound(&self) -> f64;

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_len()];
        self.apply(x, &mut out);
        out
    }

    fn adjoint_vec(&self, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.input_len()];
        self.adjoint(w, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityOperator {
    pub n: usize,
}

impl LinearOperator for IdentityOperator {
    fn input_len(&self) -> usize {
        self.n
    }

    fn output_len(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn adjoint(&self, w: &[f64], out: &mut [f64]) {
        out.copy_from_slice(w);
    }

    fn norm_sq_bound(&self) -> f64 {
        1.0
    }
}

/// Power iteration estimate of `||M||^2` (largest eigenvalue of `M^* M`).
pub fn power_iteration_norm_sq(op: &dyn LinearOperator, iterations: usize, seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.input_len()).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let nrm = crate::linalg::norm(&x);
        if nrm == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
        let mx = op.apply_vec(&x);
        estimate = crate::linalg::norm_sq(&mx);
        x = op.adjoint_vec(&mx);
    }
    estimate
}
