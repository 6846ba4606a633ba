//! Long plain-FISTA runs used as stand-in minimizers, with an on-disk cache.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metric::MetricMode;
use crate::problems::CompositeProblem;
use crate::solver::{solve, EpsilonMode, Reference, SolverConfig};

const MAGIC: &[u8; 8] = b"SGFREF01";

pub const REFERENCE_ITERATIONS: usize = 5000;

/// Plain FISTA settings derived from `base`: no strong convexity, identity metric,
/// monotone backtracking and a tight quadratic error schedule.
pub fn reference_config(base: &SolverConfig) -> SolverConfig {
    let mut inner = base.inner;
    inner.max_iter = inner.max_iter.max(20_000);
    SolverConfig {
        rho: base.rho,
        delta: 1.0,
        t0: 1.0,
        l0: base.l0,
        mu_f: 0.0,
        mu_g: 0.0,
        max_outer: REFERENCE_ITERATIONS,
        max_bt: base.max_bt.max(30),
        eps_mode: EpsilonMode::QuadraticSchedule {
            scale: 1.0,
            a: 0.5,
            exponent: 2.1,
        },
        metric: MetricMode::Identity,
        inner,
        rel_tol: None,
    }
}

/// Runs `config` from `x0` and returns the final iterate with its objective value.
pub fn reference_solution(problem: &CompositeProblem, config: &SolverConfig, x0: &[f64]) -> Result<Reference> {
    let out = solve(problem, config, x0)?;
    let f_value = problem.objective(&out.x)?;
    Ok(Reference { x: out.x, f_value })
}

/// SHA-256 over length-prefixed parts.
pub fn content_key(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn f64_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn checksum(f_value: f64, x: &[f64]) -> [u8; 8] {
    let mut h = Sha256::new();
    h.update(f_value.to_le_bytes());
    h.update(f64_bytes(x));
    let d = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&d[..8]);
    out
}

pub fn encode_reference(r: &Reference) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 8 * r.x.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(r.x.len() as u64).to_le_bytes());
    out.extend_from_slice(&r.f_value.to_le_bytes());
    out.extend_from_slice(&checksum(r.f_value, &r.x));
    out.extend_from_slice(&f64_bytes(&r.x));
    out
}

pub fn decode_reference(bytes: &[u8]) -> Result<Reference> {
    let bad = |m: &str| Error::Format(format!("reference file: {m}"));
    if bytes.len() < 32 || &bytes[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let f_value = f64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    if bytes.len() != 32 + 8 * n {
        return Err(bad("length does not match header"));
    }
    let x: Vec<f64> = bytes[32..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if checksum(f_value, &x) != bytes[24..32] {
        return Err(bad("checksum mismatch"));
    }
    Ok(Reference { x, f_value })
}

/// Directory of reference files named by content key.
#[derive(Debug, Clone)]
pub struct ReferenceCache {
    dir: PathBuf,
}

impl ReferenceCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.ref"))
    }

    pub fn load(&self, key: &str) -> Result<Option<Reference>> {
        let path = self.path_for(key);
        match fs::read(&path) {
            Ok(bytes) => decode_reference(&bytes).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn store(&self, key: &str, r: &Reference) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, encode_reference(r))?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn get_or_compute(&self, key: &str, compute: impl FnOnce() -> Result<Reference>) -> Result<Reference> {
        if let Some(r) = self.load(key)? {
            return Ok(r);
        }
        let r = compute()?;
        self.store(key, &r)?;
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_round_trips_bitwise() {
        let r = Reference {
            x: vec![0.1, -2.5e-300, f64::MAX],
            f_value: 1.0 / 3.0,
        };
        let back = decode_reference(&encode_reference(&r)).unwrap();
        assert_eq!(back, r);
        let mut bytes = encode_reference(&r);
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        assert!(decode_reference(&bytes).is_err());
    }

    #[test]
    fn keys_separate_parts() {
        assert_ne!(content_key(&[b"ab", b"c"]), content_key(&[b"a", b"bc"]));
        assert_eq!(content_key(&[b"x"]), content_key(&[b"x"]));
    }
}
