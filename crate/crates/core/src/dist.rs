//! Probability distributions over measurement bitstrings and the
//! divergence/shape metrics computed on them.
//!
//! Bit-ordering convention, fixed across the whole crate: qubit 0 is the
//! least significant bit of a basis-state index. Bitstrings in files and
//! user-facing text are big-endian (leftmost character = highest qubit
//! index).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw measurement counts: bitstring -> number of shots observing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl Counts {
    /// Validates the invariants: non-empty, consistent key lengths,
    /// '0'/'1' characters only, counts summing to `shots`.
    pub fn new(counts: BTreeMap<String, u64>, shots: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidCounts("shots must be positive".into()));
        }
        if counts.is_empty() {
            return Err(Error::InvalidCounts("empty counts".into()));
        }
        let n = counts.keys().next().unwrap().len();
        if n == 0 {
            return Err(Error::InvalidCounts("empty bitstring key".into()));
        }
        let mut total = 0u64;
        for (key, &c) in &counts {
            if key.len() != n {
                return Err(Error::InvalidCounts(format!(
                    "inconsistent key length: {key:?} vs expected {n}"
                )));
            }
            if !key.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::InvalidCounts(format!("non-binary key {key:?}")));
            }
            total = total
                .checked_add(c)
                .ok_or_else(|| Error::InvalidCounts("count overflow".into()))?;
        }
        if total != shots {
            return Err(Error::InvalidCounts(format!(
                "counts sum to {total}, expected {shots} shots"
            )));
        }
        Ok(Self { shots, counts })
    }

    pub fn n_qubits(&self) -> usize {
        self.counts.keys().next().map_or(0, |k| k.len())
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.counts.clone(), self.shots).map(|_| ())
    }
}

/// Converts a big-endian bitstring (leftmost char = highest qubit index)
/// to a basis-state index with qubit 0 as the least significant bit.
pub fn bitstring_to_index(s: &str) -> usize {
    s.bytes().fold(0usize, |acc, b| (acc << 1) | (b - b'0') as usize)
}

/// Inverse of [`bitstring_to_index`].
pub fn index_to_bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Normalized probability distribution over n-qubit basis states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbDist {
    pub n_qubits: usize,
    pub probs: Vec<f64>,
}

impl ProbDist {
    const NORM_TOL: f64 = 1e-9;

    pub fn new(n_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidDistribution("n_qubits must be positive".into()));
        }
        if probs.len() != 1 << n_qubits {
            return Err(Error::InvalidDistribution(format!(
                "expected {} entries, got {}",
                1usize << n_qubits,
                probs.len()
            )));
        }
        let mut sum = 0.0;
        for &p in &probs {
            if !(0.0..=1.0 + Self::NORM_TOL).contains(&p) {
                return Err(Error::InvalidDistribution(format!("entry {p} outside [0,1]")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { n_qubits, probs })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn uniform(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            probs: vec![1.0 / dim as f64; dim],
        }
    }
}

/// probs[i] = count_i / shots; unmentioned bitstrings get 0.
pub fn from_counts(c: &Counts) -> Result<ProbDist> {
    c.validate()?;
    let n = c.n_qubits();
    let mut probs = vec![0.0; 1 << n];
    for (key, &count) in &c.counts {
        probs[bitstring_to_index(key)] += count as f64 / c.shots as f64;
    }
    ProbDist::new(n, probs)
}

/// Shannon entropy in bits; 0*log(0) := 0.
pub fn shannon_entropy(p: &ProbDist) -> f64 {
    p.probs
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// L2 distance from the uniform distribution.
pub fn bias_l2(p: &ProbDist) -> f64 {
    let u = 1.0 / p.dim() as f64;
    p.probs.iter().map(|&x| (x - u) * (x - u)).sum::<f64>().sqrt()
}

/// Largest single-outcome probability.
pub fn max_prob(p: &ProbDist) -> f64 {
    p.probs.iter().cloned().fold(0.0, f64::max)
}

/// Bhattacharyya overlap and distances between two distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bhattacharyya {
    /// Overlap coefficient sum(sqrt(p*q)), clamped below at e^-10.
    pub coefficient: f64,
    /// -ln(coefficient), capped at 10 by the clamp.
    pub distance: f64,
    /// ln(1 + distance), in [0, ln 11].
    pub log_distance: f64,
}

/// Floor on the overlap coefficient so the distance caps at 10 on
/// disjoint supports instead of diverging.
pub const BC_FLOOR: f64 = 4.5399929762484854e-5; // e^-10

pub fn bhattacharyya_log(p: &ProbDist, q: &ProbDist) -> Result<Bhattacharyya> {
    if p.n_qubits != q.n_qubits {
        return Err(Error::QubitMismatch {
            expected: p.n_qubits,
            got: q.n_qubits,
        });
    }
    let bc: f64 = p
        .probs
        .iter()
        .zip(&q.probs)
        .map(|(&a, &b)| (a * b).sqrt())
        .sum();
    let bc = bc.clamp(BC_FLOOR, 1.0);
    let distance = -bc.ln();
    Ok(Bhattacharyya {
        coefficient: bc,
        distance,
        log_distance: distance.ln_1p(),
    })
}
