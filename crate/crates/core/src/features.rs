//! Assembles the seven-feature vector from counts, circuit structure, and
//! the ideal reference distribution, plus z-score normalization.

use serde::{Deserialize, Serialize};

use crate::circuit::{self, CircuitIR};
use crate::dist::{self, Counts, ProbDist};
use crate::error::{Error, Result};

pub const N_FEATURES: usize = 7;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "Entropy",
    "Bias",
    "MaxProb",
    "NormDepth",
    "TwoQDensity",
    "EntropyDev",
    "Bhattacharyya",
];

/// The seven features, in their fixed public order (indices 0-6).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub entropy: f64,
    pub bias: f64,
    pub max_prob: f64,
    pub norm_depth: f64,
    pub two_q_density: f64,
    pub entropy_dev: f64,
    pub db_log: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; N_FEATURES] {
        [
            self.entropy,
            self.bias,
            self.max_prob,
            self.norm_depth,
            self.two_q_density,
            self.entropy_dev,
            self.db_log,
        ]
    }

    pub fn from_array(a: [f64; N_FEATURES]) -> Self {
        Self {
            entropy: a[0],
            bias: a[1],
            max_prob: a[2],
            norm_depth: a[3],
            two_q_density: a[4],
            entropy_dev: a[5],
            db_log: a[6],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|x| x.is_finite())
    }
}

/// Extracts the feature vector for one execution. `circuit` is the
/// intended circuit and `ideal` its noiseless distribution; `counts` may
/// come from any execution (including a buggy variant of the circuit).
pub fn extract_features(counts: &Counts, circuit: &CircuitIR, ideal: &ProbDist) -> Result<FeatureVector> {
    if counts.n_qubits() != circuit.n_qubits {
        return Err(Error::QubitMismatch {
            expected: circuit.n_qubits,
            got: counts.n_qubits(),
        });
    }
    if ideal.n_qubits != circuit.n_qubits {
        return Err(Error::QubitMismatch {
            expected: circuit.n_qubits,
            got: ideal.n_qubits,
        });
    }
    let measured = dist::from_counts(counts)?;
    let h_measured = dist::shannon_entropy(&measured);
    let h_ideal = dist::shannon_entropy(ideal);
    let b = dist::bhattacharyya_log(&measured, ideal)?;
    Ok(FeatureVector {
        entropy: h_measured,
        bias: dist::bias_l2(&measured),
        max_prob: dist::max_prob(&measured),
        norm_depth: circuit::norm_depth(circuit::depth(circuit)),
        two_q_density: circuit::two_qubit_density(circuit),
        entropy_dev: (h_measured - h_ideal).abs(),
        db_log: b.log_distance,
    })
}

/// Per-feature standardization statistics, saved with the model
/// checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub means: [f64; N_FEATURES],
    pub stds: [f64; N_FEATURES],
}

const STD_FLOOR: f64 = 1e-9;

/// Sample mean and population (1/N) standard deviation per feature.
pub fn fit_normalizer(rows: &[FeatureVector]) -> Result<Normalizer> {
    if rows.len() < 2 {
        return Err(Error::InvalidFeatures(format!(
            "need at least 2 rows to fit a normalizer, got {}",
            rows.len()
        )));
    }
    let n = rows.len() as f64;
    let mut means = [0.0; N_FEATURES];
    for r in rows {
        for (m, v) in means.iter_mut().zip(r.as_array()) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = [0.0; N_FEATURES];
    for r in rows {
        for ((s, v), m) in stds.iter_mut().zip(r.as_array()).zip(means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt().max(STD_FLOOR);
    }
    Ok(Normalizer { means, stds })
}

pub fn apply_normalizer(n: &Normalizer, f: &FeatureVector) -> [f64; N_FEATURES] {
    let mut out = f.as_array();
    for ((x, m), s) in out.iter_mut().zip(n.means).zip(n.stds) {
        *x = (*x - m) / s;
    }
    out
}

pub fn invert_normalizer(n: &Normalizer, x: &[f64; N_FEATURES]) -> FeatureVector {
    let mut out = *x;
    for ((v, m), s) in out.iter_mut().zip(n.means).zip(n.stds) {
        *v = *v * s + m;
    }
    FeatureVector::from_array(out)
}

/// One labeled training/evaluation sample (JSONL dataset row).
/// label 1 = noise/correct, 0 = bug.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub name: String,
    pub label: u8,
    pub features_raw: [f64; N_FEATURES],
    pub db_log_raw: f64,
}

impl DatasetRow {
    pub fn new(name: impl Into<String>, label: u8, features: FeatureVector) -> Self {
        Self {
            name: name.into(),
            label,
            features_raw: features.as_array(),
            db_log_raw: features.db_log,
        }
    }

    pub fn features(&self) -> FeatureVector {
        FeatureVector::from_array(self.features_raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, GateKind};
    use crate::sim;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn bell() -> CircuitIR {
        CircuitIR::new(
            "bell",
            "Bell",
            2,
            vec![Gate::one(GateKind::H, 0), Gate::two(GateKind::CX, 0, 1)],
        )
        .unwrap()
    }

    #[test]
    fn ideal_bell_self_comparison() {
        let c = bell();
        let ideal = sim::simulate_ideal(&c).unwrap();
        let counts = Counts::new(
            BTreeMap::from([("00".to_string(), 2048), ("11".to_string(), 2048)]),
            4096,
        )
        .unwrap();
        let f = extract_features(&counts, &c, &ideal).unwrap();
        assert_abs_diff_eq!(f.entropy, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.entropy_dev, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.db_log, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.bias, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.max_prob, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.norm_depth, 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(f.two_q_density, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn qubit_mismatch_rejected() {
        let c = bell();
        let ideal = sim::simulate_ideal(&c).unwrap();
        let counts = Counts::new(BTreeMap::from([("000".to_string(), 16)]), 16).unwrap();
        assert!(extract_features(&counts, &c, &ideal).is_err());
    }

    #[test]
    fn high_shot_self_consistency() {
        // sampling the ideal distribution at 10^6 shots keeps the deviation
        // features near zero
        let c = bell();
        let ideal = sim::simulate_ideal(&c).unwrap();
        let counts = sim::sample_counts(&ideal, 1_000_000, 42).unwrap();
        let f = extract_features(&counts, &c, &ideal).unwrap();
        assert!(f.entropy_dev < 0.02, "entropy_dev = {}", f.entropy_dev);
        assert!(f.db_log < 0.02, "db_log = {}", f.db_log);
    }

    #[test]
    fn normalizer_two_rows() {
        let zero = FeatureVector::from_array([0.0; N_FEATURES]);
        let two = FeatureVector::from_array([2.0; N_FEATURES]);
        let n = fit_normalizer(&[zero, two]).unwrap();
        assert_eq!(n.means, [1.0; N_FEATURES]);
        assert_eq!(n.stds, [1.0; N_FEATURES]);
    }

    #[test]
    fn normalizer_constant_column_floored() {
        let a = FeatureVector::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let b = FeatureVector::from_array([3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let n = fit_normalizer(&[a, b]).unwrap();
        assert_eq!(n.stds[1], 1e-9);
    }

    #[test]
    fn normalizer_round_trip_and_statistics() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<FeatureVector> = (0..200)
            .map(|_| {
                let mut a = [0.0; N_FEATURES];
                for x in &mut a {
                    *x = rng.gen_range(-3.0..3.0);
                }
                FeatureVector::from_array(a)
            })
            .collect();
        let n = fit_normalizer(&rows).unwrap();

        // normalized columns recover mean 0, std 1 (independent recompute)
        let normed: Vec<[f64; N_FEATURES]> = rows.iter().map(|r| apply_normalizer(&n, r)).collect();
        for j in 0..N_FEATURES {
            let mean: f64 = normed.iter().map(|r| r[j]).sum::<f64>() / normed.len() as f64;
            let var: f64 =
                normed.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / normed.len() as f64;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(var.sqrt(), 1.0, epsilon = 1e-9);
        }

        // inversion restores the original row
        for r in &rows {
            let back = invert_normalizer(&n, &apply_normalizer(&n, r));
            for (x, y) in back.as_array().iter().zip(r.as_array()) {
                assert_abs_diff_eq!(x, &y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn normalizer_identities() {
        let rows: Vec<FeatureVector> = (0..10)
            .map(|i| FeatureVector::from_array([i as f64; N_FEATURES]))
            .collect();
        let n = fit_normalizer(&rows).unwrap();
        let at_mean = apply_normalizer(&n, &FeatureVector::from_array(n.means));
        for x in at_mean {
            assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        }
        let mut shifted = n.means;
        for (s, d) in shifted.iter_mut().zip(n.stds) {
            *s += d;
        }
        let at_plus_sigma = apply_normalizer(&n, &FeatureVector::from_array(shifted));
        for x in at_plus_sigma {
            assert_abs_diff_eq!(x, 1.0, epsilon = 1e-12);
        }
    }
}
