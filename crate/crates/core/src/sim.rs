//! Density-matrix simulation under a calibration-style noise model,
//! exact statevector simulation, and seeded shot sampling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitIR, GateKind};
use crate::dist::{index_to_bitstring, Counts, ProbDist};
use crate::error::{Error, Result};
use crate::gates::{self, C64};

/// Identifies the shot-sampling generator; identical (dist, shots, seed)
/// under the same version gives bit-identical counts.
pub const SAMPLER_VERSION: &str = "multinomial-chacha8-v1";

/// Calibration-style noise parameters. A single global T1/T2 pair applies
/// to all qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub t1_us: f64,
    pub t2_us: f64,
    pub eps_1q: f64,
    pub eps_2q: f64,
    pub dur_1q_ns: f64,
    pub dur_2q_ns: f64,
    pub dur_3q_ns: f64,
    pub readout_p01: f64,
    pub readout_p10: f64,
    pub enabled: bool,
}

impl Default for NoiseModel {
    /// ibm-style mean calibration values; the two-qubit depolarizing rate
    /// and readout/durations are configurable stand-ins.
    fn default() -> Self {
        Self {
            t1_us: 181.3,
            t2_us: 116.6,
            eps_1q: 6.78e-3,
            eps_2q: 8e-3,
            dur_1q_ns: 60.0,
            dur_2q_ns: 400.0,
            dur_3q_ns: 700.0,
            readout_p01: 5e-3,
            readout_p10: 5e-3,
            enabled: true,
        }
    }
}

impl NoiseModel {
    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("eps_1q", self.eps_1q),
            ("eps_2q", self.eps_2q),
            ("readout_p01", self.readout_p01),
            ("readout_p10", self.readout_p10),
        ] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidNoiseModel(format!("{name} = {p} outside [0,1)")));
            }
        }
        if self.t1_us <= 0.0 || self.t2_us <= 0.0 {
            return Err(Error::InvalidNoiseModel("T1/T2 must be positive".into()));
        }
        if self.t2_us > 2.0 * self.t1_us + 1e-12 {
            return Err(Error::InvalidNoiseModel(format!(
                "t2_us {} exceeds 2*t1_us {}",
                self.t2_us,
                2.0 * self.t1_us
            )));
        }
        if self.dur_1q_ns <= 0.0 || self.dur_2q_ns <= 0.0 || self.dur_3q_ns <= 0.0 {
            return Err(Error::InvalidNoiseModel("durations must be positive".into()));
        }
        Ok(())
    }

    /// Pure-dephasing time from 1/Tphi = 1/T2 - 1/(2 T1); infinite when
    /// T2 saturates the 2*T1 limit.
    pub fn t_phi_us(&self) -> f64 {
        let inv = 1.0 / self.t2_us - 1.0 / (2.0 * self.t1_us);
        if inv <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / inv
        }
    }

    fn duration_ns(&self, kind: GateKind) -> f64 {
        match kind.arity() {
            1 => self.dur_1q_ns,
            2 => self.dur_2q_ns,
            _ => self.dur_3q_ns,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    AmpDamp,
    PureDephase,
    Depol1Q,
    Depol2Q,
}

/// A single Kraus operator: row-major 2^k x 2^k matrix.
#[derive(Debug, Clone)]
pub struct KrausOp {
    pub n_qubits: usize,
    pub mat: Vec<C64>,
}

const PAULIS: [[C64; 4]; 4] = {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let mo = Complex64::new(-1.0, 0.0);
    let im = Complex64::new(0.0, 1.0);
    let mim = Complex64::new(0.0, -1.0);
    [
        [o, z, z, o],     // I
        [z, o, o, z],     // X
        [z, mim, im, z],  // Y
        [o, z, z, mo],    // Z
    ]
};

fn scaled(mat: &[C64], s: f64) -> Vec<C64> {
    mat.iter().map(|&x| x * s).collect()
}

fn kron2(a: &[C64; 4], b: &[C64; 4]) -> Vec<C64> {
    // local bit 0 varies fastest: index = 2*b_bit + a_bit... kron over
    // (qubit1 x qubit0) with qubit0 as LSB
    let mut m = vec![Complex64::new(0.0, 0.0); 16];
    for r1 in 0..2 {
        for c1 in 0..2 {
            for r0 in 0..2 {
                for c0 in 0..2 {
                    m[(r1 * 2 + r0) * 4 + (c1 * 2 + c0)] = b[r1 * 2 + c1] * a[r0 * 2 + c0];
                }
            }
        }
    }
    m
}

/// Kraus decomposition for the supported noise channels.
///
/// The parameter is gamma for amplitude damping, lambda_phi for pure
/// dephasing, and epsilon for the depolarizing channels.
pub fn channel_kraus(kind: ChannelKind, param: f64) -> Result<Vec<KrausOp>> {
    if !(0.0..=1.0).contains(&param) {
        return Err(Error::ChannelParam(format!("{param} outside [0,1]")));
    }
    let z = Complex64::new(0.0, 0.0);
    let ops = match kind {
        ChannelKind::AmpDamp => {
            let gamma = param;
            vec![
                KrausOp {
                    n_qubits: 1,
                    mat: vec![
                        Complex64::new(1.0, 0.0), z,
                        z, Complex64::new((1.0 - gamma).sqrt(), 0.0),
                    ],
                },
                KrausOp {
                    n_qubits: 1,
                    mat: vec![z, Complex64::new(gamma.sqrt(), 0.0), z, z],
                },
            ]
        }
        ChannelKind::PureDephase => {
            let l = param;
            vec![
                KrausOp { n_qubits: 1, mat: scaled(&PAULIS[0], (1.0 - l).sqrt()) },
                KrausOp { n_qubits: 1, mat: scaled(&PAULIS[3], l.sqrt()) },
            ]
        }
        ChannelKind::Depol1Q => {
            let eps = param;
            let mut ops = vec![KrausOp { n_qubits: 1, mat: scaled(&PAULIS[0], (1.0 - eps).sqrt()) }];
            for p in &PAULIS[1..] {
                ops.push(KrausOp { n_qubits: 1, mat: scaled(p, (eps / 3.0).sqrt()) });
            }
            ops
        }
        ChannelKind::Depol2Q => {
            let eps = param;
            let mut ops = Vec::with_capacity(16);
            for a in 0..4 {
                for b in 0..4 {
                    let weight = if a == 0 && b == 0 { 1.0 - eps } else { eps / 15.0 };
                    ops.push(KrausOp {
                        n_qubits: 2,
                        mat: scaled(&kron2(&PAULIS[a], &PAULIS[b]), weight.sqrt()),
                    });
                }
            }
            ops
        }
    };
    Ok(ops)
}

/// Exact n-qubit density matrix, row-major.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub n_qubits: usize,
    pub elements: Vec<C64>,
}

impl DensityMatrix {
    pub fn ground_state(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut elements = vec![Complex64::new(0.0, 0.0); d * d];
        elements[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, elements }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        let mut elements = vec![Complex64::new(0.0, 0.0); d * d];
        for j in 0..d {
            elements[j * d + j] = Complex64::new(1.0 / d as f64, 0.0);
        }
        Self { n_qubits, elements }
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|j| self.elements[j * d + j]).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for cix in 0..d {
                let diff = self.elements[r * d + cix] - self.elements[cix * d + r].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    pub fn apply_unitary(&mut self, mat: &[C64], qubits: &[usize]) {
        let d = self.dim();
        gates::conjugate(mat, qubits, &mut self.elements, d);
    }

    /// rho -> sum_k E_k rho E_k^dagger on the given qubits.
    pub fn apply_kraus(&mut self, ops: &[KrausOp], qubits: &[usize]) {
        let d = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for op in ops {
            debug_assert_eq!(op.n_qubits, qubits.len());
            let mut term = self.elements.clone();
            gates::conjugate(&op.mat, qubits, &mut term, d);
            for (o, t) in out.iter_mut().zip(&term) {
                *o += t;
            }
        }
        self.elements = out;
    }

    pub fn diagonal_probs(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|j| self.elements[j * d + j].re).collect()
    }
}

/// Exact noiseless outcome distribution by statevector evolution.
pub fn simulate_ideal(c: &CircuitIR) -> Result<ProbDist> {
    c.validate()?;
    let d = 1usize << c.n_qubits;
    let mut psi = vec![Complex64::new(0.0, 0.0); d];
    psi[0] = Complex64::new(1.0, 0.0);
    for g in &c.gates {
        gates::apply_to_state(&gates::gate_matrix(g), &g.qubits, &mut psi);
    }
    let probs: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
    normalize_probs(c.n_qubits, probs)
}

fn normalize_probs(n_qubits: usize, mut probs: Vec<f64>) -> Result<ProbDist> {
    for p in &mut probs {
        if *p < 0.0 {
            if *p < -1e-9 {
                return Err(Error::Simulation(format!("negative probability {p}")));
            }
            *p = 0.0;
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(Error::Simulation(format!("probabilities sum to {sum}")));
    }
    for p in &mut probs {
        *p /= sum;
    }
    ProbDist::new(n_qubits, probs)
}

/// Evolves a density matrix gate by gate, applying per-qubit amplitude
/// damping and pure dephasing for the gate duration, then a depolarizing
/// channel, and finally the readout confusion matrix on the diagonal.
pub fn simulate_noisy(c: &CircuitIR, nm: &NoiseModel) -> Result<ProbDist> {
    c.validate()?;
    nm.validate()?;
    let mut rho = DensityMatrix::ground_state(c.n_qubits);

    let t_phi = nm.t_phi_us();
    for g in &c.gates {
        rho.apply_unitary(&gates::gate_matrix(g), &g.qubits);
        if nm.enabled {
            let t_us = nm.duration_ns(g.kind) / 1000.0;
            let gamma = 1.0 - (-t_us / nm.t1_us).exp();
            let lambda_phi = if t_phi.is_finite() { 1.0 - (-t_us / t_phi).exp() } else { 0.0 };
            let amp = channel_kraus(ChannelKind::AmpDamp, gamma)?;
            let deph = channel_kraus(ChannelKind::PureDephase, lambda_phi)?;
            for &q in &g.qubits {
                rho.apply_kraus(&amp, &[q]);
                rho.apply_kraus(&deph, &[q]);
            }
            match g.qubits.len() {
                1 => {
                    let depol = channel_kraus(ChannelKind::Depol1Q, nm.eps_1q)?;
                    rho.apply_kraus(&depol, &[g.qubits[0]]);
                }
                2 => {
                    let depol = channel_kraus(ChannelKind::Depol2Q, nm.eps_2q)?;
                    rho.apply_kraus(&depol, &g.qubits);
                }
                _ => {
                    // CCX: depolarize the two control-target pairs in turn
                    let depol = channel_kraus(ChannelKind::Depol2Q, nm.eps_2q)?;
                    rho.apply_kraus(&depol, &[g.qubits[0], g.qubits[2]]);
                    rho.apply_kraus(&depol, &[g.qubits[1], g.qubits[2]]);
                }
            }
        }
        let drift = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
        if drift > 1e-8 {
            return Err(Error::Simulation(format!("trace drift {drift} after {:?}", g.kind)));
        }
    }

    let mut probs = rho.diagonal_probs();
    if nm.enabled {
        apply_readout_confusion(&mut probs, c.n_qubits, nm.readout_p01, nm.readout_p10);
    }
    normalize_probs(c.n_qubits, probs)
}

/// Per-qubit confusion matrix applied to the classical diagonal;
/// p01 = P(read 0 | state 1), p10 = P(read 1 | state 0).
fn apply_readout_confusion(probs: &mut [f64], n_qubits: usize, p01: f64, p10: f64) {
    for q in 0..n_qubits {
        let bit = 1usize << q;
        for i in 0..probs.len() {
            if i & bit != 0 {
                continue;
            }
            let j = i | bit;
            let p0 = probs[i];
            let p1 = probs[j];
            probs[i] = (1.0 - p10) * p0 + p01 * p1;
            probs[j] = p10 * p0 + (1.0 - p01) * p1;
        }
    }
}

/// Multinomial shot sampling with a seeded, versioned generator
/// ([`SAMPLER_VERSION`]). Identical inputs give bit-identical counts.
pub fn sample_counts(p: &ProbDist, shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidCounts("shots must be positive".into()));
    }
    let mut cdf = Vec::with_capacity(p.dim());
    let mut acc = 0.0;
    for &x in &p.probs {
        acc += x;
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    cdf[last] = 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tallies = vec![0u64; p.dim()];
    for _ in 0..shots {
        let u: f64 = rng.gen();
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        tallies[idx] += 1;
    }

    let mut counts = BTreeMap::new();
    for (idx, &t) in tallies.iter().enumerate() {
        if t > 0 {
            counts.insert(index_to_bitstring(idx, p.n_qubits), t);
        }
    }
    Counts::new(counts, shots)
}
