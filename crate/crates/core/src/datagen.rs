//! Circuit template library for the validation families, bug-variant
//! enumeration, and generation of the training dataset and the
//! 105-circuit validation suite.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{inject_bug, BugSpec, CircuitIR, Gate, GateKind, Label};
use crate::dist::{Counts, ProbDist};
use crate::error::{Error, Result};
use crate::features::{extract_features, DatasetRow};
use crate::sim::{sample_counts, simulate_ideal, simulate_noisy, NoiseModel};

/// All families `build_template` understands. Teleportation (dynamic) is
/// absent: it needs feed-forward, and its validation-suite slots are
/// filled with static entangled-state circuits instead.
pub const FAMILIES: [&str; 16] = [
    "Bell",
    "GHZ",
    "W",
    "Cluster",
    "QFT",
    "Grover",
    "DeutschJozsa",
    "BernsteinVazirani",
    "VQE",
    "QAOA",
    "SuperdenseCoding",
    "PhaseEstimation",
    "SwapTest",
    "Clifford",
    "RepetitionCode",
    "HardwareEfficient",
];

/// Valid qubit-count range per family.
pub fn family_qubit_range(family: &str) -> Result<(usize, usize)> {
    Ok(match family {
        "Bell" | "Grover" | "SuperdenseCoding" => (2, 2),
        "GHZ" => (3, 5),
        "W" | "Cluster" | "QFT" | "DeutschJozsa" | "BernsteinVazirani" | "VQE" | "Clifford"
        | "HardwareEfficient" => (2, 5),
        "QAOA" => (2, 4),
        "PhaseEstimation" => (3, 5),
        "SwapTest" => (3, 3),
        "RepetitionCode" => (3, 3),
        other => return Err(Error::UnknownFamily(other.to_string())),
    })
}

/// Splitmix64-style sub-seed derivation: all randomness in generation
/// flows from one root seed through this function.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut z = root ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Trailing diagonal gates never change the Z-basis distribution, so they
/// diversify circuit structure without breaking the family's expected
/// output pattern.
fn decorate(gates: &mut Vec<Gate>, n: usize, rng: &mut ChaCha8Rng) {
    let k = rng.gen_range(0..=2);
    for _ in 0..k {
        let q = rng.gen_range(0..n);
        let g = match rng.gen_range(0..4) {
            0 => Gate::one(GateKind::Z, q),
            1 => Gate::one(GateKind::S, q),
            2 => Gate::one(GateKind::T, q),
            _ => Gate::rot(GateKind::RZ, q, rng.gen_range(0.1..3.0)),
        };
        gates.push(g);
    }
}

fn cry(gates: &mut Vec<Gate>, theta: f64, control: usize, target: usize) {
    gates.push(Gate::rot(GateKind::RY, target, theta / 2.0));
    gates.push(Gate::two(GateKind::CX, control, target));
    gates.push(Gate::rot(GateKind::RY, target, -theta / 2.0));
    gates.push(Gate::two(GateKind::CX, control, target));
}

fn qft_gates(gates: &mut Vec<Gate>, n: usize) {
    for i in (0..n).rev() {
        gates.push(Gate::one(GateKind::H, i));
        for j in (0..i).rev() {
            gates.push(Gate::new(
                GateKind::CP,
                vec![j, i],
                vec![PI / (1 << (i - j)) as f64],
            ));
        }
    }
    for i in 0..n / 2 {
        gates.push(Gate::two(GateKind::SWAP, i, n - 1 - i));
    }
}

fn inverse_qft_gates(gates: &mut Vec<Gate>, qubits: &[usize]) {
    let n = qubits.len();
    for i in 0..n / 2 {
        gates.push(Gate::two(GateKind::SWAP, qubits[i], qubits[n - 1 - i]));
    }
    for i in 0..n {
        for j in (0..i).rev() {
            gates.push(Gate::new(
                GateKind::CP,
                vec![qubits[j], qubits[i]],
                vec![-PI / (1 << (i - j)) as f64],
            ));
        }
        gates.push(Gate::one(GateKind::H, qubits[i]));
    }
}

/// Grover search on 2 qubits with one exact iteration: the marked state
/// comes out with probability 1 ideally.
pub fn build_grover2(marked: usize, variant_seed: u64) -> Result<CircuitIR> {
    let mut g = vec![Gate::one(GateKind::H, 0), Gate::one(GateKind::H, 1)];
    let wrap: Vec<usize> = (0..2).filter(|&q| marked >> q & 1 == 0).collect();
    for &q in &wrap {
        g.push(Gate::one(GateKind::X, q));
    }
    g.push(Gate::two(GateKind::CZ, 0, 1));
    for &q in &wrap {
        g.push(Gate::one(GateKind::X, q));
    }
    // diffusion: X X·CZ·X X equals Z Z·CZ up to a global phase, and the
    // per-qubit Z·H pair fuses to RY(-pi/2), so the whole reflection is
    // RY(-pi/2) RY(-pi/2)·CZ·H H — two fewer noisy gates per qubit
    g.extend([
        Gate::rot(GateKind::RY, 0, -FRAC_PI_2),
        Gate::rot(GateKind::RY, 1, -FRAC_PI_2),
        Gate::two(GateKind::CZ, 0, 1),
        Gate::one(GateKind::H, 0),
        Gate::one(GateKind::H, 1),
    ]);
    CircuitIR::new(format!("grover_2q_m{marked}_v{variant_seed}"), "Grover", 2, g)
}

/// Bell preparation followed by a trailing RY(0) trim gate: a no-op on
/// the correct circuit, but the natural site for small-angle WRONG_ANGLE
/// perturbations (a trailing RY(delta) shifts each outcome by
/// sin^2(delta/2)/2).
pub fn build_bell_angle_template(name: &str) -> Result<CircuitIR> {
    CircuitIR::new(
        name,
        "Bell",
        2,
        vec![
            Gate::one(GateKind::H, 0),
            Gate::two(GateKind::CX, 0, 1),
            Gate::rot(GateKind::RY, 0, 0.0),
        ],
    )
}

/// Deterministic template construction for one family instance.
pub fn build_template(family: &str, n_qubits: usize, variant_seed: u64) -> Result<CircuitIR> {
    let (lo, hi) = family_qubit_range(family)?;
    if !(lo..=hi).contains(&n_qubits) {
        return Err(Error::InvalidCircuit(format!(
            "{family} supports {lo}..={hi} qubits, got {n_qubits}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(variant_seed, 0xC1C));
    let n = n_qubits;
    let mut g: Vec<Gate> = Vec::new();

    match family {
        "Bell" => {
            g.push(Gate::one(GateKind::H, 0));
            g.push(Gate::two(GateKind::CX, 0, 1));
            decorate(&mut g, n, &mut rng);
        }
        "GHZ" => {
            // cascade from the top qubit downward
            g.push(Gate::one(GateKind::H, n - 1));
            for i in (1..n).rev() {
                g.push(Gate::two(GateKind::CX, i, i - 1));
            }
            decorate(&mut g, n, &mut rng);
        }
        "W" => {
            g.push(Gate::one(GateKind::X, 0));
            for i in 0..n - 1 {
                let theta = 2.0 * (1.0 / (n - i) as f64).sqrt().acos();
                cry(&mut g, theta, i, i + 1);
                g.push(Gate::two(GateKind::CX, i + 1, i));
            }
        }
        "Cluster" => {
            for q in 0..n {
                g.push(Gate::one(GateKind::H, q));
            }
            for q in 0..n - 1 {
                g.push(Gate::two(GateKind::CZ, q, q + 1));
            }
            decorate(&mut g, n, &mut rng);
        }
        "QFT" => {
            let input: usize = rng.gen_range(0..1 << n);
            for q in 0..n {
                if input >> q & 1 == 1 {
                    g.push(Gate::one(GateKind::X, q));
                }
            }
            qft_gates(&mut g, n);
        }
        "Grover" => {
            return build_grover2(rng.gen_range(0..4), variant_seed);
        }
        "DeutschJozsa" => {
            // constant-1 oracle: XZXZ on one qubit is a global phase of -1
            let oq = rng.gen_range(0..n);
            for q in 0..n {
                g.push(Gate::one(GateKind::H, q));
            }
            g.extend([
                Gate::one(GateKind::X, oq),
                Gate::one(GateKind::Z, oq),
                Gate::one(GateKind::X, oq),
                Gate::one(GateKind::Z, oq),
            ]);
            for q in 0..n {
                g.push(Gate::one(GateKind::H, q));
            }
        }
        "BernsteinVazirani" => {
            let secret: usize = rng.gen_range(1..1 << n);
            for q in 0..n {
                g.push(Gate::one(GateKind::H, q));
            }
            for q in 0..n {
                if secret >> q & 1 == 1 {
                    g.push(Gate::one(GateKind::Z, q));
                }
            }
            for q in 0..n {
                g.push(Gate::one(GateKind::H, q));
            }
        }
        "VQE" => {
            for layer in 0..2 {
                for q in 0..n {
                    g.push(Gate::rot(GateKind::RY, q, rng.gen_range(-PI..PI)));
                }
                if layer == 0 {
                    for q in 0..n - 1 {
                        g.push(Gate::two(GateKind::CX, q, q + 1));
                    }
                }
            }
        }
        "QAOA" => {
            let gamma: f64 = rng.gen_range(0.2..1.2);
            let beta: f64 = rng.gen_range(0.2..1.2);
            for q in 0..n {
                g.push(Gate::one(GateKind::H, q));
            }
            for q in 0..n - 1 {
                g.push(Gate::two(GateKind::CX, q, q + 1));
                g.push(Gate::rot(GateKind::RZ, q + 1, 2.0 * gamma));
                g.push(Gate::two(GateKind::CX, q, q + 1));
            }
            for q in 0..n {
                g.push(Gate::rot(GateKind::RX, q, 2.0 * beta));
            }
        }
        "SuperdenseCoding" => {
            let msg: usize = rng.gen_range(0..4);
            g.push(Gate::one(GateKind::H, 0));
            g.push(Gate::two(GateKind::CX, 0, 1));
            if msg & 1 == 1 {
                g.push(Gate::one(GateKind::X, 0));
            }
            if msg & 2 == 2 {
                g.push(Gate::one(GateKind::Z, 0));
            }
            g.push(Gate::two(GateKind::CX, 0, 1));
            g.push(Gate::one(GateKind::H, 0));
        }
        "PhaseEstimation" => {
            // q0 holds the eigenstate |1>, q1..qt count; phase j / 2^t is
            // exactly representable so the readout is deterministic
            let t = n - 1;
            let j: usize = rng.gen_range(1..1 << t);
            let phi = j as f64 / (1 << t) as f64;
            g.push(Gate::one(GateKind::X, 0));
            for q in 1..n {
                g.push(Gate::one(GateKind::H, q));
            }
            for k in 0..t {
                g.push(Gate::new(
                    GateKind::CP,
                    vec![1 + k, 0],
                    vec![2.0 * PI * phi * (1 << k) as f64],
                ));
            }
            let counting: Vec<usize> = (1..n).collect();
            inverse_qft_gates(&mut g, &counting);
        }
        "SwapTest" => {
            // ancilla q0; compared states on q1, q2
            let theta: f64 = rng.gen_range(0.0..PI);
            let identical = rng.gen_bool(0.5);
            g.push(Gate::rot(GateKind::RY, 1, theta));
            if identical {
                g.push(Gate::rot(GateKind::RY, 2, theta));
            } else {
                g.push(Gate::one(GateKind::X, 2));
                g.push(Gate::rot(GateKind::RY, 2, theta));
            }
            g.push(Gate::one(GateKind::H, 0));
            // CSWAP(q0; q1, q2)
            g.push(Gate::two(GateKind::CX, 2, 1));
            g.push(Gate::new(GateKind::CCX, vec![0, 1, 2], vec![]));
            g.push(Gate::two(GateKind::CX, 2, 1));
            g.push(Gate::one(GateKind::H, 0));
        }
        "Clifford" => {
            let len = rng.gen_range(6..=10);
            for _ in 0..len {
                match rng.gen_range(0..3) {
                    0 => g.push(Gate::one(GateKind::H, rng.gen_range(0..n))),
                    1 => g.push(Gate::one(GateKind::S, rng.gen_range(0..n))),
                    _ => {
                        let a = rng.gen_range(0..n);
                        let mut b = rng.gen_range(0..n);
                        while b == a {
                            b = rng.gen_range(0..n);
                        }
                        g.push(Gate::two(GateKind::CX, a, b));
                    }
                }
            }
        }
        "RepetitionCode" => {
            // encode, idle, majority-vote decode; deterministic readout
            if rng.gen_bool(0.5) {
                g.push(Gate::one(GateKind::X, 0));
            }
            g.extend([
                Gate::two(GateKind::CX, 0, 1),
                Gate::two(GateKind::CX, 0, 2),
                Gate::two(GateKind::CX, 0, 1),
                Gate::two(GateKind::CX, 0, 2),
                Gate::new(GateKind::CCX, vec![1, 2, 0], vec![]),
            ]);
        }
        "HardwareEfficient" => {
            let layers = rng.gen_range(1..=3);
            for _ in 0..layers {
                for q in 0..n {
                    g.push(Gate::rot(GateKind::RY, q, rng.gen_range(-PI..PI)));
                    g.push(Gate::rot(GateKind::RZ, q, rng.gen_range(-PI..PI)));
                }
                for q in 0..n - 1 {
                    g.push(Gate::two(GateKind::CX, q, q + 1));
                }
            }
        }
        other => return Err(Error::UnknownFamily(other.to_string())),
    }

    CircuitIR::new(
        format!("{}_{n}q_v{variant_seed}", family.to_lowercase()),
        family,
        n,
        g,
    )
}

fn wrong_gate_for(kind: GateKind) -> Option<GateKind> {
    Some(match kind {
        GateKind::CX => GateKind::CZ,
        GateKind::CZ => GateKind::CX,
        GateKind::SWAP => GateKind::CX,
        GateKind::H => GateKind::X,
        GateKind::X => GateKind::H,
        GateKind::Y => GateKind::X,
        GateKind::Z => GateKind::X,
        GateKind::S => GateKind::SDG,
        GateKind::SDG => GateKind::S,
        GateKind::T => GateKind::S,
        GateKind::RX => GateKind::RY,
        GateKind::RY => GateKind::RX,
        GateKind::RZ => GateKind::RX,
        GateKind::CP | GateKind::CCX => return None,
    })
}

const DEG: f64 = PI / 180.0;

/// One applicable spec per taxonomy class where well-defined, in the
/// fixed order MISSING, WRONG_GATE, WRONG_ANGLE, WRONG_TARGET, EXTRA;
/// small-angle (5 and 15 degree) stress specs are appended when a
/// parameterized gate exists.
pub fn enumerate_bugs(c: &CircuitIR, seed: u64) -> Vec<BugSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xB06));
    let mut specs = Vec::new();

    if !c.gates.is_empty() {
        // prefer removing an entangling gate
        let site = c
            .gates
            .iter()
            .rposition(|g| g.qubits.len() == 2)
            .unwrap_or_else(|| rng.gen_range(0..c.gates.len()));
        specs.push(BugSpec::MissingGate { site });

        let wrong_site = c
            .gates
            .iter()
            .position(|g| g.qubits.len() == 2 && wrong_gate_for(g.kind).is_some())
            .or_else(|| c.gates.iter().position(|g| wrong_gate_for(g.kind).is_some()));
        if let Some(site) = wrong_site {
            specs.push(BugSpec::WrongGate { site, kind: wrong_gate_for(c.gates[site].kind).unwrap() });
        }

        let angle_site = c.gates.iter().position(|g| g.kind.param_count() == 1);
        if let Some(site) = angle_site {
            // the canonical wrong angle: half the intended one
            specs.push(BugSpec::WrongAngle { site, angle: c.gates[site].params[0] / 2.0 });
        }

        if let Some(site) = c.gates.iter().position(|g| g.qubits.len() == 2) {
            let orig = &c.gates[site].qubits;
            let mut pairs = Vec::new();
            for a in 0..c.n_qubits {
                for b in 0..c.n_qubits {
                    if a != b && !(orig[0] == a && orig[1] == b) {
                        pairs.push(vec![a, b]);
                    }
                }
            }
            if !pairs.is_empty() {
                let qubits = pairs[rng.gen_range(0..pairs.len())].clone();
                specs.push(BugSpec::WrongTarget { site, qubits });
            }
        }
    }

    specs.push(BugSpec::ExtraGate {
        site: rng.gen_range(0..=c.gates.len()),
        gate: Gate::one(GateKind::Z, rng.gen_range(0..c.n_qubits)),
    });

    if let Some(site) = c.gates.iter().position(|g| g.kind.param_count() == 1) {
        let theta = c.gates[site].params[0];
        specs.push(BugSpec::WrongAngle { site, angle: theta + 5.0 * DEG });
        specs.push(BugSpec::WrongAngle { site, angle: theta + 15.0 * DEG });
    }

    specs
}

/// Generation configuration for the training dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub n_train_correct: usize,
    pub n_train_buggy: usize,
    pub shots: u64,
    pub seed: u64,
    pub noise: NoiseModel,
    pub families: Vec<String>,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            n_train_correct: 1000,
            n_train_buggy: 1000,
            shots: 4096,
            seed: 0,
            noise: NoiseModel::default(),
            families: FAMILIES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_train_correct == 0 || self.n_train_buggy == 0 {
            return Err(Error::InvalidCircuit("training totals must be positive".into()));
        }
        if self.shots < 256 {
            return Err(Error::InvalidCounts(format!("shots {} below minimum 256", self.shots)));
        }
        if self.families.is_empty() {
            return Err(Error::UnknownFamily("family set empty".into()));
        }
        for f in &self.families {
            family_qubit_range(f)?;
        }
        self.noise.validate()
    }
}

fn pick_qubits(family: &str, rng: &mut ChaCha8Rng) -> Result<usize> {
    let (lo, hi) = family_qubit_range(family)?;
    Ok(rng.gen_range(lo..=hi))
}

/// Z-basis distribution shift an injected bug would cause on noiseless
/// hardware: the Bhattacharyya log-distance between the buggy and parent
/// ideal outputs.
fn ideal_shift(parent: &CircuitIR, parent_ideal: &ProbDist, spec: &BugSpec) -> Result<f64> {
    let buggy = inject_bug(parent, spec)?;
    let b = simulate_ideal(&buggy)?;
    Ok(crate::dist::bhattacharyya_log(&b, parent_ideal)?.log_distance)
}

/// Predicted db_log and entropy-deviation features (up to shot noise) of
/// a buggy run: noisy buggy output against the intended ideal.
fn predicted_profile(
    parent: &CircuitIR,
    parent_ideal: &ProbDist,
    spec: &BugSpec,
    noise: &NoiseModel,
) -> Result<(f64, f64)> {
    let buggy = inject_bug(parent, spec)?;
    let noisy = simulate_noisy(&buggy, noise)?;
    let db = crate::dist::bhattacharyya_log(&noisy, parent_ideal)?.log_distance;
    let dev =
        (crate::dist::shannon_entropy(&noisy) - crate::dist::shannon_entropy(parent_ideal)).abs();
    Ok((db, dev))
}

/// Pool of candidate structural mutations across every gate site, in a
/// seeded random order: deletions, substitutions, retargets, and
/// basis-flipping insertions.
fn structural_candidates(c: &CircuitIR, rng: &mut ChaCha8Rng) -> Vec<BugSpec> {
    let mut pool = Vec::new();
    for (site, g) in c.gates.iter().enumerate() {
        pool.push(BugSpec::MissingGate { site });
        if let Some(kind) = wrong_gate_for(g.kind) {
            pool.push(BugSpec::WrongGate { site, kind });
        }
        if g.qubits.len() == 2 {
            let mut pairs = Vec::new();
            for a in 0..c.n_qubits {
                for b in 0..c.n_qubits {
                    if a != b && !(g.qubits[0] == a && g.qubits[1] == b) {
                        pairs.push(vec![a, b]);
                    }
                }
            }
            if !pairs.is_empty() {
                pool.push(BugSpec::WrongTarget {
                    site,
                    qubits: pairs[rng.gen_range(0..pairs.len())].clone(),
                });
            }
        }
    }
    for _ in 0..3 {
        pool.push(BugSpec::ExtraGate {
            site: rng.gen_range(0..=c.gates.len()),
            gate: Gate::one(GateKind::X, rng.gen_range(0..c.n_qubits)),
        });
    }
    // Fisher-Yates with the caller's seeded rng keeps generation
    // deterministic
    for i in (1..pool.len()).rev() {
        pool.swap(i, rng.gen_range(0..=i));
    }
    pool
}

/// Candidate angle-error magnitudes for the moderate severity band,
/// spanning barely-above-floor to gross.
const MODERATE_DELTAS: [f64; 12] =
    [0.04, 0.07, 0.12, 0.2, 0.3, 0.45, 0.65, 0.9, 1.2, 1.6, 2.0, 2.6];

/// Severity-stratified bug choice.
///
/// Labels must mean something: a "bug" whose output distribution is
/// indistinguishable from the correct circuit's is label noise, so the
/// two dominant severity bands are filtered for visibility.
///
/// - gross (25%): a structural mutation whose ideal output differs from
///   the parent's by db_log >= 0.25; candidates failing the check are
///   skipped.
/// - moderate (65%): a rotation error sized to land a few multiples
///   above this circuit's own noise floor, so the bug signal scales with
///   the circuit's error budget the way a barely-detectable real defect
///   would. Uses an existing parameterized gate when one exists,
///   otherwise inserts a stray rotation.
/// - subtle (10%): 5/15-degree perturbations or a phase-only extra gate;
///   deliberately kept, unfiltered, as the hard tail near or below the
///   detection floor.
fn choose_bug(parent: &CircuitIR, noise: &NoiseModel, rng: &mut ChaCha8Rng) -> Result<BugSpec> {
    let parent_ideal = simulate_ideal(parent)?;
    let angle_site = parent.gates.iter().position(|g| g.kind.param_count() == 1);

    let r: f64 = rng.gen();

    if r >= 0.96 {
        // subtle
        if let Some(site) = angle_site {
            if rng.gen_bool(0.5) {
                let deg = if rng.gen_bool(0.5) { 5.0 } else { 15.0 };
                return Ok(BugSpec::WrongAngle {
                    site,
                    angle: parent.gates[site].params[0] + deg * DEG,
                });
            }
        }
        return Ok(BugSpec::ExtraGate {
            site: rng.gen_range(0..=parent.gates.len()),
            gate: Gate::one(GateKind::Z, rng.gen_range(0..parent.n_qubits)),
        });
    }

    let noisy_parent = simulate_noisy(parent, noise)?;
    let floor =
        crate::dist::bhattacharyya_log(&noisy_parent, &parent_ideal)?.log_distance;
    let floor_dev = (crate::dist::shannon_entropy(&noisy_parent)
        - crate::dist::shannon_entropy(&parent_ideal))
    .abs();
    // High-floor parents get structural bugs: a rotation error a few
    // multiples above an already-high floor would crowd the veto region
    // and carry no classification signal.
    if r >= 0.08 && floor <= 0.10 {
        // moderate: pick the grid angle whose predicted db_log lands
        // closest to the floor-relative target
        let target = (rng.gen_range(1.8..6.0) * floor).clamp(0.03, 0.12);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let make_spec: Box<dyn Fn(f64) -> BugSpec> = if let Some(site) = angle_site {
            let theta = parent.gates[site].params[0];
            Box::new(move |delta| BugSpec::WrongAngle { site, angle: theta + sign * delta })
        } else {
            let site = rng.gen_range(0..=parent.gates.len());
            let qubit = rng.gen_range(0..parent.n_qubits);
            Box::new(move |delta| BugSpec::ExtraGate {
                site,
                gate: Gate::rot(GateKind::RY, qubit, sign * delta),
            })
        };
        // Prefer moderates that maximise entropy deviation over ones
        // that merely hit a distance target: rotation errors on peaked
        // states spread probability mass, so the entropy signature of a
        // bug can dominate while the Bhattacharyya distance stays in
        // band — a far more learnable fingerprint than distance alone.
        let spread_mode = rng.gen_bool(0.85);
        let mut best: Option<(f64, f64, f64, BugSpec)> = None;
        let mut spread_best: Option<(f64, BugSpec)> = None;
        for &delta in &MODERATE_DELTAS {
            let spec = make_spec(delta);
            let (predicted, dev) = predicted_profile(parent, &parent_ideal, &spec, noise)?;
            let miss = (predicted - target).abs();
            if best.as_ref().map_or(true, |(m, ..)| miss < *m) {
                best = Some((miss, predicted, dev, spec.clone()));
            }
            if predicted >= 0.03
                && predicted <= 0.12
                && spread_best.as_ref().map_or(true, |(d, _)| dev > *d)
            {
                spread_best = Some((dev, spec));
            }
        }
        if spread_mode {
            // Only keep a spread bug when the entropy signature clearly
            // exceeds what decoherence alone produces on this circuit;
            // otherwise the row would be indistinguishable from a deep
            // correct run. Weak spreads fall back to ordinary moderates.
            if let Some((dev, spec)) = spread_best {
                if dev >= floor_dev + 0.5 {
                    return Ok(spec);
                }
            }
        }
        let (_, predicted, dev, spec) = best.expect("non-empty delta grid");
        // A moderate that lands below the detection floor with no entropy
        // signature would just be label noise; escalate it to a
        // structural bug instead.
        if predicted >= 0.025 || dev >= floor_dev + 0.4 {
            return Ok(spec);
        }
    }

    // gross structural
    let pool = structural_candidates(parent, rng);
    let mut fallback: Option<(f64, BugSpec)> = None;
    for spec in pool {
        let shift = ideal_shift(parent, &parent_ideal, &spec)?;
        if shift >= 0.25 {
            return Ok(spec);
        }
        if fallback.as_ref().map_or(true, |(s, _)| shift > *s) {
            fallback = Some((shift, spec));
        }
    }
    Ok(fallback.expect("non-empty structural pool").1)
}

fn invert_gate(g: &Gate) -> Gate {
    match g.kind.param_count() {
        1 => Gate::rot(g.kind, g.qubits[0], -g.params[0]),
        // the padding block only uses rotations and self-inverse CX
        _ => g.clone(),
    }
}

/// Echo padding: appends a random block followed by its exact inverse.
/// The ideal output is unchanged while physical depth grows, the way
/// transpiler padding and echo sequences lengthen real executions.
///
/// Dense padding interleaves CX chains (noise floor grows with the
/// two-qubit count); sparse padding is rotation-only (depth grows while
/// the floor barely moves). Layers are trimmed until the padded
/// circuit's noise floor stays safely below the veto region; if even one
/// layer is too noisy the circuit is returned unpadded.
fn echo_pad(
    c: &CircuitIR,
    noise: &NoiseModel,
    max_floor: f64,
    dense_prob: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CircuitIR> {
    let n = c.n_qubits;
    let mut layers = rng.gen_range(3..=8usize);
    let dense = rng.gen_bool(dense_prob);
    let angles: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..n).map(|_| rng.gen_range(-PI..PI)).collect())
        .collect();
    let ideal = simulate_ideal(c)?;
    loop {
        let mut padded = c.clone();
        let mut block = Vec::new();
        for layer in angles.iter().take(layers) {
            for (q, &theta) in layer.iter().enumerate() {
                block.push(Gate::rot(GateKind::RY, q, theta));
            }
            if dense {
                for q in 0..n - 1 {
                    block.push(Gate::two(GateKind::CX, q, q + 1));
                }
            }
        }
        let inv: Vec<Gate> = block.iter().rev().map(invert_gate).collect();
        padded.gates.extend(block);
        padded.gates.extend(inv);
        let floor =
            crate::dist::bhattacharyya_log(&simulate_noisy(&padded, noise)?, &ideal)?.log_distance;
        if floor <= max_floor {
            return Ok(padded);
        }
        if layers == 1 {
            return Ok(c.clone());
        }
        layers -= 1;
    }
}

fn features_row(
    name: String,
    label: u8,
    executed: &CircuitIR,
    intended: &CircuitIR,
    noise: &NoiseModel,
    shots: u64,
    shot_seed: u64,
) -> Result<DatasetRow> {
    let ideal = simulate_ideal(intended)?;
    let noisy = simulate_noisy(executed, noise)?;
    let counts = sample_counts(&noisy, shots, shot_seed)?;
    let f = extract_features(&counts, executed, &ideal)?;
    Ok(DatasetRow::new(name, label, f))
}

/// Generates the class-balanced training dataset. Deterministic in
/// `cfg.seed`; training names carry a `train_` prefix so they can never
/// collide with validation-suite names.
pub fn generate_training_set(cfg: &GenConfig) -> Result<Vec<DatasetRow>> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.n_train_correct + cfg.n_train_buggy);

    for i in 0..cfg.n_train_correct {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x1000_0000 + i as u64));
        let family = &cfg.families[i % cfg.families.len()];
        let n = pick_qubits(family, &mut rng)?;
        let mut c = build_template(family, n, derive_seed(cfg.seed, 0x2000_0000 + i as u64))?;
        if rng.gen_bool(0.85) {
            c = echo_pad(&c, &cfg.noise, 0.17, 0.5, &mut rng)?;
        }
        rows.push(features_row(
            format!("train_correct_{i}_{}", c.name),
            1,
            &c,
            &c,
            &cfg.noise,
            cfg.shots,
            derive_seed(cfg.seed, 0x3000_0000 + i as u64),
        )?);
    }

    for i in 0..cfg.n_train_buggy {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0x4000_0000 + i as u64));
        let family = &cfg.families[i % cfg.families.len()];
        let n = pick_qubits(family, &mut rng)?;
        let mut parent = build_template(family, n, derive_seed(cfg.seed, 0x5000_0000 + i as u64))?;
        if rng.gen_bool(0.75) {
            parent = echo_pad(&parent, &cfg.noise, 0.09, 0.5, &mut rng)?;
        }
        let spec = choose_bug(&parent, &cfg.noise, &mut rng)?;
        let buggy = inject_bug(&parent, &spec)?;
        rows.push(features_row(
            format!("train_buggy_{i}_{}", buggy.name),
            0,
            &buggy,
            &parent,
            &cfg.noise,
            cfg.shots,
            derive_seed(cfg.seed, 0x6000_0000 + i as u64),
        )?);
    }

    Ok(rows)
}

pub fn write_jsonl(rows: &[DatasetRow], path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<DatasetRow>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut rows = Vec::new();
    for line in file.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line)?);
    }
    Ok(rows)
}

/// One executed circuit of the validation suite with its sampled counts
/// and the ideal distribution of the *intended* circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub family: String,
    pub label: Label,
    pub circuit: CircuitIR,
    pub intended_ideal: ProbDist,
    pub counts: Counts,
}

struct Planned {
    family: &'static str,
    intended: CircuitIR,
    executed: CircuitIR,
}

fn correct(family: &'static str, c: CircuitIR) -> Planned {
    Planned { family, intended: c.clone(), executed: c }
}

fn buggy(family: &'static str, parent: CircuitIR, spec: &BugSpec, name: Option<&str>) -> Result<Planned> {
    let mut executed = inject_bug(&parent, spec)?;
    if let Some(n) = name {
        executed.name = n.to_string();
    }
    Ok(Planned { family, intended: parent, executed })
}

fn named(mut c: CircuitIR, name: &str) -> CircuitIR {
    c.name = name.to_string();
    c
}

fn last_site(c: &CircuitIR, pred: impl Fn(&Gate) -> bool) -> usize {
    c.gates.iter().rposition(pred).expect("suite template missing expected gate")
}

fn first_site(c: &CircuitIR, pred: impl Fn(&Gate) -> bool) -> usize {
    c.gates.iter().position(pred).expect("suite template missing expected gate")
}

/// The Table-2-shaped plan: 105 circuits, 61 correct and 44 buggy, with
/// the named reproduction circuits included. Teleportation's 5 dynamic
/// slots hold static graph/GHZ-state stand-ins (recorded in the
/// manifest).
fn suite_plan(seed: u64) -> Result<Vec<Planned>> {
    let mut plan: Vec<Planned> = Vec::with_capacity(105);
    let vs = |k: u64| derive_seed(seed, 0x7000_0000 + k);
    let mut k = 0u64;
    let mut next = move || {
        k += 1;
        k
    };

    // ---- Bell: 8 correct + 6 buggy = 14 ----
    for _ in 0..6 {
        plan.push(correct("Bell", build_template("Bell", 2, vs(next()))?));
    }
    let bell_angle = build_bell_angle_template("bell_angle_correct")?;
    plan.push(correct("Bell", bell_angle.clone()));
    plan.push(correct("Bell", named(build_template("Bell", 2, vs(next()))?, "bell_correct_plain")));

    let bell = build_template("Bell", 2, vs(next()))?;
    let cx = first_site(&bell, |g| g.kind == GateKind::CX);
    plan.push(buggy(
        "Bell",
        bell.clone(),
        &BugSpec::ExtraGate { site: bell.gates.len(), gate: Gate::one(GateKind::Z, 0) },
        Some("bell_extra_z_buggy"),
    )?);
    plan.push(buggy("Bell", bell.clone(), &BugSpec::MissingGate { site: cx }, None)?);
    plan.push(buggy("Bell", bell.clone(), &BugSpec::WrongGate { site: cx, kind: GateKind::CZ }, None)?);
    plan.push(buggy("Bell", bell.clone(), &BugSpec::WrongTarget { site: cx, qubits: vec![1, 0] }, None)?);
    let trim = last_site(&bell_angle, |g| g.kind == GateKind::RY);
    plan.push(buggy(
        "Bell",
        bell_angle.clone(),
        &BugSpec::WrongAngle { site: trim, angle: 5.0 * DEG },
        Some("bell_angle_5deg_buggy"),
    )?);
    plan.push(buggy(
        "Bell",
        bell_angle,
        &BugSpec::WrongAngle { site: trim, angle: 15.0 * DEG },
        Some("bell_angle_15deg_buggy"),
    )?);

    // ---- GHZ: 6 correct + 5 buggy = 11 ----
    for n in [3, 4, 5, 3, 4, 5] {
        plan.push(correct("GHZ", build_template("GHZ", n, vs(next()))?));
    }
    let ghz3 = build_template("GHZ", 3, vs(next()))?;
    // second CX of the cascade (the spec's canonical GHZ bug)
    let second_cx = last_site(&ghz3, |g| g.kind == GateKind::CX);
    plan.push(buggy("GHZ", ghz3.clone(), &BugSpec::MissingGate { site: second_cx }, None)?);
    plan.push(buggy("GHZ", ghz3.clone(), &BugSpec::WrongGate { site: 1, kind: GateKind::CZ }, None)?);
    plan.push(buggy("GHZ", ghz3, &BugSpec::ExtraGate { site: 3, gate: Gate::one(GateKind::X, 0) }, None)?);
    let ghz4 = build_template("GHZ", 4, vs(next()))?;
    plan.push(buggy("GHZ", ghz4.clone(), &BugSpec::MissingGate { site: 0 }, None)?);
    let ghz4_cx = first_site(&ghz4, |g| g.kind == GateKind::CX);
    plan.push(buggy("GHZ", ghz4, &BugSpec::WrongTarget { site: ghz4_cx, qubits: vec![3, 0] }, None)?);

    // ---- W: 2 correct + 2 buggy = 4 ----
    plan.push(correct("W", build_template("W", 3, vs(next()))?));
    plan.push(correct("W", build_template("W", 4, vs(next()))?));
    let w3 = build_template("W", 3, vs(next()))?;
    let w_cx = last_site(&w3, |g| g.kind == GateKind::CX);
    plan.push(buggy("W", w3.clone(), &BugSpec::MissingGate { site: w_cx }, None)?);
    let w_ry = first_site(&w3, |g| g.kind == GateKind::RY);
    let w_theta = w3.gates[w_ry].params[0];
    plan.push(buggy("W", w3, &BugSpec::WrongAngle { site: w_ry, angle: w_theta / 2.0 }, None)?);

    // ---- Cluster: 2 correct + 2 buggy = 4 ----
    plan.push(correct("Cluster", build_template("Cluster", 4, vs(next()))?));
    plan.push(correct("Cluster", build_template("Cluster", 5, vs(next()))?));
    let cl4 = build_template("Cluster", 4, vs(next()))?;
    plan.push(buggy("Cluster", cl4.clone(), &BugSpec::MissingGate { site: 0 }, None)?);
    let cl_cz = first_site(&cl4, |g| g.kind == GateKind::CZ);
    // Z-basis-invisible: dropping a CZ leaves the uniform pattern intact
    plan.push(buggy("Cluster", cl4, &BugSpec::MissingGate { site: cl_cz }, None)?);

    // ---- QFT: 5 correct + 4 buggy = 9 ----
    for n in [2, 3, 4, 5, 3] {
        plan.push(correct("QFT", build_template("QFT", n, vs(next()))?));
    }
    let qft3 = build_template("QFT", 3, vs(next()))?;
    let qft_h = first_site(&qft3, |g| g.kind == GateKind::H);
    plan.push(buggy("QFT", qft3.clone(), &BugSpec::MissingGate { site: qft_h }, None)?);
    plan.push(buggy(
        "QFT",
        qft3.clone(),
        &BugSpec::ExtraGate { site: qft3.gates.len(), gate: Gate::one(GateKind::H, 0) },
        None,
    )?);
    let qft4 = build_template("QFT", 4, vs(next()))?;
    let qft4_h = first_site(&qft4, |g| g.kind == GateKind::H);
    plan.push(buggy("QFT", qft4.clone(), &BugSpec::WrongGate { site: qft4_h, kind: GateKind::X }, None)?);
    // invisible on a basis input: the final SWAP only permutes a uniform output
    let qft4_swap = last_site(&qft4, |g| g.kind == GateKind::SWAP);
    plan.push(buggy("QFT", qft4, &BugSpec::MissingGate { site: qft4_swap }, None)?);

    // ---- Grover: 3 correct + 3 buggy = 6 ----
    plan.push(correct("Grover", named(build_grover2(3, vs(next()))?, "grover_2q_correct")));
    plan.push(correct("Grover", build_grover2(1, vs(next()))?));
    plan.push(correct("Grover", build_grover2(2, vs(next()))?));
    // wrong oracle: CZ replaced by single-qubit Z gates, output uniform
    let grover = build_grover2(3, vs(next()))?;
    let oracle = first_site(&grover, |g| g.kind == GateKind::CZ);
    let mut wrong_oracle_gates = grover.gates.clone();
    wrong_oracle_gates.splice(
        oracle..=oracle,
        [Gate::one(GateKind::Z, 0), Gate::one(GateKind::Z, 1)],
    );
    plan.push(Planned {
        family: "Grover",
        intended: grover.clone(),
        executed: CircuitIR {
            name: "grover_2q_wrong_oracle".to_string(),
            family: "Grover".to_string(),
            label: Label::BUGGY,
            n_qubits: 2,
            gates: wrong_oracle_gates,
            bug: Some(BugSpec::WrongGate { site: oracle, kind: GateKind::Z }),
        },
    });
    plan.push(buggy("Grover", grover.clone(), &BugSpec::MissingGate { site: oracle }, None)?);
    let diff_h = last_site(&grover, |g| g.kind == GateKind::H);
    plan.push(buggy("Grover", grover, &BugSpec::MissingGate { site: diff_h }, None)?);

    // ---- DeutschJozsa: 3 correct + 1 buggy = 4 ----
    plan.push(correct(
        "DeutschJozsa",
        named(build_template("DeutschJozsa", 3, vs(next()))?, "deutsch_jozsa_constant_correct"),
    ));
    plan.push(correct("DeutschJozsa", build_template("DeutschJozsa", 2, vs(next()))?));
    plan.push(correct("DeutschJozsa", build_template("DeutschJozsa", 4, vs(next()))?));
    let dj3 = build_template("DeutschJozsa", 3, vs(next()))?;
    // an extra phase kick inside the oracle turns constant into balanced
    plan.push(buggy(
        "DeutschJozsa",
        dj3.clone(),
        &BugSpec::ExtraGate { site: 4, gate: Gate::one(GateKind::Z, 1) },
        None,
    )?);

    // ---- BernsteinVazirani: 2 correct + 2 buggy = 4 ----
    let bv3 = build_template("BernsteinVazirani", 3, vs(next()))?;
    let bv4 = build_template("BernsteinVazirani", 4, vs(next()))?;
    plan.push(correct("BernsteinVazirani", bv3.clone()));
    plan.push(correct("BernsteinVazirani", bv4.clone()));
    let bv_z = first_site(&bv3, |g| g.kind == GateKind::Z);
    plan.push(buggy("BernsteinVazirani", bv3, &BugSpec::MissingGate { site: bv_z }, None)?);
    plan.push(buggy(
        "BernsteinVazirani",
        bv4.clone(),
        &BugSpec::ExtraGate { site: bv4.gates.len() - 4, gate: Gate::one(GateKind::Z, 0) },
        None,
    )?);

    // ---- VQE: 5 correct + 3 buggy = 8 ----
    for n in [2, 3, 4, 5, 3] {
        plan.push(correct("VQE", build_template("VQE", n, vs(next()))?));
    }
    let vqe3 = build_template("VQE", 3, vs(next()))?;
    let vqe_ry = first_site(&vqe3, |g| g.kind == GateKind::RY);
    let vqe_theta = vqe3.gates[vqe_ry].params[0];
    plan.push(buggy("VQE", vqe3.clone(), &BugSpec::WrongAngle { site: vqe_ry, angle: vqe_theta / 2.0 }, None)?);
    let vqe_cx = first_site(&vqe3, |g| g.kind == GateKind::CX);
    plan.push(buggy("VQE", vqe3, &BugSpec::MissingGate { site: vqe_cx }, None)?);
    let vqe4 = build_template("VQE", 4, vs(next()))?;
    let vqe4_ry = last_site(&vqe4, |g| g.kind == GateKind::RY);
    let vqe4_theta = vqe4.gates[vqe4_ry].params[0];
    plan.push(buggy(
        "VQE",
        vqe4,
        &BugSpec::WrongAngle { site: vqe4_ry, angle: vqe4_theta + 0.4 },
        None,
    )?);

    // ---- QAOA: 3 correct + 2 buggy = 5 ----
    for n in [2, 3, 4] {
        plan.push(correct("QAOA", build_template("QAOA", n, vs(next()))?));
    }
    let qaoa3 = build_template("QAOA", 3, vs(next()))?;
    let qaoa_rx = first_site(&qaoa3, |g| g.kind == GateKind::RX);
    plan.push(buggy("QAOA", qaoa3.clone(), &BugSpec::MissingGate { site: qaoa_rx }, None)?);
    let qaoa_rz = first_site(&qaoa3, |g| g.kind == GateKind::RZ);
    let qaoa_gamma = qaoa3.gates[qaoa_rz].params[0];
    plan.push(buggy(
        "QAOA",
        qaoa3,
        &BugSpec::WrongAngle { site: qaoa_rz, angle: qaoa_gamma / 2.0 },
        None,
    )?);

    // ---- Teleportation slots: 5 static entangled-state stand-ins ----
    for n in [3, 4, 5] {
        let mut c = build_template("Cluster", n, vs(next()))?;
        c.name = format!("teleport_sub_graph_{n}q");
        c.family = "Teleportation".to_string();
        plan.push(correct("Teleportation", c));
    }
    let mut tele_parent = build_template("GHZ", 3, vs(next()))?;
    tele_parent.name = "teleport_sub_ghz_3q".to_string();
    tele_parent.family = "Teleportation".to_string();
    let tele_cx = first_site(&tele_parent, |g| g.kind == GateKind::CX);
    plan.push(buggy("Teleportation", tele_parent.clone(), &BugSpec::MissingGate { site: tele_cx }, None)?);
    plan.push(buggy(
        "Teleportation",
        tele_parent,
        &BugSpec::WrongGate { site: tele_cx, kind: GateKind::CZ },
        None,
    )?);

    // ---- SuperdenseCoding: 4 correct + 2 buggy = 6 ----
    for _ in 0..4 {
        plan.push(correct("SuperdenseCoding", build_template("SuperdenseCoding", 2, vs(next()))?));
    }
    let sdc = build_template("SuperdenseCoding", 2, vs(next()))?;
    let decode_cx = last_site(&sdc, |g| g.kind == GateKind::CX);
    plan.push(buggy("SuperdenseCoding", sdc.clone(), &BugSpec::MissingGate { site: decode_cx }, None)?);
    let decode_h = last_site(&sdc, |g| g.kind == GateKind::H);
    plan.push(buggy("SuperdenseCoding", sdc, &BugSpec::MissingGate { site: decode_h }, None)?);

    // ---- PhaseEstimation: 3 correct + 2 buggy = 5 ----
    for n in [3, 4, 3] {
        plan.push(correct("PhaseEstimation", build_template("PhaseEstimation", n, vs(next()))?));
    }
    let pe = build_template("PhaseEstimation", 3, vs(next()))?;
    let pe_h = first_site(&pe, |g| g.kind == GateKind::H);
    plan.push(buggy("PhaseEstimation", pe.clone(), &BugSpec::MissingGate { site: pe_h }, None)?);
    let pe_cp = first_site(&pe, |g| g.kind == GateKind::CP);
    let pe_phase = pe.gates[pe_cp].params[0];
    plan.push(buggy(
        "PhaseEstimation",
        pe,
        &BugSpec::WrongAngle { site: pe_cp, angle: 2.0 * pe_phase },
        None,
    )?);

    // ---- SwapTest: 2 correct + 2 buggy = 4 ----
    plan.push(correct("SwapTest", build_template("SwapTest", 3, vs(next()))?));
    plan.push(correct("SwapTest", build_template("SwapTest", 3, vs(next()))?));
    let st = build_template("SwapTest", 3, vs(next()))?;
    let st_ccx = first_site(&st, |g| g.kind == GateKind::CCX);
    plan.push(buggy("SwapTest", st.clone(), &BugSpec::MissingGate { site: st_ccx }, None)?);
    let st_h = first_site(&st, |g| g.kind == GateKind::H);
    plan.push(buggy("SwapTest", st, &BugSpec::MissingGate { site: st_h }, None)?);

    // ---- Clifford: 2 correct + 1 buggy = 3 ----
    plan.push(correct("Clifford", build_template("Clifford", 3, vs(next()))?));
    plan.push(correct("Clifford", build_template("Clifford", 4, vs(next()))?));
    let cliff = build_template("Clifford", 3, vs(next()))?;
    plan.push(buggy("Clifford", cliff, &BugSpec::MissingGate { site: 0 }, None)?);

    // ---- RepetitionCode: 3 correct + 2 buggy = 5 ----
    for _ in 0..3 {
        plan.push(correct("RepetitionCode", build_template("RepetitionCode", 3, vs(next()))?));
    }
    let rep = build_template("RepetitionCode", 3, vs(next()))?;
    let rep_cx = first_site(&rep, |g| g.kind == GateKind::CX);
    plan.push(buggy("RepetitionCode", rep.clone(), &BugSpec::MissingGate { site: rep_cx }, None)?);
    plan.push(buggy(
        "RepetitionCode",
        rep,
        &BugSpec::ExtraGate { site: rep_cx + 2, gate: Gate::one(GateKind::X, 1) },
        None,
    )?);

    // ---- HardwareEfficient: 5 correct + 3 buggy = 8 ----
    for n in [2, 3, 4, 5, 3] {
        plan.push(correct("HardwareEfficient", build_template("HardwareEfficient", n, vs(next()))?));
    }
    let hwe3 = build_template("HardwareEfficient", 3, vs(next()))?;
    let hwe_ry = first_site(&hwe3, |g| g.kind == GateKind::RY);
    let hwe_theta = hwe3.gates[hwe_ry].params[0];
    plan.push(buggy("HardwareEfficient", hwe3.clone(), &BugSpec::WrongAngle { site: hwe_ry, angle: hwe_theta / 2.0 }, None)?);
    let hwe_cx = first_site(&hwe3, |g| g.kind == GateKind::CX);
    plan.push(buggy("HardwareEfficient", hwe3, &BugSpec::MissingGate { site: hwe_cx }, None)?);
    let hwe4 = build_template("HardwareEfficient", 4, vs(next()))?;
    let hwe4_ry = last_site(&hwe4, |g| g.kind == GateKind::RY);
    plan.push(buggy(
        "HardwareEfficient",
        hwe4.clone(),
        &BugSpec::WrongAngle { site: hwe4_ry, angle: hwe4.gates[hwe4_ry].params[0] - 0.5 },
        None,
    )?);

    Ok(plan)
}

/// Materializes the 105-circuit suite: each circuit is executed once
/// under the noise model at the given shot count.
pub fn generate_validation_suite(seed: u64, noise: &NoiseModel, shots: u64) -> Result<Vec<SuiteEntry>> {
    noise.validate()?;
    let plan = suite_plan(seed)?;
    let mut entries = Vec::with_capacity(plan.len());
    let mut seen = std::collections::BTreeSet::new();
    for (i, p) in plan.into_iter().enumerate() {
        let mut name = p.executed.name.clone();
        if !seen.insert(name.clone()) {
            name = format!("{name}_{i}");
            seen.insert(name.clone());
        }
        let intended_ideal = simulate_ideal(&p.intended)?;
        let noisy = simulate_noisy(&p.executed, noise)?;
        let counts = sample_counts(&noisy, shots, derive_seed(seed, 0x8000_0000 + i as u64))?;
        entries.push(SuiteEntry {
            name,
            family: p.family.to_string(),
            label: p.executed.label,
            circuit: p.executed,
            intended_ideal,
            counts,
        });
    }
    Ok(entries)
}

/// Extracts the feature row for one suite entry (label 1 = CORRECT).
pub fn suite_entry_row(e: &SuiteEntry) -> Result<DatasetRow> {
    let f = extract_features(&e.counts, &e.circuit, &e.intended_ideal)?;
    Ok(DatasetRow::new(
        e.name.clone(),
        if e.label == Label::CORRECT { 1 } else { 0 },
        f,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteManifestEntry {
    pub name: String,
    pub family: String,
    pub label: Label,
    pub circuit_file: String,
    pub counts_file: String,
    pub ideal_file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub note: String,
    pub entries: Vec<SuiteManifestEntry>,
}

/// Writes the suite as one directory: per-circuit JSON triples plus a
/// manifest.
pub fn write_suite(dir: impl AsRef<Path>, entries: &[SuiteEntry]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut manifest = SuiteManifest {
        note: "Teleportation-family entries are static graph/GHZ-state stand-ins; \
               dynamic feed-forward circuits are out of scope."
            .to_string(),
        entries: Vec::new(),
    };
    for e in entries {
        let circuit_file = format!("{}.circuit.json", e.name);
        let counts_file = format!("{}.counts.json", e.name);
        let ideal_file = format!("{}.ideal.json", e.name);
        std::fs::write(dir.join(&circuit_file), serde_json::to_string_pretty(&e.circuit)?)?;
        std::fs::write(dir.join(&counts_file), serde_json::to_string_pretty(&e.counts)?)?;
        std::fs::write(dir.join(&ideal_file), serde_json::to_string_pretty(&e.intended_ideal)?)?;
        manifest.entries.push(SuiteManifestEntry {
            name: e.name.clone(),
            family: e.family.clone(),
            label: e.label,
            circuit_file,
            counts_file,
            ideal_file,
        });
    }
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn read_suite(dir: impl AsRef<Path>) -> Result<Vec<SuiteEntry>> {
    let dir = dir.as_ref();
    let manifest: SuiteManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let mut entries = Vec::new();
    for m in manifest.entries {
        let circuit: CircuitIR =
            serde_json::from_str(&std::fs::read_to_string(dir.join(&m.circuit_file))?)?;
        let counts: Counts =
            serde_json::from_str(&std::fs::read_to_string(dir.join(&m.counts_file))?)?;
        let intended_ideal: ProbDist =
            serde_json::from_str(&std::fs::read_to_string(dir.join(&m.ideal_file))?)?;
        entries.push(SuiteEntry {
            name: m.name,
            family: m.family,
            label: m.label,
            circuit,
            intended_ideal,
            counts,
        });
    }
    Ok(entries)
}
