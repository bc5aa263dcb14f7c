//! Gate-list circuit representation, structural metrics, and the
//! five-class bug-injection mutator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    SDG,
    T,
    RX,
    RY,
    RZ,
    CX,
    CZ,
    CP,
    SWAP,
    CCX,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::S
            | GateKind::SDG
            | GateKind::T
            | GateKind::RX
            | GateKind::RY
            | GateKind::RZ => 1,
            GateKind::CX | GateKind::CZ | GateKind::CP | GateKind::SWAP => 2,
            GateKind::CCX => 3,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::CP => 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Vec<f64>) -> Self {
        Self { kind, qubits, params }
    }

    pub fn one(kind: GateKind, q: usize) -> Self {
        Self::new(kind, vec![q], vec![])
    }

    pub fn rot(kind: GateKind, q: usize, angle: f64) -> Self {
        Self::new(kind, vec![q], vec![angle])
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        Self::new(kind, vec![a, b], vec![])
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::InvalidCircuit(format!(
                "{:?} expects {} qubits, got {}",
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        if self.params.len() != self.kind.param_count() {
            return Err(Error::InvalidCircuit(format!(
                "{:?} expects {} params, got {}",
                self.kind,
                self.kind.param_count(),
                self.params.len()
            )));
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(Error::InvalidCircuit(format!(
                    "qubit {q} out of range (n_qubits = {n_qubits})"
                )));
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::InvalidCircuit(format!("duplicate qubit {q} in gate")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    CORRECT,
    BUGGY,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BugSpec {
    MissingGate {
        site: usize,
    },
    WrongGate {
        site: usize,
        #[serde(rename = "detail")]
        kind: GateKind,
    },
    WrongAngle {
        site: usize,
        #[serde(rename = "detail")]
        angle: f64,
    },
    WrongTarget {
        site: usize,
        #[serde(rename = "detail")]
        qubits: Vec<usize>,
    },
    ExtraGate {
        site: usize,
        #[serde(rename = "detail")]
        gate: Gate,
    },
}

impl BugSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            BugSpec::MissingGate { .. } => "missing_gate",
            BugSpec::WrongGate { .. } => "wrong_gate",
            BugSpec::WrongAngle { .. } => "wrong_angle",
            BugSpec::WrongTarget { .. } => "wrong_target",
            BugSpec::ExtraGate { .. } => "extra_gate",
        }
    }

    fn site(&self) -> usize {
        match self {
            BugSpec::MissingGate { site }
            | BugSpec::WrongGate { site, .. }
            | BugSpec::WrongAngle { site, .. }
            | BugSpec::WrongTarget { site, .. }
            | BugSpec::ExtraGate { site, .. } => *site,
        }
    }
}

/// Qubit counts are limited to 2..=5: the validation families live in that
/// range and density-matrix simulation stays exact there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitIR {
    pub name: String,
    pub family: String,
    pub label: Label,
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bug: Option<BugSpec>,
}

impl CircuitIR {
    pub fn new(
        name: impl Into<String>,
        family: impl Into<String>,
        n_qubits: usize,
        gates: Vec<Gate>,
    ) -> Result<Self> {
        let c = Self {
            name: name.into(),
            family: family.into(),
            label: Label::CORRECT,
            n_qubits,
            gates,
            bug: None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=5).contains(&self.n_qubits) {
            return Err(Error::InvalidCircuit(format!(
                "n_qubits {} outside [2,5]",
                self.n_qubits
            )));
        }
        for g in &self.gates {
            g.validate(self.n_qubits)?;
        }
        Ok(())
    }
}

/// Layered depth: each gate sits at 1 + max layer of earlier gates that
/// share a qubit with it. Measurements are implicit and do not count.
pub fn depth(c: &CircuitIR) -> usize {
    let mut layer_of_qubit = vec![0usize; c.n_qubits];
    let mut max_layer = 0;
    for g in &c.gates {
        let layer = 1 + g.qubits.iter().map(|&q| layer_of_qubit[q]).max().unwrap_or(0);
        for &q in &g.qubits {
            layer_of_qubit[q] = layer;
        }
        max_layer = max_layer.max(layer);
    }
    max_layer
}

/// Logarithmic depth compression ln(1 + d).
pub fn norm_depth(d: usize) -> f64 {
    (d as f64).ln_1p()
}

/// Fraction of gates acting on exactly two qubits; 0 for an empty circuit.
pub fn two_qubit_density(c: &CircuitIR) -> f64 {
    if c.gates.is_empty() {
        return 0.0;
    }
    let two_q = c.gates.iter().filter(|g| g.qubits.len() == 2).count();
    two_q as f64 / c.gates.len() as f64
}

/// Returns a new BUGGY circuit with the mutation applied; the input is
/// left untouched.
pub fn inject_bug(c: &CircuitIR, spec: &BugSpec) -> Result<CircuitIR> {
    if c.label != Label::CORRECT {
        return Err(Error::InvalidBugSpec("can only inject into a CORRECT circuit".into()));
    }
    let site = spec.site();
    let max_site = match spec {
        BugSpec::ExtraGate { .. } => c.gates.len(),
        _ => c.gates.len().saturating_sub(1),
    };
    if site > max_site || (c.gates.is_empty() && !matches!(spec, BugSpec::ExtraGate { .. })) {
        return Err(Error::InvalidBugSpec(format!("site {site} out of range")));
    }

    let mut gates = c.gates.clone();
    match spec {
        BugSpec::MissingGate { site } => {
            gates.remove(*site);
        }
        BugSpec::WrongGate { site, kind } => {
            let g = &mut gates[*site];
            if kind.arity() != g.kind.arity() {
                return Err(Error::InvalidBugSpec(format!(
                    "arity mismatch replacing {:?} with {:?}",
                    g.kind, kind
                )));
            }
            if kind.param_count() != g.kind.param_count() {
                return Err(Error::InvalidBugSpec(format!(
                    "param mismatch replacing {:?} with {:?}",
                    g.kind, kind
                )));
            }
            g.kind = *kind;
        }
        BugSpec::WrongAngle { site, angle } => {
            let g = &mut gates[*site];
            if g.kind.param_count() == 0 {
                return Err(Error::InvalidBugSpec(format!(
                    "{:?} at site {site} takes no angle",
                    g.kind
                )));
            }
            g.params[0] = *angle;
        }
        BugSpec::WrongTarget { site, qubits } => {
            let g = &mut gates[*site];
            let replacement = Gate::new(g.kind, qubits.clone(), g.params.clone());
            replacement.validate(c.n_qubits)?;
            *g = replacement;
        }
        BugSpec::ExtraGate { site, gate } => {
            gate.validate(c.n_qubits)?;
            gates.insert(*site, gate.clone());
        }
    }

    let buggy = CircuitIR {
        name: format!("{}_{}", c.name, spec.kind_name()),
        family: c.family.clone(),
        label: Label::BUGGY,
        n_qubits: c.n_qubits,
        gates,
        bug: Some(spec.clone()),
    };
    buggy.validate()?;
    Ok(buggy)
}
