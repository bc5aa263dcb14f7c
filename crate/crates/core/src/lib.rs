//! Quantum error attribution toolkit: decides whether a quantum
//! circuit's execution results look like a software bug or like expected
//! hardware noise.
//!
//! The pipeline: simulate or load measurement counts, extract seven
//! distributional and structural features, run them through a trained
//! neuro-fuzzy classifier, and apply a hard Bhattacharyya-distance veto
//! for results that are distributionally incompatible with the intended
//! circuit.

pub mod anfis;
pub mod attribution;
pub mod circuit;
pub mod datagen;
pub mod dist;
pub mod error;
pub mod eval;
pub mod features;
pub mod gates;
pub mod sim;

pub use anfis::{AnfisModel, Thresholds, TrainConfig};
pub use attribution::{classify, explain, extract_rules, Verdict, VerdictClass};
pub use circuit::{BugSpec, CircuitIR, Gate, GateKind, Label};
pub use dist::{Counts, ProbDist};
pub use error::{Error, Result};
pub use eval::Report;
pub use features::{FeatureVector, Normalizer};
pub use sim::NoiseModel;
