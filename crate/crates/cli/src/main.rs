//! `qtriage`: CI-style triage pipeline for quantum error attribution.
//!
//! Exit-code contract for `classify`: 0 = HARDWARE_NOISE (pass with
//! warning), 1 = SOFTWARE_BUG (fail the build), 2 = UNCERTAIN (flag for
//! review), 3 = malformed input. All other commands exit 0 on success
//! and 3 on error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use qtriage::anfis::{self, TrainConfig, N_RULES};
use qtriage::attribution::{self, VerdictClass};
use qtriage::circuit::{inject_bug, BugSpec, CircuitIR, Gate, GateKind};
use qtriage::datagen::{self, GenConfig};
use qtriage::dist::Counts;
use qtriage::error::Error;
use qtriage::eval;
use qtriage::features::{fit_normalizer, DatasetRow};
use qtriage::sim::{sample_counts, simulate_ideal, simulate_noisy, NoiseModel};

#[derive(Parser)]
#[command(name = "qtriage", version, about = "Quantum error attribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// Root seed; falls back to the QTRIAGE_SEED environment variable,
    /// then to 0.
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> Result<u64, String> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var("QTRIAGE_SEED") {
            Ok(v) => v.parse().map_err(|_| format!("QTRIAGE_SEED is not an integer: {v:?}")),
            Err(_) => Ok(0),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the training dataset and the validation suite.
    GenData {
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        /// Noise-model JSON file; defaults to the built-in model.
        #[arg(long)]
        noise: Option<PathBuf>,
        #[arg(long, default_value_t = 4096)]
        shots: u64,
        #[arg(long, default_value_t = 1000)]
        train_correct: usize,
        #[arg(long, default_value_t = 1000)]
        train_buggy: usize,
    },
    /// Train the classifier on a JSONL dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0.005)]
        lr: f64,
        #[arg(long, default_value_t = 1e-4)]
        weight_decay: f64,
        #[arg(long, default_value_t = 60)]
        patience: usize,
        /// Rule count; only the reference configuration of 16 is
        /// implemented.
        #[arg(long, default_value_t = 16)]
        rules: usize,
        #[arg(long, default_value_t = false)]
        allow_nonpaper: bool,
    },
    /// Classify one execution: counts against the intended circuit.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        counts: PathBuf,
        /// The intended circuit; its noiseless distribution is the
        /// comparison reference.
        #[arg(long)]
        circuit: PathBuf,
    },
    /// Score a model over a generated suite directory.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value = "json")]
        format: String,
        /// Optional output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inject a bug into a circuit file.
    Inject {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// MISSING_GATE | WRONG_GATE | WRONG_ANGLE | WRONG_TARGET | EXTRA_GATE
        #[arg(long)]
        bug: String,
        #[arg(long)]
        site: usize,
        /// Replacement gate kind for WRONG_GATE (e.g. CZ).
        #[arg(long)]
        kind: Option<String>,
        /// New angle for WRONG_ANGLE, radians.
        #[arg(long)]
        angle: Option<f64>,
        /// New qubit list for WRONG_TARGET, comma-separated.
        #[arg(long)]
        qubits: Option<String>,
        /// Inserted gate for EXTRA_GATE as JSON, e.g. {"kind":"Z","qubits":[0]}.
        #[arg(long)]
        gate: Option<String>,
    },
    /// Simulate a circuit and write sampled counts.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Disable noise entirely (ideal sampling).
        #[arg(long, default_value_t = false)]
        no_noise: bool,
        #[arg(long, default_value_t = 4096)]
        shots: u64,
    },
    /// Print the 16 extracted fuzzy rules of a trained model.
    ExplainRules {
        #[arg(long)]
        model: PathBuf,
        /// Reference dataset (JSONL) for percentile binning.
        #[arg(long)]
        data: PathBuf,
    },
}

/// Reproducibility sidecar written next to every generated artifact.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    seed: u64,
    inputs: Vec<String>,
    outputs: Vec<String>,
    tool_version: String,
    noise_model_hash: String,
    sampler_version: String,
}

fn noise_hash(nm: &NoiseModel) -> Result<String, Error> {
    let canonical = serde_json::to_vec(nm)?;
    Ok(format!("sha256:{:x}", Sha256::digest(&canonical)))
}

fn write_manifest(path: &Path, m: &RunManifest) -> Result<(), Error> {
    std::fs::write(path, serde_json::to_string_pretty(m)?)?;
    Ok(())
}

fn load_noise(path: &Option<PathBuf>) -> Result<NoiseModel, Error> {
    let nm: NoiseModel = match path {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => NoiseModel::default(),
    };
    nm.validate()?;
    Ok(nm)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn run() -> Result<u8, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenData { out, seed, noise, shots, train_correct, train_buggy } => {
            let seed = seed.resolve()?;
            let noise_model = load_noise(&noise).map_err(|e| e.to_string())?;
            let cfg = GenConfig {
                n_train_correct: train_correct,
                n_train_buggy: train_buggy,
                shots,
                seed,
                noise: noise_model.clone(),
                ..GenConfig::default()
            };
            std::fs::create_dir_all(&out).map_err(|e| e.to_string())?;
            let rows = datagen::generate_training_set(&cfg).map_err(|e| e.to_string())?;
            let train_path = out.join("train.jsonl");
            datagen::write_jsonl(&rows, &train_path).map_err(|e| e.to_string())?;
            let suite = datagen::generate_validation_suite(seed, &noise_model, shots)
                .map_err(|e| e.to_string())?;
            let suite_dir = out.join("suite");
            datagen::write_suite(&suite_dir, &suite).map_err(|e| e.to_string())?;
            let manifest = RunManifest {
                command: "gen-data".into(),
                seed,
                inputs: noise.iter().map(|p| p.display().to_string()).collect(),
                outputs: vec![train_path.display().to_string(), suite_dir.display().to_string()],
                tool_version: env!("CARGO_PKG_VERSION").into(),
                noise_model_hash: noise_hash(&noise_model).map_err(|e| e.to_string())?,
                sampler_version: qtriage::sim::SAMPLER_VERSION.into(),
            };
            write_manifest(&out.join("run_manifest.json"), &manifest).map_err(|e| e.to_string())?;
            println!("wrote {} training rows and a {}-circuit suite", rows.len(), suite.len());
            Ok(0)
        }
        Command::Train { data, out, seed, epochs, lr, weight_decay, patience, rules, allow_nonpaper } => {
            if rules != N_RULES {
                if !allow_nonpaper {
                    return Err(format!(
                        "--rules {rules} deviates from the reference configuration of {N_RULES}; \
                         pass --allow-nonpaper to acknowledge"
                    ));
                }
                return Err(format!(
                    "only the {N_RULES}-rule configuration is implemented in this build"
                ));
            }
            let seed = seed.resolve()?;
            let rows = datagen::read_jsonl(&data).map_err(|e| e.to_string())?;
            let feats: Vec<_> = rows.iter().map(|r| r.features()).collect();
            let normalizer = fit_normalizer(&feats).map_err(|e| e.to_string())?;
            let cfg = TrainConfig {
                lr,
                weight_decay,
                max_epochs: epochs,
                patience,
                seed,
                ..TrainConfig::default()
            };
            let (model, history) = anfis::train(&rows, &normalizer, &cfg).map_err(|e| e.to_string())?;
            anfis::save_checkpoint(&model, &out).map_err(|e| e.to_string())?;
            let history_path = out.with_extension("history.json");
            std::fs::write(&history_path, serde_json::to_string_pretty(&history).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let manifest = RunManifest {
                command: "train".into(),
                seed,
                inputs: vec![data.display().to_string()],
                outputs: vec![out.display().to_string(), history_path.display().to_string()],
                tool_version: env!("CARGO_PKG_VERSION").into(),
                noise_model_hash: String::new(),
                sampler_version: qtriage::sim::SAMPLER_VERSION.into(),
            };
            write_manifest(&out.with_extension("manifest.json"), &manifest)
                .map_err(|e| e.to_string())?;
            let best = history.iter().map(|h| h.val_accuracy).fold(0.0, f64::max);
            println!("epochs: {}  best validation accuracy: {best:.4}", history.len());
            Ok(0)
        }
        Command::Classify { model, counts, circuit } => {
            let m = anfis::load_checkpoint(&model).map_err(|e| e.to_string())?;
            let counts: Counts = read_json(&counts).map_err(|e| e.to_string())?;
            counts.validate().map_err(|e| e.to_string())?;
            let circuit: CircuitIR = read_json(&circuit).map_err(|e| e.to_string())?;
            circuit.validate().map_err(|e| e.to_string())?;
            let ideal = simulate_ideal(&circuit).map_err(|e| e.to_string())?;
            let f = qtriage::features::extract_features(&counts, &circuit, &ideal)
                .map_err(|e| e.to_string())?;
            let verdict = attribution::classify(&f, &m, &circuit.name).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string_pretty(&verdict).map_err(|e| e.to_string())?);
            println!("{}", attribution::explain(&verdict, &m));
            Ok(match verdict.klass {
                VerdictClass::HardwareNoise => 0,
                VerdictClass::SoftwareBug => 1,
                VerdictClass::Uncertain => 2,
            })
        }
        Command::Evaluate { model, suite, format, out } => {
            let m = anfis::load_checkpoint(&model).map_err(|e| e.to_string())?;
            let entries = datagen::read_suite(&suite).map_err(|e| e.to_string())?;
            let rows: Vec<DatasetRow> = entries
                .iter()
                .map(datagen::suite_entry_row)
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            let report = eval::evaluate(&m, &rows).map_err(|e| e.to_string())?;
            let rendered = match format.as_str() {
                "json" => serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?,
                "csv" => eval::report_to_csv(&report),
                other => return Err(format!("unknown format {other:?} (expected json or csv)")),
            };
            match out {
                Some(p) => std::fs::write(p, rendered.as_bytes()).map_err(|e| e.to_string())?,
                None => println!("{rendered}"),
            }
            Ok(0)
        }
        Command::Inject { circuit, out, bug, site, kind, angle, qubits, gate } => {
            let c: CircuitIR = read_json(&circuit).map_err(|e| e.to_string())?;
            let parse_kind = |s: &str| -> Result<GateKind, String> {
                serde_json::from_value(serde_json::Value::String(s.to_string()))
                    .map_err(|_| format!("unknown gate kind {s:?}"))
            };
            let spec = match bug.as_str() {
                "MISSING_GATE" => BugSpec::MissingGate { site },
                "WRONG_GATE" => BugSpec::WrongGate {
                    site,
                    kind: parse_kind(&kind.ok_or("--kind required for WRONG_GATE")?)?,
                },
                "WRONG_ANGLE" => BugSpec::WrongAngle {
                    site,
                    angle: angle.ok_or("--angle required for WRONG_ANGLE")?,
                },
                "WRONG_TARGET" => {
                    let list = qubits.ok_or("--qubits required for WRONG_TARGET")?;
                    let parsed: Result<Vec<usize>, _> =
                        list.split(',').map(|t| t.trim().parse()).collect();
                    BugSpec::WrongTarget {
                        site,
                        qubits: parsed.map_err(|_| format!("bad qubit list {list:?}"))?,
                    }
                }
                "EXTRA_GATE" => {
                    let json = gate.ok_or("--gate required for EXTRA_GATE")?;
                    let g: Gate =
                        serde_json::from_str(&json).map_err(|e| format!("bad gate JSON: {e}"))?;
                    BugSpec::ExtraGate { site, gate: g }
                }
                other => return Err(format!("unknown bug kind {other:?}")),
            };
            let buggy = inject_bug(&c, &spec).map_err(|e| e.to_string())?;
            std::fs::write(&out, serde_json::to_string_pretty(&buggy).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Simulate { circuit, out, seed, noise, no_noise, shots } => {
            let seed = seed.resolve()?;
            let c: CircuitIR = read_json(&circuit).map_err(|e| e.to_string())?;
            c.validate().map_err(|e| e.to_string())?;
            let noise_model =
                if no_noise { NoiseModel::disabled() } else { load_noise(&noise).map_err(|e| e.to_string())? };
            let dist = simulate_noisy(&c, &noise_model).map_err(|e| e.to_string())?;
            let counts = sample_counts(&dist, shots, seed).map_err(|e| e.to_string())?;
            std::fs::write(&out, serde_json::to_string_pretty(&counts).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let manifest = RunManifest {
                command: "simulate".into(),
                seed,
                inputs: vec![circuit.display().to_string()],
                outputs: vec![out.display().to_string()],
                tool_version: env!("CARGO_PKG_VERSION").into(),
                noise_model_hash: noise_hash(&noise_model).map_err(|e| e.to_string())?,
                sampler_version: qtriage::sim::SAMPLER_VERSION.into(),
            };
            write_manifest(&out.with_extension("manifest.json"), &manifest)
                .map_err(|e| e.to_string())?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::ExplainRules { model, data } => {
            let m = anfis::load_checkpoint(&model).map_err(|e| e.to_string())?;
            let rows = datagen::read_jsonl(&data).map_err(|e| e.to_string())?;
            let feats: Vec<_> = rows.iter().map(|r| r.features()).collect();
            let rules = attribution::extract_rules(&m, &feats).map_err(|e| e.to_string())?;
            for (i, r) in rules.iter().enumerate() {
                println!("rule {i:2}: {r}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
