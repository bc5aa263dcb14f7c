//! Acceptance suite: ten numbered end-to-end criteria, each printing a
//! single `criterion N: PASS — …` line (visible with `--nocapture`).
//! Tolerances are stated inline next to every check.
//!
//! Criteria 1–9 exercise the library directly against a shared fixture
//! (one `gen-data` + `train` run through the real CLI binary); criterion
//! 10 re-runs the full CLI pipeline twice and byte-compares artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qtriage::anfis::{self, class_weights, Sample, TrainConfig, N_PARAMS};
use qtriage::attribution::classify;
use qtriage::datagen::{self, suite_entry_row, SuiteEntry};
use qtriage::dist::{
    bhattacharyya_log, bias_l2, from_counts, max_prob, shannon_entropy, Counts, ProbDist,
};
use qtriage::eval::{self, logistic_baseline, wilson_ci};
use qtriage::features::{apply_normalizer, DatasetRow, Normalizer};
use qtriage::gates;
use qtriage::sim::{
    channel_kraus, simulate_ideal, simulate_noisy, ChannelKind, DensityMatrix, NoiseModel,
};
use qtriage::{AnfisModel, Label, VerdictClass};

const BIN: &str = env!("CARGO_BIN_EXE_qtriage");

struct Fixture {
    #[allow(dead_code)]
    dir: tempfile::TempDir,
    rows: Vec<DatasetRow>,
    model: AnfisModel,
    suite: Vec<SuiteEntry>,
    train_secs: f64,
}

fn run_cli(args: &[&str]) {
    let out = Command::new(BIN).args(args).output().expect("spawn qtriage");
    assert!(
        out.status.success(),
        "qtriage {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn fixture() -> &'static Fixture {
    static FIX: OnceLock<Fixture> = OnceLock::new();
    FIX.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let data = dir.path().join("run");
        let model_path = dir.path().join("model.json");
        run_cli(&["gen-data", "--out", data.to_str().unwrap(), "--seed", "0"]);
        let t0 = Instant::now();
        run_cli(&[
            "train",
            "--data",
            data.join("train.jsonl").to_str().unwrap(),
            "--out",
            model_path.to_str().unwrap(),
            "--seed",
            "0",
        ]);
        let train_secs = t0.elapsed().as_secs_f64();
        let rows = datagen::read_jsonl(data.join("train.jsonl")).expect("read rows");
        let model = anfis::load_checkpoint(&model_path).expect("load checkpoint");
        let suite = datagen::read_suite(data.join("suite")).expect("read suite");
        Fixture { dir, rows, model, suite, train_secs }
    })
}

fn counts(pairs: &[(&str, u64)]) -> Counts {
    let map: BTreeMap<String, u64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let shots = map.values().sum();
    Counts::new(map, shots).expect("counts")
}

fn random_dist(n_qubits: usize, rng: &mut ChaCha8Rng) -> ProbDist {
    let d = 1usize << n_qubits;
    let mut p: Vec<f64> = (0..d).map(|_| rng.gen_range(1e-6..1.0)).collect();
    let s: f64 = p.iter().sum();
    for x in &mut p {
        *x /= s;
    }
    ProbDist::new(n_qubits, p).expect("dist")
}

fn suite_row(fix: &Fixture, name: &str) -> DatasetRow {
    let e = fix.suite.iter().find(|e| e.name == name).unwrap_or_else(|| {
        panic!("suite entry {name} missing");
    });
    suite_entry_row(e).expect("suite row")
}

#[test]
fn criterion_01_metric_identities() {
    let t0 = Instant::now();
    let tol = 1e-12;

    // from_counts examples
    let p = from_counts(&counts(&[("00", 2048), ("11", 2048)])).unwrap();
    assert_eq!(p.probs, vec![0.5, 0.0, 0.0, 0.5]);
    let delta = from_counts(&counts(&[("1", 4096)])).unwrap();
    assert_eq!(delta.probs, vec![0.0, 1.0]);
    let uni =
        from_counts(&counts(&[("00", 1024), ("01", 1024), ("10", 1024), ("11", 1024)])).unwrap();
    assert!(uni.probs.iter().all(|&x| (x - 0.25).abs() <= tol));

    // entropy / bias / max_prob closed forms
    assert!((shannon_entropy(&p) - 1.0).abs() <= tol, "H([.5,0,0,.5]) != 1");
    assert!((shannon_entropy(&uni) - 2.0).abs() <= tol, "H(uniform4) != 2");
    assert!(shannon_entropy(&delta).abs() <= tol, "H(delta) != 0");
    assert!(bias_l2(&uni).abs() <= tol, "bias(uniform) != 0");
    let delta2 = from_counts(&counts(&[("00", 4096)])).unwrap();
    assert!((bias_l2(&delta2) - 0.75f64.sqrt()).abs() <= tol, "bias(delta,n=2)");
    assert!((bias_l2(&p) - 0.5).abs() <= tol, "bias([.5,0,0,.5])");
    assert!((max_prob(&delta) - 1.0).abs() <= tol);
    assert!((max_prob(&uni) - 0.25).abs() <= tol);
    assert!((max_prob(&p) - 0.5).abs() <= tol);

    // Bhattacharyya closed forms
    let same = bhattacharyya_log(&p, &p).unwrap();
    assert!((same.coefficient - 1.0).abs() <= tol && same.log_distance.abs() <= tol);
    let a = ProbDist::new(1, vec![1.0, 0.0]).unwrap();
    let b = ProbDist::new(1, vec![0.0, 1.0]).unwrap();
    let disjoint = bhattacharyya_log(&a, &b).unwrap();
    assert!((disjoint.log_distance - 11f64.ln()).abs() <= tol, "disjoint db_log != ln(11)");
    let c = ProbDist::new(1, vec![0.5, 0.5]).unwrap();
    let d = ProbDist::new(1, vec![0.9, 0.1]).unwrap();
    let got = bhattacharyya_log(&c, &d).unwrap();
    let bc = 0.45f64.sqrt() + 0.05f64.sqrt();
    assert!((got.coefficient - bc).abs() <= tol);
    assert!((got.log_distance - (1.0 + (-bc.ln())).ln()).abs() <= tol);

    // symmetry and self-distance over 1,000 random distributions
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..1000 {
        let n = 1 + (i % 4);
        let p = random_dist(n, &mut rng);
        let q = random_dist(n, &mut rng);
        let pq = bhattacharyya_log(&p, &q).unwrap().log_distance;
        let qp = bhattacharyya_log(&q, &p).unwrap().log_distance;
        assert!(pq == qp, "BC symmetry violated at i={i}");
        let selfbc = bhattacharyya_log(&p, &p).unwrap().coefficient;
        assert!((selfbc - 1.0).abs() <= tol, "BC(p,p) != 1 at i={i}");
    }

    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 1.0, "criterion 1: FAIL — runtime {secs:.2}s >= 1s");
    println!(
        "criterion 1: PASS — metric identities to 1e-12, BC symmetric/self-unit over 1000 dists, {secs:.2}s < 1s"
    );
}

#[test]
fn criterion_02_simulator_physics() {
    let t0 = Instant::now();
    let fix = fixture();

    // Kraus completeness: sum K^dag K = I to 1e-12 for 100 random draws
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut max_defect: f64 = 0.0;
    for _ in 0..100 {
        let param: f64 = rng.gen_range(0.0..1.0);
        for kind in [
            ChannelKind::AmpDamp,
            ChannelKind::PureDephase,
            ChannelKind::Depol1Q,
            ChannelKind::Depol2Q,
        ] {
            let ops = channel_kraus(kind, param).unwrap();
            let d = 1usize << ops[0].n_qubits;
            let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); d * d];
            for op in &ops {
                for r in 0..d {
                    for c in 0..d {
                        let mut s = num_complex::Complex64::new(0.0, 0.0);
                        for k in 0..d {
                            s += op.mat[k * d + r].conj() * op.mat[k * d + c];
                        }
                        acc[r * d + c] += s;
                    }
                }
            }
            for r in 0..d {
                for c in 0..d {
                    let want = if r == c { 1.0 } else { 0.0 };
                    max_defect = max_defect.max((acc[r * d + c].re - want).abs());
                    max_defect = max_defect.max(acc[r * d + c].im.abs());
                }
            }
        }
    }
    assert!(max_defect <= 1e-12, "criterion 2: FAIL — Kraus completeness defect {max_defect:e}");

    // trace drift <= 1e-10 over every validation-suite circuit, tracked
    // gate by gate through the same channel sequence the simulator uses
    let nm = NoiseModel::default();
    let t_phi = nm.t_phi_us();
    let mut max_drift: f64 = 0.0;
    for e in &fix.suite {
        let c = &e.circuit;
        let mut rho = DensityMatrix::ground_state(c.n_qubits);
        for g in &c.gates {
            rho.apply_unitary(&gates::gate_matrix(g), &g.qubits);
            let t_us = match g.qubits.len() {
                1 => nm.dur_1q_ns,
                2 => nm.dur_2q_ns,
                _ => nm.dur_3q_ns,
            } / 1000.0;
            let gamma = 1.0 - (-t_us / nm.t1_us).exp();
            let lambda = if t_phi.is_finite() { 1.0 - (-t_us / t_phi).exp() } else { 0.0 };
            let amp = channel_kraus(ChannelKind::AmpDamp, gamma).unwrap();
            let deph = channel_kraus(ChannelKind::PureDephase, lambda).unwrap();
            for &q in &g.qubits {
                rho.apply_kraus(&amp, &[q]);
                rho.apply_kraus(&deph, &[q]);
            }
            match g.qubits.len() {
                1 => rho.apply_kraus(
                    &channel_kraus(ChannelKind::Depol1Q, nm.eps_1q).unwrap(),
                    &g.qubits,
                ),
                2 => rho.apply_kraus(
                    &channel_kraus(ChannelKind::Depol2Q, nm.eps_2q).unwrap(),
                    &g.qubits,
                ),
                _ => {
                    let depol = channel_kraus(ChannelKind::Depol2Q, nm.eps_2q).unwrap();
                    rho.apply_kraus(&depol, &[g.qubits[0], g.qubits[2]]);
                    rho.apply_kraus(&depol, &[g.qubits[1], g.qubits[2]]);
                }
            }
            let drift = (rho.trace() - num_complex::Complex64::new(1.0, 0.0)).norm();
            max_drift = max_drift.max(drift);
        }
    }
    assert!(max_drift <= 1e-10, "criterion 2: FAIL — trace drift {max_drift:e} > 1e-10");

    // depolarizing fixed point: maximally mixed state is invariant (1e-12)
    for n in 1..=2usize {
        let kind = if n == 1 { ChannelKind::Depol1Q } else { ChannelKind::Depol2Q };
        let mut rho = DensityMatrix::maximally_mixed(n);
        let qubits: Vec<usize> = (0..n).collect();
        rho.apply_kraus(&channel_kraus(kind, 0.37).unwrap(), &qubits);
        let d = 1usize << n;
        for (i, p) in rho.diagonal_probs().iter().enumerate() {
            assert!(
                (p - 1.0 / d as f64).abs() <= 1e-12,
                "criterion 2: FAIL — depol fixed point broken at diag {i}"
            );
        }
        assert!(rho.hermiticity_defect() <= 1e-12);
    }

    // noiseless density-matrix path equals the statevector ideal (1e-10)
    let off = NoiseModel::disabled();
    let mut max_diff: f64 = 0.0;
    for e in &fix.suite {
        let a = simulate_noisy(&e.circuit, &off).unwrap();
        let b = simulate_ideal(&e.circuit).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            max_diff = max_diff.max((x - y).abs());
        }
    }
    assert!(max_diff <= 1e-10, "criterion 2: FAIL — noiseless vs ideal diff {max_diff:e}");

    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 2: FAIL — runtime {secs:.1}s >= 60s");
    println!(
        "criterion 2: PASS — Kraus defect {max_defect:.2e} <= 1e-12, trace drift {max_drift:.2e} <= 1e-10, depol fixed point 1e-12, noiseless vs ideal {max_diff:.2e} <= 1e-10, {secs:.1}s < 60s"
    );
}

#[test]
fn criterion_03_gradient_check() {
    let t0 = Instant::now();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for config in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + config);
        let samples: Vec<Sample> = (0..32)
            .map(|i| {
                let mut x = [0.0; 7];
                for v in &mut x {
                    *v = rng.gen_range(-2.0..2.0);
                }
                Sample { x, label: (i % 2) as u8 }
            })
            .collect();
        let norm = Normalizer { means: [0.0; 7], stds: [1.0; 7] };
        let mut model = anfis::init_from_data(&samples, norm, config).unwrap();
        let cfg = TrainConfig::default();
        let weights = class_weights(&samples);

        let analytic = anfis::gradients(&model, &samples, weights, &cfg);
        assert_eq!(analytic.len(), N_PARAMS);
        let flat = model.flatten();
        for i in 0..N_PARAMS {
            let mut plus = flat.clone();
            plus[i] += h;
            model.set_from_flat(&plus);
            let lp = anfis::loss(&model, &samples, weights, &cfg);
            let mut minus = flat.clone();
            minus[i] -= h;
            model.set_from_flat(&minus);
            let lm = anfis::loss(&model, &samples, weights, &cfg);
            let numeric = (lp - lm) / (2.0 * h);
            let scale = analytic[i].abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((analytic[i] - numeric).abs() / scale);
        }
        model.set_from_flat(&flat);
    }
    assert!(worst < 1e-4, "criterion 3: FAIL — max relative gradient error {worst:e} >= 1e-4");
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 3: FAIL — runtime {secs:.1}s >= 60s");
    println!(
        "criterion 3: PASS — analytic vs central-difference (h=1e-5) max rel err {worst:.2e} < 1e-4 across 10 configs x {N_PARAMS} params, {secs:.1}s < 60s"
    );
}

#[test]
fn criterion_04_training_replication() {
    let t0 = Instant::now();
    let fix = fixture();
    assert_eq!(fix.rows.len(), 2000, "criterion 4: FAIL — dataset is not 2000 rows");

    let cfg = TrainConfig::default();
    let (train_idx, val_idx) = anfis::split_rows(&fix.rows, cfg.val_fraction, cfg.seed);
    let val_rows: Vec<DatasetRow> = val_idx.iter().map(|&i| fix.rows[i].clone()).collect();
    let report = eval::evaluate(&fix.model, &val_rows).unwrap();

    let norm = &fix.model.normalizer;
    let pack = |idx: &[usize]| -> Vec<([f64; 7], u8)> {
        idx.iter()
            .map(|&i| (apply_normalizer(norm, &fix.rows[i].features()), fix.rows[i].label))
            .collect()
    };
    let lr_acc = logistic_baseline(&pack(&train_idx), &pack(&val_idx)).unwrap();

    assert!(
        report.acc_strict >= 0.85,
        "criterion 4: FAIL — held-out accuracy {:.4} < 0.85",
        report.acc_strict
    );
    assert!(
        report.acc_strict - lr_acc >= 0.10,
        "criterion 4: FAIL — logistic gap {:.2} points < 10",
        (report.acc_strict - lr_acc) * 100.0
    );
    let secs = t0.elapsed().as_secs_f64() + fix.train_secs;
    assert!(secs < 600.0, "criterion 4: FAIL — runtime {secs:.0}s >= 600s");
    println!(
        "criterion 4: PASS — held-out accuracy {:.4} >= 0.85, logistic {:.4}, gap {:+.2} points >= 10, {secs:.1}s < 600s",
        report.acc_strict,
        lr_acc,
        (report.acc_strict - lr_acc) * 100.0
    );
}

#[test]
fn criterion_05_veto_safety_margin() {
    let t0 = Instant::now();
    let fix = fixture();
    let tau_veto = fix.model.thresholds.tau_veto;
    let mut max_db: f64 = 0.0;
    let mut vetoes = 0usize;
    let mut n = 0usize;
    for e in fix.suite.iter().filter(|e| e.label == Label::CORRECT) {
        let row = suite_entry_row(e).unwrap();
        max_db = max_db.max(row.db_log_raw);
        if row.db_log_raw > tau_veto {
            vetoes += 1;
        }
        n += 1;
    }
    assert!(n > 0, "criterion 5: FAIL — no CORRECT suite circuits found");
    assert!(max_db <= 0.10, "criterion 5: FAIL — max correct db_log {max_db:.4} > 0.10");
    assert!(vetoes == 0, "criterion 5: FAIL — {vetoes} veto triggers on correct circuits");
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 120.0, "criterion 5: FAIL — runtime {secs:.1}s >= 120s");
    println!(
        "criterion 5: PASS — {n} correct suite circuits, max raw db_log {max_db:.4} <= 0.10, 0 vetoes, {secs:.1}s < 120s"
    );
}

#[test]
fn criterion_06_suite_accuracy() {
    let t0 = Instant::now();
    let fix = fixture();
    let rows: Vec<DatasetRow> =
        fix.suite.iter().map(|e| suite_entry_row(e).unwrap()).collect();
    assert_eq!(rows.len(), 105, "criterion 6: FAIL — suite is not 105 circuits");
    let report = eval::evaluate(&fix.model, &rows).unwrap();
    assert!(
        report.acc_eff >= 0.85,
        "criterion 6: FAIL — effective accuracy {:.4} < 0.85",
        report.acc_eff
    );
    assert!(
        report.u_rate <= 0.20,
        "criterion 6: FAIL — uncertainty rate {:.4} > 0.20",
        report.u_rate
    );
    let secs = t0.elapsed().as_secs_f64() + fix.train_secs;
    assert!(secs < 300.0, "criterion 6: FAIL — runtime incl. training {secs:.0}s >= 300s");
    println!(
        "criterion 6: PASS — 105-circuit suite acc_eff {:.4} >= 0.85, u_rate {:.4} <= 0.20, {secs:.1}s < 300s incl. training",
        report.acc_eff, report.u_rate
    );
}

#[test]
fn criterion_07_blind_spots() {
    let fix = fixture();

    // phase-only bug: indistinguishable in the computational basis
    let row = suite_row(fix, "bell_extra_z_buggy");
    assert!(
        row.db_log_raw < 0.05,
        "criterion 7: FAIL — bell_extra_z db_log {:.4} >= 0.05",
        row.db_log_raw
    );
    let v = classify(&row.features(), &fix.model, "bell_extra_z_buggy").unwrap();
    assert!(
        v.klass != VerdictClass::SoftwareBug,
        "criterion 7: FAIL — bell_extra_z classified SOFTWARE_BUG"
    );

    // 5-degree angle bug: ideal shift at the sin^2(2.5 deg) scale, below
    // the ~2.2% detectability floor, and never vetoed
    let e5 = fix.suite.iter().find(|e| e.name == "bell_angle_5deg_buggy").unwrap();
    let buggy_ideal = simulate_ideal(&e5.circuit).unwrap();
    let tv: f64 = 0.5
        * buggy_ideal
            .probs
            .iter()
            .zip(&e5.intended_ideal.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    let s2 = (2.5f64.to_radians()).sin().powi(2);
    assert!(
        (tv - s2).abs() < 1e-9,
        "criterion 7: FAIL — bell_angle_5deg ideal shift {tv:.6} != sin^2(2.5deg) {s2:.6}"
    );
    assert!(tv < 0.022, "criterion 7: FAIL — shift {tv:.4} not below the 2.2% floor");
    let row5 = suite_entry_row(e5).unwrap();
    let v5 = classify(&row5.features(), &fix.model, "bell_angle_5deg_buggy").unwrap();
    assert!(!v5.veto_triggered, "criterion 7: FAIL — bell_angle_5deg vetoed");

    println!(
        "criterion 7: PASS — bell_extra_z db_log {:.4} < 0.05 and class {}, bell_angle_5deg shift {:.5} = sin^2(2.5deg) (1e-9) < 0.022 floor, no veto",
        row.db_log_raw, v.klass, tv
    );
}

#[test]
fn criterion_08_grover_boundary() {
    let fix = fixture();

    let row_bad = suite_row(fix, "grover_2q_wrong_oracle");
    let v_bad = classify(&row_bad.features(), &fix.model, "grover_2q_wrong_oracle").unwrap();
    assert!(
        v_bad.veto_triggered && row_bad.db_log_raw > 0.20,
        "criterion 8: FAIL — wrong oracle not vetoed (db_log {:.4})",
        row_bad.db_log_raw
    );
    assert_eq!(v_bad.klass, VerdictClass::SoftwareBug);

    let row_ok = suite_row(fix, "grover_2q_correct");
    let v_ok = classify(&row_ok.features(), &fix.model, "grover_2q_correct").unwrap();
    assert!(
        v_ok.klass != VerdictClass::SoftwareBug,
        "criterion 8: FAIL — grover_2q_correct classified SOFTWARE_BUG"
    );
    let dev = row_ok.features().entropy_dev;
    assert!(dev < 0.5, "criterion 8: FAIL — grover_2q_correct entropy_dev {dev:.3} >= 0.5");

    println!(
        "criterion 8: PASS — wrong oracle vetoed (db_log {:.3} > 0.20), correct Grover class {} with entropy_dev {:.3} < 0.5",
        row_bad.db_log_raw, v_ok.klass, dev
    );
}

#[test]
fn criterion_09_wilson_ci() {
    let (lo, hi) = wilson_ci(94, 105, 0.95).unwrap();
    let half = (hi - lo) / 2.0;
    assert!(
        (half - 0.059).abs() <= 0.001,
        "criterion 9: FAIL — Wilson(94,105,0.95) half-width {half:.4} not 0.059 +/- 0.001"
    );
    for n in [1u64, 10, 105, 1000] {
        let (lo0, _) = wilson_ci(0, n, 0.95).unwrap();
        assert!(lo0 == 0.0, "criterion 9: FAIL — Wilson(0,{n}) lower bound {lo0} != 0");
    }
    println!(
        "criterion 9: PASS — Wilson(94,105,0.95) half-width {half:.4} = 0.059 +/- 0.001, zero-success lower bound exactly 0"
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().expect("tempdir");
    let run = |tag: &str| -> (PathBuf, PathBuf, PathBuf) {
        let data = dir.path().join(format!("data_{tag}"));
        let model = dir.path().join(format!("model_{tag}.json"));
        let report = dir.path().join(format!("report_{tag}.json"));
        run_cli(&["gen-data", "--out", data.to_str().unwrap(), "--seed", "0"]);
        run_cli(&[
            "train",
            "--data",
            data.join("train.jsonl").to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
            "--seed",
            "0",
        ]);
        run_cli(&[
            "evaluate",
            "--model",
            model.to_str().unwrap(),
            "--suite",
            data.join("suite").to_str().unwrap(),
            "--format",
            "json",
            "--out",
            report.to_str().unwrap(),
        ]);
        (data.join("train.jsonl"), model, report)
    };
    let (data_a, model_a, report_a) = run("a");
    let (data_b, model_b, report_b) = run("b");

    let eq = |a: &Path, b: &Path| -> bool {
        std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
    };
    assert!(eq(&data_a, &data_b), "criterion 10: FAIL — datasets differ between runs");
    assert!(eq(&model_a, &model_b), "criterion 10: FAIL — checkpoints differ between runs");
    assert!(eq(&report_a, &report_b), "criterion 10: FAIL — reports differ between runs");
    println!(
        "criterion 10: PASS — gen-data -> train -> evaluate twice at seed 0: dataset, checkpoint, and report byte-identical"
    );
}
