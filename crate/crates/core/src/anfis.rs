//! Five-layer Takagi-Sugeno neuro-fuzzy classifier: forward pass,
//! analytic gradients, uncertainty-penalized full-batch Adam training,
//! and JSON checkpointing.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{DatasetRow, Normalizer, N_FEATURES};

pub const N_RULES: usize = 16;
pub const CHECKPOINT_VERSION: &str = "qtriage-anfis-1";

/// Firing strengths below this fall back to uniform rule weights so
/// layer 3 never divides 0 by 0.
const UNDERFLOW: f64 = 1e-300;
const SIGMA_FLOOR: f64 = 1e-4;
const PROB_CLAMP: f64 = 1e-7;

/// Decision thresholds for the two-stage classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau_bug: f64,
    pub tau_noise: f64,
    pub tau_veto: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { tau_bug: 0.35, tau_noise: 0.70, tau_veto: 0.20 }
    }
}

/// 16 rules x 7 features: Gaussian antecedents plus first-order TSK
/// consequents, 352 learnable parameters in total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnfisModel {
    pub version: String,
    pub n_rules: usize,
    pub n_features: usize,
    /// centers[i][j]: Gaussian center of rule i, feature j (normalized units)
    pub centers: Vec<Vec<f64>>,
    /// widths[i][j]: Gaussian sigma, floored at 1e-4
    pub widths: Vec<Vec<f64>>,
    /// consequents[i][0] is the constant term, [1..=7] the linear terms
    pub consequents: Vec<Vec<f64>>,
    pub normalizer: Normalizer,
    pub thresholds: Thresholds,
}

pub const N_PARAMS: usize = N_RULES * N_FEATURES * 2 + N_RULES * (N_FEATURES + 1);

impl AnfisModel {
    pub fn validate(&self) -> Result<()> {
        if self.n_rules != N_RULES || self.n_features != N_FEATURES {
            return Err(Error::Checkpoint(format!(
                "unsupported shape {}x{}",
                self.n_rules, self.n_features
            )));
        }
        let shape_ok = self.centers.len() == N_RULES
            && self.widths.len() == N_RULES
            && self.consequents.len() == N_RULES
            && self.centers.iter().all(|r| r.len() == N_FEATURES)
            && self.widths.iter().all(|r| r.len() == N_FEATURES)
            && self.consequents.iter().all(|r| r.len() == N_FEATURES + 1);
        if !shape_ok {
            return Err(Error::Checkpoint("parameter array shape mismatch".into()));
        }
        if self.widths.iter().flatten().any(|&s| s <= 0.0) {
            return Err(Error::Checkpoint("non-positive width".into()));
        }
        Ok(())
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(N_PARAMS);
        v.extend(self.centers.iter().flatten());
        v.extend(self.widths.iter().flatten());
        v.extend(self.consequents.iter().flatten());
        v
    }

    pub fn set_from_flat(&mut self, flat: &[f64]) {
        debug_assert_eq!(flat.len(), N_PARAMS);
        let mut it = flat.iter();
        for row in &mut self.centers {
            for x in row {
                *x = *it.next().unwrap();
            }
        }
        for row in &mut self.widths {
            for x in row {
                *x = it.next().unwrap().max(SIGMA_FLOOR);
            }
        }
        for row in &mut self.consequents {
            for x in row {
                *x = *it.next().unwrap();
            }
        }
    }
}

/// Training hyperparameters; defaults follow the reference recipe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub lr_halve_after: usize,
    pub lambda_u: f64,
    pub tau_margin: f64,
    pub seed: u64,
    pub val_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.005,
            weight_decay: 1e-4,
            max_epochs: 500,
            patience: 60,
            lr_halve_after: 20,
            lambda_u: 0.3,
            tau_margin: 0.20,
            seed: 0,
            val_fraction: 0.2,
        }
    }
}

/// One labeled sample in normalized feature space.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub x: [f64; N_FEATURES],
    pub label: u8,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct ForwardState {
    firing: [f64; N_RULES],
    weights: [f64; N_RULES],
    rule_out: [f64; N_RULES],
    strength_sum: f64,
    underflow: bool,
    z: f64,
    p: f64,
}

fn forward_full(m: &AnfisModel, x: &[f64; N_FEATURES]) -> ForwardState {
    let mut firing = [0.0f64; N_RULES];
    for i in 0..N_RULES {
        let mut w = 1.0;
        for j in 0..N_FEATURES {
            let d = x[j] - m.centers[i][j];
            let s = m.widths[i][j];
            w *= (-d * d / (2.0 * s * s)).exp();
        }
        firing[i] = w;
    }
    let strength_sum: f64 = firing.iter().sum();
    let underflow = firing.iter().all(|&w| w < UNDERFLOW);
    let mut weights = [0.0f64; N_RULES];
    if underflow {
        weights = [1.0 / N_RULES as f64; N_RULES];
    } else {
        for i in 0..N_RULES {
            weights[i] = firing[i] / strength_sum;
        }
    }
    let mut rule_out = [0.0f64; N_RULES];
    let mut z = 0.0;
    for i in 0..N_RULES {
        let mut f = m.consequents[i][0];
        for j in 0..N_FEATURES {
            f += m.consequents[i][j + 1] * x[j];
        }
        rule_out[i] = f;
        z += weights[i] * f;
    }
    ForwardState { firing, weights, rule_out, strength_sum, underflow, z, p: sigmoid(z) }
}

/// Layer 1-5 forward pass. Returns P(noise) and the normalized rule
/// weights for explanation.
pub fn forward(m: &AnfisModel, x: &[f64; N_FEATURES]) -> Result<(f64, [f64; N_RULES])> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidFeatures("non-finite input".into()));
    }
    let st = forward_full(m, x);
    Ok((st.p, st.weights))
}

/// TSK output of a single rule at input x.
pub fn rule_output(m: &AnfisModel, rule: usize, x: &[f64; N_FEATURES]) -> f64 {
    let mut f = m.consequents[rule][0];
    for j in 0..N_FEATURES {
        f += m.consequents[rule][j + 1] * x[j];
    }
    f
}

/// Class weights N_total / (2 N_c), indexed by label.
pub fn class_weights(batch: &[Sample]) -> [f64; 2] {
    let n1 = batch.iter().filter(|s| s.label == 1).count() as f64;
    let n0 = batch.len() as f64 - n1;
    let total = batch.len() as f64;
    [
        if n0 > 0.0 { total / (2.0 * n0) } else { 0.0 },
        if n1 > 0.0 { total / (2.0 * n1) } else { 0.0 },
    ]
}

fn sample_loss(p: f64, label: u8, w: f64, lambda_u: f64, tau_margin: f64) -> f64 {
    let pc = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let bce = if label == 1 { -pc.ln() } else { -(1.0 - pc).ln() };
    let indecision = p.min(1.0 - p);
    w * bce + lambda_u * (indecision - tau_margin).max(0.0)
}

/// Mean weighted BCE plus uncertainty penalty over the batch.
pub fn loss(m: &AnfisModel, batch: &[Sample], weights: [f64; 2], cfg: &TrainConfig) -> f64 {
    let total: f64 = batch
        .iter()
        .map(|s| {
            let st = forward_full(m, &s.x);
            sample_loss(st.p, s.label, weights[s.label as usize], cfg.lambda_u, cfg.tau_margin)
        })
        .sum();
    total / batch.len() as f64
}

/// Analytic gradient of [`loss`] with respect to all parameters,
/// flattened as [centers, widths, consequents].
pub fn gradients(m: &AnfisModel, batch: &[Sample], weights: [f64; 2], cfg: &TrainConfig) -> Vec<f64> {
    let n_cw = N_RULES * N_FEATURES;
    let mut grad = vec![0.0f64; N_PARAMS];
    let scale = 1.0 / batch.len() as f64;

    for s in batch {
        let st = forward_full(m, &s.x);
        let w_cls = weights[s.label as usize];

        // dL/dp: clamped BCE plus the hinge penalty (subgradient 0 at kinks)
        let mut dl_dp = 0.0;
        if st.p > PROB_CLAMP && st.p < 1.0 - PROB_CLAMP {
            dl_dp += if s.label == 1 { -w_cls / st.p } else { w_cls / (1.0 - st.p) };
        }
        let indecision = st.p.min(1.0 - st.p);
        if indecision > cfg.tau_margin {
            if st.p < 0.5 {
                dl_dp += cfg.lambda_u;
            } else if st.p > 0.5 {
                dl_dp -= cfg.lambda_u;
            }
        }
        let g_z = dl_dp * st.p * (1.0 - st.p) * scale;

        for i in 0..N_RULES {
            // consequents
            let base_q = 2 * n_cw + i * (N_FEATURES + 1);
            grad[base_q] += g_z * st.weights[i];
            for j in 0..N_FEATURES {
                grad[base_q + 1 + j] += g_z * st.weights[i] * s.x[j];
            }

            // antecedents: no gradient through the uniform fallback
            if st.underflow {
                continue;
            }
            let dz_dw = (st.rule_out[i] - st.z) / st.strength_sum;
            let g_w = g_z * dz_dw * st.firing[i];
            for j in 0..N_FEATURES {
                let d = s.x[j] - m.centers[i][j];
                let sg = m.widths[i][j];
                grad[i * N_FEATURES + j] += g_w * d / (sg * sg);
                grad[n_cw + i * N_FEATURES + j] += g_w * d * d / (sg * sg * sg);
            }
        }
    }
    grad
}

/// Draws 16 distinct training rows as centers, widths from the per-column
/// standard deviation scaled by U[0.5, 1.0], and small normal consequents.
pub fn init_from_data(rows: &[Sample], normalizer: Normalizer, seed: u64) -> Result<AnfisModel> {
    if rows.len() < N_RULES {
        return Err(Error::Training(format!(
            "need at least {N_RULES} rows to initialize, got {}",
            rows.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut indices: Vec<usize> = (0..rows.len()).collect();
    indices.shuffle(&mut rng);
    let centers: Vec<Vec<f64>> = indices[..N_RULES]
        .iter()
        .map(|&ix| rows[ix].x.to_vec())
        .collect();

    let n = rows.len() as f64;
    let mut col_std = [0.0f64; N_FEATURES];
    for j in 0..N_FEATURES {
        let mean: f64 = rows.iter().map(|r| r.x[j]).sum::<f64>() / n;
        let var: f64 = rows.iter().map(|r| (r.x[j] - mean) * (r.x[j] - mean)).sum::<f64>() / n;
        col_std[j] = var.sqrt().max(SIGMA_FLOOR);
    }
    let widths: Vec<Vec<f64>> = (0..N_RULES)
        .map(|_| {
            (0..N_FEATURES)
                .map(|j| col_std[j] * rng.gen_range(0.5..1.0))
                .collect()
        })
        .collect();

    // Box-Muller, sigma = 0.1
    let mut normal = || {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        0.1 * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let consequents: Vec<Vec<f64>> = (0..N_RULES)
        .map(|_| (0..=N_FEATURES).map(|_| normal()).collect())
        .collect();

    let m = AnfisModel {
        version: CHECKPOINT_VERSION.to_string(),
        n_rules: N_RULES,
        n_features: N_FEATURES,
        centers,
        widths,
        consequents,
        normalizer,
        thresholds: Thresholds::default(),
    };
    m.validate()?;
    Ok(m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub val_accuracy: f64,
    pub lr: f64,
}

/// Strict three-class accuracy: UNCERTAIN counts as incorrect.
pub fn strict_accuracy(m: &AnfisModel, samples: &[Sample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let correct = samples
        .iter()
        .filter(|s| {
            let st = forward_full(m, &s.x);
            if st.p > m.thresholds.tau_noise {
                s.label == 1
            } else if st.p < m.thresholds.tau_bug {
                s.label == 0
            } else {
                false
            }
        })
        .count();
    correct as f64 / samples.len() as f64
}

/// Stratified train/validation split; deterministic in the seed.
pub fn split_rows(rows: &[DatasetRow], val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5114_7));
    let mut train = Vec::new();
    let mut val = Vec::new();
    for label in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label == label).collect();
        idx.shuffle(&mut rng);
        let n_val = (idx.len() as f64 * val_fraction).round() as usize;
        val.extend_from_slice(&idx[..n_val]);
        train.extend_from_slice(&idx[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// Full-batch Adam with L2 weight decay, early stopping on strict
/// validation accuracy, learning-rate halving on stagnation, and
/// best-checkpoint restore.
pub fn train(
    rows: &[DatasetRow],
    normalizer: &Normalizer,
    cfg: &TrainConfig,
) -> Result<(AnfisModel, Vec<EpochStats>)> {
    if rows.len() < 32 {
        return Err(Error::Training(format!("need at least 32 rows, got {}", rows.len())));
    }
    if rows.iter().all(|r| r.label == 1) || rows.iter().all(|r| r.label == 0) {
        return Err(Error::Training("training data contains a single class".into()));
    }

    let samples: Vec<Sample> = rows
        .iter()
        .map(|r| Sample {
            x: crate::features::apply_normalizer(normalizer, &r.features()),
            label: r.label,
        })
        .collect();

    let (train_idx, val_idx) = split_rows(rows, cfg.val_fraction, cfg.seed);
    let train_set: Vec<Sample> = train_idx.iter().map(|&i| samples[i]).collect();
    let val_set: Vec<Sample> = val_idx.iter().map(|&i| samples[i]).collect();
    let weights = class_weights(&train_set);

    let mut model = init_from_data(&train_set, normalizer.clone(), cfg.seed)?;

    let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);
    let mut adam_m = vec![0.0f64; N_PARAMS];
    let mut adam_v = vec![0.0f64; N_PARAMS];
    let mut params = model.flatten();

    let mut lr = cfg.lr;
    let mut history = Vec::new();
    let mut best_acc = f64::NEG_INFINITY;
    let mut best_params = params.clone();
    let mut stagnant = 0usize;

    for epoch in 0..cfg.max_epochs {
        let mut grad = gradients(&model, &train_set, weights, cfg);
        for (g, p) in grad.iter_mut().zip(&params) {
            *g += cfg.weight_decay * p;
        }
        let t = (epoch + 1) as f64;
        for k in 0..N_PARAMS {
            adam_m[k] = beta1 * adam_m[k] + (1.0 - beta1) * grad[k];
            adam_v[k] = beta2 * adam_v[k] + (1.0 - beta2) * grad[k] * grad[k];
            let m_hat = adam_m[k] / (1.0 - beta1.powf(t));
            let v_hat = adam_v[k] / (1.0 - beta2.powf(t));
            params[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        model.set_from_flat(&params);
        params = model.flatten(); // pick up the sigma floor

        let epoch_loss = loss(&model, &train_set, weights, cfg);
        let val_acc = strict_accuracy(&model, &val_set);
        history.push(EpochStats { epoch, loss: epoch_loss, val_accuracy: val_acc, lr });

        if val_acc > best_acc {
            best_acc = val_acc;
            best_params = params.clone();
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant % cfg.lr_halve_after == 0 {
                lr *= 0.5;
            }
            if stagnant >= cfg.patience {
                break;
            }
        }
    }

    model.set_from_flat(&best_params);
    Ok((model, history))
}

pub fn save_checkpoint(m: &AnfisModel, path: impl AsRef<Path>) -> Result<()> {
    m.validate()?;
    let json = serde_json::to_string_pretty(m)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<AnfisModel> {
    let text = std::fs::read_to_string(path)?;
    let m: AnfisModel = serde_json::from_str(&text)?;
    if m.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "version mismatch: file has {:?}, expected {:?}",
            m.version, CHECKPOINT_VERSION
        )));
    }
    m.validate()?;
    Ok(m)
}
