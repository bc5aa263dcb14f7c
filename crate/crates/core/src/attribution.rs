//! Two-stage decision logic: the Bhattacharyya hard veto, ANFIS
//! probability thresholding, fuzzy-rule extraction, and plain-text
//! explanations.

use serde::{Deserialize, Serialize};

use crate::anfis::{self, AnfisModel, Thresholds, N_RULES};
use crate::error::{Error, Result};
use crate::features::{apply_normalizer, FeatureVector, FEATURE_NAMES, N_FEATURES};

/// Three-way attribution outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictClass {
    SoftwareBug,
    HardwareNoise,
    Uncertain,
}

impl std::fmt::Display for VerdictClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictClass::SoftwareBug => "SOFTWARE_BUG",
            VerdictClass::HardwareNoise => "HARDWARE_NOISE",
            VerdictClass::Uncertain => "UNCERTAIN",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopRule {
    pub rule: usize,
    pub weight: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    #[serde(rename = "class")]
    pub klass: VerdictClass,
    pub p_noise: f64,
    pub db_log_raw: f64,
    #[serde(rename = "veto")]
    pub veto_triggered: bool,
    pub top_rules: Vec<TopRule>,
    /// Raw features kept for explanation; not part of the wire format.
    #[serde(skip)]
    pub features: Option<FeatureVector>,
}

/// Threshold stage alone (no veto): strict inequalities, boundaries fall
/// to UNCERTAIN.
pub fn decide_from_probability(p: f64, t: &Thresholds) -> VerdictClass {
    if p > t.tau_noise {
        VerdictClass::HardwareNoise
    } else if p < t.tau_bug {
        VerdictClass::SoftwareBug
    } else {
        VerdictClass::Uncertain
    }
}

/// Standard-normal tercile boundaries: P(Z < -0.43073) = 1/3. Used to
/// label rule centers when no reference dataset is at hand, since
/// centers live in z-scored feature space.
const Z_TERCILE: f64 = 0.430_727_299_295_457_4;

fn bin_label(value: f64, lo: f64, hi: f64) -> &'static str {
    if value < lo {
        "LOW"
    } else if value > hi {
        "HIGH"
    } else {
        "MED"
    }
}

fn render_rule(m: &AnfisModel, rule: usize, cuts: &[(f64, f64); N_FEATURES], noise_side: bool) -> String {
    let antecedents: Vec<String> = (0..N_FEATURES)
        .map(|j| {
            let (lo, hi) = cuts[j];
            format!("{} is {}", FEATURE_NAMES[j], bin_label(m.centers[rule][j], lo, hi))
        })
        .collect();
    format!(
        "IF {} THEN {}",
        antecedents.join(" AND "),
        if noise_side { "NOISE" } else { "BUG" }
    )
}

/// Full two-stage classification of one raw feature vector. The
/// Bhattacharyya veto inspects the raw (unnormalized) log distance and
/// overrides the classifier outright.
pub fn classify(f: &FeatureVector, m: &AnfisModel, name: &str) -> Result<Verdict> {
    if !f.is_finite() {
        return Err(Error::InvalidFeatures("non-finite feature value".into()));
    }
    let x = apply_normalizer(&m.normalizer, f);
    let (p, weights) = anfis::forward(m, &x)?;

    let veto = f.db_log > m.thresholds.tau_veto;
    let klass = if veto {
        VerdictClass::SoftwareBug
    } else {
        decide_from_probability(p, &m.thresholds)
    };

    let cuts = [(-Z_TERCILE, Z_TERCILE); N_FEATURES];
    let mut order: Vec<usize> = (0..N_RULES).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
    let top_rules = order[..3]
        .iter()
        .map(|&i| TopRule {
            rule: i,
            weight: weights[i],
            text: render_rule(m, i, &cuts, anfis::rule_output(m, i, &x) >= 0.0),
        })
        .collect();

    Ok(Verdict {
        name: name.to_string(),
        klass,
        p_noise: p,
        db_log_raw: f.db_log,
        veto_triggered: veto,
        top_rules,
        features: Some(*f),
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Renders all 16 rules as IF-THEN strings. Antecedent labels come from
/// binning each center against the empirical 33rd/66th percentiles of
/// the normalized reference rows; the consequent tendency is the sign of
/// the rule's mean TSK output over those rows.
pub fn extract_rules(m: &AnfisModel, rows: &[FeatureVector]) -> Result<Vec<String>> {
    if rows.is_empty() {
        return Err(Error::InvalidFeatures("empty reference set for rule extraction".into()));
    }
    let normed: Vec<[f64; N_FEATURES]> = rows.iter().map(|r| apply_normalizer(&m.normalizer, r)).collect();

    let mut cuts = [(0.0, 0.0); N_FEATURES];
    for j in 0..N_FEATURES {
        let mut col: Vec<f64> = normed.iter().map(|r| r[j]).collect();
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts[j] = (percentile(&col, 1.0 / 3.0), percentile(&col, 2.0 / 3.0));
    }

    Ok((0..N_RULES)
        .map(|i| {
            let mean_out: f64 = normed.iter().map(|x| anfis::rule_output(m, i, x)).sum::<f64>()
                / normed.len() as f64;
            render_rule(m, i, &cuts, mean_out >= 0.0)
        })
        .collect())
}

/// Plain-text report: decision path, top firing rules, and a signature
/// heuristic pointing at the likely physical or logical cause.
pub fn explain(v: &Verdict, m: &AnfisModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("Circuit: {}\nVerdict: {}\n", v.name, v.klass));

    if v.veto_triggered {
        out.push_str(&format!(
            "Decision path: Bhattacharyya veto. ln(1 + D_B) = {:.4} exceeds the veto \
             threshold {:.2}, so the result is classified SOFTWARE_BUG regardless of \
             the classifier output (P(noise) = {:.3}).\n",
            v.db_log_raw, m.thresholds.tau_veto, v.p_noise
        ));
    } else {
        out.push_str(&format!(
            "Decision path: no veto (ln(1 + D_B) = {:.4} <= {:.2}); P(noise) = {:.3} \
             against thresholds bug < {:.2} / noise > {:.2}.\n",
            v.db_log_raw, m.thresholds.tau_veto, v.p_noise, m.thresholds.tau_bug, m.thresholds.tau_noise
        ));
        if v.klass == VerdictClass::Uncertain {
            out.push_str(&format!(
                "Confidence gap: {:.3} above the bug threshold, {:.3} below the noise \
                 threshold; abstaining.\n",
                v.p_noise - m.thresholds.tau_bug,
                m.thresholds.tau_noise - v.p_noise
            ));
        }
    }

    out.push_str("Top firing rules:\n");
    for r in &v.top_rules {
        out.push_str(&format!("  [{:2}] w = {:.4}  {}\n", r.rule, r.weight, r.text));
    }

    if let Some(f) = &v.features {
        out.push_str("Signature analysis:\n");
        let mut flagged = false;
        if f.db_log > m.thresholds.tau_veto && f.entropy < 1.0 {
            out.push_str(
                "  Low output entropy combined with a large Bhattacharyya distance: the \
                 execution concentrates on the wrong basis states, which points at a \
                 unitary (logic) bug rather than decoherence.\n",
            );
            flagged = true;
        } else if f.db_log > m.thresholds.tau_veto {
            out.push_str(
                "  Large Bhattacharyya distance from the intended distribution: probability \
                 mass sits on outcomes the correct circuit cannot produce, a logic-error \
                 signature.\n",
            );
            flagged = true;
        }
        if f.entropy_dev > 0.5 && f.db_log <= m.thresholds.tau_veto {
            out.push_str(
                "  Elevated entropy deviation without distributional displacement: outcomes \
                 are smeared across the intended support, consistent with decoherence \
                 (T1/T2) rather than a coding error.\n",
            );
            flagged = true;
        }
        if !flagged {
            out.push_str(
                "  Feature pattern close to the intended distribution; no strong bug or \
                 decoherence signature.\n",
            );
        }
    }
    out
}
