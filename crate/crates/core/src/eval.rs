//! Per-trait regression and classification metrics.
//!
//! Report JSON:
//!
//! ```text
//! {
//!   "model": 7, "split": "test", "n": 1000,
//!   "rmse": [5 reals] | absent,
//!   "baseline_rmse": [5 reals] | absent,
//!   "improvement_pct": [5 reals] | absent,
//!   "traits": [{"trait": "O", "confusion": {"tp","tn","fp","fn"},
//!               "accuracy", "precision" | null, "recall" | null}, ...] | absent,
//!   "provenance": {...} | absent
//! }
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lexicon::{BinaryLabels, TraitVector, TRAIT_NAMES};
use crate::provenance::Provenance;
use crate::{Error, Result};

/// Test-set RMSE of the best regression model at full scale, for
/// comparison only.
pub const REFERENCE_MODEL7_RMSE: [f64; 5] = [0.147, 0.223, 0.222, 0.251, 0.320];

pub fn rmse_per_trait(pred: &[TraitVector], target: &[TraitVector]) -> Result<[f64; 5]> {
    if pred.len() != target.len() {
        return Err(Error::Invalid(format!("{} predictions for {} targets", pred.len(), target.len())));
    }
    if pred.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut sum = [0.0f64; 5];
    for (p, t) in pred.iter().zip(target) {
        for (k, s) in sum.iter_mut().enumerate() {
            let d = p.0[k] - t.0[k];
            *s += d * d;
        }
    }
    let n = pred.len() as f64;
    Ok(sum.map(|s| (s / n).sqrt()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// The same counts with the positive class taken to be 0.
    pub fn flipped(&self) -> Self {
        Self {
            tp: self.tn,
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
        }
    }
}

fn ratio(a: u64, b: u64) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraitMetrics {
    #[serde(rename = "trait")]
    pub name: char,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl TraitMetrics {
    fn from_confusion(name: char, confusion: ConfusionMatrix) -> Self {
        Self {
            name,
            confusion,
            accuracy: confusion.accuracy(),
            precision: confusion.precision(),
            recall: confusion.recall(),
        }
    }
}

/// Per-trait confusion matrices with 1 as the positive class.
pub fn binary_metrics(pred: &[BinaryLabels], truth: &[BinaryLabels]) -> Result<[TraitMetrics; 5]> {
    if pred.len() != truth.len() {
        return Err(Error::Invalid(format!("{} predictions for {} labels", pred.len(), truth.len())));
    }
    if pred.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut cm = [ConfusionMatrix::default(); 5];
    for (p, t) in pred.iter().zip(truth) {
        for (k, m) in cm.iter_mut().enumerate() {
            match (p.0[k], t.0[k]) {
                (1, 1) => m.tp += 1,
                (0, 0) => m.tn += 1,
                (1, 0) => m.fp += 1,
                (0, 1) => m.fn_ += 1,
                (a, b) => return Err(Error::Invalid(format!("non-binary label pair ({a}, {b})"))),
            }
        }
    }
    Ok(std::array::from_fn(|k| {
        TraitMetrics::from_confusion(TRAIT_NAMES[k].chars().next().unwrap(), cm[k])
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model: usize,
    pub split: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rmse: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub baseline_rmse: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub improvement_pct: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub traits: Option<[TraitMetrics; 5]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub provenance: Option<Provenance>,
}

/// Relative RMSE reduction in percent; 0 when both are 0.
pub fn improvement_pct(model: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        (baseline - model) / baseline * 100.0
    }
}

/// Side-by-side regression report. Both RMSE vectors must come from the
/// same evaluation set.
pub fn compare_report(
    model: usize,
    split: &str,
    model_rmse: ([f64; 5], usize),
    baseline_rmse: ([f64; 5], usize),
) -> Result<MetricsReport> {
    if model_rmse.1 != baseline_rmse.1 {
        return Err(Error::Invalid(format!(
            "model evaluated on {} items, baseline on {}",
            model_rmse.1, baseline_rmse.1
        )));
    }
    let (m, b) = (model_rmse.0, baseline_rmse.0);
    Ok(MetricsReport {
        model,
        split: split.into(),
        n: model_rmse.1,
        rmse: Some(m),
        baseline_rmse: Some(b),
        improvement_pct: Some(std::array::from_fn(|k| improvement_pct(m[k], b[k]))),
        traits: None,
        provenance: None,
    })
}

pub fn classification_report(model: usize, split: &str, pred: &[BinaryLabels], truth: &[BinaryLabels]) -> Result<MetricsReport> {
    Ok(MetricsReport {
        model,
        split: split.into(),
        n: truth.len(),
        rmse: None,
        baseline_rmse: None,
        improvement_pct: None,
        traits: Some(binary_metrics(pred, truth)?),
        provenance: None,
    })
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn render_table(&self) -> String {
        let mut out = format!("Model {} on {} ({} items)\n", self.model, self.split, self.n);
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        if let Some(r) = self.rmse {
            writeln!(out, "{:<6}{:>10}{:>10}{:>10}", "trait", "rmse", "model 0", "gain %").unwrap();
            for k in 0..5 {
                writeln!(
                    out,
                    "{:<6}{:>10.4}{:>10}{:>10}",
                    TRAIT_NAMES[k],
                    r[k],
                    opt(self.baseline_rmse.map(|b| b[k])),
                    self.improvement_pct.map_or_else(|| "-".into(), |g| format!("{:.1}", g[k]))
                )
                .unwrap();
            }
        }
        if let Some(t) = &self.traits {
            writeln!(
                out,
                "{:<6}{:>7}{:>7}{:>7}{:>7}{:>10}{:>10}{:>10}",
                "trait", "tp", "tn", "fp", "fn", "accuracy", "precision", "recall"
            )
            .unwrap();
            for m in t {
                let c = m.confusion;
                writeln!(
                    out,
                    "{:<6}{:>7}{:>7}{:>7}{:>7}{:>10.4}{:>10}{:>10}",
                    m.name,
                    c.tp,
                    c.tn,
                    c.fp,
                    c.fn_,
                    m.accuracy,
                    opt(m.precision),
                    opt(m.recall)
                )
                .unwrap();
            }
        }
        out
    }
}
