//! Evaluation: confusion-derived rates, Wilson intervals, ROC/PR areas,
//! detection matching and subgroup tables.

mod auc;
mod matching;
mod published;
mod render;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use auc::{pr_auc, roc_auc};
pub use matching::{match_detections, DetectionMatch, GtBox, SliceDetection};
pub use published::{PublishedPathologyRow, PublishedSubgroupRow, PublishedTables, PUBLISHED_TABLES_JSON};
pub use render::{pathology_csv, pathology_text, subgroup_csv, subgroup_text};
pub use report::{
    age_bucket, manufacturer_group, mean_mask_iou, subgroup_report, Axis, Estimate, MetricsRow, MetricsTable, ScanRecord,
    AGE_BUCKETS, UNKNOWN_GROUP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{0} is undefined: both classes must be present")]
    Undefined(&'static str),
    #[error("scores and labels differ in length ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("non-finite score at index {0}")]
    NonFinite(usize),
    #[error("invalid interval input: {0}")]
    Interval(String),
    #[error("no records to evaluate")]
    NoRecords,
    #[error("invalid record {scan_id}: {detail}")]
    Record { scan_id: String, detail: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> ConfusionMatrix {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

/// Rates derived from a confusion matrix. A rate whose denominator is zero
/// is `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryRates {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub npv: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn binary_metrics(cm: &ConfusionMatrix) -> BinaryRates {
    BinaryRates {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision: ratio(cm.tp, cm.tp + cm.fp),
        recall: ratio(cm.tp, cm.tp + cm.fn_),
        specificity: ratio(cm.tn, cm.tn + cm.fp),
        npv: ratio(cm.tn, cm.tn + cm.fn_),
    }
}

pub const Z_95: f64 = 1.96;

/// Wilson score interval for k successes in n trials.
pub fn wilson_ci(k: u64, n: u64, z: f64) -> Result<(f64, f64), MetricsError> {
    if n == 0 {
        return Err(MetricsError::Interval("n must be positive".into()));
    }
    if k > n {
        return Err(MetricsError::Interval(format!("k = {k} exceeds n = {n}")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(MetricsError::Interval(format!("z = {z} must be positive")));
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = p + z2 / (2.0 * n_f);
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let lo = if k == 0 { 0.0 } else { ((centre - half) / denom).max(0.0) };
    let hi = if k == n { 1.0 } else { ((centre + half) / denom).min(1.0) };
    Ok((lo, hi))
}
