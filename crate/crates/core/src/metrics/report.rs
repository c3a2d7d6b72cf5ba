use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::matching::{match_detections, GtBox, SliceDetection};
use super::{pr_auc, roc_auc, wilson_ci, ConfusionMatrix, MetricsError, Z_95};
use crate::detect::PathologyLabel;
use crate::ensemble::ScanLabel;
use crate::segment::{mask_iou, Rle};
use crate::volume::Sex;

/// One scan's demographics, truth and predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanRecord {
    pub scan_id: String,
    #[serde(default)]
    pub age_years: Option<f64>,
    #[serde(default)]
    pub gender: Option<Sex>,
    #[serde(default)]
    pub manufacturer: Option<String>,
    pub truth: ScanLabel,
    pub predicted: ScanLabel,
    pub probability: f64,
    #[serde(default)]
    pub gt_boxes: Vec<GtBox>,
    #[serde(default)]
    pub detections: Vec<SliceDetection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_masks: Option<Vec<Rle>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pred_masks: Option<Vec<Rle>>,
}

impl ScanRecord {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let bad = |detail: String| MetricsError::Record {
            scan_id: self.scan_id.clone(),
            detail,
        };
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(bad(format!("probability {} outside [0, 1]", self.probability)));
        }
        if let Some(a) = self.age_years {
            if !(a >= 0.0) || !a.is_finite() {
                return Err(bad(format!("age {a} is not a nonnegative number")));
            }
        }
        if let (Some(g), Some(p)) = (&self.gt_masks, &self.pred_masks) {
            if g.len() != p.len() {
                return Err(bad(format!("{} truth masks vs {} predicted masks", g.len(), p.len())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Age,
    Gender,
    Manufacturer,
    Pathology,
}

impl Axis {
    pub fn header(self) -> &'static str {
        match self {
            Axis::Age => "Age Group",
            Axis::Gender => "Gender",
            Axis::Manufacturer => "Manufacturer",
            Axis::Pathology => "Pathologies",
        }
    }
}

/// Row key for records whose subgroup cannot be determined.
pub const UNKNOWN_GROUP: &str = "Unknown";

/// (label, lower bound inclusive) in table order.
pub const AGE_BUCKETS: [(&str, f64); 5] = [
    ("Under 18", 0.0),
    ("18–40", 18.0),
    ("41–60", 41.0),
    ("61–75", 61.0),
    ("Over 75", 76.0),
];

pub fn age_bucket(age: Option<f64>) -> &'static str {
    match age {
        Some(a) if a >= 0.0 => AGE_BUCKETS.iter().rev().find(|(_, lo)| a >= *lo).map(|(l, _)| *l).unwrap_or(UNKNOWN_GROUP),
        _ => UNKNOWN_GROUP,
    }
}

const MANUFACTURERS: [&str; 4] = [
    "GE Healthcare",
    "Siemens Healthineers",
    "Philips Healthcare",
    "Other Manufacturers",
];

/// Maps a DICOM Manufacturer string onto the vendor groups used in reports.
pub fn manufacturer_group(m: Option<&str>) -> &'static str {
    let Some(m) = m.map(|s| s.trim().to_ascii_uppercase()) else {
        return UNKNOWN_GROUP;
    };
    if m.is_empty() {
        UNKNOWN_GROUP
    } else if m.starts_with("GE ") || m == "GE" || m.contains("GENERAL ELECTRIC") {
        MANUFACTURERS[0]
    } else if m.contains("SIEMENS") {
        MANUFACTURERS[1]
    } else if m.contains("PHILIPS") {
        MANUFACTURERS[2]
    } else {
        MANUFACTURERS[3]
    }
}

fn gender_group(g: Option<Sex>) -> &'static str {
    match g {
        Some(Sex::Male) => "Male",
        Some(Sex::Female) => "Female",
        Some(Sex::Other) => "Other",
        None => UNKNOWN_GROUP,
    }
}

/// A rate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci95: Option<(f64, f64)>,
}

impl Estimate {
    pub fn point(value: f64) -> Estimate {
        Estimate { value, ci95: None }
    }

    fn from_counts(k: u64, n: u64) -> Option<Estimate> {
        (n > 0).then(|| Estimate {
            value: k as f64 / n as f64,
            ci95: wilson_ci(k, n, Z_95).ok(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub group: String,
    /// Scans in the group (scan-level axes) or ground-truth boxes (pathology).
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<ConfusionMatrix>,
    pub accuracy: Option<Estimate>,
    pub precision: Option<Estimate>,
    pub recall: Option<Estimate>,
    /// Equal to recall when computed; kept separate so published tables
    /// that list different values can be rendered faithfully.
    pub sensitivity: Option<Estimate>,
    pub specificity: Option<Estimate>,
    pub npv: Option<Estimate>,
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
}

impl MetricsRow {
    pub fn empty(group: &str) -> MetricsRow {
        MetricsRow {
            group: group.to_string(),
            n: 0,
            counts: None,
            accuracy: None,
            precision: None,
            recall: None,
            sensitivity: None,
            specificity: None,
            npv: None,
            roc_auc: None,
            pr_auc: None,
        }
    }

    pub fn from_counts(group: &str, cm: ConfusionMatrix) -> MetricsRow {
        let recall = Estimate::from_counts(cm.tp, cm.tp + cm.fn_);
        MetricsRow {
            group: group.to_string(),
            n: cm.total(),
            counts: Some(cm),
            accuracy: Estimate::from_counts(cm.tp + cm.tn, cm.total()),
            precision: Estimate::from_counts(cm.tp, cm.tp + cm.fp),
            recall,
            sensitivity: recall,
            specificity: Estimate::from_counts(cm.tn, cm.tn + cm.fp),
            npv: Estimate::from_counts(cm.tn, cm.tn + cm.fn_),
            roc_auc: None,
            pr_auc: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub axis: Axis,
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, group: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.group == group)
    }
}

fn group_order(axis: Axis) -> Vec<&'static str> {
    let mut v: Vec<&str> = match axis {
        Axis::Age => AGE_BUCKETS.iter().map(|(l, _)| *l).collect(),
        Axis::Gender => vec!["Male", "Female", "Other"],
        Axis::Manufacturer => MANUFACTURERS.to_vec(),
        Axis::Pathology => Vec::new(),
    };
    v.push(UNKNOWN_GROUP);
    v
}

fn scan_level_row(group: &str, records: &[&ScanRecord]) -> MetricsRow {
    let mut cm = ConfusionMatrix::default();
    for r in records {
        cm.record(r.truth.is_abnormal(), r.predicted.is_abnormal());
    }
    let mut row = MetricsRow::from_counts(group, cm);
    let scores: Vec<f64> = records.iter().map(|r| r.probability).collect();
    let labels: Vec<bool> = records.iter().map(|r| r.truth.is_abnormal()).collect();
    row.roc_auc = roc_auc(&scores, &labels).ok();
    row.pr_auc = pr_auc(&scores, &labels).ok();
    row
}

fn pathology_rows(records: &[ScanRecord], iou_threshold: f64) -> Vec<MetricsRow> {
    let mut labels: Vec<PathologyLabel> = records
        .iter()
        .flat_map(|r| r.gt_boxes.iter().map(|g| g.label).chain(r.detections.iter().map(|d| d.label)))
        .collect();
    labels.sort();
    labels.dedup();
    labels
        .into_iter()
        .map(|label| {
            let mut cm = ConfusionMatrix::default();
            let mut scores = Vec::with_capacity(records.len());
            let mut present = Vec::with_capacity(records.len());
            for r in records {
                let gts: Vec<GtBox> = r.gt_boxes.iter().filter(|g| g.label == label).copied().collect();
                let preds: Vec<SliceDetection> = r.detections.iter().filter(|d| d.label == label).copied().collect();
                cm.add(&match_detections(&preds, &gts, iou_threshold).counts);
                scores.push(preds.iter().map(|d| d.score).fold(0.0, f64::max));
                present.push(!gts.is_empty());
            }
            let n = cm.tp + cm.fn_;
            let mut row = MetricsRow::empty(label.name());
            row.n = n;
            row.counts = Some(cm);
            row.precision = Estimate::from_counts(cm.tp, cm.tp + cm.fp);
            row.recall = Estimate::from_counts(cm.tp, n);
            row.sensitivity = row.recall;
            row.roc_auc = roc_auc(&scores, &present).ok();
            row.pr_auc = pr_auc(&scores, &present).ok();
            row
        })
        .collect()
}

/// Aggregates records along one subgroup axis. Records whose subgroup is
/// unknown land in an "Unknown" row rather than being dropped; empty groups
/// are omitted.
pub fn subgroup_report(records: &[ScanRecord], axis: Axis, iou_threshold: f64) -> Result<MetricsTable, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::NoRecords);
    }
    for r in records {
        r.validate()?;
    }
    if axis == Axis::Pathology {
        return Ok(MetricsTable {
            axis,
            rows: pathology_rows(records, iou_threshold),
        });
    }
    let mut groups: BTreeMap<&str, Vec<&ScanRecord>> = BTreeMap::new();
    for r in records {
        let key = match axis {
            Axis::Age => age_bucket(r.age_years),
            Axis::Gender => gender_group(r.gender),
            Axis::Manufacturer => manufacturer_group(r.manufacturer.as_deref()),
            Axis::Pathology => unreachable!(),
        };
        groups.entry(key).or_default().push(r);
    }
    let rows = group_order(axis)
        .into_iter()
        .filter_map(|g| groups.get(g).map(|rs| scan_level_row(g, rs)))
        .collect();
    Ok(MetricsTable { axis, rows })
}

/// Mean over records carrying both mask sets of the whole-volume mask IoU.
pub fn mean_mask_iou(records: &[ScanRecord]) -> Option<f64> {
    let ious: Vec<f64> = records
        .iter()
        .filter_map(|r| {
            let (g, p) = (r.gt_masks.as_ref()?, r.pred_masks.as_ref()?);
            let gb: Vec<bool> = g.iter().flat_map(|m| m.decode()).collect();
            let pb: Vec<bool> = p.iter().flat_map(|m| m.decode()).collect();
            (gb.len() == pb.len()).then(|| mask_iou(&gb, &pb))
        })
        .collect();
    (!ious.is_empty()).then(|| ious.iter().sum::<f64>() / ious.len() as f64)
}
