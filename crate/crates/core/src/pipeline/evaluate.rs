use serde::{Deserialize, Serialize};

use super::{DetectionRecord, ScanReport};
use crate::detect::iou;
use crate::ensemble::ScanLabel;
use crate::metrics::{match_detections, GtBox, ScanRecord, SliceDetection};
use crate::phantom::{GroundTruth, PhantomCase};
use crate::segment::morphology::label_components_3d;
use crate::segment::{Mask, Rle};

/// Joins a pipeline report with phantom ground truth.
pub fn scan_record(report: &ScanReport, case: &PhantomCase) -> ScanRecord {
    let [nx, ny, nz] = case.spec.dims;
    let (predicted, probability) = match &report.classification {
        Some(c) => (c.classification.label, c.classification.weighted_probability),
        None => (ScanLabel::Normal, 0.0),
    };
    let gt_masks = case
        .truth
        .union_mask(nx, ny, nz)
        .iter()
        .map(|bits| Rle::encode(nx, ny, bits))
        .collect();
    let pred_masks = match &report.masks {
        Some(m) => m.slices.clone(),
        None => (0..nz).map(|_| Rle::encode(nx, ny, &vec![false; nx * ny])).collect(),
    };
    let d = &case.spec.demographics;
    ScanRecord {
        scan_id: report.scan_id.clone(),
        age_years: Some(d.age_years),
        gender: Some(d.sex),
        manufacturer: Some(d.manufacturer.clone()),
        truth: if case.truth.abnormal {
            ScanLabel::Abnormal
        } else {
            ScanLabel::Normal
        },
        predicted,
        probability,
        gt_boxes: case.truth.boxes(),
        detections: report.detections.iter().map(to_slice_detection).collect(),
        gt_masks: Some(gt_masks),
        pred_masks: Some(pred_masks),
    }
}

fn to_slice_detection(d: &DetectionRecord) -> SliceDetection {
    SliceDetection {
        slice_index: d.slice_index,
        bbox: d.bbox,
        label: d.label(),
        score: d.score,
    }
}

/// Per-lesion IoU between the truth mask and the predicted 3-D components
/// (6-connected) that overlap it.
pub fn lesion_mask_ious(truth: &GroundTruth, predicted: &[Mask]) -> Vec<f64> {
    let Some(first) = predicted.first() else {
        return vec![0.0; truth.lesions.len()];
    };
    let (nx, ny, nz) = (first.width, first.height, predicted.len());
    let bits: Vec<bool> = predicted.iter().flat_map(|m| m.binary()).collect();
    let (labels, n) = label_components_3d(&bits, [nx, ny, nz]);
    truth
        .lesions
        .iter()
        .map(|l| {
            let gt: Vec<bool> = l.mask.iter().flat_map(|r| r.decode()).collect();
            let mut hit = vec![false; n + 1];
            for (g, &lab) in gt.iter().zip(&labels) {
                if *g && lab != 0 {
                    hit[lab as usize] = true;
                }
            }
            let (mut inter, mut union) = (0usize, 0usize);
            for (g, &lab) in gt.iter().zip(&labels) {
                let p = lab != 0 && hit[lab as usize];
                inter += (*g && p) as usize;
                union += (*g || p) as usize;
            }
            if union == 0 {
                1.0
            } else {
                inter as f64 / union as f64
            }
        })
        .collect()
}

/// (sum of IoU, count) between each stage's box and the matched ground
/// truth, over detections matched at `iou_threshold`. Entry s is stage s + 1.
pub fn stage_mean_ious(detections: &[DetectionRecord], gts: &[GtBox], iou_threshold: f64) -> Vec<(f64, usize)> {
    let preds: Vec<SliceDetection> = detections.iter().map(to_slice_detection).collect();
    let m = match_detections(&preds, gts, iou_threshold);
    let stages = detections.iter().map(|d| d.stage_boxes.len()).max().unwrap_or(0);
    (0..stages)
        .map(|s| {
            let (mut sum, mut n) = (0.0, 0);
            for &(p, g, _) in &m.pairs {
                if let Some(b) = detections[p].stage_boxes.get(s) {
                    sum += iou(b, &gts[g].bbox);
                    n += 1;
                }
            }
            (sum, n)
        })
        .collect()
}

/// Suite-level statistics for phantom runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub scans: usize,
    pub classification_accuracy: f64,
    pub detection_recall: f64,
    pub detection_precision: f64,
    pub lesions: usize,
    pub mean_lesion_mask_iou: f64,
    /// Pooled over scans: (sum of IoU, matched count) per stage.
    pub stage_mean_iou: Vec<f64>,
}

impl SuiteSummary {
    pub fn from_parts(
        records: &[ScanRecord],
        lesion_ious: &[f64],
        stage_sums: &[(f64, usize)],
        iou_threshold: f64,
    ) -> SuiteSummary {
        let correct = records.iter().filter(|r| r.truth == r.predicted).count();
        let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
        for r in records {
            let c = match_detections(&r.detections, &r.gt_boxes, iou_threshold).counts;
            tp += c.tp;
            fp += c.fp;
            fn_ += c.fn_;
        }
        let ratio = |a: u64, b: u64| if b == 0 { 1.0 } else { a as f64 / b as f64 };
        SuiteSummary {
            scans: records.len(),
            classification_accuracy: ratio(correct as u64, records.len() as u64),
            detection_recall: ratio(tp, tp + fn_),
            detection_precision: ratio(tp, tp + fp),
            lesions: lesion_ious.len(),
            mean_lesion_mask_iou: if lesion_ious.is_empty() {
                1.0
            } else {
                lesion_ious.iter().sum::<f64>() / lesion_ious.len() as f64
            },
            stage_mean_iou: stage_sums
                .iter()
                .map(|&(s, n)| if n == 0 { 0.0 } else { s / n as f64 })
                .collect(),
        }
    }
}
