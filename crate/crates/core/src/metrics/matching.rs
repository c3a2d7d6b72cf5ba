use serde::{Deserialize, Serialize};

use super::ConfusionMatrix;
use crate::detect::{iou, BoundingBox, PathologyLabel};

/// A ground-truth lesion box on one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtBox {
    pub slice_index: usize,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub label: PathologyLabel,
}

/// A predicted box on one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceDetection {
    pub slice_index: usize,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub label: PathologyLabel,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectionMatch {
    /// tn is always 0: true negatives are undefined for detection.
    pub counts: ConfusionMatrix,
    /// (prediction index, ground-truth index, IoU).
    pub pairs: Vec<(usize, usize, f64)>,
}

/// Greedy one-to-one matching in descending score order. A prediction
/// matches the unmatched ground truth on the same slice with the same label
/// and the highest IoU, provided that IoU reaches `iou_threshold`.
pub fn match_detections(preds: &[SliceDetection], gts: &[GtBox], iou_threshold: f64) -> DetectionMatch {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].score.total_cmp(&preds[a].score).then(a.cmp(&b)));
    let mut taken = vec![false; gts.len()];
    let mut out = DetectionMatch::default();
    for i in order {
        let p = &preds[i];
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gts.iter().enumerate() {
            if taken[j] || g.slice_index != p.slice_index || g.label != p.label {
                continue;
            }
            let v = iou(&p.bbox, &g.bbox);
            if v >= iou_threshold && best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, v)) => {
                taken[j] = true;
                out.counts.tp += 1;
                out.pairs.push((i, j, v));
            }
            None => out.counts.fp += 1,
        }
    }
    out.counts.fn_ = taken.iter().filter(|t| !**t).count() as u64;
    out
}
