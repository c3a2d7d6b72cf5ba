//! Three-stage box refinement with a pluggable RoI head.

use serde::{Deserialize, Serialize};

use super::bbox::{iou, BoundingBox};
use super::deltas::{apply_deltas, encode_deltas};
use super::labels::{PathologyLabel, NUM_PATHOLOGIES};
use super::nms::batched_nms;
use super::roi_align::{image_to_feature, roi_align};
use super::DetectError;
use crate::kernels::{smooth_l1, softmax, Tensor3};

/// Logit vector length: background plus every pathology.
pub const NUM_CLASSES_WITH_BG: usize = NUM_PATHOLOGIES + 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeConfig {
    pub stage_iou_thresholds: Vec<f64>,
    pub stage_loss_weights: Vec<f64>,
    pub rpn_nms_threshold: f64,
    pub roi_output: usize,
    pub roi_sampling_ratio: usize,
    pub num_classes: usize,
    pub final_nms_threshold: f64,
    pub score_floor: f64,
    /// Smallest RoI side, in feature cells, for a coarser pyramid level to be used.
    pub min_level_cells: f64,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            stage_iou_thresholds: vec![0.5, 0.6, 0.7],
            stage_loss_weights: vec![1.0, 1.5, 2.0],
            rpn_nms_threshold: 0.7,
            roi_output: 7,
            roi_sampling_ratio: 2,
            num_classes: NUM_PATHOLOGIES,
            final_nms_threshold: 0.5,
            score_floor: 0.05,
            min_level_cells: 8.0,
        }
    }
}

impl CascadeConfig {
    pub fn stages(&self) -> usize {
        self.stage_iou_thresholds.len()
    }

    pub fn validate(&self) -> Result<(), DetectError> {
        let bad = |m: &str| Err(DetectError::Config(m.to_string()));
        if self.stage_iou_thresholds.is_empty() {
            return bad("at least one cascade stage is required");
        }
        if self.stage_iou_thresholds.windows(2).any(|w| w[1] <= w[0])
            || self.stage_iou_thresholds.iter().any(|t| !(*t > 0.0 && *t < 1.0))
        {
            return bad("stage IoU thresholds must lie in (0, 1) and increase strictly");
        }
        if self.stage_loss_weights.len() != self.stages() {
            return bad("one loss weight per stage is required");
        }
        if self.stage_loss_weights.windows(2).any(|w| w[1] < w[0]) || self.stage_loss_weights.iter().any(|w| *w < 0.0) {
            return bad("stage loss weights must be nonnegative and nondecreasing");
        }
        if self.num_classes != NUM_PATHOLOGIES {
            return bad("num_classes must be 43");
        }
        if self.roi_output == 0 || self.roi_sampling_ratio == 0 {
            return bad("roi_output and roi_sampling_ratio must be >= 1");
        }
        Ok(())
    }
}

/// One pyramid level: feature cell i covers image pixels [i*stride, (i+1)*stride).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureLevel {
    pub stride: usize,
    pub map: Tensor3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePyramid {
    /// Finest first.
    pub levels: Vec<FeatureLevel>,
    pub image_width: usize,
    pub image_height: usize,
}

impl FeaturePyramid {
    /// Coarsest level on which the RoI still spans `min_cells` cells along
    /// its shorter side; the finest level otherwise.
    pub fn level_for(&self, b: &BoundingBox, min_cells: f64) -> usize {
        let side = b.width().min(b.height());
        let mut best = 0;
        for (i, l) in self.levels.iter().enumerate() {
            if side / l.stride as f64 >= min_cells {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadOutput {
    /// Class-agnostic (dx, dy, dw, dh) relative to the RoI.
    pub deltas: [f64; 4],
    /// 44 logits; index 0 is background, index 1 + code a pathology.
    pub logits: Vec<f64>,
}

/// RoI head contract: pooled features in, box deltas and class logits out.
pub trait BoxRegressorScorer: Send + Sync {
    /// Factor by which the RoI is enlarged (about its centre) before pooling
    /// at `stage`. Deltas are always relative to the un-enlarged RoI.
    fn pooling_context(&self, _stage: usize) -> f64 {
        1.0
    }

    fn predict(&self, pooled: &Tensor3, stage: usize) -> HeadOutput;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub label: PathologyLabel,
    pub score: f64,
    /// 1-based stage whose boxes and scores produced this detection.
    pub stage: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutput {
    pub detections: Vec<Detection>,
    /// Box after each stage for the proposal behind each detection.
    pub stage_boxes: Vec<Vec<BoundingBox>>,
    /// Index of the proposal behind each detection.
    pub proposal_index: Vec<usize>,
}

/// Positive iff the best-IoU ground truth reaches `threshold`; ties go to the
/// lower ground-truth index.
pub fn assign_stage_targets(proposals: &[BoundingBox], gts: &[BoundingBox], threshold: f64) -> Vec<Option<usize>> {
    proposals
        .iter()
        .map(|p| {
            let mut best: Option<(usize, f64)> = None;
            for (j, g) in gts.iter().enumerate() {
                let v = iou(p, g);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            best.filter(|&(_, v)| v >= threshold).map(|(j, _)| j)
        })
        .collect()
}

/// Mean Smooth L1 between predicted deltas and regression targets over the
/// positive proposals at `threshold`; 0 when there are none.
pub fn stage_regression_loss(
    proposals: &[BoundingBox],
    predicted: &[[f64; 4]],
    gts: &[BoundingBox],
    threshold: f64,
    beta: f64,
) -> Result<f64, DetectError> {
    if predicted.len() != proposals.len() {
        return Err(DetectError::LengthMismatch {
            what: "predicted deltas",
            expected: proposals.len(),
            got: predicted.len(),
        });
    }
    let mut pred = Vec::new();
    let mut target = Vec::new();
    for (i, a) in assign_stage_targets(proposals, gts, threshold).into_iter().enumerate() {
        if let Some(j) = a {
            pred.extend_from_slice(&predicted[i]);
            target.extend_from_slice(&encode_deltas(&proposals[i], &gts[j])?);
        }
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    smooth_l1(&pred, &target, beta).map_err(|e| DetectError::Config(e.to_string()))
}

/// Σ_s w_s L_s with the configured stage weights.
pub fn weighted_cascade_loss(stage_losses: &[f64], cfg: &CascadeConfig) -> Result<f64, DetectError> {
    if stage_losses.len() != cfg.stage_loss_weights.len() {
        return Err(DetectError::LengthMismatch {
            what: "stage losses",
            expected: cfg.stage_loss_weights.len(),
            got: stage_losses.len(),
        });
    }
    Ok(stage_losses.iter().zip(&cfg.stage_loss_weights).map(|(l, w)| l * w).sum())
}

fn pool(pyr: &FeaturePyramid, roi: &BoundingBox, context: f64, cfg: &CascadeConfig) -> Tensor3 {
    let region = roi.scaled(context);
    let level = &pyr.levels[pyr.level_for(roi, cfg.min_level_cells)];
    let fb = image_to_feature(&region, level.stride as f64);
    roi_align(&level.map, &fb, cfg.roi_output, cfg.roi_sampling_ratio)
}

pub fn cascade_detect(
    pyr: &FeaturePyramid,
    proposals: &[BoundingBox],
    head: &dyn BoxRegressorScorer,
    cfg: &CascadeConfig,
) -> Result<CascadeOutput, DetectError> {
    cfg.validate()?;
    if pyr.levels.is_empty() {
        return Err(DetectError::Config("feature pyramid has no levels".into()));
    }
    let (w, h) = (pyr.image_width as f64, pyr.image_height as f64);
    let mut current: Vec<Option<BoundingBox>> = proposals.iter().map(|b| b.clip(w, h)).collect();
    let mut history: Vec<Vec<BoundingBox>> = vec![Vec::new(); proposals.len()];
    let mut final_logits: Vec<Option<Vec<f64>>> = vec![None; proposals.len()];

    for stage in 0..cfg.stages() {
        let last = stage + 1 == cfg.stages();
        for i in 0..proposals.len() {
            let Some(roi) = current[i] else { continue };
            let pooled = pool(pyr, &roi, head.pooling_context(stage), cfg);
            let out = head.predict(&pooled, stage);
            if out.logits.len() != NUM_CLASSES_WITH_BG {
                return Err(DetectError::LengthMismatch {
                    what: "head logits",
                    expected: NUM_CLASSES_WITH_BG,
                    got: out.logits.len(),
                });
            }
            let refined = apply_deltas(&roi, out.deltas).ok().and_then(|b| b.clip(w, h));
            current[i] = refined;
            if let Some(b) = refined {
                history[i].push(b);
            }
            if last {
                final_logits[i] = Some(out.logits);
            }
        }
    }

    let mut boxes = Vec::new();
    let mut scores = Vec::new();
    let mut classes = Vec::new();
    let mut source = Vec::new();
    for i in 0..proposals.len() {
        let (Some(b), Some(logits)) = (current[i], final_logits[i].as_ref()) else {
            continue;
        };
        let probs = softmax(logits).map_err(|e| DetectError::Config(e.to_string()))?;
        for (k, &p) in probs.iter().enumerate().skip(1) {
            if p >= cfg.score_floor {
                boxes.push(b);
                scores.push(p);
                classes.push(k);
                source.push(i);
            }
        }
    }
    let keep = batched_nms(&boxes, &scores, &classes, cfg.final_nms_threshold)?;
    let mut out = CascadeOutput {
        detections: Vec::with_capacity(keep.len()),
        stage_boxes: Vec::with_capacity(keep.len()),
        proposal_index: Vec::with_capacity(keep.len()),
    };
    for k in keep {
        out.detections.push(Detection {
            bbox: boxes[k],
            label: PathologyLabel::from_code(classes[k] - 1).expect("class index within vocabulary"),
            score: scores[k],
            stage: cfg.stages(),
        });
        out.stage_boxes.push(history[source[k]].clone());
        out.proposal_index.push(source[k]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed {
        logits: Vec<f64>,
    }

    impl BoxRegressorScorer for Fixed {
        fn predict(&self, _: &Tensor3, _: usize) -> HeadOutput {
            HeadOutput {
                deltas: [0.0; 4],
                logits: self.logits.clone(),
            }
        }
    }

    fn pyramid() -> FeaturePyramid {
        FeaturePyramid {
            levels: vec![FeatureLevel {
                stride: 4,
                map: Tensor3::zeros(1, 16, 16),
            }],
            image_width: 64,
            image_height: 64,
        }
    }

    #[test]
    fn identity_head_keeps_proposals() {
        let mut logits = vec![0.0; NUM_CLASSES_WITH_BG];
        logits[PathologyLabel::DISC_BULGE.class_index()] = 50.0;
        let props = [
            BoundingBox::new(4.0, 4.0, 20.0, 20.0).unwrap(),
            BoundingBox::new(30.0, 30.0, 40.0, 50.0).unwrap(),
        ];
        let out = cascade_detect(&pyramid(), &props, &Fixed { logits }, &CascadeConfig::default()).unwrap();
        assert_eq!(out.detections.len(), 2);
        for d in &out.detections {
            assert_eq!(d.label, PathologyLabel::DISC_BULGE);
            assert!(props.contains(&d.bbox));
            assert_eq!(d.stage, 3);
        }
        assert_eq!(out.stage_boxes[0].len(), 3);
    }

    #[test]
    fn uniform_logits_fall_below_floor() {
        let props = [BoundingBox::new(4.0, 4.0, 20.0, 20.0).unwrap()];
        let head = Fixed {
            logits: vec![0.0; NUM_CLASSES_WITH_BG],
        };
        let out = cascade_detect(&pyramid(), &props, &head, &CascadeConfig::default()).unwrap();
        assert!(out.detections.is_empty());
        let out = cascade_detect(&pyramid(), &[], &head, &CascadeConfig::default()).unwrap();
        assert!(out.detections.is_empty());
    }

    #[test]
    fn target_assignment() {
        let gt = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        // IoU 55/100 -> 0.55
        let p = BoundingBox::new(0.0, 0.0, 10.0, 5.5).unwrap();
        let thr = CascadeConfig::default().stage_iou_thresholds;
        let hits: Vec<_> = thr.iter().map(|&t| assign_stage_targets(&[p, gt], &[gt], t)).collect();
        assert_eq!(hits[0], vec![Some(0), Some(0)]);
        assert_eq!(hits[1], vec![None, Some(0)]);
        assert_eq!(hits[2], vec![None, Some(0)]);
        assert_eq!(assign_stage_targets(&[p], &[], 0.5), vec![None]);
        assert_eq!(assign_stage_targets(&[gt], &[gt, gt], 0.5), vec![Some(0)]);
    }

    #[test]
    fn weighted_loss() {
        let cfg = CascadeConfig::default();
        assert_eq!(weighted_cascade_loss(&[1.0, 1.0, 1.0], &cfg).unwrap(), 4.5);
        let gt = BoundingBox::new(0.0, 0.0, 10.0, 10.0).unwrap();
        assert_eq!(stage_regression_loss(&[gt], &[[0.0; 4]], &[gt], 0.5, 1.0).unwrap(), 0.0);
    }
}
