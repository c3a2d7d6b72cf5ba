//! Per-scan workflow shared by the CLI subcommands: verify, preprocess,
//! classify, segment, refine, detect, and evaluation against phantom truth.

mod config;
mod evaluate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{
    anchor_proposals, cascade_detect, mask_proposals, BoundingBox, FeatureGrid, PathologyLabel,
};
use crate::ensemble::{classify_volume, AbnormalityScorer, Classification, ScanLabel};
use crate::orientation::{classify_orientation_statistical, classify_volume_geometric, is_t2_description, Orientation, Plane};
use crate::phantom::{reference_features, slice_residuals, OutlierScorer, ReferenceHead, ReferenceSegmenter};
use crate::preprocess::{normalize_intensity, quality_flags, QualityReport};
use crate::segment::morphology::label_components;
use crate::segment::{bbox_of, coarse_segment, refine_with_prompts, Mask, Prompt, Rle};
use crate::volume::Volume;

pub use config::{DetectionConfig, MetricsConfig, PipelineConfig, ProposalSource, SegmentationConfig};
pub use evaluate::{lesion_mask_ious, scan_record, stage_mean_ious, SuiteSummary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{stage}: {detail}")]
    Stage { stage: &'static str, detail: String },
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
}

impl PipelineError {
    fn stage(stage: &'static str, e: impl std::fmt::Display) -> PipelineError {
        PipelineError::Stage {
            stage,
            detail: e.to_string(),
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, PipelineError::Io { .. })
    }
}

/// How far `process_scan` goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Verify,
    Classify,
    Segment,
    Detect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationSource {
    Geometry,
    Statistics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub scan_id: String,
    pub orientation: Orientation,
    pub source: OrientationSource,
    pub series_description: Option<String>,
    pub is_t2: bool,
    /// Sagittal series continue through the pipeline.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub scan_id: String,
    pub slice_index: usize,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub label_code: u8,
    pub label_name: String,
    pub score: f64,
    pub stage: usize,
    /// Box after each cascade stage.
    pub stage_boxes: Vec<BoundingBox>,
}

impl DetectionRecord {
    pub fn label(&self) -> PathologyLabel {
        PathologyLabel::from_code(self.label_code as usize).expect("valid label code")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    pub scan_id: String,
    /// Refined masks, one per slice.
    pub slices: Vec<Rle>,
    pub voxels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub scan_id: String,
    #[serde(flatten)]
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub scan_id: String,
    pub config_sha256: String,
    pub verify: VerifyRecord,
    pub quality: Option<QualityReport>,
    pub classification: Option<ClassificationRecord>,
    pub masks: Option<MaskRecord>,
    pub detections: Vec<DetectionRecord>,
}

pub fn verify_scan(scan_id: &str, v: &Volume) -> VerifyRecord {
    let (orientation, source) = match classify_volume_geometric(v) {
        Ok(o) if o.plane != Plane::Unknown => (o, OrientationSource::Geometry),
        _ => (classify_orientation_statistical(v), OrientationSource::Statistics),
    };
    VerifyRecord {
        scan_id: scan_id.to_string(),
        orientation,
        source,
        series_description: v.meta.series_description.clone(),
        is_t2: v.meta.series_description.as_deref().is_some_and(is_t2_description),
        accepted: orientation.plane == Plane::Sagittal,
    }
}

pub fn preprocess(v: &Volume, cfg: &PipelineConfig) -> Result<(Volume, QualityReport), PipelineError> {
    let quality = quality_flags(v, &cfg.quality);
    let normalized = normalize_intensity(v, &cfg.normalization).map_err(|e| PipelineError::stage("preprocess", e))?;
    Ok((normalized, quality))
}

/// Resolves ensemble member ids of the form `outlier-k<sigmas>`.
pub fn scorers(cfg: &PipelineConfig) -> Result<Vec<OutlierScorer>, PipelineError> {
    cfg.ensemble
        .members
        .iter()
        .map(|id| {
            id.strip_prefix("outlier-k")
                .and_then(|k| k.parse::<f64>().ok())
                .filter(|k| *k > 0.0)
                .map(|k| OutlierScorer { id: id.clone(), k })
                .ok_or_else(|| PipelineError::Config(format!("unknown ensemble member {id:?}")))
        })
        .collect()
}

pub fn classify(normalized: &Volume, cfg: &PipelineConfig) -> Result<Classification, PipelineError> {
    let members = scorers(cfg)?;
    let refs: Vec<&dyn AbnormalityScorer> = members.iter().map(|m| m as &dyn AbnormalityScorer).collect();
    classify_volume(normalized, &refs, &cfg.ensemble).map_err(|e| PipelineError::stage("classify", e))
}

pub struct Segmentation {
    pub residual: Volume,
    pub coarse: Vec<Mask>,
    pub refined: Vec<Mask>,
}

/// Coarse residual segmentation, then per-component box-prompted refinement
/// on the residual slice.
pub fn segment(normalized: &Volume, cfg: &PipelineConfig) -> Result<Segmentation, PipelineError> {
    let s = &cfg.segmentation;
    let segmenter = ReferenceSegmenter {
        k: s.threshold_sigmas,
        min_component: s.min_component,
    };
    let coarse = coarse_segment(normalized, &segmenter).map_err(|e| PipelineError::stage("segment", e))?;
    let residual = slice_residuals(normalized);
    let [nx, ny, _] = normalized.dims;
    let mut refined = Vec::with_capacity(coarse.len());
    for (z, m) in coarse.iter().enumerate() {
        let bits = m.binary();
        let (labels, n) = label_components(&bits, nx, ny);
        let slice = residual.slice(z);
        let mut out = vec![false; nx * ny];
        for l in 1..=n as u32 {
            let comp: Vec<bool> = labels.iter().map(|&v| v == l).collect();
            let Some(b) = bbox_of(nx, &comp) else { continue };
            let Some(prompt) = BoundingBox::new(
                (b.x1 - s.prompt_margin).max(0.0),
                (b.y1 - s.prompt_margin).max(0.0),
                (b.x2 + s.prompt_margin).min(nx as f64),
                (b.y2 + s.prompt_margin).min(ny as f64),
            )
            .ok() else {
                continue;
            };
            let r = refine_with_prompts(&slice, m, &[Prompt::Box(prompt)]).map_err(|e| PipelineError::Stage {
                stage: "refine",
                detail: format!("slice {z}: {e}"),
            })?;
            for (o, b) in out.iter_mut().zip(r.binary()) {
                *o |= b;
            }
        }
        refined.push(Mask::from_binary(nx, ny, &out));
    }
    Ok(Segmentation {
        residual,
        coarse,
        refined,
    })
}

fn mean_abs_in_box(integral: &[f64], w: usize, b: &BoundingBox) -> f64 {
    let h = integral.len() / (w + 1) - 1;
    let x1 = (b.x1.floor().max(0.0) as usize).min(w);
    let y1 = (b.y1.floor().max(0.0) as usize).min(h);
    let x2 = (b.x2.ceil().max(0.0) as usize).min(w);
    let y2 = (b.y2.ceil().max(0.0) as usize).min(h);
    if x2 <= x1 || y2 <= y1 {
        return 0.0;
    }
    let at = |x: usize, y: usize| integral[y * (w + 1) + x];
    (at(x2, y2) - at(x1, y2) - at(x2, y1) + at(x1, y1)) / ((x2 - x1) * (y2 - y1)) as f64
}

fn abs_integral(slice: &[f32], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += slice[y * w + x].abs() as f64;
            out[(y + 1) * (w + 1) + x + 1] = out[y * (w + 1) + x + 1] + row;
        }
    }
    out
}

pub fn detect(
    scan_id: &str,
    normalized: &Volume,
    seg: &Segmentation,
    cfg: &PipelineConfig,
) -> Result<Vec<DetectionRecord>, PipelineError> {
    let d = &cfg.detection;
    let head = ReferenceHead {
        contexts: d.head_contexts.clone(),
    };
    let [nx, ny, nz] = normalized.dims;
    let mut out = Vec::new();
    for z in 0..nz {
        let proposals = match d.proposal_source {
            ProposalSource::Mask => mask_proposals(&seg.refined[z], d.proposal_context),
            ProposalSource::Anchors => {
                let r = seg.residual.slice(z);
                let integral = abs_integral(&r.data, nx, ny);
                let stride = *d.feature_strides.last().expect("validated nonempty");
                let grid = FeatureGrid {
                    width: nx.div_ceil(stride),
                    height: ny.div_ceil(stride),
                    stride,
                };
                anchor_proposals(
                    &d.anchors,
                    grid,
                    (nx, ny),
                    |b| mean_abs_in_box(&integral, nx, b),
                    d.cascade.rpn_nms_threshold,
                    d.anchor_top_k,
                )
            }
        };
        if proposals.is_empty() {
            continue;
        }
        let pyramid = reference_features(&normalized.slice(z), &seg.residual.slice(z), &d.feature_strides);
        let result = cascade_detect(&pyramid, &proposals, &head, &d.cascade).map_err(|e| PipelineError::Stage {
            stage: "detect",
            detail: format!("slice {z}: {e}"),
        })?;
        for (det, boxes) in result.detections.iter().zip(result.stage_boxes) {
            out.push(DetectionRecord {
                scan_id: scan_id.to_string(),
                slice_index: z,
                bbox: det.bbox,
                label_code: det.label.code() as u8,
                label_name: det.label.name().to_string(),
                score: det.score,
                stage: det.stage,
                stage_boxes: boxes,
            });
        }
    }
    Ok(out)
}

/// Runs the workflow on one scan up to `until`. Non-sagittal series stop
/// after verification; scans classified Normal are not segmented.
pub fn process_scan(scan_id: &str, v: &Volume, cfg: &PipelineConfig, until: Stage) -> Result<ScanReport, PipelineError> {
    v.validate().map_err(|e| PipelineError::stage("ingest", e))?;
    let verify = verify_scan(scan_id, v);
    let mut report = ScanReport {
        scan_id: scan_id.to_string(),
        config_sha256: cfg.sha256(),
        verify,
        quality: None,
        classification: None,
        masks: None,
        detections: Vec::new(),
    };
    if until == Stage::Verify || !report.verify.accepted {
        return Ok(report);
    }
    let (normalized, quality) = preprocess(v, cfg)?;
    report.quality = Some(quality);
    let classification = classify(&normalized, cfg)?;
    let abnormal = classification.label == ScanLabel::Abnormal;
    report.classification = Some(ClassificationRecord {
        scan_id: scan_id.to_string(),
        classification,
    });
    if until == Stage::Classify || !abnormal {
        return Ok(report);
    }
    let seg = segment(&normalized, cfg)?;
    let slices: Vec<Rle> = seg.refined.iter().map(Mask::to_rle).collect();
    report.masks = Some(MaskRecord {
        scan_id: scan_id.to_string(),
        voxels: seg.refined.iter().map(Mask::count).sum(),
        slices,
    });
    if until == Stage::Segment {
        return Ok(report);
    }
    report.detections = detect(scan_id, &normalized, &seg, cfg)?;
    Ok(report)
}
