//! Detection geometry: boxes and IoU, anchors, NMS, delta coding, RoI Align
//! and the three-stage cascade over a pluggable RoI head.

mod anchors;
mod bbox;
mod cascade;
mod deltas;
mod labels;
mod nms;
mod proposals;
mod roi_align;

use thiserror::Error;

pub use anchors::{generate_anchors, AnchorConfig, FeatureGrid};
pub use bbox::{iou, BoundingBox};
pub use cascade::{
    assign_stage_targets, cascade_detect, stage_regression_loss, weighted_cascade_loss, BoxRegressorScorer,
    CascadeConfig, CascadeOutput, Detection, FeatureLevel, FeaturePyramid, HeadOutput, NUM_CLASSES_WITH_BG,
};
pub use deltas::{apply_deltas, delta_clamp, encode_deltas};
pub use labels::{PathologyLabel, NUM_PATHOLOGIES, PATHOLOGY_NAMES};
pub use nms::{batched_nms, nms};
pub use proposals::{anchor_proposals, mask_proposals};
pub use roi_align::{image_to_feature, roi_align};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("degenerate box {0:?}: needs finite coordinates with x2 > x1 and y2 > y1")]
    DegenerateBox([f64; 4]),
    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid detection config: {0}")]
    Config(String),
}
