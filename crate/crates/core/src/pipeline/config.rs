use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::detect::{AnchorConfig, CascadeConfig};
use crate::ensemble::EnsembleConfig;
use crate::kernels::LossWeights;
use crate::phantom::FEATURE_STRIDES;
use crate::preprocess::{NormalizationConfig, QualityThresholds};
use crate::segment::MicroUNetConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalSource {
    /// Component boxes of the refined masks, enlarged by `proposal_context`.
    Mask,
    /// Anchors scored by mean absolute residual, kept after NMS.
    Anchors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionConfig {
    pub anchors: AnchorConfig,
    pub cascade: CascadeConfig,
    pub proposal_source: ProposalSource,
    pub proposal_context: f64,
    pub anchor_top_k: usize,
    pub feature_strides: Vec<usize>,
    pub head_contexts: Vec<f64>,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            anchors: AnchorConfig::default(),
            cascade: CascadeConfig::default(),
            proposal_source: ProposalSource::Mask,
            proposal_context: 1.5,
            anchor_top_k: 300,
            feature_strides: FEATURE_STRIDES.to_vec(),
            head_contexts: vec![2.0, 2.4, 2.8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentationConfig {
    /// Robust-sigma multiple for the coarse residual threshold.
    pub threshold_sigmas: f64,
    /// Smallest 3-D component kept by the coarse segmenter.
    pub min_component: usize,
    /// Margin in pixels added around coarse component boxes used as prompts.
    pub prompt_margin: f64,
    pub loss: LossWeights,
    pub unet: MicroUNetConfig,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            threshold_sigmas: 3.0,
            min_component: 4,
            prompt_margin: 2.0,
            loss: LossWeights::default(),
            unet: MicroUNetConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsConfig {
    pub iou_threshold: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig { iou_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub normalization: NormalizationConfig,
    pub quality: QualityThresholds,
    pub ensemble: EnsembleConfig,
    pub segmentation: SegmentationConfig,
    pub detection: DetectionConfig,
    pub metrics: MetricsConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            normalization: NormalizationConfig::default(),
            quality: QualityThresholds::default(),
            ensemble: EnsembleConfig::default(),
            segmentation: SegmentationConfig::default(),
            detection: DetectionConfig::default(),
            metrics: MetricsConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Strict parse: unknown keys anywhere are rejected.
    pub fn from_json(text: &str) -> Result<PipelineConfig, PipelineError> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        self.normalization.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.ensemble.normalized_weights().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.detection.cascade.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.detection.anchors.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.segmentation.loss.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        let d = &self.detection;
        if d.feature_strides.is_empty() || d.feature_strides.iter().any(|&s| s == 0) {
            return bad("detection.feature_strides must be nonempty and positive".into());
        }
        if d.head_contexts.is_empty() || d.head_contexts.iter().any(|c| !(*c >= 1.0)) {
            return bad("detection.head_contexts must be nonempty with entries >= 1".into());
        }
        if !(d.proposal_context >= 1.0) {
            return bad("detection.proposal_context must be >= 1".into());
        }
        let s = &self.segmentation;
        if !(s.threshold_sigmas > 0.0) || !(s.prompt_margin >= 0.0) {
            return bad("segmentation.threshold_sigmas must be > 0 and prompt_margin >= 0".into());
        }
        if !(self.metrics.iou_threshold > 0.0 && self.metrics.iou_threshold <= 1.0) {
            return bad("metrics.iou_threshold must lie in (0, 1]".into());
        }
        if self.ensemble.members.is_empty() {
            return bad("ensemble.members must not be empty".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// SHA-256 of the canonical effective-config JSON.
    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_and_round_trip() {
        let c = PipelineConfig::from_json("{\"seed\": 3}").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(PipelineConfig::from_json(&c.to_json()).unwrap(), c);
        assert!(PipelineConfig::from_json("{\"sede\": 3}").is_err());
        assert!(PipelineConfig::from_json("{\"detection\": {\"cascade\": {\"bogus\": 1}}}").is_err());
    }
}
