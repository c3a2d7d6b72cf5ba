use serde::{Deserialize, Serialize};

use super::bbox::BoundingBox;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnchorConfig {
    pub scales: Vec<f64>,
    /// Height / width.
    pub aspect_ratios: Vec<f64>,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        AnchorConfig {
            scales: vec![32.0, 64.0, 128.0, 256.0, 512.0],
            aspect_ratios: vec![0.5, 1.0, 2.0],
        }
    }
}

impl AnchorConfig {
    pub fn per_cell(&self) -> usize {
        self.scales.len() * self.aspect_ratios.len()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.scales.is_empty() || self.aspect_ratios.is_empty() {
            return Err("anchor scales and aspect ratios must be non-empty".into());
        }
        if self.scales.iter().any(|s| !(*s > 0.0)) || self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err("anchor scales must be positive and strictly ascending".into());
        }
        if self.aspect_ratios.iter().any(|r| !(*r > 0.0)) {
            return Err("anchor aspect ratios must be positive".into());
        }
        Ok(())
    }
}

/// Feature grid of `width` x `height` cells at `stride` image pixels per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGrid {
    pub width: usize,
    pub height: usize,
    pub stride: usize,
}

/// Anchors centred on every cell ((i + 0.5) * stride), one per
/// (scale, ratio) with h = s*sqrt(r), w = s/sqrt(r). Not clipped.
/// Order: row, column, scale, ratio.
pub fn generate_anchors(cfg: &AnchorConfig, grid: FeatureGrid) -> Vec<BoundingBox> {
    let mut out = Vec::with_capacity(grid.width * grid.height * cfg.per_cell());
    let stride = grid.stride as f64;
    for gy in 0..grid.height {
        let cy = (gy as f64 + 0.5) * stride;
        for gx in 0..grid.width {
            let cx = (gx as f64 + 0.5) * stride;
            for &s in &cfg.scales {
                for &r in &cfg.aspect_ratios {
                    let h = s * r.sqrt();
                    let w = s / r.sqrt();
                    out.push(BoundingBox {
                        x1: cx - 0.5 * w,
                        y1: cy - 0.5 * h,
                        x2: cx + 0.5 * w,
                        y2: cy + 0.5 * h,
                    });
                }
            }
        }
    }
    out
}
