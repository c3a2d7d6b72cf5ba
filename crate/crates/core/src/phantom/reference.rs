//! Deterministic stand-ins for trained networks, tuned to phantom contrast.

use crate::detect::{BoxRegressorScorer, FeatureLevel, FeaturePyramid, HeadOutput, PathologyLabel, NUM_CLASSES_WITH_BG};
use crate::ensemble::AbnormalityScorer;
use crate::kernels::Tensor3;
use crate::segment::morphology::label_components_3d;
use crate::segment::{Mask, SegmentError, Segmenter};
use crate::stats::{mad, median, MAD_TO_SIGMA};
use crate::volume::{Grid2, Volume};

pub const SCORER_GAIN: f64 = 2.0e4;
pub const SCORER_OFFSET: f64 = 6e-4;
pub const FEATURE_STRIDES: [usize; 2] = [4, 8];
/// Normalized tissue level separating bone (below) from disc (above).
pub const TISSUE_SPLIT: f64 = 0.65;

const CH_INTENSITY: usize = 0;
const CH_RESIDUAL: usize = 2;
/// Residual amplitude below which an RoI is called background.
const MIN_AMPLITUDE: f64 = 0.1;
const LOGIT_GAIN: f64 = 20.0;
const BACKGROUND_LOGIT: f64 = 5.0;

/// Each voxel minus the median of its column across slices. Structures that
/// are constant along the slice axis cancel; focal lesions remain.
pub fn slice_residuals(v: &Volume) -> Volume {
    let [nx, ny, nz] = v.dims;
    let plane = nx * ny;
    let mut out = vec![0.0f32; v.voxels.len()];
    let mut column = vec![0.0f32; nz];
    for p in 0..plane {
        for z in 0..nz {
            column[z] = v.voxels[z * plane + p];
        }
        let m = median(&column).unwrap_or(0.0) as f32;
        for z in 0..nz {
            out[z * plane + p] = column[z] - m;
        }
    }
    v.with_voxels(out)
}

/// (median, 1.4826 * MAD).
pub fn robust_sigma(values: &[f32]) -> (f64, f64) {
    let c = median(values).unwrap_or(0.0);
    (c, MAD_TO_SIGMA * mad(values, c))
}

fn outlier_bits(residual: &[f32], k: f64) -> Vec<bool> {
    let (c, s) = robust_sigma(residual);
    residual.iter().map(|&r| (r as f64 - c).abs() > k * s).collect()
}

/// p = logistic(gain * (f - offset)) where f is the fraction of voxels whose
/// slice residual lies more than k robust sigmas from its median.
#[derive(Debug, Clone)]
pub struct OutlierScorer {
    pub id: String,
    pub k: f64,
}

impl OutlierScorer {
    pub fn new(k: f64) -> OutlierScorer {
        OutlierScorer {
            id: format!("outlier-k{k:.1}"),
            k,
        }
    }

    pub fn outlier_fraction(&self, v: &Volume) -> f64 {
        let r = slice_residuals(v);
        let n = outlier_bits(&r.voxels, self.k).iter().filter(|b| **b).count();
        n as f64 / r.voxels.len().max(1) as f64
    }
}

impl AbnormalityScorer for OutlierScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn score(&self, v: &Volume) -> f64 {
        let f = self.outlier_fraction(v);
        1.0 / (1.0 + (-SCORER_GAIN * (f - SCORER_OFFSET)).exp())
    }
}

/// The three default ensemble members.
pub fn reference_scorers() -> Vec<OutlierScorer> {
    [4.0, 4.5, 5.0].into_iter().map(OutlierScorer::new).collect()
}

/// Thresholds |residual - median| at k robust sigmas and drops 6-connected
/// 3-D components smaller than `min_component` voxels.
#[derive(Debug, Clone)]
pub struct ReferenceSegmenter {
    pub k: f64,
    pub min_component: usize,
}

impl Default for ReferenceSegmenter {
    fn default() -> Self {
        ReferenceSegmenter { k: 3.0, min_component: 4 }
    }
}

impl Segmenter for ReferenceSegmenter {
    fn segment(&self, v: &Volume) -> Result<Vec<Mask>, SegmentError> {
        let [nx, ny, nz] = v.dims;
        let r = slice_residuals(v);
        let mut bits = outlier_bits(&r.voxels, self.k);
        let (labels, n) = label_components_3d(&bits, v.dims);
        let mut sizes = vec![0usize; n + 1];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        for (b, &l) in bits.iter_mut().zip(&labels) {
            if l != 0 && sizes[l as usize] < self.min_component {
                *b = false;
            }
        }
        Ok((0..nz)
            .map(|z| Mask::from_binary(nx, ny, &bits[z * nx * ny..(z + 1) * nx * ny]))
            .collect())
    }
}

fn box3(g: &Grid2) -> Vec<f64> {
    let (w, h) = (g.width, g.height);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (mut s, mut n) = (0.0, 0.0);
            for yy in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for xx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    s += g.get(xx, yy) as f64;
                    n += 1.0;
                }
            }
            out[y * w + x] = s / n;
        }
    }
    out
}

fn gradient_magnitude(f: &[f64], w: usize, h: usize) -> Vec<f64> {
    let at = |x: usize, y: usize| f[y * w + x];
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let gx = (at((x + 1).min(w - 1), y) - at(x.saturating_sub(1), y)) / 2.0;
            let gy = (at(x, (y + 1).min(h - 1)) - at(x, y.saturating_sub(1))) / 2.0;
            out[y * w + x] = (gx * gx + gy * gy).sqrt();
        }
    }
    out
}

/// Channels: 3x3-smoothed intensity, its gradient magnitude, and the
/// 3x3-smoothed slice residual, each averaged over stride x stride cells.
pub fn reference_features(intensity: &Grid2, residual: &Grid2, strides: &[usize]) -> FeaturePyramid {
    let (w, h) = (intensity.width, intensity.height);
    let smooth = box3(intensity);
    let channels = [smooth.clone(), gradient_magnitude(&smooth, w, h), box3(residual)];
    let levels = strides
        .iter()
        .map(|&s| {
            let (fw, fh) = (w.div_ceil(s), h.div_ceil(s));
            let mut map = Tensor3::zeros(channels.len(), fh, fw);
            for (c, ch) in channels.iter().enumerate() {
                for cy in 0..fh {
                    for cx in 0..fw {
                        let (mut acc, mut n) = (0.0, 0.0);
                        for y in cy * s..((cy + 1) * s).min(h) {
                            for x in cx * s..((cx + 1) * s).min(w) {
                                acc += ch[y * w + x];
                                n += 1.0;
                            }
                        }
                        map.set(c, cy, cx, acc / n);
                    }
                }
            }
            FeatureLevel { stride: s, map }
        })
        .collect();
    FeaturePyramid {
        levels,
        image_width: w,
        image_height: h,
    }
}

/// Half-maximum extent of a profile in bin units: bin j spans [j, j + 1),
/// samples sit at bin centres. Crossings outside the sampled range are
/// extrapolated from the outermost pair of samples.
fn half_max_extent(p: &[f64]) -> (f64, f64) {
    let n = p.len();
    let (peak_i, peak) = p
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    let half = peak / 2.0;
    let cross = |a: usize, b: usize| {
        // Position between samples a and b where the profile equals half.
        let t = (p[a] - half) / (p[a] - p[b]);
        a as f64 + 0.5 + t * (b as f64 - a as f64)
    };
    let extrapolate = |a: usize, b: usize, fallback: f64| {
        // a is the outer sample, still above half; b its inner neighbour.
        if p[b] > p[a] {
            cross(a, b)
        } else {
            fallback
        }
    };
    let left = match (0..peak_i).rev().find(|&i| p[i] < half) {
        Some(i) => cross(i + 1, i),
        None if n > 1 => extrapolate(0, 1, 0.0),
        None => 0.0,
    };
    let right = match (peak_i + 1..n).find(|&i| p[i] < half) {
        Some(i) => cross(i - 1, i),
        None if n > 1 => extrapolate(n - 1, n - 2, n as f64),
        None => n as f64,
    };
    (left, right)
}

/// RoI head that regresses toward the half-maximum extent of the residual
/// blob in the pooled window and labels it by residual sign and by the
/// lesion-free tissue level (intensity minus residual) at the peak.
#[derive(Debug, Clone)]
pub struct ReferenceHead {
    /// Pooling context per stage; the last entry repeats.
    pub contexts: Vec<f64>,
}

impl Default for ReferenceHead {
    fn default() -> Self {
        ReferenceHead {
            contexts: vec![2.0, 2.4, 2.8],
        }
    }
}

impl ReferenceHead {
    fn classify(&self, amplitude: f64, tissue: f64) -> Option<PathologyLabel> {
        if amplitude.abs() < MIN_AMPLITUDE {
            None
        } else if amplitude > 0.0 {
            Some(PathologyLabel::TYPICAL_HEMANGIOMA)
        } else if tissue > TISSUE_SPLIT {
            Some(PathologyLabel::DISC_BULGE)
        } else {
            Some(PathologyLabel::BURST_FRACTURE)
        }
    }
}

impl BoxRegressorScorer for ReferenceHead {
    fn pooling_context(&self, stage: usize) -> f64 {
        self.contexts[stage.min(self.contexts.len() - 1)]
    }

    fn predict(&self, pooled: &Tensor3, stage: usize) -> HeadOutput {
        let (h, w) = (pooled.h, pooled.w);
        let mut logits = vec![0.0; NUM_CLASSES_WITH_BG];
        let (mut peak, mut amplitude) = ((0, 0), 0.0f64);
        for y in 0..h {
            for x in 0..w {
                let r = pooled.get(CH_RESIDUAL, y, x);
                if r.abs() > amplitude.abs() {
                    amplitude = r;
                    peak = (y, x);
                }
            }
        }
        let tissue = pooled.get(CH_INTENSITY, peak.0, peak.1) - amplitude;
        let Some(label) = self.classify(amplitude, tissue) else {
            logits[0] = BACKGROUND_LOGIT;
            return HeadOutput {
                deltas: [0.0; 4],
                logits,
            };
        };
        logits[label.class_index()] = LOGIT_GAIN * amplitude.abs();

        let s = amplitude.signum();
        let col: Vec<f64> = (0..w)
            .map(|x| (0..h).map(|y| s * pooled.get(CH_RESIDUAL, y, x)).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let row: Vec<f64> = (0..h)
            .map(|y| (0..w).map(|x| s * pooled.get(CH_RESIDUAL, y, x)).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let (x1, x2) = half_max_extent(&col);
        let (y1, y2) = half_max_extent(&row);
        // Window coordinates in [0, 1] map to the RoI enlarged by `c` about its centre.
        let c = self.pooling_context(stage);
        let (u1, u2) = (x1 / w as f64, x2 / w as f64);
        let (v1, v2) = (y1 / h as f64, y2 / h as f64);
        let deltas = [
            ((u1 + u2) / 2.0 - 0.5) * c,
            ((v1 + v2) / 2.0 - 0.5) * c,
            ((u2 - u1).max(1e-3) * c).ln(),
            ((v2 - v1).max(1e-3) * c).ln(),
        ];
        HeadOutput { deltas, logits }
    }
}
