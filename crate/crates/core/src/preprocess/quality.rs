use serde::{Deserialize, Serialize};

use crate::stats::{mad, median, median_f64, MAD_TO_SIGMA};
use crate::volume::Volume;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QualityThresholds {
    /// Minimum robust SNR.
    pub min_snr: f64,
    /// Maximum relative spread of adjacent slice gaps.
    pub gap_tolerance: f64,
    /// Motion is suspected when some adjacent-slice difference exceeds this
    /// multiple of the series median difference.
    pub motion_factor: f64,
}

impl Default for QualityThresholds {
    fn default() -> Self {
        QualityThresholds {
            min_snr: 5.0,
            gap_tolerance: 0.1,
            motion_factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityFlag {
    pub flagged: bool,
    pub statistic: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Statistic: robust SNR.
    pub low_snr: QualityFlag,
    /// Statistic: largest adjacent-slice mean absolute difference divided by the median.
    pub motion_suspect: QualityFlag,
    /// Statistic: (max gap - min gap) / min gap.
    pub nonuniform_slice_gap: QualityFlag,
    /// Statistic: number of blank (constant) slices.
    pub incomplete_coverage: QualityFlag,
}

impl QualityReport {
    pub fn any(&self) -> bool {
        self.low_snr.flagged
            || self.motion_suspect.flagged
            || self.nonuniform_slice_gap.flagged
            || self.incomplete_coverage.flagged
    }
}

/// Border shell of each slice: `max(2, 10%)` pixels in from every in-plane edge.
fn in_shell(x: usize, y: usize, nx: usize, ny: usize) -> bool {
    let bx = (nx / 10).max(2);
    let by = (ny / 10).max(2);
    x < bx || y < by || x + bx >= nx || y + by >= ny
}

/// SNR = (median(foreground) - median(shell)) / (1.4826 * MAD(shell)), with
/// foreground = non-shell voxels more than 3 sigma above the shell median.
fn robust_snr(v: &Volume) -> f64 {
    let [nx, ny, nz] = v.dims;
    let mut shell = Vec::new();
    let mut inner = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let val = v.get(x, y, z);
                if in_shell(x, y, nx, ny) {
                    shell.push(val);
                } else {
                    inner.push(val);
                }
            }
        }
    }
    let Some(bg) = median(&shell) else {
        return 0.0;
    };
    let sigma = MAD_TO_SIGMA * mad(&shell, bg);
    let cut = bg + 3.0 * sigma;
    let fg: Vec<f32> = inner.into_iter().filter(|&x| x as f64 > cut).collect();
    let Some(signal) = median(&fg) else {
        return 0.0;
    };
    if sigma <= 0.0 {
        return if signal > bg { f64::INFINITY } else { 0.0 };
    }
    (signal - bg) / sigma
}

fn gap_spread(v: &Volume) -> f64 {
    let Some(pos) = v.meta.slice_positions.as_ref().filter(|p| p.len() >= 3) else {
        return 0.0;
    };
    let gaps: Vec<f64> = pos.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().cloned().fold(0.0, f64::max);
    if lo > 0.0 {
        (hi - lo) / lo
    } else {
        f64::INFINITY
    }
}

fn motion_ratio(v: &Volume) -> f64 {
    let slices: Vec<&[f32]> = v.slices().collect();
    if slices.len() < 3 {
        return 0.0;
    }
    let diffs: Vec<f64> = slices
        .windows(2)
        .map(|w| w[0].iter().zip(w[1]).map(|(a, b)| (a - b).abs() as f64).sum::<f64>() / w[0].len() as f64)
        .collect();
    let med = median_f64(&diffs).unwrap_or(0.0);
    let max = diffs.iter().cloned().fold(0.0, f64::max);
    if med > 0.0 {
        max / med
    } else if max > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn blank_slices(v: &Volume) -> usize {
    v.slices()
        .filter(|s| s.iter().all(|&x| x == s[0]))
        .count()
}

pub fn quality_flags(v: &Volume, t: &QualityThresholds) -> QualityReport {
    let snr = robust_snr(v);
    let spread = gap_spread(v);
    let motion = motion_ratio(v);
    let blank = blank_slices(v) as f64;
    QualityReport {
        low_snr: QualityFlag {
            flagged: snr < t.min_snr,
            statistic: snr,
            threshold: t.min_snr,
        },
        motion_suspect: QualityFlag {
            flagged: motion > t.motion_factor,
            statistic: motion,
            threshold: t.motion_factor,
        },
        nonuniform_slice_gap: QualityFlag {
            flagged: spread > t.gap_tolerance || v.meta.nonuniform_slice_gap,
            statistic: spread,
            threshold: t.gap_tolerance,
        },
        incomplete_coverage: QualityFlag {
            flagged: blank > 0.0,
            statistic: blank,
            threshold: 0.0,
        },
    }
}
