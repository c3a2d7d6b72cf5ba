//! Scan plane classification from direction cosines, a pixel-statistics
//! fallback, and study-level series verification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{cross, dot, norm};
use crate::kernels::softmax;
use crate::volume::Volume;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    Axial,
    Sagittal,
    Coronal,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub plane: Plane,
    pub confidence: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrientationError {
    #[error("{which} direction cosine has norm {norm}, expected 1 within 1e-3")]
    NotUnit { which: &'static str, norm: f64 },
    #[error("row and column cosines are not orthogonal (dot product {0})")]
    NotOrthogonal(f64),
    #[error("study contains no series")]
    EmptyStudy,
}

/// Classifies by the dominant component of the slice normal row x column.
pub fn classify_orientation_geometric(iop: [f64; 6]) -> Result<Orientation, OrientationError> {
    let r = [iop[0], iop[1], iop[2]];
    let c = [iop[3], iop[4], iop[5]];
    for (which, v) in [("row", r), ("column", c)] {
        let n = norm(v);
        if (n - 1.0).abs() > 1e-3 {
            return Err(OrientationError::NotUnit { which, norm: n });
        }
    }
    let d = dot(r, c);
    if d.abs() > 1e-3 {
        return Err(OrientationError::NotOrthogonal(d));
    }
    let n = cross(r, c).map(f64::abs);
    let plane = if n[0] >= n[1] && n[0] >= n[2] {
        Plane::Sagittal
    } else if n[1] >= n[2] {
        Plane::Coronal
    } else {
        Plane::Axial
    };
    Ok(Orientation { plane, confidence: 1.0 })
}

/// Classifies using the volume's first two direction columns as row/column cosines.
pub fn classify_volume_geometric(v: &Volume) -> Result<Orientation, OrientationError> {
    let r = v.direction_column(0);
    let c = v.direction_column(1);
    classify_orientation_geometric([r[0], r[1], r[2], c[0], c[1], c[2]])
}

/// Features of the slice-averaged image used by the statistical classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationFeatures {
    /// Vertical periodicity in [0, 1] (repeating bands along image rows).
    pub periodicity: f64,
    /// Left-right mirror correlation in [-1, 1].
    pub symmetry: f64,
    /// ln(physical height / physical width).
    pub log_aspect: f64,
}

const SCORE_GAIN: f64 = 6.0;
const ASPECT_WEIGHT: f64 = 0.25;
pub const MIN_MARGIN: f64 = 0.1;

fn mean_image(v: &Volume) -> Vec<f64> {
    let n = v.slice_len();
    let mut acc = vec![0.0; n];
    for s in v.slices() {
        for (a, &x) in acc.iter_mut().zip(s) {
            *a += x as f64;
        }
    }
    let nz = v.dims[2] as f64;
    acc.iter_mut().for_each(|a| *a /= nz);
    acc
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Unbiased normalized autocorrelation at `lag`.
fn autocorr(p: &[f64], lag: usize) -> f64 {
    let n = p.len();
    if lag >= n {
        return 0.0;
    }
    let m = p.iter().sum::<f64>() / n as f64;
    let var = p.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return 0.0;
    }
    let c = (0..n - lag).map(|i| (p[i] - m) * (p[i + lag] - m)).sum::<f64>() / (n - lag) as f64;
    c / var
}

/// Periodicity of the row profile: the autocorrelation peak after the first
/// negative lag, required to repeat at twice the lag, weighted by how far
/// the profile rises above its first-difference noise level.
fn periodicity(profile: &[f64]) -> f64 {
    let n = profile.len();
    if n < 9 {
        return 0.0;
    }
    let max_lag = n / 3;
    let Some(first_neg) = (1..=max_lag).find(|&l| autocorr(profile, l) < 0.0) else {
        return 0.0;
    };
    let Some((lag, peak)) = (first_neg..=max_lag)
        .map(|l| (l, autocorr(profile, l)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
    else {
        return 0.0;
    };
    let repeat = peak.min(autocorr(profile, 2 * lag));

    let m = profile.iter().sum::<f64>() / n as f64;
    let var = profile.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    let sq_diff: Vec<f64> = profile.windows(2).map(|w| (w[1] - w[0]).powi(2)).collect();
    // Median of a chi-square(1) variable is 0.4549; differences carry twice the noise variance.
    let noise_var = crate::stats::median_f64(&sq_diff).unwrap_or(0.0) / (2.0 * 0.4549);
    let weight = if var > 0.0 { (1.0 - 4.0 * noise_var / var).max(0.0) } else { 0.0 };
    (repeat.max(0.0) * weight).clamp(0.0, 1.0)
}

pub fn orientation_features(v: &Volume) -> OrientationFeatures {
    let [nx, ny, _] = v.dims;
    let img = mean_image(v);

    // Symmetry on row-centered values so shared vertical structure does not count.
    let mut centered = img.clone();
    for y in 0..ny {
        let row = &mut centered[y * nx..(y + 1) * nx];
        let m = row.iter().sum::<f64>() / nx as f64;
        row.iter_mut().for_each(|x| *x -= m);
    }
    let mirrored: Vec<f64> = (0..nx * ny).map(|i| centered[(i / nx) * nx + (nx - 1 - i % nx)]).collect();
    let symmetry = pearson(&centered, &mirrored);

    // Row profile over foreground columns, trimmed to the foreground row extent.
    let col_means: Vec<f64> = (0..nx).map(|x| (0..ny).map(|y| img[y * nx + x]).sum::<f64>() / ny as f64).collect();
    let lo = col_means.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = col_means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cols: Vec<usize> = (0..nx).filter(|&x| col_means[x] > 0.5 * (lo + hi)).collect();
    let profile: Vec<f64> = if cols.is_empty() {
        Vec::new()
    } else {
        (0..ny)
            .map(|y| cols.iter().map(|&x| img[y * nx + x]).sum::<f64>() / cols.len() as f64)
            .collect()
    };
    let periodicity = if profile.is_empty() {
        0.0
    } else {
        let plo = profile.iter().cloned().fold(f64::INFINITY, f64::min);
        let phi = profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (plo + phi);
        let first = profile.iter().position(|&p| p > mid);
        let last = profile.iter().rposition(|&p| p > mid);
        match (first, last) {
            (Some(a), Some(b)) => periodicity(&profile[a..=b]),
            _ => 0.0,
        }
    };

    let log_aspect = ((ny as f64 * v.spacing[1]) / (nx as f64 * v.spacing[0])).ln();
    OrientationFeatures {
        periodicity,
        symmetry,
        log_aspect,
    }
}

/// Class scores (Axial, Sagittal, Coronal) from the fixed linear rule.
pub fn orientation_scores(f: &OrientationFeatures) -> [f64; 3] {
    let (p, s, a) = (f.periodicity, f.symmetry, ASPECT_WEIGHT * f.log_aspect);
    [s - p, p - s + a, p + s - 1.0 + a]
}

/// Deterministic pixel-statistics classifier; Unknown when the softmax
/// margin between the two best classes is below 0.1.
pub fn classify_orientation_statistical(v: &Volume) -> Orientation {
    let scores = orientation_scores(&orientation_features(v));
    let probs = softmax(&scores.map(|s| SCORE_GAIN * s)).expect("three scores");
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    let margin = probs[order[0]] - probs[order[1]];
    let plane = if margin < MIN_MARGIN {
        Plane::Unknown
    } else {
        [Plane::Axial, Plane::Sagittal, Plane::Coronal][order[0]]
    };
    Orientation {
        plane,
        confidence: margin,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesVerdict {
    pub index: usize,
    pub series_uid: Option<String>,
    pub series_description: Option<String>,
    pub orientation: Orientation,
    pub is_t2: bool,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub series: Vec<SeriesVerdict>,
    pub has_t2_sagittal: bool,
    pub accepted: Vec<usize>,
    pub rejected: Vec<usize>,
}

impl VerificationReport {
    /// Accepted sagittal series, the default input to downstream stages.
    pub fn accepted_sagittal(&self) -> Vec<usize> {
        self.series
            .iter()
            .filter(|s| s.accepted && s.orientation.plane == Plane::Sagittal)
            .map(|s| s.index)
            .collect()
    }
}

pub fn is_t2_description(desc: &str) -> bool {
    desc.to_ascii_uppercase().contains("T2")
}

pub fn verify_study(series: &[(&Volume, Orientation)]) -> Result<VerificationReport, OrientationError> {
    if series.is_empty() {
        return Err(OrientationError::EmptyStudy);
    }
    let verdicts: Vec<SeriesVerdict> = series
        .iter()
        .enumerate()
        .map(|(index, (v, o))| SeriesVerdict {
            index,
            series_uid: v.meta.series_uid.clone(),
            series_description: v.meta.series_description.clone(),
            orientation: *o,
            is_t2: v.meta.series_description.as_deref().is_some_and(is_t2_description),
            accepted: o.plane != Plane::Unknown,
        })
        .collect();
    Ok(VerificationReport {
        has_t2_sagittal: verdicts.iter().any(|s| s.is_t2 && s.orientation.plane == Plane::Sagittal),
        accepted: verdicts.iter().filter(|s| s.accepted).map(|s| s.index).collect(),
        rejected: verdicts.iter().filter(|s| !s.accepted).map(|s| s.index).collect(),
        series: verdicts,
    })
}
