use serde::{Deserialize, Serialize};

use super::PreprocessError;
use crate::stats::{percentile_sorted, sorted_copy};
use crate::volume::Volume;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalizationConfig {
    pub clip_lo_percentile: f64,
    pub clip_hi_percentile: f64,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            clip_lo_percentile: 1.0,
            clip_hi_percentile: 99.0,
        }
    }
}

impl NormalizationConfig {
    pub fn validate(&self) -> Result<(), PreprocessError> {
        let (lo, hi) = (self.clip_lo_percentile, self.clip_hi_percentile);
        if !(0.0 <= lo && lo < hi && hi <= 100.0) {
            return Err(PreprocessError::Percentiles { lo, hi });
        }
        Ok(())
    }
}

/// Clips to the configured percentile range and maps it linearly onto [0, 1].
/// A volume whose clip range collapses to a single value maps to zeros.
pub fn normalize_intensity(v: &Volume, c: &NormalizationConfig) -> Result<Volume, PreprocessError> {
    c.validate()?;
    if v.voxels.is_empty() {
        return Err(PreprocessError::Empty);
    }
    let sorted = sorted_copy(&v.voxels);
    let lo = percentile_sorted(&sorted, c.clip_lo_percentile);
    let hi = percentile_sorted(&sorted, c.clip_hi_percentile);
    let range = hi - lo;
    let voxels = if range > 0.0 {
        v.voxels
            .iter()
            .map(|&x| ((x as f64).clamp(lo, hi) - lo) / range)
            .map(|x| x as f32)
            .collect()
    } else {
        vec![0.0; v.voxels.len()]
    };
    Ok(v.with_voxels(voxels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vol(values: Vec<f32>) -> Volume {
        let n = values.len();
        let mut v = Volume::filled([n, 1, 1], 0.0);
        v.voxels = values;
        v
    }

    #[test]
    fn constant_maps_to_zero() {
        let out = normalize_intensity(&vol(vec![7.0; 10]), &NormalizationConfig::default()).unwrap();
        assert!(out.voxels.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_map_without_clipping() {
        let c = NormalizationConfig {
            clip_lo_percentile: 0.0,
            clip_hi_percentile: 100.0,
        };
        let out = normalize_intensity(&vol((0..=100).map(|i| i as f32).collect()), &c).unwrap();
        assert_eq!(out.voxels[50], 0.5);
        assert_eq!(out.voxels[0], 0.0);
        assert_eq!(out.voxels[100], 1.0);
    }

    #[test]
    fn outlier_clips_to_one() {
        let mut values: Vec<f32> = (0..200).map(|i| i as f32).collect();
        values.push(1990.0);
        let out = normalize_intensity(&vol(values), &NormalizationConfig::default()).unwrap();
        assert_eq!(*out.voxels.last().unwrap(), 1.0);
        assert_eq!(out.voxels.iter().cloned().fold(f32::MAX, f32::min), 0.0);
    }

    #[test]
    fn bad_percentiles_rejected() {
        let c = NormalizationConfig {
            clip_lo_percentile: 50.0,
            clip_hi_percentile: 50.0,
        };
        assert!(normalize_intensity(&vol(vec![1.0, 2.0]), &c).is_err());
    }
}
