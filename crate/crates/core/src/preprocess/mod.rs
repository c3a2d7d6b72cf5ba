//! Intensity normalization, deterministic slice augmentation and
//! acquisition quality flags.

mod augment;
mod normalize;
mod quality;

use thiserror::Error;

pub use augment::{augment, AugmentSpec, MAX_ROTATION_DEGREES};
pub use normalize::{normalize_intensity, NormalizationConfig};
pub use quality::{quality_flags, QualityFlag, QualityReport, QualityThresholds};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("percentiles must satisfy 0 <= lo < hi <= 100, got lo={lo} hi={hi}")]
    Percentiles { lo: f64, hi: f64 },
    #[error("rotation {0} degrees exceeds the +/-15 degree limit")]
    Rotation(f64),
    #[error("intensity scale must be positive and finite, got {0}")]
    IntensityScale(f64),
    #[error("volume is empty")]
    Empty,
}
