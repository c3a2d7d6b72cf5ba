//! Spine MRI analysis pipeline: DICOM/NIfTI ingestion, intensity
//! preprocessing, orientation checks, ensemble triage, cascade detection
//! geometry, prompt-guided segmentation refinement and evaluation metrics.

pub mod cli;
pub mod detect;
pub mod dicom;
pub mod ensemble;
pub mod fsio;
pub mod geometry;
pub mod kernels;
pub mod metrics;
pub mod nifti;
pub mod orientation;
pub mod phantom;
pub mod pipeline;
pub mod preprocess;
pub mod segment;
pub mod stats;
pub mod volume;

pub use volume::{Grid2, Sex, Volume, VolumeError, VolumeMeta};
