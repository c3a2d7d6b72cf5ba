//! Coarse segmentation behind a pluggable segmenter, the micro U-Net
//! forward model, and prompt-guided refinement.

mod mask;
pub mod morphology;
mod refine;
mod unet;

use thiserror::Error;

use crate::kernels::KernelError;
use crate::volume::Volume;

pub use mask::{bbox_of, mask_iou, Mask, Rle};
pub use refine::{otsu_threshold, refine_with_prompts, Prompt, POINT_WINDOW};
pub use unet::{micro_unet_forward, patchify, ConvLayer, MicroUNetConfig, MicroUNetWeights};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("at least one prompt is required")]
    NoPrompts,
    #[error("prompt {index} lies outside the slice")]
    PromptOutside { index: usize },
    #[error("mask is {got:?} but slice is {expected:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("{axis} {size} is not divisible by {multiple}; pad by {pad}")]
    Indivisible {
        axis: &'static str,
        size: usize,
        multiple: usize,
        pad: usize,
    },
    #[error("segmenter failed on slice {slice}: {cause}")]
    Slice { slice: usize, cause: Box<SegmentError> },
    #[error("invalid segmentation config: {0}")]
    Config(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Produces one probabilistic mask per slice of a (normalized) volume.
pub trait Segmenter: Send + Sync {
    fn segment(&self, v: &Volume) -> Result<Vec<Mask>, SegmentError>;
}

/// Runs the micro U-Net independently on every slice.
pub struct UNetSegmenter {
    pub config: MicroUNetConfig,
    pub weights: MicroUNetWeights,
}

impl Segmenter for UNetSegmenter {
    fn segment(&self, v: &Volume) -> Result<Vec<Mask>, SegmentError> {
        (0..v.dims[2])
            .map(|z| {
                micro_unet_forward(&v.slice(z), &self.weights, &self.config).map_err(|e| SegmentError::Slice {
                    slice: z,
                    cause: Box::new(e),
                })
            })
            .collect()
    }
}

pub fn coarse_segment(v: &Volume, segmenter: &dyn Segmenter) -> Result<Vec<Mask>, SegmentError> {
    let masks = segmenter.segment(v)?;
    if masks.len() != v.dims[2] {
        return Err(SegmentError::Config(format!(
            "segmenter returned {} masks for {} slices",
            masks.len(),
            v.dims[2]
        )));
    }
    for (z, m) in masks.iter().enumerate() {
        if (m.width, m.height) != (v.dims[0], v.dims[1]) {
            return Err(SegmentError::Slice {
                slice: z,
                cause: Box::new(SegmentError::Shape {
                    expected: (v.dims[0], v.dims[1]),
                    got: (m.width, m.height),
                }),
            });
        }
    }
    Ok(masks)
}
