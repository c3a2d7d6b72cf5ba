use super::anchors::{generate_anchors, AnchorConfig, FeatureGrid};
use super::bbox::BoundingBox;
use super::nms::nms;
use crate::segment::morphology::label_components;
use crate::segment::{bbox_of, Mask};

/// One proposal per 8-connected component of the mask's binary view: the
/// component's tight box enlarged by `context` about its centre and clipped
/// to the slice. Ordered by first pixel in raster order.
pub fn mask_proposals(mask: &Mask, context: f64) -> Vec<BoundingBox> {
    let bits = mask.binary();
    let (labels, n) = label_components(&bits, mask.width, mask.height);
    (1..=n as u32)
        .filter_map(|l| {
            let comp: Vec<bool> = labels.iter().map(|&v| v == l).collect();
            bbox_of(mask.width, &comp)
                .and_then(|b| b.scaled(context).clip(mask.width as f64, mask.height as f64))
        })
        .collect()
}

/// Region-proposal style selection from anchors: anchors are clipped to the
/// image, scored by `objectness`, suppressed at `nms_threshold` and the best
/// `top_k` kept.
pub fn anchor_proposals(
    cfg: &AnchorConfig,
    grid: FeatureGrid,
    image: (usize, usize),
    objectness: impl Fn(&BoundingBox) -> f64,
    nms_threshold: f64,
    top_k: usize,
) -> Vec<BoundingBox> {
    let boxes: Vec<BoundingBox> = generate_anchors(cfg, grid)
        .iter()
        .filter_map(|a| a.clip(image.0 as f64, image.1 as f64))
        .collect();
    let scores: Vec<f64> = boxes.iter().map(&objectness).collect();
    let keep = nms(&boxes, &scores, nms_threshold).expect("equal lengths");
    keep.into_iter().take(top_k).map(|i| boxes[i]).collect()
}
