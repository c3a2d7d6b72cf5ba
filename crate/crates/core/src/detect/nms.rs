use super::bbox::{iou, BoundingBox};
use super::DetectError;

/// Greedy non-maximum suppression. Returns kept indices in descending score
/// order (ties by lower index); a box is dropped when its IoU with any kept
/// box exceeds `threshold`.
pub fn nms(boxes: &[BoundingBox], scores: &[f64], threshold: f64) -> Result<Vec<usize>, DetectError> {
    if boxes.len() != scores.len() {
        return Err(DetectError::LengthMismatch {
            what: "scores",
            expected: boxes.len(),
            got: scores.len(),
        });
    }
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut suppressed = vec![false; boxes.len()];
    let mut keep = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        keep.push(i);
        for &j in &order[pos + 1..] {
            if !suppressed[j] && iou(&boxes[i], &boxes[j]) > threshold {
                suppressed[j] = true;
            }
        }
    }
    Ok(keep)
}

/// NMS applied independently within each class.
pub fn batched_nms(
    boxes: &[BoundingBox],
    scores: &[f64],
    classes: &[usize],
    threshold: f64,
) -> Result<Vec<usize>, DetectError> {
    if classes.len() != boxes.len() {
        return Err(DetectError::LengthMismatch {
            what: "classes",
            expected: boxes.len(),
            got: classes.len(),
        });
    }
    let mut keep = Vec::new();
    let mut distinct: Vec<usize> = classes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for c in distinct {
        let idx: Vec<usize> = (0..boxes.len()).filter(|&i| classes[i] == c).collect();
        let b: Vec<BoundingBox> = idx.iter().map(|&i| boxes[i]).collect();
        let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        keep.extend(nms(&b, &s, threshold)?.into_iter().map(|k| idx[k]));
    }
    keep.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(keep)
}
