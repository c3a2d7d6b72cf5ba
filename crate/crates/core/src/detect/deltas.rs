use super::bbox::BoundingBox;
use super::DetectError;

/// Upper bound on dw/dh before exponentiation.
pub fn delta_clamp() -> f64 {
    1000f64.ln()
}

/// (dx, dy, dw, dh) taking `proposal` to `gt`.
pub fn encode_deltas(proposal: &BoundingBox, gt: &BoundingBox) -> Result<[f64; 4], DetectError> {
    for b in [proposal, gt] {
        if !(b.width() > 0.0 && b.height() > 0.0) {
            return Err(DetectError::DegenerateBox([b.x1, b.y1, b.x2, b.y2]));
        }
    }
    let (px, py) = proposal.center();
    let (gx, gy) = gt.center();
    let (pw, ph) = (proposal.width(), proposal.height());
    Ok([
        (gx - px) / pw,
        (gy - py) / ph,
        (gt.width() / pw).ln(),
        (gt.height() / ph).ln(),
    ])
}

pub fn apply_deltas(b: &BoundingBox, d: [f64; 4]) -> Result<BoundingBox, DetectError> {
    if !(b.width() > 0.0 && b.height() > 0.0) {
        return Err(DetectError::DegenerateBox([b.x1, b.y1, b.x2, b.y2]));
    }
    let (px, py) = b.center();
    let (pw, ph) = (b.width(), b.height());
    let cx = px + d[0] * pw;
    let cy = py + d[1] * ph;
    let w = pw * d[2].min(delta_clamp()).exp();
    let h = ph * d[3].min(delta_clamp()).exp();
    BoundingBox::from_center(cx, cy, w, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example() {
        let b = BoundingBox::from_center(10.0, 10.0, 4.0, 4.0).unwrap();
        let out = apply_deltas(&b, [0.5, 0.0, 2f64.ln(), 0.0]).unwrap();
        let want = [8.0, 8.0, 16.0, 12.0];
        for (a, w) in <[f64; 4]>::from(out).iter().zip(want) {
            assert!((a - w).abs() < 1e-12);
        }
        assert_eq!(apply_deltas(&b, [0.0; 4]).unwrap(), b);
    }

    #[test]
    fn clamp_limits_growth() {
        let b = BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let out = apply_deltas(&b, [0.0, 0.0, 50.0, 50.0]).unwrap();
        assert!((out.width() - 1000.0).abs() < 1e-9);
    }
}
