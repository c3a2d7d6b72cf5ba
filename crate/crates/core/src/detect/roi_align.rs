use super::bbox::BoundingBox;
use crate::kernels::{bilinear_at, Tensor3};

/// Pools `box_f` (feature-map coordinates; feature value (c, y, x) sits at
/// continuous position (x, y)) to C x out x out. Each bin averages
/// sampling_ratio^2 bilinear samples at fractions (i + 0.5) / n of the bin.
pub fn roi_align(features: &Tensor3, box_f: &BoundingBox, out: usize, sampling_ratio: usize) -> Tensor3 {
    let n = sampling_ratio.max(1);
    let bw = box_f.width() / out as f64;
    let bh = box_f.height() / out as f64;
    let mut pooled = Tensor3::zeros(features.c, out, out);
    let inv = 1.0 / (n * n) as f64;
    for c in 0..features.c {
        let chan = features.channel(c);
        let at = |x: usize, y: usize| chan[y * features.w + x];
        for by in 0..out {
            for bx in 0..out {
                let mut acc = 0.0;
                for sy in 0..n {
                    let y = box_f.y1 + (by as f64 + (sy as f64 + 0.5) / n as f64) * bh;
                    for sx in 0..n {
                        let x = box_f.x1 + (bx as f64 + (sx as f64 + 0.5) / n as f64) * bw;
                        acc += bilinear_at(features.w, features.h, x, y, at);
                    }
                }
                pooled.set(c, by, bx, acc * inv);
            }
        }
    }
    pooled
}

/// Image-pixel box to feature coordinates for a map whose cell i covers
/// image pixels [i * stride, (i + 1) * stride).
pub fn image_to_feature(b: &BoundingBox, stride: f64) -> BoundingBox {
    BoundingBox {
        x1: b.x1 / stride - 0.5,
        y1: b.y1 / stride - 0.5,
        x2: b.x2 / stride - 0.5,
        y2: b.y2 / stride - 0.5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_ramp() {
        let f = Tensor3::from_vec(1, 10, 12, vec![3.0; 120]);
        let b = BoundingBox::new(1.2, 2.3, 8.9, 7.7).unwrap();
        let p = roi_align(&f, &b, 7, 2);
        assert!(p.data.iter().all(|&v| (v - 3.0).abs() < 1e-12));

        let ramp = Tensor3::from_vec(1, 10, 12, (0..120).map(|i| (i % 12) as f64).collect());
        let p = roi_align(&ramp, &b, 7, 2);
        let bw = b.width() / 7.0;
        for bx in 0..7 {
            let expect = b.x1 + (bx as f64 + 0.5) * bw;
            assert!((p.get(0, 3, bx) - expect).abs() < 1e-12);
        }
    }
}
