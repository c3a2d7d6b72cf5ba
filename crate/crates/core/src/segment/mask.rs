use serde::{Deserialize, Serialize};

use crate::detect::BoundingBox;

/// Per-pixel probabilities in [0, 1] over a width x height slice (x fastest).
/// The binary view is `value >= 0.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Mask {
    pub fn empty(width: usize, height: usize) -> Mask {
        Mask {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn from_probabilities(width: usize, height: usize, data: Vec<f32>) -> Mask {
        assert_eq!(data.len(), width * height, "mask data length");
        Mask { width, height, data }
    }

    pub fn from_binary(width: usize, height: usize, bits: &[bool]) -> Mask {
        assert_eq!(bits.len(), width * height, "mask data length");
        Mask {
            width,
            height,
            data: bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    #[inline]
    pub fn is_set(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x] >= 0.5
    }

    pub fn binary(&self) -> Vec<bool> {
        self.data.iter().map(|&v| v >= 0.5).collect()
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v >= 0.5).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Tight corner-exclusive bounds of the binary view.
    pub fn bbox(&self) -> Option<BoundingBox> {
        bbox_of(self.width, &self.binary())
    }

    pub fn to_rle(&self) -> Rle {
        Rle::encode(self.width, self.height, &self.binary())
    }
}

pub fn bbox_of(width: usize, bits: &[bool]) -> Option<BoundingBox> {
    let (mut x1, mut y1, mut x2, mut y2) = (usize::MAX, usize::MAX, 0, 0);
    for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
        let (x, y) = (i % width, i / width);
        x1 = x1.min(x);
        y1 = y1.min(y);
        x2 = x2.max(x + 1);
        y2 = y2.max(y + 1);
    }
    (x1 != usize::MAX).then(|| BoundingBox {
        x1: x1 as f64,
        y1: y1 as f64,
        x2: x2 as f64,
        y2: y2 as f64,
    })
}

/// Intersection over union of two binary masks; 1 when both are empty.
pub fn mask_iou(a: &[bool], b: &[bool]) -> f64 {
    assert_eq!(a.len(), b.len(), "mask sizes differ");
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Run-length encoding of a binary mask: `[start, length]` runs of set
/// pixels in row-major order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    pub width: usize,
    pub height: usize,
    pub runs: Vec<[usize; 2]>,
}

impl Rle {
    pub fn encode(width: usize, height: usize, bits: &[bool]) -> Rle {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < bits.len() {
            if bits[i] {
                let start = i;
                while i < bits.len() && bits[i] {
                    i += 1;
                }
                runs.push([start, i - start]);
            } else {
                i += 1;
            }
        }
        Rle { width, height, runs }
    }

    pub fn decode(&self) -> Vec<bool> {
        let mut bits = vec![false; self.width * self.height];
        for &[start, len] in &self.runs {
            for b in bits.iter_mut().skip(start).take(len) {
                *b = true;
            }
        }
        bits
    }
}
