use serde::{Deserialize, Serialize};

use super::DetectError;

/// Axis-aligned box in pixel coordinates; area = (x2 - x1) * (y2 - y1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct BoundingBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> [f64; 4] {
        [b.x1, b.y1, b.x2, b.y2]
    }
}

impl TryFrom<[f64; 4]> for BoundingBox {
    type Error = DetectError;
    fn try_from(v: [f64; 4]) -> Result<Self, DetectError> {
        BoundingBox::new(v[0], v[1], v[2], v[3])
    }
}

impl BoundingBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<BoundingBox, DetectError> {
        let b = BoundingBox { x1, y1, x2, y2 };
        if !(x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite()) || x2 <= x1 || y2 <= y1 {
            return Err(DetectError::DegenerateBox([x1, y1, x2, y2]));
        }
        Ok(b)
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<BoundingBox, DetectError> {
        BoundingBox::new(cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    pub fn intersection(&self, o: &BoundingBox) -> f64 {
        let w = (self.x2.min(o.x2) - self.x1.max(o.x1)).max(0.0);
        let h = (self.y2.min(o.y2) - self.y1.max(o.y1)).max(0.0);
        w * h
    }

    /// Same center, sides multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> BoundingBox {
        let (cx, cy) = self.center();
        let (hw, hh) = (0.5 * factor * self.width(), 0.5 * factor * self.height());
        BoundingBox {
            x1: cx - hw,
            y1: cy - hh,
            x2: cx + hw,
            y2: cy + hh,
        }
    }

    /// Clips to [0, width] x [0, height]. Returns None when nothing remains.
    pub fn clip(&self, width: f64, height: f64) -> Option<BoundingBox> {
        BoundingBox::new(
            self.x1.clamp(0.0, width),
            self.y1.clamp(0.0, height),
            self.x2.clamp(0.0, width),
            self.y2.clamp(0.0, height),
        )
        .ok()
    }
}

pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}
