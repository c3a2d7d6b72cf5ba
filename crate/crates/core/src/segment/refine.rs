use serde::{Deserialize, Serialize};

use super::mask::Mask;
use super::morphology::{close, dilate, label_components};
use super::SegmentError;
use crate::detect::BoundingBox;
use crate::volume::Grid2;

/// Side of the square window placed around point prompts.
pub const POINT_WINDOW: usize = 64;
const COARSE_DILATION: usize = 2;
const CLOSING_RADIUS: usize = 1;
const OTSU_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Prompt {
    Point { x: f64, y: f64, positive: bool },
    Box(BoundingBox),
}

/// Otsu threshold over `values`: maximizes between-class variance on a
/// 256-bin histogram spanning [min, max]. Returns the upper edge of the
/// last background bin; None for fewer than two distinct values.
pub fn otsu_threshold(values: &[f32]) -> Option<f64> {
    let lo = values.iter().cloned().fold(f32::INFINITY, f32::min) as f64;
    let hi = values.iter().cloned().fold(f32::NEG_INFINITY, f32::max) as f64;
    if !(hi > lo) {
        return None;
    }
    let width = (hi - lo) / OTSU_BINS as f64;
    let mut hist = [0f64; OTSU_BINS];
    for &v in values {
        let b = (((v as f64 - lo) / width) as usize).min(OTSU_BINS - 1);
        hist[b] += 1.0;
    }
    let total: f64 = hist.iter().sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(i, c)| i as f64 * c).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, &c) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        w0 += c;
        sum0 += i as f64 * c;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if between > best.0 {
            best = (between, i);
        }
    }
    Some(lo + (best.1 + 1) as f64 * width)
}

fn window_mask(width: usize, height: usize, prompts: &[Prompt]) -> Vec<bool> {
    let mut win = vec![false; width * height];
    let mut fill = |x1: f64, y1: f64, x2: f64, y2: f64| {
        let xa = x1.floor().max(0.0) as usize;
        let ya = y1.floor().max(0.0) as usize;
        let xb = (x2.ceil().max(0.0) as usize).min(width);
        let yb = (y2.ceil().max(0.0) as usize).min(height);
        for y in ya..yb {
            for x in xa..xb {
                win[y * width + x] = true;
            }
        }
    };
    let has_box = prompts.iter().any(|p| matches!(p, Prompt::Box(_)));
    for p in prompts {
        match *p {
            Prompt::Box(b) => fill(b.x1, b.y1, b.x2, b.y2),
            Prompt::Point { x, y, .. } if !has_box => {
                let half = POINT_WINDOW as f64 / 2.0;
                fill(x - half, y - half, x + half, y + half);
            }
            Prompt::Point { .. } => {}
        }
    }
    win
}

fn validate_prompts(width: usize, height: usize, prompts: &[Prompt]) -> Result<(), SegmentError> {
    if prompts.is_empty() {
        return Err(SegmentError::NoPrompts);
    }
    let (w, h) = (width as f64, height as f64);
    for (index, p) in prompts.iter().enumerate() {
        let inside = match *p {
            Prompt::Point { x, y, .. } => x >= 0.0 && y >= 0.0 && x < w && y < h,
            Prompt::Box(b) => b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= w && b.y2 <= h,
        };
        if !inside {
            return Err(SegmentError::PromptOutside { index });
        }
    }
    Ok(())
}

/// Deterministic prompt-guided refinement:
/// window from the prompts, Otsu threshold inside the window (polarity taken
/// from the coarse mask), intersection with the coarse mask dilated by 2,
/// component selection by positive points or coarse overlap, removal of
/// components holding negative points, closing with radius 1, and a final
/// restriction to the window.
pub fn refine_with_prompts(slice: &Grid2, coarse: &Mask, prompts: &[Prompt]) -> Result<Mask, SegmentError> {
    let (w, h) = (slice.width, slice.height);
    if coarse.width != w || coarse.height != h {
        return Err(SegmentError::Shape {
            expected: (w, h),
            got: (coarse.width, coarse.height),
        });
    }
    validate_prompts(w, h, prompts)?;
    let win = window_mask(w, h, prompts);
    let coarse_bits = coarse.binary();

    let inside: Vec<f32> = (0..w * h).filter(|&i| win[i]).map(|i| slice.data[i]).collect();
    let Some(t) = otsu_threshold(&inside) else {
        return Ok(Mask::empty(w, h));
    };

    // Polarity: does the coarse region sit above or below the rest of the window?
    let (mut s_in, mut n_in, mut s_out, mut n_out) = (0.0, 0usize, 0.0, 0usize);
    for i in (0..w * h).filter(|&i| win[i]) {
        if coarse_bits[i] {
            s_in += slice.data[i] as f64;
            n_in += 1;
        } else {
            s_out += slice.data[i] as f64;
            n_out += 1;
        }
    }
    let positive_pixels: Vec<f64> = prompts
        .iter()
        .filter_map(|p| match *p {
            Prompt::Point { x, y, positive: true } => Some(slice.get(x as usize, y as usize) as f64),
            _ => None,
        })
        .collect();
    let bright = if n_in > 0 && n_out > 0 {
        s_in / n_in as f64 >= s_out / n_out as f64
    } else if !positive_pixels.is_empty() {
        positive_pixels.iter().sum::<f64>() / positive_pixels.len() as f64 >= t
    } else {
        true
    };

    let grown = dilate(&coarse_bits, w, h, COARSE_DILATION);
    let candidate: Vec<bool> = (0..w * h)
        .map(|i| {
            let v = slice.data[i] as f64;
            win[i] && grown[i] && if bright { v > t } else { v < t }
        })
        .collect();

    let (labels, n) = label_components(&candidate, w, h);
    let mut keep = vec![false; n + 1];
    let mut drop = vec![false; n + 1];
    for i in 0..w * h {
        if labels[i] != 0 && coarse_bits[i] {
            keep[labels[i] as usize] = true;
        }
    }
    for p in prompts {
        if let Prompt::Point { x, y, positive } = *p {
            let l = labels[y as usize * w + x as usize] as usize;
            if l != 0 {
                if positive {
                    keep[l] = true;
                } else {
                    drop[l] = true;
                }
            }
        }
    }
    let selected: Vec<bool> = labels.iter().map(|&l| l != 0 && keep[l as usize] && !drop[l as usize]).collect();
    let closed = close(&selected, w, h, CLOSING_RADIUS);
    let out: Vec<bool> = closed.iter().zip(&win).map(|(&c, &w)| c && w).collect();
    Ok(Mask::from_binary(w, h, &out))
}
