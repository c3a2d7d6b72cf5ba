//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinescan::detect::BoundingBox;
use spinescan::kernels::Tensor3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---- boxes ----------------------------------------------------------------

/// Overlap along one axis from the sorted endpoints.
fn overlap_1d(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    let mut pts = [(a0, 0), (a1, 0), (b0, 1), (b1, 1)];
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    // Disjoint when both endpoints of one interval come first.
    if pts[0].1 == pts[1].1 {
        0.0
    } else {
        pts[2].0 - pts[1].0
    }
}

pub fn oracle_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = overlap_1d(a.x1, a.x2, b.x1, b.x2) * overlap_1d(a.y1, a.y2, b.y1, b.y2);
    let area = |r: &BoundingBox| (r.x2 - r.x1) * (r.y2 - r.y1);
    let union = area(a) + area(b) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Greedy NMS written as "a box survives iff no surviving box ranked above
/// it overlaps it by more than the threshold", checked pairwise.
pub fn oracle_nms(boxes: &[BoundingBox], scores: &[f64], threshold: f64) -> Vec<usize> {
    let n = boxes.len();
    let ranks_above = |a: usize, b: usize| scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    let mut rank: Vec<usize> = (0..n).collect();
    // Selection by repeated scanning, no sort routine shared with the library.
    let mut ordered = Vec::with_capacity(n);
    while !rank.is_empty() {
        let mut best = 0;
        for k in 1..rank.len() {
            if ranks_above(rank[k], rank[best]) {
                best = k;
            }
        }
        ordered.push(rank.remove(best));
    }
    let mut alive: Vec<usize> = Vec::new();
    for &i in &ordered {
        if alive.iter().all(|&k| oracle_iou(&boxes[k], &boxes[i]) <= threshold) {
            alive.push(i);
        }
    }
    alive
}

pub fn random_box<R: Rng>(r: &mut R, extent: f64) -> BoundingBox {
    let x1 = r.random_range(0.0..extent);
    let y1 = r.random_range(0.0..extent);
    let w = r.random_range(1.0..extent / 2.0);
    let h = r.random_range(1.0..extent / 2.0);
    BoundingBox {
        x1,
        y1,
        x2: x1 + w,
        y2: y1 + h,
    }
}

// ---- RoI Align ------------------------------------------------------------

/// The zero-padded feature map resampled onto a grid `factor` times finer,
/// covering [-1, w] x [-1, h] in feature coordinates.
pub struct Oversampled {
    factor: usize,
    fw: usize,
    fh: usize,
    data: Vec<f64>,
}

impl Oversampled {
    pub fn new(channel: &[f64], w: usize, h: usize, factor: usize) -> Oversampled {
        // Pad one ring of zeros so the padded map spans [-1, w] x [-1, h].
        let (pw, ph) = (w + 2, h + 2);
        let mut padded = vec![0.0; pw * ph];
        for y in 0..h {
            for x in 0..w {
                padded[(y + 1) * pw + x + 1] = channel[y * w + x];
            }
        }
        let fw = (pw - 1) * factor + 1;
        let fh = (ph - 1) * factor + 1;
        let mut data = vec![0.0; fw * fh];
        for j in 0..fh {
            let (cy, ty) = (j / factor, (j % factor) as f64 / factor as f64);
            for i in 0..fw {
                let (cx, tx) = (i / factor, (i % factor) as f64 / factor as f64);
                let p = |xx: usize, yy: usize| padded[yy.min(ph - 1) * pw + xx.min(pw - 1)];
                data[j * fw + i] = p(cx, cy) * (1.0 - tx) * (1.0 - ty)
                    + p(cx + 1, cy) * tx * (1.0 - ty)
                    + p(cx, cy + 1) * (1.0 - tx) * ty
                    + p(cx + 1, cy + 1) * tx * ty;
            }
        }
        Oversampled { factor, fw, fh, data }
    }

    /// Value at feature position (x, y), interpolated on the fine grid.
    pub fn at(&self, x: f64, y: f64) -> f64 {
        let gx = (x + 1.0) * self.factor as f64;
        let gy = (y + 1.0) * self.factor as f64;
        if gx <= 0.0 || gy <= 0.0 || gx >= (self.fw - 1) as f64 || gy >= (self.fh - 1) as f64 {
            return 0.0;
        }
        let (i, j) = (gx.floor() as usize, gy.floor() as usize);
        let (tx, ty) = (gx - i as f64, gy - j as f64);
        let d = |a: usize, b: usize| self.data[b * self.fw + a];
        d(i, j) * (1.0 - tx) * (1.0 - ty) + d(i + 1, j) * tx * (1.0 - ty) + d(i, j + 1) * (1.0 - tx) * ty + d(i + 1, j + 1) * tx * ty
    }
}

/// RoI Align from its definition: out x out bins over the box, each the
/// mean of n x n samples at the centres of an even sub-grid.
pub fn oracle_roi_align(features: &Tensor3, b: &BoundingBox, out: usize, n: usize, factor: usize) -> Vec<f64> {
    let mut res = Vec::with_capacity(features.c * out * out);
    for c in 0..features.c {
        let os = Oversampled::new(features.channel(c), features.w, features.h, factor);
        for by in 0..out {
            for bx in 0..out {
                let mut acc = 0.0;
                for sy in 0..n {
                    for sx in 0..n {
                        let fx = (bx * n + sx) as f64 + 0.5;
                        let fy = (by * n + sy) as f64 + 0.5;
                        let x = b.x1 + (b.x2 - b.x1) * fx / (out * n) as f64;
                        let y = b.y1 + (b.y2 - b.y1) * fy / (out * n) as f64;
                        acc += os.at(x, y);
                    }
                }
                res.push(acc / (n * n) as f64);
            }
        }
    }
    res
}

// ---- finite differences ---------------------------------------------------

pub const FD_STEP: f64 = 1e-6;
pub const GRAD_RTOL: f64 = 1e-4;
/// Absolute slack for gradients near zero, where relative error is
/// dominated by floating-point cancellation in the difference quotient.
pub const GRAD_ATOL: f64 = 1e-8;

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn grad_close(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= GRAD_RTOL * analytic.abs().max(numeric.abs()) + GRAD_ATOL
}

// ---- metrics --------------------------------------------------------------

/// Pairwise ROC-AUC: (wins + ties / 2) / (P N), counted in integers.
pub fn oracle_roc_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut twice = 0u128;
    let (mut p, mut n) = (0u128, 0u128);
    for i in 0..scores.len() {
        if labels[i] {
            p += 1;
        } else {
            n += 1;
        }
    }
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] && !labels[j] {
                if scores[i] > scores[j] {
                    twice += 2;
                } else if scores[i] == scores[j] {
                    twice += 1;
                }
            }
        }
    }
    twice as f64 / (2 * p * n) as f64
}

// ---- DICOM ----------------------------------------------------------------

/// Explicit VR little endian element (DICOM PS3.5 7.1.2).
pub fn explicit(group: u16, element: u16, vr: &[u8; 2], value: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&group.to_le_bytes());
    out.extend_from_slice(&element.to_le_bytes());
    out.extend_from_slice(vr);
    if matches!(vr, b"OB" | b"OW" | b"OF" | b"SQ" | b"UT" | b"UN") {
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&(value.len() as u32).to_le_bytes());
    } else {
        out.extend_from_slice(&(value.len() as u16).to_le_bytes());
    }
    out.extend_from_slice(value);
    out
}

/// Implicit VR little endian element (DICOM PS3.5 7.1.3).
pub fn implicit(group: u16, element: u16, value: &[u8]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&group.to_le_bytes());
    out.extend_from_slice(&element.to_le_bytes());
    out.extend_from_slice(&(value.len() as u32).to_le_bytes());
    out.extend_from_slice(value);
    out
}

pub fn padded(s: &str, pad: u8) -> Vec<u8> {
    let mut v = s.as_bytes().to_vec();
    if v.len() % 2 == 1 {
        v.push(pad);
    }
    v
}

pub fn us(v: u16) -> Vec<u8> {
    v.to_le_bytes().to_vec()
}

/// (group, element, VR, value) rows of a small MR image dataset with
/// `rows` x `cols` 8-bit pixels, in ascending tag order.
pub fn mr_dataset(rows: u16, cols: u16) -> Vec<(u16, u16, [u8; 2], Vec<u8>)> {
    let pixels: Vec<u8> = (0..rows as usize * cols as usize).map(|i| (i * 7 % 251) as u8).collect();
    vec![
        (0x0008, 0x0060, *b"CS", padded("MR", b' ')),
        (0x0008, 0x0070, *b"LO", padded("GE MEDICAL SYSTEMS", b' ')),
        (0x0008, 0x103E, *b"LO", padded("T2 SAG", b' ')),
        (0x0010, 0x0040, *b"CS", padded("F", b' ')),
        (0x0010, 0x1010, *b"AS", padded("052Y", b' ')),
        (0x0018, 0x0050, *b"DS", padded("3", b' ')),
        (0x0018, 0x0080, *b"DS", padded("3000", b' ')),
        (0x0020, 0x000E, *b"UI", padded("1.2.3.4", 0)),
        (0x0020, 0x0013, *b"IS", padded("1", b' ')),
        (0x0020, 0x0032, *b"DS", padded("0\\-10.5\\20", b' ')),
        (0x0020, 0x0037, *b"DS", padded("0\\1\\0\\0\\0\\-1", b' ')),
        (0x0028, 0x0002, *b"US", us(1)),
        (0x0028, 0x0004, *b"CS", padded("MONOCHROME2", b' ')),
        (0x0028, 0x0010, *b"US", us(rows)),
        (0x0028, 0x0011, *b"US", us(cols)),
        (0x0028, 0x0030, *b"DS", padded("0.5\\0.75", b' ')),
        (0x0028, 0x0100, *b"US", us(8)),
        (0x0028, 0x0101, *b"US", us(8)),
        (0x0028, 0x0102, *b"US", us(7)),
        (0x0028, 0x0103, *b"US", us(0)),
        (0x7FE0, 0x0010, *b"OB", pixels),
    ]
}

/// Part-10 file: preamble, "DICM", explicit-VR file meta, then the dataset
/// in the requested encoding.
pub fn part10(rows: &[(u16, u16, [u8; 2], Vec<u8>)], explicit_vr: bool) -> Vec<u8> {
    let syntax = if explicit_vr { "1.2.840.10008.1.2.1" } else { "1.2.840.10008.1.2" };
    let mut meta = Vec::new();
    meta.extend(explicit(0x0002, 0x0001, b"OB", &[0, 1]));
    meta.extend(explicit(0x0002, 0x0010, b"UI", &padded(syntax, 0)));
    let mut out = vec![0u8; 128];
    out.extend_from_slice(b"DICM");
    out.extend(explicit(0x0002, 0x0000, b"UL", &(meta.len() as u32).to_le_bytes()));
    out.extend(meta);
    out.extend(raw_dataset(rows, explicit_vr));
    out
}

/// Dataset elements only, no preamble or meta group.
pub fn raw_dataset(rows: &[(u16, u16, [u8; 2], Vec<u8>)], explicit_vr: bool) -> Vec<u8> {
    let mut out = Vec::new();
    for (g, e, vr, v) in rows {
        if explicit_vr {
            out.extend(explicit(*g, *e, vr, v));
        } else {
            out.extend(implicit(*g, *e, v));
        }
    }
    out
}

// ---- files ----------------------------------------------------------------

/// Every file under `root` keyed by relative path.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Runs the CLI in-process and returns its exit code.
pub fn cli(args: &[&str]) -> i32 {
    spinescan::cli::main_with_args(std::iter::once("spinescan").chain(args.iter().copied()))
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}
