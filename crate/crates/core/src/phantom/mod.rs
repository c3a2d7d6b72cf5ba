//! Deterministic synthetic spine phantoms with exact ground truth, plus the
//! reference scorer, segmenter, feature extractor and RoI head that let the
//! pipeline run end to end without trained weights.

mod export;
mod reference;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::PathologyLabel;
use crate::metrics::GtBox;
use crate::segment::{bbox_of, Rle};
use crate::volume::{Sex, Volume, VolumeMeta};

pub use export::{phantom_dicom_series, read_truth, truth_json, write_phantom_case, PhantomCase};
pub use reference::{
    reference_features, reference_scorers, robust_sigma, slice_residuals, OutlierScorer, ReferenceHead,
    ReferenceSegmenter, FEATURE_STRIDES, SCORER_GAIN, SCORER_OFFSET, TISSUE_SPLIT,
};

/// Raw phantom intensities.
pub const BACKGROUND: f64 = 50.0;
pub const VERTEBRA: f64 = 400.0;
pub const DISC: f64 = 600.0;
pub const CANAL: f64 = 700.0;
pub const NOISE_SIGMA: f64 = 15.0;

/// Share of each vertebra-plus-disc period occupied by bone.
const VERTEBRA_FRACTION: f64 = 0.64;
/// Superior and inferior ends of the column as fractions of the SI extent.
const COLUMN_SPAN: (f64, f64) = (0.12, 0.88);
/// Sagittal: vertebral body and canal along the AP axis (fractions of nx).
const SAG_BODY: (f64, f64) = (0.15, 0.45);
const SAG_CANAL: (f64, f64) = (0.52, 0.62);
/// Coronal: body centred left-right.
const COR_BODY: (f64, f64) = (0.35, 0.65);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhantomPlane {
    Sagittal,
    Coronal,
    Axial,
}

impl PhantomPlane {
    /// ImageOrientationPatient row and column cosines.
    pub fn iop(self) -> [f64; 6] {
        match self {
            PhantomPlane::Sagittal => [0.0, 1.0, 0.0, 0.0, 0.0, -1.0],
            PhantomPlane::Coronal => [1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
            PhantomPlane::Axial => [1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        }
    }

    fn description(self) -> &'static str {
        match self {
            PhantomPlane::Sagittal => "T2 SAG",
            PhantomPlane::Coronal => "T2 COR",
            PhantomPlane::Axial => "T2 AX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LesionSpec {
    /// Voxel coordinates.
    pub center: [f64; 3],
    /// Semi-axes in voxels.
    pub radii: [f64; 3],
    pub delta: f64,
    pub label: PathologyLabel,
}

impl LesionSpec {
    pub fn contains(&self, x: usize, y: usize, z: usize) -> bool {
        let d = |i: usize, p: usize| (p as f64 - self.center[i]) / self.radii[i];
        let (a, b, c) = (d(0, x), d(1, y), d(2, z));
        a * a + b * b + c * c <= 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demographics {
    pub age_years: f64,
    pub sex: Sex,
    pub manufacturer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    pub seed: u64,
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub plane: PhantomPlane,
    pub vertebrae: usize,
    pub lesions: Vec<LesionSpec>,
    pub noise_sigma: f64,
    pub demographics: Demographics,
}

impl PhantomSpec {
    /// Lesion-free sagittal phantom with default geometry.
    pub fn sagittal(seed: u64) -> PhantomSpec {
        PhantomSpec {
            seed,
            dims: [96, 192, 12],
            spacing: [1.0, 1.0, 3.0],
            plane: PhantomPlane::Sagittal,
            vertebrae: 4,
            lesions: Vec::new(),
            noise_sigma: NOISE_SIGMA,
            demographics: Demographics {
                age_years: 45.0,
                sex: Sex::Female,
                manufacturer: "SIEMENS".into(),
            },
        }
    }

    pub fn with_plane(mut self, plane: PhantomPlane) -> PhantomSpec {
        self.plane = plane;
        if plane == PhantomPlane::Axial {
            self.dims = [128, 128, 24];
            self.spacing = [1.0, 1.0, 4.0];
        }
        self
    }

    pub fn validate(&self) -> Result<(), PhantomError> {
        if self.dims.iter().any(|&d| d == 0) || self.spacing.iter().any(|&s| !(s > 0.0)) {
            return Err(PhantomError::Geometry("dims and spacing must be positive".into()));
        }
        if self.vertebrae == 0 {
            return Err(PhantomError::Geometry("at least one vertebra is required".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(PhantomError::Geometry("noise sigma must be nonnegative".into()));
        }
        for (index, l) in self.lesions.iter().enumerate() {
            if l.radii.iter().any(|&r| !(r > 0.0)) {
                return Err(PhantomError::Lesion {
                    index,
                    detail: "radii must be positive".into(),
                });
            }
            for a in 0..3 {
                let (lo, hi) = (l.center[a] - l.radii[a], l.center[a] + l.radii[a]);
                if !(lo >= 0.0 && hi <= (self.dims[a] - 1) as f64) {
                    return Err(PhantomError::Lesion {
                        index,
                        detail: format!("extent [{lo}, {hi}] leaves axis {a} of size {}", self.dims[a]),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhantomError {
    #[error("invalid phantom geometry: {0}")]
    Geometry(String),
    #[error("lesion {index} is invalid: {detail}")]
    Lesion { index: usize, detail: String },
    #[error("{0}")]
    Io(String),
    #[error("malformed ground truth: {0}")]
    Truth(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LesionTruth {
    pub label: PathologyLabel,
    pub voxel_count: usize,
    /// One mask per slice.
    pub mask: Vec<Rle>,
    /// Tight box of every non-empty cross-section.
    pub boxes: Vec<GtBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub abnormal: bool,
    pub lesions: Vec<LesionTruth>,
}

impl GroundTruth {
    pub fn boxes(&self) -> Vec<GtBox> {
        self.lesions.iter().flat_map(|l| l.boxes.iter().copied()).collect()
    }

    /// Union of all lesion masks, one bit vector per slice.
    pub fn union_mask(&self, width: usize, height: usize, slices: usize) -> Vec<Vec<bool>> {
        let mut out = vec![vec![false; width * height]; slices];
        for l in &self.lesions {
            for (z, rle) in l.mask.iter().enumerate() {
                for (o, b) in out[z].iter_mut().zip(rle.decode()) {
                    *o |= b;
                }
            }
        }
        out
    }
}

/// (lo, hi) bounds of the column along the SI axis and the period length.
fn column_layout(len: usize, vertebrae: usize) -> (f64, f64, f64) {
    let lo = COLUMN_SPAN.0 * len as f64;
    let hi = COLUMN_SPAN.1 * len as f64;
    (lo, hi, (hi - lo) / vertebrae as f64)
}

/// Bone or disc at SI coordinate `s` (voxel centre), None outside the column.
fn column_tissue(s: f64, len: usize, vertebrae: usize) -> Option<f64> {
    let (lo, hi, period) = column_layout(len, vertebrae);
    if s < lo || s >= hi {
        return None;
    }
    let phase = ((s - lo) / period).fract();
    Some(if phase < VERTEBRA_FRACTION { VERTEBRA } else { DISC })
}

fn within(p: f64, n: usize, (a, b): (f64, f64)) -> bool {
    p >= a * n as f64 && p < b * n as f64
}

fn anatomy(spec: &PhantomSpec, x: usize, y: usize, z: usize) -> f64 {
    let [nx, ny, nz] = spec.dims;
    let (xf, yf) = (x as f64 + 0.5, y as f64 + 0.5);
    match spec.plane {
        PhantomPlane::Sagittal => match column_tissue(yf, ny, spec.vertebrae) {
            Some(t) if within(xf, nx, SAG_BODY) => t,
            Some(_) if within(xf, nx, SAG_CANAL) => CANAL,
            _ => BACKGROUND,
        },
        PhantomPlane::Coronal => match column_tissue(yf, ny, spec.vertebrae) {
            Some(t) if within(xf, nx, COR_BODY) => t,
            _ => BACKGROUND,
        },
        PhantomPlane::Axial => {
            // Slices run superior to inferior through the column.
            let tissue = column_tissue(z as f64 + 0.5, nz, spec.vertebrae).unwrap_or(DISC);
            let (cx, r_body) = (nx as f64 / 2.0, 0.18 * nx as f64);
            let body = (xf - cx).powi(2) + (yf - 0.4 * ny as f64).powi(2) <= r_body * r_body;
            let r_canal = 0.07 * nx as f64;
            let canal = (xf - cx).powi(2) + (yf - 0.7 * ny as f64).powi(2) <= r_canal * r_canal;
            if body {
                tissue
            } else if canal {
                CANAL
            } else {
                BACKGROUND
            }
        }
    }
}

fn direction(plane: PhantomPlane) -> [[f64; 3]; 3] {
    let iop = plane.iop();
    let r = [iop[0], iop[1], iop[2]];
    let c = [iop[3], iop[4], iop[5]];
    let n = crate::geometry::cross(r, c);
    let mut d = [[0.0; 3]; 3];
    for i in 0..3 {
        d[i] = [r[i], c[i], n[i]];
    }
    d
}

/// Renders the phantom. Intensities are rounded to integers so the volume
/// survives 16-bit export bit-exactly.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(Volume, GroundTruth), PhantomError> {
    spec.validate()?;
    let [nx, ny, nz] = spec.dims;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| PhantomError::Geometry(e.to_string()))?;
    let mut voxels = Vec::with_capacity(nx * ny * nz);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                let mut v = anatomy(spec, x, y, z);
                for l in &spec.lesions {
                    if l.contains(x, y, z) {
                        v += l.delta;
                    }
                }
                v += noise.sample(&mut rng);
                voxels.push(v.round().clamp(i16::MIN as f64, i16::MAX as f64) as f32);
            }
        }
    }

    let lesions = spec
        .lesions
        .iter()
        .map(|l| {
            let mut mask = Vec::with_capacity(nz);
            let mut boxes = Vec::new();
            let mut voxel_count = 0;
            for z in 0..nz {
                let bits: Vec<bool> = (0..nx * ny).map(|i| l.contains(i % nx, i / nx, z)).collect();
                voxel_count += bits.iter().filter(|b| **b).count();
                if let Some(b) = bbox_of(nx, &bits) {
                    boxes.push(GtBox {
                        slice_index: z,
                        bbox: b,
                        label: l.label,
                    });
                }
                mask.push(Rle::encode(nx, ny, &bits));
            }
            LesionTruth {
                label: l.label,
                voxel_count,
                mask,
                boxes,
            }
        })
        .collect();

    let origin = [-(spec.dims[2] as f64) * spec.spacing[2] / 2.0, -100.0, 120.0];
    let mut v = Volume::new(spec.dims, spec.spacing, direction(spec.plane), origin, voxels)
        .map_err(|e| PhantomError::Geometry(e.to_string()))?;
    let d = &spec.demographics;
    v.meta = VolumeMeta {
        manufacturer: Some(d.manufacturer.clone()),
        patient_age_years: Some(d.age_years),
        patient_sex: Some(d.sex),
        series_description: Some(spec.plane.description().into()),
        series_uid: Some(format!("2.25.{}", spec.seed)),
        repetition_time: Some(3000.0),
        echo_time: Some(100.0),
        slice_positions: None,
        nonuniform_slice_gap: false,
    };
    let truth = GroundTruth {
        abnormal: !spec.lesions.is_empty(),
        lesions,
    };
    Ok((v, truth))
}

/// Lesion archetypes used by phantom suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Archetype {
    Hemangioma,
    BurstFracture,
    DiscBulge,
}

const MANUFACTURER_NAMES: [&str; 4] = ["GE MEDICAL SYSTEMS", "SIEMENS", "Philips Medical Systems", "Canon Medical Systems"];

/// A sagittal phantom whose lesions (when `abnormal`) are drawn from the
/// three archetypes, each inside a different vertebra or disc.
pub fn random_spec(seed: u64, abnormal: bool) -> PhantomSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_5b1e);
    let mut spec = PhantomSpec::sagittal(seed);
    spec.demographics = Demographics {
        age_years: rng.random_range(5..=90) as f64,
        sex: if rng.random_bool(0.5) { Sex::Male } else { Sex::Female },
        manufacturer: MANUFACTURER_NAMES[rng.random_range(0..MANUFACTURER_NAMES.len())].into(),
    };
    if !abnormal {
        return spec;
    }
    let [nx, ny, nz] = spec.dims;
    let (lo, _, period) = column_layout(ny, spec.vertebrae);
    let count = rng.random_range(1..=3);
    // Segment s < vertebrae is a vertebra, s >= vertebrae the disc below vertebra s - vertebrae.
    let mut segments: Vec<usize> = (0..2 * spec.vertebrae).collect();
    for i in (1..segments.len()).rev() {
        segments.swap(i, rng.random_range(0..=i));
    }
    let body_x = (SAG_BODY.0 * nx as f64, SAG_BODY.1 * nx as f64);
    for &s in segments.iter().take(count) {
        let (kind, y0, y1) = if s < spec.vertebrae {
            let top = lo + s as f64 * period;
            let kind = if rng.random_bool(0.5) {
                Archetype::Hemangioma
            } else {
                Archetype::BurstFracture
            };
            (kind, top, top + VERTEBRA_FRACTION * period)
        } else {
            let top = lo + (s - spec.vertebrae) as f64 * period + VERTEBRA_FRACTION * period;
            (Archetype::DiscBulge, top, top + (1.0 - VERTEBRA_FRACTION) * period)
        };
        let half_height = (y1 - y0) / 2.0;
        let (ry, rx, delta, label) = match kind {
            Archetype::Hemangioma => (
                rng.random_range(5.0..7.0f64).min(half_height - 2.0),
                rng.random_range(5.0..8.0),
                300.0,
                PathologyLabel::TYPICAL_HEMANGIOMA,
            ),
            Archetype::BurstFracture => (
                rng.random_range(5.0..7.0f64).min(half_height - 2.0),
                rng.random_range(5.0..8.0),
                -300.0,
                PathologyLabel::BURST_FRACTURE,
            ),
            Archetype::DiscBulge => (half_height - 1.0, rng.random_range(6.0..9.0), -450.0, PathologyLabel::DISC_BULGE),
        };
        let cx = rng.random_range(body_x.0 + rx + 1.0..body_x.1 - rx - 1.0);
        let cy = (y0 + y1) / 2.0 - 0.5 + rng.random_range(-0.5..0.5);
        let cz = rng.random_range(2..nz - 2) as f64;
        spec.lesions.push(LesionSpec {
            center: [cx.round(), cy, cz],
            radii: [rx, ry, 1.6],
            delta,
            label,
        });
    }
    spec
}

/// Per-scan seeds and abnormal flags for a suite: scans alternate abnormal,
/// normal, abnormal, ...
pub fn suite_specs(seed: u64, count: usize) -> Vec<PhantomSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|i| random_spec(rng.random(), i % 2 == 0)).collect()
}

pub fn scan_id(index: usize) -> String {
    format!("phantom-{index:03}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lesion_free_is_normal_and_deterministic() {
        let spec = PhantomSpec::sagittal(3);
        let (a, ta) = generate_phantom(&spec).unwrap();
        let (b, _) = generate_phantom(&spec).unwrap();
        assert!(!ta.abnormal && ta.boxes().is_empty());
        assert_eq!(a.voxels, b.voxels);
        assert!(a.voxels.iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn out_of_bounds_lesion_rejected() {
        let mut spec = PhantomSpec::sagittal(1);
        spec.lesions.push(LesionSpec {
            center: [2.0, 50.0, 5.0],
            radii: [4.0, 4.0, 1.0],
            delta: 100.0,
            label: PathologyLabel::DISC_BULGE,
        });
        assert!(matches!(generate_phantom(&spec), Err(PhantomError::Lesion { index: 0, .. })));
    }

    #[test]
    fn suite_lesions_fit_and_alternate() {
        for (i, spec) in suite_specs(7, 20).iter().enumerate() {
            assert_eq!(spec.lesions.is_empty(), i % 2 == 1);
            spec.validate().unwrap();
        }
    }
}
