use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PreprocessError;
use crate::kernels::bilinear_at;
use crate::volume::Grid2;

pub const MAX_ROTATION_DEGREES: f64 = 15.0;

/// Applied in the order rotation, horizontal flip, intensity scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSpec {
    pub rotation_degrees: f64,
    pub intensity_scale: f64,
    pub horizontal_flip: bool,
    pub seed: u64,
}

impl Default for AugmentSpec {
    fn default() -> Self {
        AugmentSpec::identity()
    }
}

impl AugmentSpec {
    pub fn identity() -> AugmentSpec {
        AugmentSpec {
            rotation_degrees: 0.0,
            intensity_scale: 1.0,
            horizontal_flip: false,
            seed: 0,
        }
    }

    /// Draws a spec from the seed: rotation uniform in [-max, max] degrees,
    /// scale uniform in [1 - s, 1 + s], flip with probability 1/2.
    pub fn sample(seed: u64, max_rotation: f64, scale_jitter: f64) -> AugmentSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let max_rotation = max_rotation.clamp(0.0, MAX_ROTATION_DEGREES);
        let rotation_degrees = if max_rotation > 0.0 {
            rng.random_range(-max_rotation..=max_rotation)
        } else {
            0.0
        };
        let s = scale_jitter.clamp(0.0, 0.99);
        let intensity_scale = if s > 0.0 { rng.random_range(1.0 - s..=1.0 + s) } else { 1.0 };
        AugmentSpec {
            rotation_degrees,
            intensity_scale,
            horizontal_flip: rng.random_bool(0.5),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), PreprocessError> {
        if !(self.rotation_degrees.abs() <= MAX_ROTATION_DEGREES) {
            return Err(PreprocessError::Rotation(self.rotation_degrees));
        }
        if !(self.intensity_scale > 0.0 && self.intensity_scale.is_finite()) {
            return Err(PreprocessError::IntensityScale(self.intensity_scale));
        }
        Ok(())
    }
}

fn rotate(g: &Grid2, degrees: f64) -> Grid2 {
    let (s, c) = degrees.to_radians().sin_cos();
    let cx = (g.width as f64 - 1.0) / 2.0;
    let cy = (g.height as f64 - 1.0) / 2.0;
    Grid2::from_fn(g.width, g.height, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        // Inverse mapping: rotate the output position by -theta.
        let sx = c * dx + s * dy + cx;
        let sy = -s * dx + c * dy + cy;
        bilinear_at(g.width, g.height, sx, sy, |i, j| g.get(i, j) as f64) as f32
    })
}

fn flip(g: &Grid2) -> Grid2 {
    Grid2::from_fn(g.width, g.height, |x, y| g.get(g.width - 1 - x, y))
}

pub fn augment(slice: &Grid2, spec: &AugmentSpec) -> Result<Grid2, PreprocessError> {
    spec.validate()?;
    let normalized = slice.data.iter().all(|v| (0.0..=1.0).contains(v));
    let mut out = if spec.rotation_degrees != 0.0 {
        rotate(slice, spec.rotation_degrees)
    } else {
        slice.clone()
    };
    if spec.horizontal_flip {
        out = flip(&out);
    }
    if spec.intensity_scale != 1.0 {
        let k = spec.intensity_scale as f32;
        for v in out.data.iter_mut() {
            *v *= k;
            if normalized {
                *v = v.clamp(0.0, 1.0);
            }
        }
    }
    Ok(out)
}
