//! Scalar volumes and 2-D slice grids shared by every pipeline stage.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolumeError {
    #[error("voxel count {got} does not match dims {dims:?} (expected {expected})")]
    VoxelCount {
        dims: [usize; 3],
        expected: usize,
        got: usize,
    },
    #[error("spacing must be strictly positive and finite, got {0:?}")]
    Spacing([f64; 3]),
    #[error("direction column {column} is not unit norm (norm {norm})")]
    Direction { column: usize, norm: f64 },
    #[error("volume has zero extent along some axis: {0:?}")]
    Empty([usize; 3]),
}

/// Patient sex as recorded in (0010,0040).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sex {
    Male,
    Female,
    Other,
}

impl Sex {
    pub fn from_dicom(code: &str) -> Option<Sex> {
        match code.trim().to_ascii_uppercase().as_str() {
            "M" | "MALE" => Some(Sex::Male),
            "F" | "FEMALE" => Some(Sex::Female),
            "O" | "OTHER" => Some(Sex::Other),
            _ => None,
        }
    }

    pub fn dicom_code(self) -> &'static str {
        match self {
            Sex::Male => "M",
            Sex::Female => "F",
            Sex::Other => "O",
        }
    }
}

/// Acquisition and demographic metadata carried alongside the voxels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeMeta {
    pub manufacturer: Option<String>,
    pub patient_age_years: Option<f64>,
    pub patient_sex: Option<Sex>,
    pub series_description: Option<String>,
    pub series_uid: Option<String>,
    /// TR in ms. Carried as metadata only.
    pub repetition_time: Option<f64>,
    /// TE in ms. Carried as metadata only.
    pub echo_time: Option<f64>,
    /// Positions of each slice along the slice normal (mm), in volume order.
    pub slice_positions: Option<Vec<f64>>,
    /// Set when adjacent slice gaps deviate by more than the series tolerance.
    pub nonuniform_slice_gap: bool,
}

/// A 3-D scalar grid with physical geometry.
///
/// Voxels are stored x-fastest: index = x + nx * (y + ny * z). `direction`
/// holds the patient-space unit vector of each voxel axis as its columns,
/// i.e. `direction[r][c]` is component `r` of axis `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub direction: [[f64; 3]; 3],
    pub origin: [f64; 3],
    pub voxels: Vec<f32>,
    pub meta: VolumeMeta,
}

pub const IDENTITY_DIRECTION: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

impl Volume {
    pub fn new(
        dims: [usize; 3],
        spacing: [f64; 3],
        direction: [[f64; 3]; 3],
        origin: [f64; 3],
        voxels: Vec<f32>,
    ) -> Result<Volume, VolumeError> {
        let v = Volume {
            dims,
            spacing,
            direction,
            origin,
            voxels,
            meta: VolumeMeta::default(),
        };
        v.validate()?;
        Ok(v)
    }

    pub fn filled(dims: [usize; 3], value: f32) -> Volume {
        Volume {
            dims,
            spacing: [1.0; 3],
            direction: IDENTITY_DIRECTION,
            origin: [0.0; 3],
            voxels: vec![value; dims[0] * dims[1] * dims[2]],
            meta: VolumeMeta::default(),
        }
    }

    pub fn validate(&self) -> Result<(), VolumeError> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(VolumeError::Empty(self.dims));
        }
        let expected = self.dims[0] * self.dims[1] * self.dims[2];
        if self.voxels.len() != expected {
            return Err(VolumeError::VoxelCount {
                dims: self.dims,
                expected,
                got: self.voxels.len(),
            });
        }
        if self.spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(VolumeError::Spacing(self.spacing));
        }
        for c in 0..3 {
            let norm = self.direction_column(c).iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-3 {
                return Err(VolumeError::Direction { column: c, norm });
            }
        }
        Ok(())
    }

    pub fn direction_column(&self, c: usize) -> [f64; 3] {
        [self.direction[0][c], self.direction[1][c], self.direction[2][c]]
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f32 {
        self.voxels[self.index(x, y, z)]
    }

    pub fn slice_len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    /// Copy of axial-index slice `z` as a 2-D grid.
    pub fn slice(&self, z: usize) -> Grid2 {
        let n = self.slice_len();
        Grid2 {
            width: self.dims[0],
            height: self.dims[1],
            data: self.voxels[z * n..(z + 1) * n].to_vec(),
        }
    }

    pub fn slices(&self) -> impl Iterator<Item = &[f32]> + '_ {
        self.voxels.chunks_exact(self.slice_len())
    }

    /// Same geometry and metadata, new voxel values.
    pub fn with_voxels(&self, voxels: Vec<f32>) -> Volume {
        assert_eq!(voxels.len(), self.voxels.len());
        Volume {
            dims: self.dims,
            spacing: self.spacing,
            direction: self.direction,
            origin: self.origin,
            voxels,
            meta: self.meta.clone(),
        }
    }

    /// The 4x4 voxel-to-patient affine: direction * diag(spacing) plus origin.
    pub fn affine(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for (r, row) in m.iter_mut().enumerate().take(3) {
            for (c, cell) in row.iter_mut().enumerate().take(3) {
                *cell = self.direction[r][c] * self.spacing[c];
            }
            row[3] = self.origin[r];
        }
        m[3][3] = 1.0;
        m
    }
}

/// A row-major 2-D grid of `f32` values (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Grid2 {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Grid2 {
        assert_eq!(data.len(), width * height, "grid data length");
        Grid2 {
            width,
            height,
            data,
        }
    }

    pub fn zeros(width: usize, height: usize) -> Grid2 {
        Grid2::new(width, height, vec![0.0; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f32) -> Grid2 {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid2::new(width, height, data)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_geometry() {
        assert!(matches!(
            Volume::new([2, 2, 2], [1.0; 3], IDENTITY_DIRECTION, [0.0; 3], vec![0.0; 7]),
            Err(VolumeError::VoxelCount { .. })
        ));
        assert!(matches!(
            Volume::new([2, 2, 2], [1.0, 0.0, 1.0], IDENTITY_DIRECTION, [0.0; 3], vec![0.0; 8]),
            Err(VolumeError::Spacing(_))
        ));
        let mut d = IDENTITY_DIRECTION;
        d[0][0] = 2.0;
        assert!(matches!(
            Volume::new([2, 2, 2], [1.0; 3], d, [0.0; 3], vec![0.0; 8]),
            Err(VolumeError::Direction { column: 0, .. })
        ));
    }

    #[test]
    fn affine_combines_direction_spacing_origin() {
        let v = Volume::new([2, 2, 2], [1.0, 1.0, 3.0], IDENTITY_DIRECTION, [10.0, 20.0, 30.0], vec![0.0; 8])
            .unwrap();
        let a = v.affine();
        assert_eq!(a[0], [1.0, 0.0, 0.0, 10.0]);
        assert_eq!(a[1], [0.0, 1.0, 0.0, 20.0]);
        assert_eq!(a[2], [0.0, 0.0, 3.0, 30.0]);
    }

    #[test]
    fn x_fastest_indexing() {
        let v = Volume::new(
            [3, 2, 2],
            [1.0; 3],
            IDENTITY_DIRECTION,
            [0.0; 3],
            (0..12).map(|i| i as f32).collect(),
        )
        .unwrap();
        assert_eq!(v.get(1, 0, 0), 1.0);
        assert_eq!(v.get(0, 1, 0), 3.0);
        assert_eq!(v.get(0, 0, 1), 6.0);
        assert_eq!(v.slice(1).data, vec![6.0, 7.0, 8.0, 9.0, 10.0, 11.0]);
    }
}
