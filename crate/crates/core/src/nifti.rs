//! Single-file NIfTI-1 (`.nii`) reading and writing, little endian,
//! float32 or int16 voxels.

use thiserror::Error;

use crate::volume::{Volume, VolumeError, VolumeMeta};

pub const HEADER_SIZE: usize = 348;
pub const VOX_OFFSET: usize = 352;
pub const MAGIC_SINGLE_FILE: &[u8; 4] = b"n+1\0";

pub const DT_INT16: i16 = 4;
pub const DT_FLOAT32: i16 = 16;

/// NIfTI-1 stores dims as signed 16-bit integers.
pub const MAX_DIM: usize = 32767;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NiftiError {
    #[error("dimension {0} exceeds the NIfTI-1 limit of 32767")]
    DimTooLarge(usize),
    #[error("input holds {0} bytes, shorter than a NIfTI-1 header")]
    TooShort(usize),
    #[error("sizeof_hdr is {0}, expected 348 (big-endian files are not supported)")]
    BadHeaderSize(i32),
    #[error("magic {0:?} is not the single-file NIfTI-1 magic")]
    BadMagic([u8; 4]),
    #[error("unsupported datatype code {0}")]
    UnsupportedDatatype(i16),
    #[error("only 3-D volumes are supported, dim[0] = {0}")]
    Dimensionality(i16),
    #[error("voxel data truncated: need {needed} bytes after offset {offset}, have {have}")]
    Truncated {
        offset: usize,
        needed: usize,
        have: usize,
    },
    #[error("voxel value {value} at index {index} is not representable as int16")]
    NotInt16 { index: usize, value: f32 },
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NiftiDatatype {
    Float32,
    Int16,
}

impl NiftiDatatype {
    fn code(self) -> i16 {
        match self {
            NiftiDatatype::Float32 => DT_FLOAT32,
            NiftiDatatype::Int16 => DT_INT16,
        }
    }

    fn bitpix(self) -> i16 {
        match self {
            NiftiDatatype::Float32 => 32,
            NiftiDatatype::Int16 => 16,
        }
    }
}

/// The fields of the 348-byte header this crate reads and writes. Fields not
/// listed are written as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiHeader {
    pub sizeof_hdr: i32,
    pub dim: [i16; 8],
    pub datatype: i16,
    pub bitpix: i16,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub xyzt_units: u8,
    pub descrip: [u8; 80],
    pub qform_code: i16,
    pub sform_code: i16,
    pub quatern: [f32; 3],
    pub qoffset: [f32; 3],
    pub srow: [[f32; 4]; 3],
    pub magic: [u8; 4],
}

impl NiftiHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_SIZE] {
        let mut b = [0u8; HEADER_SIZE];
        let mut put = |off: usize, bytes: &[u8]| b[off..off + bytes.len()].copy_from_slice(bytes);
        put(0, &self.sizeof_hdr.to_le_bytes());
        put(38, b"r");
        for (i, d) in self.dim.iter().enumerate() {
            put(40 + 2 * i, &d.to_le_bytes());
        }
        put(70, &self.datatype.to_le_bytes());
        put(72, &self.bitpix.to_le_bytes());
        for (i, p) in self.pixdim.iter().enumerate() {
            put(76 + 4 * i, &p.to_le_bytes());
        }
        put(108, &self.vox_offset.to_le_bytes());
        put(112, &self.scl_slope.to_le_bytes());
        put(116, &self.scl_inter.to_le_bytes());
        put(123, &[self.xyzt_units]);
        put(148, &self.descrip);
        put(252, &self.qform_code.to_le_bytes());
        put(254, &self.sform_code.to_le_bytes());
        for i in 0..3 {
            put(256 + 4 * i, &self.quatern[i].to_le_bytes());
            put(268 + 4 * i, &self.qoffset[i].to_le_bytes());
        }
        for (r, row) in self.srow.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                put(280 + 16 * r + 4 * c, &v.to_le_bytes());
            }
        }
        put(344, &self.magic);
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<NiftiHeader, NiftiError> {
        if b.len() < HEADER_SIZE {
            return Err(NiftiError::TooShort(b.len()));
        }
        let i32_at = |o: usize| i32::from_le_bytes([b[o], b[o + 1], b[o + 2], b[o + 3]]);
        let i16_at = |o: usize| i16::from_le_bytes([b[o], b[o + 1]]);
        let f32_at = |o: usize| f32::from_le_bytes([b[o], b[o + 1], b[o + 2], b[o + 3]]);
        let sizeof_hdr = i32_at(0);
        if sizeof_hdr != HEADER_SIZE as i32 {
            return Err(NiftiError::BadHeaderSize(sizeof_hdr));
        }
        let magic = [b[344], b[345], b[346], b[347]];
        if &magic != MAGIC_SINGLE_FILE {
            return Err(NiftiError::BadMagic(magic));
        }
        let mut dim = [0i16; 8];
        let mut pixdim = [0f32; 8];
        for i in 0..8 {
            dim[i] = i16_at(40 + 2 * i);
            pixdim[i] = f32_at(76 + 4 * i);
        }
        let mut descrip = [0u8; 80];
        descrip.copy_from_slice(&b[148..228]);
        let mut srow = [[0f32; 4]; 3];
        for (r, row) in srow.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = f32_at(280 + 16 * r + 4 * c);
            }
        }
        Ok(NiftiHeader {
            sizeof_hdr,
            dim,
            datatype: i16_at(70),
            bitpix: i16_at(72),
            pixdim,
            vox_offset: f32_at(108),
            scl_slope: f32_at(112),
            scl_inter: f32_at(116),
            xyzt_units: b[123],
            descrip,
            qform_code: i16_at(252),
            sform_code: i16_at(254),
            quatern: [f32_at(256), f32_at(260), f32_at(264)],
            qoffset: [f32_at(268), f32_at(272), f32_at(276)],
            srow,
            magic,
        })
    }

    /// Builds the header describing `v`.
    pub fn for_volume(v: &Volume, dtype: NiftiDatatype) -> Result<NiftiHeader, NiftiError> {
        v.validate()?;
        if let Some(&d) = v.dims.iter().find(|&&d| d > MAX_DIM) {
            return Err(NiftiError::DimTooLarge(d));
        }
        let affine = v.affine();
        let (quatern, qfac) = rotation_to_quaternion(&v.direction);
        let mut descrip = [0u8; 80];
        if let Some(desc) = &v.meta.series_description {
            let n = desc.len().min(79);
            descrip[..n].copy_from_slice(&desc.as_bytes()[..n]);
        }
        let mut srow = [[0f32; 4]; 3];
        for r in 0..3 {
            for c in 0..4 {
                srow[r][c] = affine[r][c] as f32;
            }
        }
        Ok(NiftiHeader {
            sizeof_hdr: HEADER_SIZE as i32,
            dim: [
                3,
                v.dims[0] as i16,
                v.dims[1] as i16,
                v.dims[2] as i16,
                1,
                1,
                1,
                1,
            ],
            datatype: dtype.code(),
            bitpix: dtype.bitpix(),
            pixdim: [
                qfac as f32,
                v.spacing[0] as f32,
                v.spacing[1] as f32,
                v.spacing[2] as f32,
                1.0,
                1.0,
                1.0,
                1.0,
            ],
            vox_offset: VOX_OFFSET as f32,
            scl_slope: 1.0,
            scl_inter: 0.0,
            // mm, no time units
            xyzt_units: 2,
            descrip,
            qform_code: 1,
            sform_code: 1,
            quatern: [quatern[1] as f32, quatern[2] as f32, quatern[3] as f32],
            qoffset: [v.origin[0] as f32, v.origin[1] as f32, v.origin[2] as f32],
            srow,
            magic: *MAGIC_SINGLE_FILE,
        })
    }
}

/// Quaternion (a, b, c, d) and qfac for a direction matrix, following the
/// NIfTI-1 reference implementation.
fn rotation_to_quaternion(d: &[[f64; 3]; 3]) -> ([f64; 4], f64) {
    let mut m = *d;
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let qfac = if det < 0.0 { -1.0 } else { 1.0 };
    if qfac < 0.0 {
        for row in m.iter_mut() {
            row[2] = -row[2];
        }
    }
    let trace = m[0][0] + m[1][1] + m[2][2] + 1.0;
    let (a, b, c, dd);
    if trace > 0.5 {
        let a_ = 0.5 * trace.sqrt();
        b = 0.25 * (m[2][1] - m[1][2]) / a_;
        c = 0.25 * (m[0][2] - m[2][0]) / a_;
        dd = 0.25 * (m[1][0] - m[0][1]) / a_;
        a = a_;
    } else {
        let xd = 1.0 + m[0][0] - (m[1][1] + m[2][2]);
        let yd = 1.0 + m[1][1] - (m[0][0] + m[2][2]);
        let zd = 1.0 + m[2][2] - (m[0][0] + m[1][1]);
        let (mut a_, mut b_, mut c_, mut d_);
        if xd > 1.0 {
            b_ = 0.5 * xd.sqrt();
            c_ = 0.25 * (m[0][1] + m[1][0]) / b_;
            d_ = 0.25 * (m[0][2] + m[2][0]) / b_;
            a_ = 0.25 * (m[2][1] - m[1][2]) / b_;
        } else if yd > 1.0 {
            c_ = 0.5 * yd.sqrt();
            b_ = 0.25 * (m[0][1] + m[1][0]) / c_;
            d_ = 0.25 * (m[1][2] + m[2][1]) / c_;
            a_ = 0.25 * (m[0][2] - m[2][0]) / c_;
        } else {
            d_ = 0.5 * zd.sqrt();
            b_ = 0.25 * (m[0][2] + m[2][0]) / d_;
            c_ = 0.25 * (m[1][2] + m[2][1]) / d_;
            a_ = 0.25 * (m[1][0] - m[0][1]) / d_;
        }
        if a_ < 0.0 {
            a_ = -a_;
            b_ = -b_;
            c_ = -c_;
            d_ = -d_;
        }
        a = a_;
        b = b_;
        c = c_;
        dd = d_;
    }
    ([a, b, c, dd], qfac)
}

fn quaternion_to_rotation(b: f64, c: f64, d: f64, qfac: f64) -> [[f64; 3]; 3] {
    let a = (1.0 - (b * b + c * c + d * d)).max(0.0).sqrt();
    let mut r = [
        [a * a + b * b - c * c - d * d, 2.0 * (b * c - a * d), 2.0 * (b * d + a * c)],
        [2.0 * (b * c + a * d), a * a + c * c - b * b - d * d, 2.0 * (c * d - a * b)],
        [2.0 * (b * d - a * c), 2.0 * (c * d + a * b), a * a + d * d - c * c - b * b],
    ];
    if qfac < 0.0 {
        for row in r.iter_mut() {
            row[2] = -row[2];
        }
    }
    r
}

/// Writes `v` as float32 voxels.
pub fn write_nifti(v: &Volume) -> Result<Vec<u8>, NiftiError> {
    write_nifti_as(v, NiftiDatatype::Float32)
}

pub fn write_nifti_as(v: &Volume, dtype: NiftiDatatype) -> Result<Vec<u8>, NiftiError> {
    let header = NiftiHeader::for_volume(v, dtype)?;
    let bytes_per = (dtype.bitpix() / 8) as usize;
    let mut out = Vec::with_capacity(VOX_OFFSET + v.voxels.len() * bytes_per);
    out.extend_from_slice(&header.to_bytes());
    // Empty extension block.
    out.extend_from_slice(&[0u8; 4]);
    match dtype {
        NiftiDatatype::Float32 => {
            for x in &v.voxels {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        NiftiDatatype::Int16 => {
            for (index, &x) in v.voxels.iter().enumerate() {
                if x.fract() != 0.0 || x < i16::MIN as f32 || x > i16::MAX as f32 {
                    return Err(NiftiError::NotInt16 { index, value: x });
                }
                out.extend_from_slice(&(x as i16).to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Reads a single-file NIfTI-1 volume. Geometry comes from the sform when
/// present, else the qform, else pixdim alone.
pub fn read_nifti(bytes: &[u8]) -> Result<Volume, NiftiError> {
    let h = NiftiHeader::from_bytes(bytes)?;
    if h.dim[0] < 1 || h.dim[0] > 3 && h.dim[4..].iter().take(h.dim[0] as usize - 3).any(|&d| d > 1) {
        return Err(NiftiError::Dimensionality(h.dim[0]));
    }
    let dims = [
        h.dim[1].max(1) as usize,
        if h.dim[0] >= 2 { h.dim[2].max(1) as usize } else { 1 },
        if h.dim[0] >= 3 { h.dim[3].max(1) as usize } else { 1 },
    ];
    let spacing = [
        h.pixdim[1].abs() as f64,
        h.pixdim[2].abs() as f64,
        h.pixdim[3].abs() as f64,
    ];
    let spacing = spacing.map(|s| if s > 0.0 { s } else { 1.0 });

    let (direction, origin) = if h.sform_code > 0 {
        let mut d = [[0.0; 3]; 3];
        for c in 0..3 {
            let col: [f64; 3] = [0, 1, 2].map(|r| h.srow[r][c] as f64);
            let n = crate::geometry::norm(col);
            for r in 0..3 {
                d[r][c] = if n > 0.0 { col[r] / n } else if r == c { 1.0 } else { 0.0 };
            }
        }
        (d, [0, 1, 2].map(|r| h.srow[r][3] as f64))
    } else if h.qform_code > 0 {
        let qfac = if h.pixdim[0] < 0.0 { -1.0 } else { 1.0 };
        (
            quaternion_to_rotation(h.quatern[0] as f64, h.quatern[1] as f64, h.quatern[2] as f64, qfac),
            h.qoffset.map(|v| v as f64),
        )
    } else {
        (crate::volume::IDENTITY_DIRECTION, [0.0; 3])
    };

    let count = dims[0] * dims[1] * dims[2];
    let offset = (h.vox_offset as usize).max(HEADER_SIZE);
    let bytes_per = match h.datatype {
        DT_FLOAT32 => 4,
        DT_INT16 => 2,
        other => return Err(NiftiError::UnsupportedDatatype(other)),
    };
    let needed = count * bytes_per;
    let have = bytes.len().saturating_sub(offset);
    if have < needed {
        return Err(NiftiError::Truncated {
            offset,
            needed,
            have,
        });
    }
    let data = &bytes[offset..offset + needed];
    let scale = (h.scl_slope != 0.0 && !(h.scl_slope == 1.0 && h.scl_inter == 0.0)).then_some((h.scl_slope, h.scl_inter));
    // Identity scaling is skipped so stored values (including -0.0) come back bit-exact.
    let apply = |x: f32| match scale {
        Some((slope, inter)) => x * slope + inter,
        None => x,
    };
    let voxels: Vec<f32> = match h.datatype {
        DT_FLOAT32 => data.chunks_exact(4).map(|c| apply(f32::from_le_bytes([c[0], c[1], c[2], c[3]]))).collect(),
        _ => data.chunks_exact(2).map(|c| apply(i16::from_le_bytes([c[0], c[1]]) as f32)).collect(),
    };

    let desc_end = h.descrip.iter().position(|&c| c == 0).unwrap_or(80);
    let desc = String::from_utf8_lossy(&h.descrip[..desc_end]).trim().to_string();
    let meta = VolumeMeta {
        series_description: (!desc.is_empty()).then_some(desc),
        ..VolumeMeta::default()
    };
    let mut v = Volume::new(dims, spacing, direction, origin, voxels)?;
    v.meta = meta;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::IDENTITY_DIRECTION;

    fn ramp(dims: [usize; 3]) -> Volume {
        let n = dims[0] * dims[1] * dims[2];
        Volume::new(dims, [1.0; 3], IDENTITY_DIRECTION, [0.0; 3], (0..n).map(|i| i as f32).collect()).unwrap()
    }

    #[test]
    fn header_magic_and_size() {
        let bytes = write_nifti(&ramp([4, 4, 2])).unwrap();
        assert_eq!(&bytes[0..4], &348i32.to_le_bytes());
        assert_eq!(&bytes[344..348], b"n+1\0");
        assert_eq!(bytes.len(), VOX_OFFSET + 32 * 4);
    }

    #[test]
    fn sform_encodes_spacing_and_origin() {
        let mut v = ramp([4, 4, 2]);
        v.spacing = [1.0, 1.0, 3.0];
        v.origin = [10.0, 20.0, 30.0];
        let h = NiftiHeader::from_bytes(&write_nifti(&v).unwrap()).unwrap();
        assert_eq!(h.srow[0], [1.0, 0.0, 0.0, 10.0]);
        assert_eq!(h.srow[1], [0.0, 1.0, 0.0, 20.0]);
        assert_eq!(h.srow[2], [0.0, 0.0, 3.0, 30.0]);
        assert_eq!(h.dim[0], 3);
    }

    #[test]
    fn oversized_dims_rejected() {
        let v = Volume::filled([32768, 1, 1], 0.0);
        assert_eq!(write_nifti(&v), Err(NiftiError::DimTooLarge(32768)));
    }

    #[test]
    fn int16_round_trip_and_rejection() {
        let v = ramp([3, 3, 3]);
        let back = read_nifti(&write_nifti_as(&v, NiftiDatatype::Int16).unwrap()).unwrap();
        assert_eq!(back.voxels, v.voxels);
        let mut frac = v.clone();
        frac.voxels[4] = 0.5;
        assert!(matches!(
            write_nifti_as(&frac, NiftiDatatype::Int16),
            Err(NiftiError::NotInt16 { index: 4, .. })
        ));
    }

    #[test]
    fn qform_used_when_sform_absent() {
        // Sagittal orientation: axes (0,1,0), (0,0,-1), (-1,0,0).
        let dir = [[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]];
        let mut v = ramp([2, 3, 4]);
        v.direction = dir;
        let mut bytes = write_nifti(&v).unwrap();
        bytes[254..256].copy_from_slice(&0i16.to_le_bytes());
        let back = read_nifti(&bytes).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert!((back.direction[r][c] - dir[r][c]).abs() < 1e-6, "{r},{c}");
            }
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_nifti(&[0u8; 10]), Err(NiftiError::TooShort(10))));
        let mut bytes = write_nifti(&ramp([2, 2, 2])).unwrap();
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(read_nifti(&bytes), Err(NiftiError::Truncated { .. })));
        let mut be = write_nifti(&ramp([2, 2, 2])).unwrap();
        be[0..4].copy_from_slice(&348i32.to_be_bytes());
        assert!(matches!(read_nifti(&be), Err(NiftiError::BadHeaderSize(_))));
    }
}
