use thiserror::Error;

use super::{tags, DicomDataset, Tag};
use crate::geometry::{cross, dot, norm};
use crate::volume::{Sex, Volume, VolumeMeta};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("empty series")]
    Empty,
    #[error("slice {index} disagrees on {tag}: {detail}")]
    Mismatch {
        index: usize,
        tag: Tag,
        detail: String,
    },
    #[error("invalid {tag}: {detail}")]
    InvalidOrientation { tag: Tag, detail: String },
    #[error("slices {a} and {b} share the same position along the slice normal")]
    DuplicatePosition { a: usize, b: usize },
    #[error("slices cannot be ordered: ImagePositionPatient and InstanceNumber both missing")]
    Unordered,
}

/// Relative spread of adjacent slice gaps above which a series is flagged.
pub const GAP_TOLERANCE: f64 = 0.1;

/// Parses a DICOM age string (`nnnD`, `nnnW`, `nnnM`, `nnnY`) into years.
pub fn parse_patient_age(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (digits, unit) = match s.chars().last()? {
        c if c.is_ascii_alphabetic() => (&s[..s.len() - 1], c.to_ascii_uppercase()),
        _ => (s, 'Y'),
    };
    let n: f64 = digits.trim().parse().ok()?;
    if !(n >= 0.0) {
        return None;
    }
    match unit {
        'Y' => Some(n),
        'M' => Some(n / 12.0),
        'W' => Some(n * 7.0 / 365.25),
        'D' => Some(n / 365.25),
        _ => None,
    }
}

fn check_orientation(iop: [f64; 6]) -> Result<([f64; 3], [f64; 3]), SeriesError> {
    let r = [iop[0], iop[1], iop[2]];
    let c = [iop[3], iop[4], iop[5]];
    for (name, v) in [("row", r), ("column", c)] {
        if (norm(v) - 1.0).abs() > 1e-3 {
            return Err(SeriesError::InvalidOrientation {
                tag: tags::IMAGE_ORIENTATION_PATIENT,
                detail: format!("{name} cosine norm {} is not 1", norm(v)),
            });
        }
    }
    if dot(r, c).abs() > 1e-3 {
        return Err(SeriesError::InvalidOrientation {
            tag: tags::IMAGE_ORIENTATION_PATIENT,
            detail: format!("row/column cosines not orthogonal (dot {})", dot(r, c)),
        });
    }
    Ok((r, c))
}

/// Assembles single-frame slices of one series into a volume.
///
/// Slices are ordered by the projection of ImagePositionPatient onto the
/// slice normal, falling back to InstanceNumber when positions are absent.
pub fn series_to_volume(slices: &[DicomDataset]) -> Result<Volume, SeriesError> {
    let first = slices.first().ok_or(SeriesError::Empty)?;
    let rows = first.rows().unwrap_or(0);
    let cols = first.columns().unwrap_or(0);
    let uid = first.series_instance_uid();
    let iop = first.image_orientation().unwrap_or([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    let spacing_rc = first.pixel_spacing();

    for (index, s) in slices.iter().enumerate().skip(1) {
        let mismatch = |tag: Tag, detail: String| SeriesError::Mismatch { index, tag, detail };
        if s.series_instance_uid() != uid {
            return Err(mismatch(
                tags::SERIES_INSTANCE_UID,
                format!("{:?} vs {:?}", s.series_instance_uid(), uid),
            ));
        }
        if s.rows() != Some(rows) {
            return Err(mismatch(tags::ROWS, format!("{:?} vs {rows}", s.rows())));
        }
        if s.columns() != Some(cols) {
            return Err(mismatch(tags::COLUMNS, format!("{:?} vs {cols}", s.columns())));
        }
        let other = s.image_orientation().unwrap_or([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        if iop.iter().zip(other.iter()).any(|(a, b)| (a - b).abs() > 1e-3) {
            return Err(mismatch(
                tags::IMAGE_ORIENTATION_PATIENT,
                format!("{other:?} vs {iop:?}"),
            ));
        }
        let sp = s.pixel_spacing();
        let differs = match (sp, spacing_rc) {
            (Some(a), Some(b)) => (a[0] - b[0]).abs() > 1e-3 || (a[1] - b[1]).abs() > 1e-3,
            (None, None) => false,
            _ => true,
        };
        if differs {
            return Err(mismatch(tags::PIXEL_SPACING, format!("{sp:?} vs {spacing_rc:?}")));
        }
    }

    let (row_dir, col_dir) = check_orientation(iop)?;
    let normal = cross(row_dir, col_dir);

    // Sort key per slice; positions take precedence over instance numbers.
    let positions: Option<Vec<[f64; 3]>> = slices.iter().map(|s| s.image_position()).collect();
    let keys: Vec<f64> = match &positions {
        Some(p) => p.iter().map(|p| dot(*p, normal)).collect(),
        None => slices
            .iter()
            .map(|s| s.instance_number().map(|n| n as f64))
            .collect::<Option<Vec<_>>>()
            .ok_or(SeriesError::Unordered)?,
    };
    let mut order: Vec<usize> = (0..slices.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
    for w in order.windows(2) {
        if (keys[w[1]] - keys[w[0]]).abs() < 1e-6 {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(SeriesError::DuplicatePosition { a, b });
        }
    }

    let nz = slices.len();
    let sorted_keys: Vec<f64> = order.iter().map(|&i| keys[i]).collect();
    let (sz, nonuniform) = if positions.is_some() && nz >= 2 {
        let gaps: Vec<f64> = sorted_keys.windows(2).map(|w| w[1] - w[0]).collect();
        let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = (sorted_keys[nz - 1] - sorted_keys[0]) / (nz - 1) as f64;
        (mean, (hi - lo) / lo > GAP_TOLERANCE)
    } else {
        (first.slice_thickness().filter(|t| *t > 0.0).unwrap_or(1.0), false)
    };

    let [row_spacing, col_spacing] = spacing_rc.unwrap_or([1.0, 1.0]);
    let origin = positions.as_ref().map(|p| p[order[0]]).unwrap_or([0.0; 3]);
    let mut direction = [[0.0; 3]; 3];
    for r in 0..3 {
        direction[r][0] = row_dir[r];
        direction[r][1] = col_dir[r];
        direction[r][2] = normal[r];
    }

    let slice_len = rows as usize * cols as usize;
    let mut voxels = Vec::with_capacity(slice_len * nz);
    for &i in &order {
        voxels.extend_from_slice(slices[i].pixels());
    }

    let meta = VolumeMeta {
        manufacturer: first.manufacturer(),
        patient_age_years: first.patient_age().as_deref().and_then(parse_patient_age),
        patient_sex: first.patient_sex().as_deref().and_then(Sex::from_dicom),
        series_description: first.series_description(),
        series_uid: uid,
        repetition_time: first.repetition_time(),
        echo_time: first.echo_time(),
        slice_positions: positions.as_ref().map(|_| sorted_keys.clone()),
        nonuniform_slice_gap: nonuniform,
    };

    Ok(Volume {
        dims: [cols as usize, rows as usize, nz],
        spacing: [col_spacing, row_spacing, sz],
        direction,
        origin,
        voxels,
        meta,
    })
}
