use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GroundTruth, PhantomError, PhantomSpec};
use crate::fsio::{meta_sidecar, write_atomic};
use crate::dicom::{encode_dicom, tags, DatasetBuilder, TransferSyntax};
use crate::nifti::write_nifti_as;
use crate::nifti::NiftiDatatype;
use crate::volume::Volume;

/// Ground-truth sidecar written next to each exported phantom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomCase {
    pub scan_id: String,
    pub spec: PhantomSpec,
    pub truth: GroundTruth,
}

/// One explicit-VR file per slice, 16-bit signed pixels, positions along the
/// slice normal.
pub fn phantom_dicom_series(v: &Volume, scan_id: &str) -> Vec<Vec<u8>> {
    let [nx, ny, nz] = v.dims;
    let row = v.direction_column(0);
    let col = v.direction_column(1);
    let normal = v.direction_column(2);
    let uid = v.meta.series_uid.clone().unwrap_or_else(|| "2.25.1".into());
    let age = v.meta.patient_age_years.map(|a| format!("{:03}Y", a.round() as i64));
    (0..nz)
        .map(|z| {
            let pos: Vec<f64> = (0..3).map(|i| v.origin[i] + z as f64 * v.spacing[2] * normal[i]).collect();
            let pixels: Vec<i16> = v.voxels[z * nx * ny..(z + 1) * nx * ny].iter().map(|&p| p as i16).collect();
            let mut b = DatasetBuilder::new()
                .text(tags::SOP_CLASS_UID, "1.2.840.10008.5.1.4.1.1.4")
                .text(tags::SOP_INSTANCE_UID, &format!("{uid}.{}", z + 1))
                .text(tags::MODALITY, "MR")
                .text(tags::PATIENT_ID, scan_id)
                .text(tags::SERIES_INSTANCE_UID, &uid)
                .integer_string(tags::INSTANCE_NUMBER, z as i64 + 1)
                .decimals(tags::IMAGE_POSITION_PATIENT, &pos)
                .decimals(tags::IMAGE_ORIENTATION_PATIENT, &[row[0], row[1], row[2], col[0], col[1], col[2]])
                .decimals(tags::PIXEL_SPACING, &[v.spacing[1], v.spacing[0]])
                .decimals(tags::SLICE_THICKNESS, &[v.spacing[2]])
                .u16(tags::SAMPLES_PER_PIXEL, 1)
                .text(tags::PHOTOMETRIC_INTERPRETATION, "MONOCHROME2")
                .u16(tags::ROWS, ny as u16)
                .u16(tags::COLUMNS, nx as u16)
                .u16(tags::BITS_ALLOCATED, 16)
                .u16(tags::BITS_STORED, 16)
                .u16(tags::HIGH_BIT, 15)
                .u16(tags::PIXEL_REPRESENTATION, 1)
                .pixels_i16(&pixels);
            if let Some(m) = &v.meta.manufacturer {
                b = b.text(tags::MANUFACTURER, m);
            }
            if let Some(d) = &v.meta.series_description {
                b = b.text(tags::SERIES_DESCRIPTION, d);
            }
            if let Some(s) = v.meta.patient_sex {
                b = b.text(tags::PATIENT_SEX, s.dicom_code());
            }
            if let Some(a) = &age {
                b = b.text(tags::PATIENT_AGE, a);
            }
            if let Some(tr) = v.meta.repetition_time {
                b = b.decimals(tags::REPETITION_TIME, &[tr]);
            }
            if let Some(te) = v.meta.echo_time {
                b = b.decimals(tags::ECHO_TIME, &[te]);
            }
            encode_dicom(&b.build(), TransferSyntax::ExplicitVrLittleEndian, true)
        })
        .collect()
}

pub fn truth_json(case: &PhantomCase) -> String {
    serde_json::to_string_pretty(case).expect("ground truth serializes") + "\n"
}

pub fn read_truth(path: &Path) -> Result<PhantomCase, PhantomError> {
    let text = fs::read_to_string(path).map_err(|e| PhantomError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| PhantomError::Truth(format!("{}: {e}", path.display())))
}

/// Writes `<id>.nii`, `<id>.meta.json`, `<id>.truth.json` and, when `dicom`
/// is set, a `<id>_dicom/` directory of slice files into `dir`.
pub fn write_phantom_case(dir: &Path, case: &PhantomCase, v: &Volume, dicom: bool) -> Result<(), PhantomError> {
    let write = |p: &Path, bytes: &[u8]| write_atomic(p, bytes).map_err(|e| PhantomError::Io(format!("{}: {e}", p.display())));
    let nii = write_nifti_as(v, NiftiDatatype::Int16).map_err(|e| PhantomError::Io(e.to_string()))?;
    let p = dir.join(format!("{}.nii", case.scan_id));
    write(&p, &nii)?;
    let meta = serde_json::to_string_pretty(&v.meta).expect("metadata serializes") + "\n";
    write(&meta_sidecar(&p), meta.as_bytes())?;
    write(&dir.join(format!("{}.truth.json", case.scan_id)), truth_json(case).as_bytes())?;
    if dicom {
        let d = dir.join(format!("{}_dicom", case.scan_id));
        for (z, bytes) in phantom_dicom_series(v, &case.scan_id).into_iter().enumerate() {
            write(&d.join(format!("slice_{:03}.dcm", z + 1)), &bytes)?;
        }
    }
    Ok(())
}
