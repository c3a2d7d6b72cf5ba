//! C ABI over `spinescan-core`.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns an
//! [`SsStatus`]; on failure [`ss_last_error`] describes the cause on the
//! calling thread. Strings returned to the caller are released with
//! [`ss_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spinescan::dicom::{parse_dicom, series_to_volume};
use spinescan::ensemble::ScanLabel;
use spinescan::metrics::{roc_auc, wilson_ci};
use spinescan::nifti::{read_nifti, write_nifti};
use spinescan::phantom::{generate_phantom, random_spec};
use spinescan::pipeline::{process_scan, PipelineConfig, ScanReport, Stage};
use spinescan::Volume;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    /// Null pointer, bad length or non-UTF-8 string.
    InvalidArgument = 1,
    /// Malformed DICOM, NIfTI or JSON input.
    Parse = 2,
    /// Well-formed input that fails a semantic check.
    Validation = 3,
    Io = 4,
    /// A pipeline stage failed.
    Pipeline = 5,
    /// Index past the end of a collection.
    OutOfRange = 6,
    /// Internal panic caught at the boundary.
    Panic = 7,
}

/// Scan-level label codes.
pub const SS_LABEL_NORMAL: i32 = 0;
pub const SS_LABEL_ABNORMAL: i32 = 1;
/// Returned by [`ss_report_label`] when classification did not run.
pub const SS_LABEL_NONE: i32 = -1;

/// Opaque volume handle.
pub struct SsVolume(Volume);
/// Opaque pipeline configuration handle.
pub struct SsConfig(PipelineConfig);
/// Opaque per-scan report handle.
pub struct SsReport(ScanReport);

/// One detection, flattened.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SsDetection {
    pub slice_index: u32,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    /// Pathology code, a 0-based index into the label vocabulary.
    pub label_code: u32,
    pub score: f64,
    /// Cascade stage that produced the box.
    pub stage: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

struct Failure(SsStatus, String);

fn fail<T>(status: SsStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

/// Runs `f`, records any error message, and converts panics to
/// [`SsStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            SsStatus::Panic
        }
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(|| fail(SsStatus::InvalidArgument, format!("{name} is null")), Ok)
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().map_or_else(|| fail(SsStatus::InvalidArgument, format!("{name} is null")), Ok)
}

unsafe fn string<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(SsStatus::InvalidArgument, format!("{name} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(SsStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(SsStatus::InvalidArgument, format!("{name} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs replaced").into_raw()
}

/// Message for the most recent failure on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Decodes a single-file NIfTI-1 image held in memory.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_volume_from_nifti(bytes: *const u8, len: usize, out_volume: *mut *mut SsVolume) -> SsStatus {
    guard(|| {
        let o = out(out_volume, "out_volume")?;
        *o = ptr::null_mut();
        let data = slice(bytes, len, "bytes")?;
        let v = read_nifti(data).or_else(|e| fail(SsStatus::Parse, e.to_string()))?;
        *o = Box::into_raw(Box::new(SsVolume(v)));
        Ok(())
    })
}

/// Assembles a volume from `count` DICOM slice files of one series.
///
/// # Safety
/// `paths` must point to `count` NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ss_volume_from_dicom_files(
    paths: *const *const c_char,
    count: usize,
    out_volume: *mut *mut SsVolume,
) -> SsStatus {
    guard(|| {
        let o = out(out_volume, "out_volume")?;
        *o = ptr::null_mut();
        let paths = slice(paths, count, "paths")?;
        let mut slices = Vec::with_capacity(count);
        for (i, p) in paths.iter().enumerate() {
            let path = string(*p, &format!("paths[{i}]"))?;
            let bytes = std::fs::read(path).or_else(|e| fail(SsStatus::Io, format!("{path}: {e}")))?;
            slices.push(parse_dicom(&bytes).or_else(|e| fail(SsStatus::Parse, format!("{path}: {e}")))?);
        }
        let v = series_to_volume(&slices).or_else(|e| fail(SsStatus::Validation, e.to_string()))?;
        *o = Box::into_raw(Box::new(SsVolume(v)));
        Ok(())
    })
}

/// Generates a synthetic sagittal phantom.
///
/// # Safety
/// `out_volume` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_volume_phantom(seed: u64, abnormal: bool, out_volume: *mut *mut SsVolume) -> SsStatus {
    guard(|| {
        let o = out(out_volume, "out_volume")?;
        *o = ptr::null_mut();
        let (v, _) = generate_phantom(&random_spec(seed, abnormal)).or_else(|e| fail(SsStatus::Validation, e.to_string()))?;
        *o = Box::into_raw(Box::new(SsVolume(v)));
        Ok(())
    })
}

/// Writes the volume dimensions (x, y, z) to `out_dims[0..3]`.
///
/// # Safety
/// `volume` must be a live handle; `out_dims` must hold 3 values.
#[no_mangle]
pub unsafe extern "C" fn ss_volume_dims(volume: *const SsVolume, out_dims: *mut usize) -> SsStatus {
    guard(|| {
        let v = &arg(volume, "volume")?.0;
        out(out_dims, "out_dims")?;
        std::slice::from_raw_parts_mut(out_dims, 3).copy_from_slice(&v.dims);
        Ok(())
    })
}

/// Writes the voxel spacing in mm to `out_spacing[0..3]`.
///
/// # Safety
/// `volume` must be a live handle; `out_spacing` must hold 3 values.
#[no_mangle]
pub unsafe extern "C" fn ss_volume_spacing(volume: *const SsVolume, out_spacing: *mut f64) -> SsStatus {
    guard(|| {
        let v = &arg(volume, "volume")?.0;
        out(out_spacing, "out_spacing")?;
        std::slice::from_raw_parts_mut(out_spacing, 3).copy_from_slice(&v.spacing);
        Ok(())
    })
}

/// Copies voxels (x fastest) into `buffer`, which must hold `capacity`
/// values; fails with `OutOfRange` when it is too small.
///
/// # Safety
/// `volume` must be a live handle; `buffer` must hold `capacity` floats.
#[no_mangle]
pub unsafe extern "C" fn ss_volume_voxels(volume: *const SsVolume, buffer: *mut f32, capacity: usize) -> SsStatus {
    guard(|| {
        let v = &arg(volume, "volume")?.0;
        if capacity < v.voxels.len() {
            return fail(SsStatus::OutOfRange, format!("buffer holds {capacity} voxels, volume has {}", v.voxels.len()));
        }
        out(buffer, "buffer")?;
        std::slice::from_raw_parts_mut(buffer, v.voxels.len()).copy_from_slice(&v.voxels);
        Ok(())
    })
}

/// Encodes the volume as float32 NIfTI-1. Release with [`ss_bytes_free`].
///
/// # Safety
/// `volume` must be a live handle; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_volume_to_nifti(volume: *const SsVolume, out_bytes: *mut *mut u8, out_len: *mut usize) -> SsStatus {
    guard(|| {
        let v = &arg(volume, "volume")?.0;
        let ob = out(out_bytes, "out_bytes")?;
        let ol = out(out_len, "out_len")?;
        *ob = ptr::null_mut();
        *ol = 0;
        let bytes = write_nifti(v).or_else(|e| fail(SsStatus::Validation, e.to_string()))?;
        let boxed = bytes.into_boxed_slice();
        *ol = boxed.len();
        *ob = Box::into_raw(boxed) as *mut u8;
        Ok(())
    })
}

/// Releases a buffer from [`ss_volume_to_nifti`]. Null is ignored.
///
/// # Safety
/// `bytes`/`len` must be exactly as returned and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ss_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// # Safety
/// `volume` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_volume_free(volume: *mut SsVolume) {
    if !volume.is_null() {
        drop(Box::from_raw(volume));
    }
}

/// Default pipeline configuration.
///
/// # Safety
/// `out_config` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_config_default(out_config: *mut *mut SsConfig) -> SsStatus {
    guard(|| {
        *out(out_config, "out_config")? = Box::into_raw(Box::new(SsConfig(PipelineConfig::default())));
        Ok(())
    })
}

/// Parses a strict JSON configuration (unknown keys are rejected).
///
/// # Safety
/// `json` must be NUL-terminated; `out_config` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_config_from_json(json: *const c_char, out_config: *mut *mut SsConfig) -> SsStatus {
    guard(|| {
        let o = out(out_config, "out_config")?;
        *o = ptr::null_mut();
        let text = string(json, "json")?;
        let cfg = PipelineConfig::from_json(text).or_else(|e| fail(SsStatus::Parse, e.to_string()))?;
        *o = Box::into_raw(Box::new(SsConfig(cfg)));
        Ok(())
    })
}

/// Effective configuration as pretty JSON. Release with [`ss_string_free`].
///
/// # Safety
/// `config` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_config_to_json(config: *const SsConfig, out_json: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let c = &arg(config, "config")?.0;
        *out(out_json, "out_json")? = to_c_string(c.to_json());
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_config_free(config: *mut SsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs verification, classification, segmentation and detection on one
/// scan.
///
/// # Safety
/// Handles must be live; `scan_id` NUL-terminated; `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_process_scan(
    config: *const SsConfig,
    volume: *const SsVolume,
    scan_id: *const c_char,
    out_report: *mut *mut SsReport,
) -> SsStatus {
    guard(|| {
        let o = out(out_report, "out_report")?;
        *o = ptr::null_mut();
        let c = &arg(config, "config")?.0;
        let v = &arg(volume, "volume")?.0;
        let id = string(scan_id, "scan_id")?;
        let r = process_scan(id, v, c, Stage::Detect).or_else(|e| fail(SsStatus::Pipeline, e.to_string()))?;
        *o = Box::into_raw(Box::new(SsReport(r)));
        Ok(())
    })
}

/// Scan label (`SS_LABEL_*`) and weighted abnormal probability. The
/// probability is NaN when classification did not run.
///
/// # Safety
/// `report` must be a live handle; out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn ss_report_label(report: *const SsReport, out_label: *mut i32, out_probability: *mut f64) -> SsStatus {
    guard(|| {
        let r = &arg(report, "report")?.0;
        let l = out(out_label, "out_label")?;
        let p = out(out_probability, "out_probability")?;
        match &r.classification {
            Some(c) => {
                *l = match c.classification.label {
                    ScanLabel::Normal => SS_LABEL_NORMAL,
                    ScanLabel::Abnormal => SS_LABEL_ABNORMAL,
                };
                *p = c.classification.weighted_probability;
            }
            None => {
                *l = SS_LABEL_NONE;
                *p = f64::NAN;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle; `out_count` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_report_detection_count(report: *const SsReport, out_count: *mut usize) -> SsStatus {
    guard(|| {
        *out(out_count, "out_count")? = arg(report, "report")?.0.detections.len();
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle; `out_detection` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_report_detection(report: *const SsReport, index: usize, out_detection: *mut SsDetection) -> SsStatus {
    guard(|| {
        let r = &arg(report, "report")?.0;
        let o = out(out_detection, "out_detection")?;
        let Some(d) = r.detections.get(index) else {
            return fail(SsStatus::OutOfRange, format!("detection {index} of {}", r.detections.len()));
        };
        *o = SsDetection {
            slice_index: d.slice_index as u32,
            x1: d.bbox.x1,
            y1: d.bbox.y1,
            x2: d.bbox.x2,
            y2: d.bbox.y2,
            label_code: d.label_code as u32,
            score: d.score,
            stage: d.stage as u32,
        };
        Ok(())
    })
}

/// Full report as compact JSON. Release with [`ss_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_report_to_json(report: *const SsReport, out_json: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let r = &arg(report, "report")?.0;
        let json = serde_json::to_string(r).or_else(|e| fail(SsStatus::Validation, e.to_string()))?;
        *out(out_json, "out_json")? = to_c_string(json);
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_report_free(report: *mut SsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Wilson score interval for `k` successes in `n` trials.
///
/// # Safety
/// Out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_wilson_ci(k: u64, n: u64, z: f64, out_lo: *mut f64, out_hi: *mut f64) -> SsStatus {
    guard(|| {
        let lo = out(out_lo, "out_lo")?;
        let hi = out(out_hi, "out_hi")?;
        let (a, b) = wilson_ci(k, n, z).or_else(|e| fail(SsStatus::Validation, e.to_string()))?;
        *lo = a;
        *hi = b;
        Ok(())
    })
}

/// ROC-AUC of `scores` against 0/1 `labels` (nonzero = positive).
///
/// # Safety
/// `scores` and `labels` must each hold `len` values; `out_auc` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_roc_auc(scores: *const f64, labels: *const u8, len: usize, out_auc: *mut f64) -> SsStatus {
    guard(|| {
        let o = out(out_auc, "out_auc")?;
        let s = slice(scores, len, "scores")?;
        let l: Vec<bool> = slice(labels, len, "labels")?.iter().map(|&b| b != 0).collect();
        *o = roc_auc(s, &l).or_else(|e| fail(SsStatus::Validation, e.to_string()))?;
        Ok(())
    })
}
