//! A practical subset of DICOM PS3.10: uncompressed little-endian
//! single-frame monochrome images, parsed into a tag map with decoded
//! accessors, plus series assembly into [`Volume`](crate::volume::Volume)s.

mod dictionary;
mod parse;
mod series;
mod write;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use dictionary::tags;
pub use parse::parse_dicom;
pub use series::{parse_patient_age, series_to_volume, SeriesError};
pub use write::{encode_dicom, format_ds, DatasetBuilder};

/// A (group, element) attribute tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(pub u16, pub u16);

impl Tag {
    pub fn keyword(self) -> Option<&'static str> {
        dictionary::lookup(self).map(|(_, name)| name)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:04X},{:04X})", self.0, self.1)?;
        if let Some(k) = self.keyword() {
            write!(f, " {k}")?;
        }
        Ok(())
    }
}

/// Value representations. Explicit-VR files carry these on the wire.
#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vr {
    AE,
    AS,
    AT,
    CS,
    DA,
    DS,
    DT,
    FD,
    FL,
    IS,
    LO,
    LT,
    OB,
    OD,
    OF,
    OL,
    OV,
    OW,
    PN,
    SH,
    SL,
    SQ,
    SS,
    ST,
    SV,
    TM,
    UC,
    UI,
    UL,
    UN,
    UR,
    US,
    UT,
    UV,
}

impl Vr {
    pub fn from_bytes(b: [u8; 2]) -> Option<Vr> {
        use Vr::*;
        Some(match &b {
            b"AE" => AE,
            b"AS" => AS,
            b"AT" => AT,
            b"CS" => CS,
            b"DA" => DA,
            b"DS" => DS,
            b"DT" => DT,
            b"FD" => FD,
            b"FL" => FL,
            b"IS" => IS,
            b"LO" => LO,
            b"LT" => LT,
            b"OB" => OB,
            b"OD" => OD,
            b"OF" => OF,
            b"OL" => OL,
            b"OV" => OV,
            b"OW" => OW,
            b"PN" => PN,
            b"SH" => SH,
            b"SL" => SL,
            b"SQ" => SQ,
            b"SS" => SS,
            b"ST" => ST,
            b"SV" => SV,
            b"TM" => TM,
            b"UC" => UC,
            b"UI" => UI,
            b"UL" => UL,
            b"UN" => UN,
            b"UR" => UR,
            b"US" => US,
            b"UT" => UT,
            b"UV" => UV,
            _ => return None,
        })
    }

    pub fn as_bytes(self) -> [u8; 2] {
        let s = format!("{self:?}");
        let b = s.as_bytes();
        [b[0], b[1]]
    }

    /// VRs whose explicit encoding uses 2 reserved bytes and a 32-bit length.
    pub fn has_long_length(self) -> bool {
        use Vr::*;
        matches!(self, OB | OD | OF | OL | OV | OW | SQ | SV | UC | UN | UR | UT | UV)
    }

    fn is_text(self) -> bool {
        use Vr::*;
        matches!(
            self,
            AE | AS | CS | DA | DS | DT | IS | LO | LT | PN | SH | ST | TM | UC | UI | UR | UT
        )
    }
}

/// Supported (and recognised-but-rejected) transfer syntaxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferSyntax {
    ImplicitVrLittleEndian,
    ExplicitVrLittleEndian,
}

impl TransferSyntax {
    pub const IMPLICIT_LE_UID: &'static str = "1.2.840.10008.1.2";
    pub const EXPLICIT_LE_UID: &'static str = "1.2.840.10008.1.2.1";

    pub fn uid(self) -> &'static str {
        match self {
            TransferSyntax::ImplicitVrLittleEndian => Self::IMPLICIT_LE_UID,
            TransferSyntax::ExplicitVrLittleEndian => Self::EXPLICIT_LE_UID,
        }
    }

    pub fn from_uid(uid: &str) -> Option<TransferSyntax> {
        match uid.trim_end_matches(['\0', ' ']) {
            Self::IMPLICIT_LE_UID => Some(TransferSyntax::ImplicitVrLittleEndian),
            Self::EXPLICIT_LE_UID => Some(TransferSyntax::ExplicitVrLittleEndian),
            _ => None,
        }
    }

    pub fn is_explicit(self) -> bool {
        self == TransferSyntax::ExplicitVrLittleEndian
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DicomError {
    #[error("truncated {} at byte offset {offset}: {detail}", .tag.map(|t| t.to_string()).unwrap_or_else(|| "element header".into()))]
    Truncated {
        tag: Option<Tag>,
        offset: usize,
        detail: String,
    },
    #[error("malformed element {tag} at byte offset {offset}: {detail}")]
    Malformed {
        tag: Tag,
        offset: usize,
        detail: String,
    },
    #[error("unsupported transfer syntax {0}")]
    UnsupportedTransferSyntax(String),
    #[error("not an image: missing {0}")]
    NotAnImage(Tag),
    #[error("unsupported image encoding: {0}")]
    UnsupportedImage(String),
}

/// One raw attribute: its VR and little-endian value bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub vr: Vr,
    pub value: Vec<u8>,
}

/// A decoded attribute value, independent of the wire encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(Vec<String>),
    Ints(Vec<i64>),
    Floats(Vec<f64>),
    Bytes(Vec<u8>),
}

impl Element {
    pub fn decode(&self) -> Value {
        use Vr::*;
        let b = &self.value;
        match self.vr {
            DS => Value::Floats(
                split_text(b)
                    .iter()
                    .filter_map(|s| s.trim().parse::<f64>().ok())
                    .collect(),
            ),
            IS => Value::Ints(
                split_text(b)
                    .iter()
                    .filter_map(|s| s.trim().parse::<i64>().ok())
                    .collect(),
            ),
            vr if vr.is_text() => Value::Text(split_text(b)),
            US => Value::Ints(
                b.chunks_exact(2)
                    .map(|c| u16::from_le_bytes([c[0], c[1]]) as i64)
                    .collect(),
            ),
            SS => Value::Ints(
                b.chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]) as i64)
                    .collect(),
            ),
            UL => Value::Ints(
                b.chunks_exact(4)
                    .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as i64)
                    .collect(),
            ),
            SL => Value::Ints(
                b.chunks_exact(4)
                    .map(|c| i32::from_le_bytes([c[0], c[1], c[2], c[3]]) as i64)
                    .collect(),
            ),
            FL => Value::Floats(
                b.chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                    .collect(),
            ),
            FD => Value::Floats(
                b.chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            _ => Value::Bytes(b.clone()),
        }
    }
}

fn split_text(b: &[u8]) -> Vec<String> {
    let s = String::from_utf8_lossy(b);
    let s = s.trim_end_matches(['\0', ' ']);
    if s.is_empty() {
        return Vec::new();
    }
    s.split('\\')
        .map(|p| p.trim_matches(|c| c == ' ' || c == '\0').to_string())
        .collect()
}

/// A parsed single-frame DICOM object.
#[derive(Debug, Clone, PartialEq)]
pub struct DicomDataset {
    pub transfer_syntax: TransferSyntax,
    elements: BTreeMap<Tag, Element>,
    pixels: Vec<f32>,
}

impl DicomDataset {
    pub(crate) fn from_parts(
        transfer_syntax: TransferSyntax,
        elements: BTreeMap<Tag, Element>,
        pixels: Vec<f32>,
    ) -> Self {
        DicomDataset {
            transfer_syntax,
            elements,
            pixels,
        }
    }

    pub fn elements(&self) -> &BTreeMap<Tag, Element> {
        &self.elements
    }

    pub fn get(&self, tag: Tag) -> Option<&Element> {
        self.elements.get(&tag)
    }

    /// Every element decoded, keyed by tag.
    pub fn decoded(&self) -> BTreeMap<Tag, Value> {
        self.elements
            .iter()
            .map(|(t, e)| (*t, e.decode()))
            .collect()
    }

    pub fn text(&self, tag: Tag) -> Option<String> {
        match self.get(tag)?.decode() {
            Value::Text(v) if !v.is_empty() => Some(v.join("\\")),
            _ => None,
        }
    }

    fn ints(&self, tag: Tag) -> Option<Vec<i64>> {
        match self.get(tag)?.decode() {
            Value::Ints(v) if !v.is_empty() => Some(v),
            _ => None,
        }
    }

    fn floats(&self, tag: Tag) -> Option<Vec<f64>> {
        match self.get(tag)?.decode() {
            Value::Floats(v) if !v.is_empty() => Some(v),
            _ => None,
        }
    }

    fn int(&self, tag: Tag) -> Option<i64> {
        self.ints(tag).map(|v| v[0])
    }

    pub fn rows(&self) -> Option<u16> {
        self.int(tags::ROWS).map(|v| v as u16)
    }

    pub fn columns(&self) -> Option<u16> {
        self.int(tags::COLUMNS).map(|v| v as u16)
    }

    pub fn bits_allocated(&self) -> Option<u16> {
        self.int(tags::BITS_ALLOCATED).map(|v| v as u16)
    }

    pub fn pixel_representation(&self) -> Option<u16> {
        self.int(tags::PIXEL_REPRESENTATION).map(|v| v as u16)
    }

    /// (row spacing, column spacing) in mm.
    pub fn pixel_spacing(&self) -> Option<[f64; 2]> {
        let v = self.floats(tags::PIXEL_SPACING)?;
        (v.len() >= 2).then(|| [v[0], v[1]])
    }

    pub fn slice_thickness(&self) -> Option<f64> {
        self.floats(tags::SLICE_THICKNESS).map(|v| v[0])
    }

    pub fn image_orientation(&self) -> Option<[f64; 6]> {
        let v = self.floats(tags::IMAGE_ORIENTATION_PATIENT)?;
        (v.len() >= 6).then(|| [v[0], v[1], v[2], v[3], v[4], v[5]])
    }

    pub fn image_position(&self) -> Option<[f64; 3]> {
        let v = self.floats(tags::IMAGE_POSITION_PATIENT)?;
        (v.len() >= 3).then(|| [v[0], v[1], v[2]])
    }

    pub fn series_instance_uid(&self) -> Option<String> {
        self.text(tags::SERIES_INSTANCE_UID)
    }

    pub fn instance_number(&self) -> Option<i64> {
        self.int(tags::INSTANCE_NUMBER)
    }

    pub fn manufacturer(&self) -> Option<String> {
        self.text(tags::MANUFACTURER)
    }

    pub fn patient_age(&self) -> Option<String> {
        self.text(tags::PATIENT_AGE)
    }

    pub fn patient_sex(&self) -> Option<String> {
        self.text(tags::PATIENT_SEX)
    }

    pub fn series_description(&self) -> Option<String> {
        self.text(tags::SERIES_DESCRIPTION)
    }

    pub fn repetition_time(&self) -> Option<f64> {
        self.floats(tags::REPETITION_TIME).map(|v| v[0])
    }

    pub fn echo_time(&self) -> Option<f64> {
        self.floats(tags::ECHO_TIME).map(|v| v[0])
    }

    pub fn rescale_slope(&self) -> Option<f64> {
        self.floats(tags::RESCALE_SLOPE).map(|v| v[0])
    }

    pub fn rescale_intercept(&self) -> Option<f64> {
        self.floats(tags::RESCALE_INTERCEPT).map(|v| v[0])
    }

    pub fn pixel_data(&self) -> &[u8] {
        self.get(tags::PIXEL_DATA)
            .map(|e| e.value.as_slice())
            .unwrap_or(&[])
    }

    /// Decoded pixel values with rescale applied, row-major (column fastest).
    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }
}
