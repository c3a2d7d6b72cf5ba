use std::collections::BTreeMap;

use super::dictionary::{self, tags};
use super::{Element, Tag, TransferSyntax, Vr};

const MR_IMAGE_STORAGE: &str = "1.2.840.10008.5.1.4.1.1.4";
const IMPLEMENTATION_CLASS_UID: &str = "1.2.826.0.1.3680043.10.1443.1";

/// Formats a decimal string value (max 16 characters per DICOM PS3.5).
pub fn format_ds(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 16 {
        return s;
    }
    for prec in (0..=14).rev() {
        let s = format!("{v:.prec$}");
        if s.len() <= 16 {
            return s;
        }
    }
    format!("{v:.6e}")
}

/// Incrementally builds an element map for [`encode_dicom`].
#[derive(Debug, Clone, Default)]
pub struct DatasetBuilder {
    elements: BTreeMap<Tag, Element>,
}

impl DatasetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(mut self, tag: Tag, vr: Vr, value: Vec<u8>) -> Self {
        self.elements.insert(tag, Element { vr, value });
        self
    }

    /// Text value; the VR is taken from the dictionary (LO if unknown).
    pub fn text(self, tag: Tag, s: &str) -> Self {
        let vr = dictionary::lookup(tag).map(|(vr, _)| vr).unwrap_or(Vr::LO);
        let mut value = s.as_bytes().to_vec();
        if value.len() % 2 == 1 {
            value.push(if vr == Vr::UI { 0 } else { b' ' });
        }
        self.raw(tag, vr, value)
    }

    pub fn decimals(self, tag: Tag, values: &[f64]) -> Self {
        let s = values.iter().map(|v| format_ds(*v)).collect::<Vec<_>>().join("\\");
        self.text(tag, &s)
    }

    pub fn integer_string(self, tag: Tag, v: i64) -> Self {
        self.text(tag, &v.to_string())
    }

    pub fn u16(self, tag: Tag, v: u16) -> Self {
        self.raw(tag, Vr::US, v.to_le_bytes().to_vec())
    }

    pub fn pixels_u8(self, data: &[u8]) -> Self {
        let mut value = data.to_vec();
        if value.len() % 2 == 1 {
            value.push(0);
        }
        self.raw(tags::PIXEL_DATA, Vr::OB, value)
    }

    pub fn pixels_i16(self, data: &[i16]) -> Self {
        let value = data.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.raw(tags::PIXEL_DATA, Vr::OW, value)
    }

    pub fn pixels_u16(self, data: &[u16]) -> Self {
        let value = data.iter().flat_map(|v| v.to_le_bytes()).collect();
        self.raw(tags::PIXEL_DATA, Vr::OW, value)
    }

    pub fn build(self) -> BTreeMap<Tag, Element> {
        self.elements
    }
}

fn push_explicit(out: &mut Vec<u8>, tag: Tag, el: &Element) {
    out.extend_from_slice(&tag.0.to_le_bytes());
    out.extend_from_slice(&tag.1.to_le_bytes());
    out.extend_from_slice(&el.vr.as_bytes());
    if el.vr.has_long_length() {
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&(el.value.len() as u32).to_le_bytes());
    } else {
        out.extend_from_slice(&(el.value.len() as u16).to_le_bytes());
    }
    out.extend_from_slice(&el.value);
}

fn push_implicit(out: &mut Vec<u8>, tag: Tag, el: &Element) {
    out.extend_from_slice(&tag.0.to_le_bytes());
    out.extend_from_slice(&tag.1.to_le_bytes());
    out.extend_from_slice(&(el.value.len() as u32).to_le_bytes());
    out.extend_from_slice(&el.value);
}

/// Serialises a dataset. With `file_format` set, a 128-byte preamble, the
/// "DICM" prefix and a group 0002 file meta header are emitted; without it
/// the output starts directly with the first dataset element.
pub fn encode_dicom(
    elements: &BTreeMap<Tag, Element>,
    syntax: TransferSyntax,
    file_format: bool,
) -> Vec<u8> {
    let mut out = Vec::new();
    if file_format {
        out.extend_from_slice(&[0u8; 128]);
        out.extend_from_slice(b"DICM");
        let sop_instance = elements
            .get(&tags::SOP_INSTANCE_UID)
            .map(|e| String::from_utf8_lossy(&e.value).trim_end_matches(['\0', ' ']).to_string())
            .unwrap_or_else(|| "2.25.0".to_string());
        let meta = DatasetBuilder::new()
            .raw(Tag(0x0002, 0x0001), Vr::OB, vec![0, 1])
            .text(Tag(0x0002, 0x0002), MR_IMAGE_STORAGE)
            .text(Tag(0x0002, 0x0003), &sop_instance)
            .text(tags::TRANSFER_SYNTAX_UID, syntax.uid())
            .text(Tag(0x0002, 0x0012), IMPLEMENTATION_CLASS_UID)
            .build();
        let mut body = Vec::new();
        for (t, e) in &meta {
            push_explicit(&mut body, *t, e);
        }
        push_explicit(
            &mut out,
            Tag(0x0002, 0x0000),
            &Element {
                vr: Vr::UL,
                value: (body.len() as u32).to_le_bytes().to_vec(),
            },
        );
        out.extend_from_slice(&body);
    }
    for (t, e) in elements.iter().filter(|(t, _)| t.0 != 0x0002) {
        match syntax {
            TransferSyntax::ExplicitVrLittleEndian => push_explicit(&mut out, *t, e),
            TransferSyntax::ImplicitVrLittleEndian => push_implicit(&mut out, *t, e),
        }
    }
    out
}
