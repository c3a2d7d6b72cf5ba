use std::collections::BTreeMap;

use super::dictionary::{self, tags};
use super::{DicomDataset, DicomError, Element, Tag, TransferSyntax, Value, Vr};

const UNDEFINED_LENGTH: u32 = 0xFFFF_FFFF;

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

struct Header {
    tag: Tag,
    vr: Vr,
    length: u32,
    start: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize, tag: Option<Tag>, what: &str) -> Result<&'a [u8], DicomError> {
        if self.remaining() < n {
            return Err(DicomError::Truncated {
                tag,
                offset: self.pos,
                detail: format!("{what} needs {n} bytes, {} remain", self.remaining()),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, tag: Option<Tag>, what: &str) -> Result<u16, DicomError> {
        let b = self.take(2, tag, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self, tag: Option<Tag>, what: &str) -> Result<u32, DicomError> {
        let b = self.take(4, tag, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn peek_group(&self) -> Option<u16> {
        (self.remaining() >= 2).then(|| u16::from_le_bytes([self.bytes[self.pos], self.bytes[self.pos + 1]]))
    }

    fn header(&mut self, explicit: bool) -> Result<Header, DicomError> {
        let start = self.pos;
        let group = self.u16(None, "tag group")?;
        let element = self.u16(None, "tag element")?;
        let tag = Tag(group, element);
        if group == 0xFFFE {
            let length = self.u32(Some(tag), "item length")?;
            return Ok(Header {
                tag,
                vr: Vr::UN,
                length,
                start,
            });
        }
        if explicit {
            let raw = self.take(2, Some(tag), "value representation")?;
            let vr = Vr::from_bytes([raw[0], raw[1]]).ok_or_else(|| DicomError::Malformed {
                tag,
                offset: start,
                detail: format!("invalid VR bytes {:02X} {:02X}", raw[0], raw[1]),
            })?;
            let length = if vr.has_long_length() {
                self.take(2, Some(tag), "reserved bytes")?;
                self.u32(Some(tag), "value length")?
            } else {
                self.u16(Some(tag), "value length")? as u32
            };
            Ok(Header {
                tag,
                vr,
                length,
                start,
            })
        } else {
            let length = self.u32(Some(tag), "value length")?;
            let vr = dictionary::lookup(tag).map(|(vr, _)| vr).unwrap_or(Vr::UN);
            Ok(Header {
                tag,
                vr,
                length,
                start,
            })
        }
    }

    /// Reads one top-level (or nested) element, returning it with its tag.
    fn element(&mut self, explicit: bool) -> Result<(Tag, Element), DicomError> {
        let h = self.header(explicit)?;
        if h.tag.0 == 0xFFFE {
            return Err(DicomError::Malformed {
                tag: h.tag,
                offset: h.start,
                detail: "item or delimiter outside a sequence".into(),
            });
        }
        if h.length == UNDEFINED_LENGTH {
            if h.tag == tags::PIXEL_DATA {
                return Err(DicomError::UnsupportedTransferSyntax(
                    "encapsulated (compressed) pixel data".into(),
                ));
            }
            if !matches!(h.vr, Vr::SQ | Vr::UN) {
                return Err(DicomError::Malformed {
                    tag: h.tag,
                    offset: h.start,
                    detail: format!("undefined length on VR {:?}", h.vr),
                });
            }
            let value_start = self.pos;
            let value_end = self.skip_sequence(h.tag, explicit)?;
            let value = self.bytes[value_start..value_end].to_vec();
            return Ok((h.tag, Element { vr: Vr::SQ, value }));
        }
        let value = self
            .take(h.length as usize, Some(h.tag), "value")
            .map_err(|_| DicomError::Truncated {
                tag: Some(h.tag),
                offset: h.start,
                detail: format!(
                    "declared value length {} exceeds the {} bytes remaining",
                    h.length,
                    self.remaining()
                ),
            })?
            .to_vec();
        Ok((h.tag, Element { vr: h.vr, value }))
    }

    /// Consumes items up to and including the sequence delimiter. Returns the
    /// offset where the delimiter starts.
    fn skip_sequence(&mut self, seq: Tag, explicit: bool) -> Result<usize, DicomError> {
        loop {
            let item_start = self.pos;
            let h = self.header(explicit).map_err(|e| with_tag(e, seq))?;
            match h.tag {
                tags::SEQUENCE_DELIMITATION => return Ok(item_start),
                tags::ITEM if h.length == UNDEFINED_LENGTH => loop {
                    if self.remaining() >= 4 {
                        let g = u16::from_le_bytes([self.bytes[self.pos], self.bytes[self.pos + 1]]);
                        let e = u16::from_le_bytes([self.bytes[self.pos + 2], self.bytes[self.pos + 3]]);
                        if Tag(g, e) == tags::ITEM_DELIMITATION {
                            self.header(explicit)?;
                            break;
                        }
                    }
                    self.element(explicit).map_err(|e| with_tag(e, seq))?;
                },
                tags::ITEM => {
                    self.take(h.length as usize, Some(seq), "sequence item")?;
                }
                other => {
                    return Err(DicomError::Malformed {
                        tag: seq,
                        offset: h.start,
                        detail: format!("unexpected {other} inside sequence"),
                    })
                }
            }
        }
    }
}

fn with_tag(e: DicomError, tag: Tag) -> DicomError {
    match e {
        DicomError::Truncated {
            tag: None,
            offset,
            detail,
        } => DicomError::Truncated {
            tag: Some(tag),
            offset,
            detail,
        },
        other => other,
    }
}

/// Guesses explicit vs implicit VR from the first element header.
fn looks_explicit(bytes: &[u8], pos: usize) -> bool {
    bytes.len() >= pos + 6 && Vr::from_bytes([bytes[pos + 4], bytes[pos + 5]]).is_some()
}

/// Parses a DICOM file (with or without the 128-byte preamble) encoded in
/// implicit or explicit VR little endian.
pub fn parse_dicom(bytes: &[u8]) -> Result<DicomDataset, DicomError> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() >= 132 && &bytes[128..132] == b"DICM" {
        r.pos = 132;
    }

    let mut elements = BTreeMap::new();
    // File meta information is always explicit VR little endian.
    while r.peek_group() == Some(0x0002) {
        let (tag, el) = r.element(true)?;
        elements.insert(tag, el);
    }

    let syntax = match elements.get(&tags::TRANSFER_SYNTAX_UID) {
        Some(el) => {
            let uid = match el.decode() {
                Value::Text(v) => v.join("\\"),
                _ => String::new(),
            };
            TransferSyntax::from_uid(&uid).ok_or(DicomError::UnsupportedTransferSyntax(uid))?
        }
        None if looks_explicit(bytes, r.pos) => TransferSyntax::ExplicitVrLittleEndian,
        None => TransferSyntax::ImplicitVrLittleEndian,
    };

    let explicit = syntax.is_explicit();
    while r.remaining() > 0 {
        let (tag, el) = r.element(explicit)?;
        elements.insert(tag, el);
    }

    let pixels = decode_pixels(&elements)?;
    Ok(DicomDataset::from_parts(syntax, elements, pixels))
}

fn uint(elements: &BTreeMap<Tag, Element>, tag: Tag) -> Option<i64> {
    match elements.get(&tag)?.decode() {
        Value::Ints(v) => v.first().copied(),
        _ => None,
    }
}

fn float(elements: &BTreeMap<Tag, Element>, tag: Tag) -> Option<f64> {
    match elements.get(&tag)?.decode() {
        Value::Floats(v) => v.first().copied(),
        _ => None,
    }
}

fn decode_pixels(elements: &BTreeMap<Tag, Element>) -> Result<Vec<f32>, DicomError> {
    let rows = uint(elements, tags::ROWS).ok_or(DicomError::NotAnImage(tags::ROWS))? as usize;
    let cols = uint(elements, tags::COLUMNS).ok_or(DicomError::NotAnImage(tags::COLUMNS))? as usize;
    let data = &elements
        .get(&tags::PIXEL_DATA)
        .ok_or(DicomError::NotAnImage(tags::PIXEL_DATA))?
        .value;

    if let Some(frames) = uint(elements, tags::NUMBER_OF_FRAMES) {
        if frames > 1 {
            return Err(DicomError::UnsupportedImage(format!("{frames} frames")));
        }
    }
    if let Some(spp) = uint(elements, tags::SAMPLES_PER_PIXEL) {
        if spp != 1 {
            return Err(DicomError::UnsupportedImage(format!("{spp} samples per pixel")));
        }
    }

    let count = rows * cols;
    let bits = match uint(elements, tags::BITS_ALLOCATED) {
        Some(b) => b as usize,
        // Infer from the payload when the attribute is absent.
        None if data.len() / 2 == count && count > 0 => 16,
        None => 8,
    };
    if bits != 8 && bits != 16 {
        return Err(DicomError::UnsupportedImage(format!("{bits} bits allocated")));
    }
    let stored = uint(elements, tags::BITS_STORED).unwrap_or(bits as i64).clamp(1, bits as i64) as u32;
    let signed = uint(elements, tags::PIXEL_REPRESENTATION).unwrap_or(0) == 1;

    let needed = count * bits / 8;
    if data.len() < needed || data.len() > needed + 1 {
        return Err(DicomError::Malformed {
            tag: tags::PIXEL_DATA,
            offset: 0,
            detail: format!(
                "pixel data holds {} bytes but Rows*Columns*BitsAllocated/8 = {needed}",
                data.len()
            ),
        });
    }

    let slope = float(elements, tags::RESCALE_SLOPE).unwrap_or(1.0);
    let intercept = float(elements, tags::RESCALE_INTERCEPT).unwrap_or(0.0);
    let mask: u32 = if stored >= 32 { u32::MAX } else { (1u32 << stored) - 1 };
    let extend = |raw: u32| -> f64 {
        let v = raw & mask;
        if signed && (v >> (stored - 1)) & 1 == 1 {
            v as f64 - (1u64 << stored) as f64
        } else {
            v as f64
        }
    };

    let pixels = if bits == 8 {
        data[..needed]
            .iter()
            .map(|&b| (extend(b as u32) * slope + intercept) as f32)
            .collect()
    } else {
        data[..needed]
            .chunks_exact(2)
            .map(|c| (extend(u16::from_le_bytes([c[0], c[1]]) as u32) * slope + intercept) as f32)
            .collect()
    };
    Ok(pixels)
}
