use serde::{Deserialize, Serialize};
use std::fmt;

/// The 43 pathology names, codes 0..=42 in reading order of the source
/// table (row by row, left to right).
pub const PATHOLOGY_NAMES: [&str; 43] = [
    "Loss of cervical lordosis",
    "Pseudodisc bulge",
    "Tarlov\u{2019}s cyst",
    "Degenerative changes",
    "Spinal cord edema / contusion",
    "Spondylitis",
    "Disc dehydration",
    "Spinal cord hematoma",
    "Type I Modic changes",
    "Reduction in vertebral height",
    "Myelopathy",
    "Type II Modic changes",
    "Disc bulge",
    "Pleural effusion",
    "Type III Modic changes",
    "Nerve root compression",
    "Disc herniation",
    "Pancreatic cyst",
    "Nerve root impingement",
    "Wedge compression fracture",
    "Facetal arthropathy",
    "Mild cervical canal stenosis",
    "Schmorl\u{2019}s node",
    "Atypical hemangioma",
    "Moderate cervical canal stenosis",
    "Sacralization",
    "Typical hemangioma",
    "Severe cervical canal stenosis",
    "Lumbarization",
    "Kyphoscoliosis",
    "Uncovertebral hypertrophy",
    "Scoliosis",
    "Spondylodiscitis",
    "Hypertrophied Ligamentum flavum",
    "Hemivertebra",
    "Antherolisthesis",
    "Disc protrusion",
    "Facetal joint synovial cyst",
    "Retrolisthesis",
    "Annular tear",
    "Psoas abscess",
    "Burst fracture",
    "Comminuted fracture with retrolisthesis",
];

pub const NUM_PATHOLOGIES: usize = PATHOLOGY_NAMES.len();

/// One of the 43 pathology labels, identified by its stable code.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PathologyLabel(u8);

impl PathologyLabel {
    pub const DISC_BULGE: PathologyLabel = PathologyLabel(12);
    pub const TYPICAL_HEMANGIOMA: PathologyLabel = PathologyLabel(26);
    pub const BURST_FRACTURE: PathologyLabel = PathologyLabel(41);

    pub fn from_code(code: usize) -> Option<PathologyLabel> {
        (code < NUM_PATHOLOGIES).then_some(PathologyLabel(code as u8))
    }

    /// Exact match, also accepting an ASCII apostrophe for the typographic one.
    pub fn from_name(name: &str) -> Option<PathologyLabel> {
        let norm = name.replace('\'', "\u{2019}");
        PATHOLOGY_NAMES.iter().position(|n| *n == norm).map(|i| PathologyLabel(i as u8))
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        PATHOLOGY_NAMES[self.0 as usize]
    }

    /// Index into a 44-way logit vector (0 is background).
    pub fn class_index(self) -> usize {
        self.0 as usize + 1
    }

    pub fn all() -> impl Iterator<Item = PathologyLabel> {
        (0..NUM_PATHOLOGIES as u8).map(PathologyLabel)
    }
}

impl fmt::Debug for PathologyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.0, self.name())
    }
}

impl fmt::Display for PathologyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl TryFrom<u8> for PathologyLabel {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        PathologyLabel::from_code(v as usize).ok_or_else(|| format!("pathology code {v} out of range 0..=42"))
    }
}

impl From<PathologyLabel> for u8 {
    fn from(l: PathologyLabel) -> u8 {
        l.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn vocabulary() {
        assert_eq!(NUM_PATHOLOGIES, 43);
        assert_eq!(PATHOLOGY_NAMES.iter().collect::<HashSet<_>>().len(), 43);
        assert_eq!(PathologyLabel::DISC_BULGE.name(), "Disc bulge");
        assert_eq!(PathologyLabel::TYPICAL_HEMANGIOMA.name(), "Typical hemangioma");
        assert_eq!(PathologyLabel::BURST_FRACTURE.name(), "Burst fracture");
        assert_eq!(PathologyLabel::from_name("Tarlov's cyst").unwrap().code(), 2);
        assert_eq!(PathologyLabel::from_code(43), None);
        assert_eq!(PathologyLabel::from_code(0).unwrap().class_index(), 1);
    }
}
