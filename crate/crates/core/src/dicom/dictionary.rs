use super::{Tag, Vr};

/// Attributes the pipeline knows how to interpret. Implicit-VR datasets take
/// their VR from here; anything else is read as `UN`.
pub(crate) const KNOWN: &[(Tag, Vr, &str)] = &[
    (Tag(0x0002, 0x0000), Vr::UL, "FileMetaInformationGroupLength"),
    (Tag(0x0002, 0x0001), Vr::OB, "FileMetaInformationVersion"),
    (Tag(0x0002, 0x0002), Vr::UI, "MediaStorageSOPClassUID"),
    (Tag(0x0002, 0x0003), Vr::UI, "MediaStorageSOPInstanceUID"),
    (Tag(0x0002, 0x0010), Vr::UI, "TransferSyntaxUID"),
    (Tag(0x0002, 0x0012), Vr::UI, "ImplementationClassUID"),
    (Tag(0x0002, 0x0013), Vr::SH, "ImplementationVersionName"),
    (Tag(0x0008, 0x0016), Vr::UI, "SOPClassUID"),
    (Tag(0x0008, 0x0018), Vr::UI, "SOPInstanceUID"),
    (Tag(0x0008, 0x0060), Vr::CS, "Modality"),
    (Tag(0x0008, 0x0070), Vr::LO, "Manufacturer"),
    (Tag(0x0008, 0x103E), Vr::LO, "SeriesDescription"),
    (Tag(0x0010, 0x0010), Vr::PN, "PatientName"),
    (Tag(0x0010, 0x0020), Vr::LO, "PatientID"),
    (Tag(0x0010, 0x0040), Vr::CS, "PatientSex"),
    (Tag(0x0010, 0x1010), Vr::AS, "PatientAge"),
    (Tag(0x0018, 0x0050), Vr::DS, "SliceThickness"),
    (Tag(0x0018, 0x0080), Vr::DS, "RepetitionTime"),
    (Tag(0x0018, 0x0081), Vr::DS, "EchoTime"),
    (Tag(0x0018, 0x0087), Vr::DS, "MagneticFieldStrength"),
    (Tag(0x0020, 0x000D), Vr::UI, "StudyInstanceUID"),
    (Tag(0x0020, 0x000E), Vr::UI, "SeriesInstanceUID"),
    (Tag(0x0020, 0x0013), Vr::IS, "InstanceNumber"),
    (Tag(0x0020, 0x0032), Vr::DS, "ImagePositionPatient"),
    (Tag(0x0020, 0x0037), Vr::DS, "ImageOrientationPatient"),
    (Tag(0x0028, 0x0002), Vr::US, "SamplesPerPixel"),
    (Tag(0x0028, 0x0004), Vr::CS, "PhotometricInterpretation"),
    (Tag(0x0028, 0x0008), Vr::IS, "NumberOfFrames"),
    (Tag(0x0028, 0x0010), Vr::US, "Rows"),
    (Tag(0x0028, 0x0011), Vr::US, "Columns"),
    (Tag(0x0028, 0x0030), Vr::DS, "PixelSpacing"),
    (Tag(0x0028, 0x0100), Vr::US, "BitsAllocated"),
    (Tag(0x0028, 0x0101), Vr::US, "BitsStored"),
    (Tag(0x0028, 0x0102), Vr::US, "HighBit"),
    (Tag(0x0028, 0x0103), Vr::US, "PixelRepresentation"),
    (Tag(0x0028, 0x1052), Vr::DS, "RescaleIntercept"),
    (Tag(0x0028, 0x1053), Vr::DS, "RescaleSlope"),
    (Tag(0x7FE0, 0x0010), Vr::OW, "PixelData"),
];

pub(crate) fn lookup(tag: Tag) -> Option<(Vr, &'static str)> {
    KNOWN
        .iter()
        .find(|(t, _, _)| *t == tag)
        .map(|(_, vr, name)| (*vr, *name))
}

pub mod tags {
    use super::Tag;

    pub const TRANSFER_SYNTAX_UID: Tag = Tag(0x0002, 0x0010);
    pub const MODALITY: Tag = Tag(0x0008, 0x0060);
    pub const SOP_CLASS_UID: Tag = Tag(0x0008, 0x0016);
    pub const SOP_INSTANCE_UID: Tag = Tag(0x0008, 0x0018);
    pub const MANUFACTURER: Tag = Tag(0x0008, 0x0070);
    pub const SERIES_DESCRIPTION: Tag = Tag(0x0008, 0x103E);
    pub const PATIENT_NAME: Tag = Tag(0x0010, 0x0010);
    pub const PATIENT_ID: Tag = Tag(0x0010, 0x0020);
    pub const PATIENT_SEX: Tag = Tag(0x0010, 0x0040);
    pub const PATIENT_AGE: Tag = Tag(0x0010, 0x1010);
    pub const SLICE_THICKNESS: Tag = Tag(0x0018, 0x0050);
    pub const REPETITION_TIME: Tag = Tag(0x0018, 0x0080);
    pub const ECHO_TIME: Tag = Tag(0x0018, 0x0081);
    pub const STUDY_INSTANCE_UID: Tag = Tag(0x0020, 0x000D);
    pub const SERIES_INSTANCE_UID: Tag = Tag(0x0020, 0x000E);
    pub const INSTANCE_NUMBER: Tag = Tag(0x0020, 0x0013);
    pub const IMAGE_POSITION_PATIENT: Tag = Tag(0x0020, 0x0032);
    pub const IMAGE_ORIENTATION_PATIENT: Tag = Tag(0x0020, 0x0037);
    pub const SAMPLES_PER_PIXEL: Tag = Tag(0x0028, 0x0002);
    pub const PHOTOMETRIC_INTERPRETATION: Tag = Tag(0x0028, 0x0004);
    pub const NUMBER_OF_FRAMES: Tag = Tag(0x0028, 0x0008);
    pub const ROWS: Tag = Tag(0x0028, 0x0010);
    pub const COLUMNS: Tag = Tag(0x0028, 0x0011);
    pub const PIXEL_SPACING: Tag = Tag(0x0028, 0x0030);
    pub const BITS_ALLOCATED: Tag = Tag(0x0028, 0x0100);
    pub const BITS_STORED: Tag = Tag(0x0028, 0x0101);
    pub const HIGH_BIT: Tag = Tag(0x0028, 0x0102);
    pub const PIXEL_REPRESENTATION: Tag = Tag(0x0028, 0x0103);
    pub const RESCALE_INTERCEPT: Tag = Tag(0x0028, 0x1052);
    pub const RESCALE_SLOPE: Tag = Tag(0x0028, 0x1053);
    pub const PIXEL_DATA: Tag = Tag(0x7FE0, 0x0010);

    pub const ITEM: Tag = Tag(0xFFFE, 0xE000);
    pub const ITEM_DELIMITATION: Tag = Tag(0xFFFE, 0xE00D);
    pub const SEQUENCE_DELIMITATION: Tag = Tag(0xFFFE, 0xE0DD);
}
