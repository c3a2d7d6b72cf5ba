use spinescan::ensemble::ScanLabel;
use spinescan::metrics::{match_detections, SliceDetection};
use spinescan::orientation::{classify_orientation_statistical, classify_volume_geometric, verify_study, Plane};
use spinescan::phantom::{generate_phantom, random_spec, PhantomPlane, PhantomSpec};
use spinescan::pipeline::{process_scan, verify_scan, PipelineConfig, Stage};
use spinescan::preprocess::{quality_flags, QualityThresholds};

const PLANES: [(PhantomPlane, Plane); 3] = [
    (PhantomPlane::Sagittal, Plane::Sagittal),
    (PhantomPlane::Coronal, Plane::Coronal),
    (PhantomPlane::Axial, Plane::Axial),
];

#[test]
fn orientation_classifiers_agree_on_every_plane() {
    for seed in 0..6 {
        for (pp, plane) in PLANES {
            let (v, _) = generate_phantom(&PhantomSpec::sagittal(seed).with_plane(pp)).unwrap();
            assert_eq!(classify_volume_geometric(&v).unwrap().plane, plane, "seed {seed}");
            let stat = classify_orientation_statistical(&v);
            assert_eq!(stat.plane, plane, "seed {seed}: statistical {stat:?}");
            assert!(stat.confidence > 0.0);
        }
    }
}

#[test]
fn only_sagittal_scans_are_accepted() {
    for (pp, plane) in PLANES {
        let (v, _) = generate_phantom(&PhantomSpec::sagittal(1).with_plane(pp)).unwrap();
        let rec = verify_scan("x", &v);
        assert_eq!(rec.orientation.plane, plane);
        assert!(rec.is_t2);
        assert_eq!(rec.accepted, plane == Plane::Sagittal);
    }
}

#[test]
fn study_verification_finds_the_t2_sagittal_series() {
    let vols: Vec<_> = PLANES
        .iter()
        .map(|(pp, _)| generate_phantom(&PhantomSpec::sagittal(2).with_plane(*pp)).unwrap().0)
        .collect();
    let series: Vec<_> = vols.iter().map(|v| (v, classify_volume_geometric(v).unwrap())).collect();
    let report = verify_study(&series).unwrap();
    assert!(report.has_t2_sagittal);
    assert_eq!(report.accepted_sagittal(), vec![0]);
    assert!(verify_study(&[]).is_err());
}

#[test]
fn clean_phantoms_raise_no_quality_flags() {
    let t = QualityThresholds::default();
    for seed in 0..8 {
        let (v, _) = generate_phantom(&random_spec(seed, seed % 2 == 0)).unwrap();
        let q = quality_flags(&v, &t);
        assert!(!q.any(), "seed {seed}: {q:?}");
    }
}

#[test]
fn heavy_noise_is_flagged() {
    let mut spec = PhantomSpec::sagittal(3);
    spec.noise_sigma = 400.0;
    let (v, _) = generate_phantom(&spec).unwrap();
    assert!(quality_flags(&v, &QualityThresholds::default()).low_snr.flagged);
}

#[test]
fn lesion_free_scan_is_normal_with_no_detections() {
    let (v, _) = generate_phantom(&PhantomSpec::sagittal(4)).unwrap();
    let r = process_scan("clean", &v, &PipelineConfig::default(), Stage::Detect).unwrap();
    assert_eq!(r.classification.unwrap().classification.label, ScanLabel::Normal);
    assert!(r.detections.is_empty());
}

#[test]
fn single_lesion_is_found_and_labelled() {
    let mut spec = random_spec(5, true);
    spec.lesions.truncate(1);
    let (v, truth) = generate_phantom(&spec).unwrap();
    let r = process_scan("one", &v, &PipelineConfig::default(), Stage::Detect).unwrap();
    assert_eq!(r.classification.unwrap().classification.label, ScanLabel::Abnormal);
    let preds: Vec<SliceDetection> = r
        .detections
        .iter()
        .map(|d| SliceDetection {
            slice_index: d.slice_index,
            bbox: d.bbox,
            label: d.label(),
            score: d.score,
        })
        .collect();
    let m = match_detections(&preds, &truth.boxes(), 0.5);
    assert_eq!(m.counts.fn_, 0, "{:?}", m.counts);
    assert!(m.counts.tp > 0);
}

#[test]
fn stopping_early_leaves_later_stages_empty() {
    let (v, _) = generate_phantom(&random_spec(6, true)).unwrap();
    let cfg = PipelineConfig::default();
    let r = process_scan("s", &v, &cfg, Stage::Classify).unwrap();
    assert!(r.classification.is_some() && r.masks.is_none() && r.detections.is_empty());
    let r = process_scan("s", &v, &cfg, Stage::Verify).unwrap();
    assert!(r.quality.is_none() && r.classification.is_none());
}
