mod common;

use common::*;
use proptest::prelude::*;
use spinescan::metrics::{age_bucket, binary_metrics, manufacturer_group, pr_auc, roc_auc, wilson_ci, ConfusionMatrix};

/// Average precision by brute force: for every distinct threshold, the
/// positives sitting exactly at it times the precision of the set >= it.
fn oracle_pr_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    thresholds
        .iter()
        .map(|&t| {
            let at = scores.iter().zip(labels).filter(|(s, l)| **s == t && **l).count() as f64;
            let above: Vec<bool> = scores.iter().zip(labels).filter(|(s, _)| **s >= t).map(|(_, l)| *l).collect();
            let precision = above.iter().filter(|&&l| l).count() as f64 / above.len() as f64;
            at / pos * precision
        })
        .sum()
}

/// Wilson bounds as the roots of |k/n - p| = z sqrt(p(1-p)/n), by bisection.
fn oracle_wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    let phat = k as f64 / n as f64;
    let f = |p: f64| (phat - p).powi(2) - z * z * p * (1.0 - p) / n as f64;
    let root = |mut a: f64, mut b: f64| {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (f(a) > 0.0) == (f(m) > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let lo = if k == 0 { 0.0 } else { root(0.0, phat) };
    let hi = if k == n { 1.0 } else { root(phat, 1.0) };
    (lo, hi)
}

fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    proptest::collection::vec((0u8..8, any::<bool>()), 2..120).prop_map(|v| {
        let s: Vec<f64> = v.iter().map(|(s, _)| *s as f64 / 8.0).collect();
        let mut l: Vec<bool> = v.iter().map(|(_, l)| *l).collect();
        // Guarantee both classes.
        l[0] = true;
        l[1] = false;
        (s, l)
    })
}

#[test]
fn auc_needs_both_classes() {
    assert!(roc_auc(&[0.1, 0.2], &[false, false]).is_err());
    assert!(pr_auc(&[0.1, 0.2], &[false, false]).is_err());
    assert!(roc_auc(&[0.1], &[true, false]).is_err());
}

#[test]
fn wilson_extremes() {
    assert_eq!(wilson_ci(0, 10, 1.96).unwrap().0, 0.0);
    assert_eq!(wilson_ci(10, 10, 1.96).unwrap().1, 1.0);
    assert!(wilson_ci(11, 10, 1.96).is_err());
    assert!(wilson_ci(0, 0, 1.96).is_err());
}

#[test]
fn undefined_rates_are_absent() {
    let m = binary_metrics(&ConfusionMatrix::new(0, 0, 0, 7));
    assert_eq!(m.precision, None);
    assert_eq!(m.recall, None);
    assert_eq!(m.specificity, Some(1.0));
    assert_eq!(m.accuracy, Some(1.0));
}

#[test]
fn grouping_boundaries() {
    assert_eq!(age_bucket(Some(17.9)), "Under 18");
    assert_eq!(age_bucket(Some(18.0)), "18–40");
    assert_eq!(age_bucket(Some(75.5)), "61–75");
    assert_eq!(age_bucket(Some(76.0)), "Over 75");
    assert_eq!(manufacturer_group(Some("GE MEDICAL SYSTEMS")), "GE Healthcare");
    assert_eq!(manufacturer_group(Some("Philips Medical Systems")), "Philips Healthcare");
    assert_eq!(manufacturer_group(Some("Canon")), "Other Manufacturers");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roc_auc_matches_pairwise_count((s, l) in scored()) {
        prop_assert_eq!(roc_auc(&s, &l).unwrap(), oracle_roc_auc(&s, &l));
    }

    #[test]
    fn roc_auc_flips_with_scores((s, l) in scored()) {
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((roc_auc(&s, &l).unwrap() + roc_auc(&neg, &l).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pr_auc_matches_threshold_sweep((s, l) in scored()) {
        let got = pr_auc(&s, &l).unwrap();
        prop_assert!((got - oracle_pr_auc(&s, &l)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn wilson_matches_root_finding(n in 1u64..2000, frac in 0.0f64..=1.0, z in 0.5f64..3.5) {
        let k = (frac * n as f64).round() as u64;
        let (lo, hi) = wilson_ci(k, n, z).unwrap();
        let (olo, ohi) = oracle_wilson(k, n, z);
        prop_assert!((lo - olo).abs() < 1e-9 && (hi - ohi).abs() < 1e-9, "({}, {}) vs ({}, {})", lo, hi, olo, ohi);
        let p = k as f64 / n as f64;
        prop_assert!(lo <= p + 1e-15 && p <= hi + 1e-15);
    }

    #[test]
    fn rates_match_definitions(tp in 0u64..500, fp in 0u64..500, fn_ in 0u64..500, tn in 0u64..500) {
        let m = binary_metrics(&ConfusionMatrix::new(tp, fp, fn_, tn));
        let frac = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
        prop_assert_eq!(m.accuracy, frac(tp + tn, tp + fp + fn_ + tn));
        prop_assert_eq!(m.precision, frac(tp, tp + fp));
        prop_assert_eq!(m.recall, frac(tp, tp + fn_));
        prop_assert_eq!(m.specificity, frac(tn, tn + fp));
        prop_assert_eq!(m.npv, frac(tn, tn + fn_));
    }
}
