//! Order statistics over `f32` samples.

/// Percentile with linear interpolation between closest ranks
/// (rank = p/100 * (n-1)). `sorted` must be ascending and non-empty.
pub fn percentile_sorted(sorted: &[f32], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let rank = (p / 100.0).clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] as f64 + (sorted[hi] as f64 - sorted[lo] as f64) * frac
}

pub fn sorted_copy(values: &[f32]) -> Vec<f32> {
    let mut v = values.to_vec();
    v.sort_unstable_by(f32::total_cmp);
    v
}

pub fn median(values: &[f32]) -> Option<f64> {
    (!values.is_empty()).then(|| percentile_sorted(&sorted_copy(values), 50.0))
}

pub fn median_f64(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Median absolute deviation about the median.
pub fn mad(values: &[f32], center: f64) -> f64 {
    let dev: Vec<f64> = values.iter().map(|&x| (x as f64 - center).abs()).collect();
    median_f64(&dev).unwrap_or(0.0)
}

/// Scale factor turning a MAD into a Gaussian standard deviation estimate.
pub const MAD_TO_SIGMA: f64 = 1.4826;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v: Vec<f32> = (0..=100).map(|i| i as f32).collect();
        assert_eq!(percentile_sorted(&v, 50.0), 50.0);
        assert_eq!(percentile_sorted(&v, 1.0), 1.0);
        let w = [0.0f32, 10.0];
        assert_eq!(percentile_sorted(&w, 25.0), 2.5);
    }

    #[test]
    fn median_and_mad() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
        assert_eq!(mad(&[1.0, 2.0, 3.0, 4.0, 100.0], 3.0), 1.0);
    }
}
