use super::MetricsError;

fn check(scores: &[f64], labels: &[bool]) -> Result<(), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::NonFinite(i));
    }
    Ok(())
}

/// Indices sorted by descending score.
fn descending(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// P(s+ > s-) + P(s+ = s-)/2, computed by sweeping tie groups in
/// descending score order. Counts are integral until the final division,
/// so the result matches the pairwise definition exactly.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    check(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::Undefined("ROC-AUC"));
    }
    let idx = descending(scores);
    // Twice the (wins + ties/2) count keeps everything in integers.
    let mut twice = 0u128;
    let mut pos_above = 0u64;
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        let (mut gp, mut gn) = (0u64, 0u64);
        while i < idx.len() && scores[idx[i]] == s {
            if labels[idx[i]] {
                gp += 1;
            } else {
                gn += 1;
            }
            i += 1;
        }
        twice += 2 * gn as u128 * pos_above as u128 + gn as u128 * gp as u128;
        pos_above += gp;
    }
    Ok(twice as f64 / (2 * pos as u128 * neg as u128) as f64)
}

/// Step-wise average precision Σ (R_i − R_{i−1}) P_i, with one threshold
/// per distinct score.
pub fn pr_auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    check(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 {
        return Err(MetricsError::Undefined("PR-AUC"));
    }
    let idx = descending(scores);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let s = scores[idx[i]];
        while i < idx.len() && scores[idx[i]] == s {
            if labels[idx[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}
