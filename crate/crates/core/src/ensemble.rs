//! Normal/abnormal triage: pluggable scorers combined by majority vote,
//! with the weighted mean probability breaking exact ties.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::volume::Volume;

/// Produces p(abnormal) in [0, 1] for a volume. Must be deterministic.
pub trait AbnormalityScorer: Send + Sync {
    fn id(&self) -> &str;
    fn score(&self, v: &Volume) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScanLabel {
    Normal,
    Abnormal,
}

impl ScanLabel {
    pub fn is_abnormal(self) -> bool {
        self == ScanLabel::Abnormal
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("ensemble needs at least one member")]
    NoMembers,
    #[error("{probs} member probabilities but {weights} weights")]
    CountMismatch { probs: usize, weights: usize },
    #[error("member {index} probability {value} is outside [0, 1]")]
    Probability { index: usize, value: f64 },
    #[error("weights must be nonnegative, finite and not all zero")]
    Weights,
    #[error("validation set is empty")]
    EmptyValidation,
    #[error("validation record {index} has {got} member probabilities, expected {expected}")]
    RaggedValidation { index: usize, expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub members: Vec<String>,
    /// Unnormalized; normalized to sum 1 at use.
    pub weights: Vec<f64>,
    pub decision_threshold: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            members: vec!["outlier-k4.0".into(), "outlier-k4.5".into(), "outlier-k5.0".into()],
            weights: vec![1.0, 1.0, 1.0],
            decision_threshold: 0.5,
        }
    }
}

impl EnsembleConfig {
    pub fn uniform(n: usize) -> EnsembleConfig {
        EnsembleConfig {
            members: (0..n).map(|i| format!("member-{i}")).collect(),
            weights: vec![1.0; n],
            decision_threshold: 0.5,
        }
    }

    pub fn normalized_weights(&self) -> Result<Vec<f64>, EnsembleError> {
        normalize(&self.weights)
    }
}

fn normalize(w: &[f64]) -> Result<Vec<f64>, EnsembleError> {
    if w.is_empty() {
        return Err(EnsembleError::NoMembers);
    }
    if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(EnsembleError::Weights);
    }
    let sum: f64 = w.iter().sum();
    if sum <= 0.0 {
        return Err(EnsembleError::Weights);
    }
    Ok(w.iter().map(|x| x / sum).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: ScanLabel,
    pub weighted_probability: f64,
    pub member_probabilities: Vec<f64>,
    pub votes_abnormal: usize,
    pub votes_normal: usize,
}

/// Weights proportional to each member's accuracy at threshold 0.5 over
/// `(member probabilities, truly abnormal)` records. All-zero accuracy gives
/// uniform weights.
pub fn fit_weights(validation: &[(Vec<f64>, bool)]) -> Result<Vec<f64>, EnsembleError> {
    let (first, _) = validation.first().ok_or(EnsembleError::EmptyValidation)?;
    let m = first.len();
    if m == 0 {
        return Err(EnsembleError::NoMembers);
    }
    let mut correct = vec![0usize; m];
    for (index, (probs, truth)) in validation.iter().enumerate() {
        if probs.len() != m {
            return Err(EnsembleError::RaggedValidation {
                index,
                expected: m,
                got: probs.len(),
            });
        }
        for (c, p) in correct.iter_mut().zip(probs) {
            if (*p >= 0.5) == *truth {
                *c += 1;
            }
        }
    }
    let acc: Vec<f64> = correct.iter().map(|&c| c as f64 / validation.len() as f64).collect();
    if acc.iter().all(|&a| a == 0.0) {
        return Ok(vec![1.0 / m as f64; m]);
    }
    normalize(&acc)
}

pub fn ensemble_classify(probs: &[f64], cfg: &EnsembleConfig) -> Result<Classification, EnsembleError> {
    if probs.len() != cfg.weights.len() {
        return Err(EnsembleError::CountMismatch {
            probs: probs.len(),
            weights: cfg.weights.len(),
        });
    }
    let w = cfg.normalized_weights()?;
    for (index, &value) in probs.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(EnsembleError::Probability { index, value });
        }
    }
    let weighted: f64 = probs.iter().zip(&w).map(|(p, w)| p * w).sum();
    let votes_abnormal = probs.iter().filter(|&&p| p >= 0.5).count();
    let votes_normal = probs.len() - votes_abnormal;
    let abnormal = match votes_abnormal.cmp(&votes_normal) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => weighted >= cfg.decision_threshold,
    };
    Ok(Classification {
        label: if abnormal { ScanLabel::Abnormal } else { ScanLabel::Normal },
        weighted_probability: weighted,
        member_probabilities: probs.to_vec(),
        votes_abnormal,
        votes_normal,
    })
}

/// Scores `v` with every member and combines the results.
pub fn classify_volume(
    v: &Volume,
    members: &[&dyn AbnormalityScorer],
    cfg: &EnsembleConfig,
) -> Result<Classification, EnsembleError> {
    let probs: Vec<f64> = members.iter().map(|m| m.score(v)).collect();
    ensemble_classify(&probs, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decision_rule() {
        let u = EnsembleConfig::uniform(3);
        let c = ensemble_classify(&[0.9, 0.8, 0.7], &u).unwrap();
        assert_eq!(c.label, ScanLabel::Abnormal);
        assert!((c.weighted_probability - 0.8).abs() < 1e-12);
        let c = ensemble_classify(&[0.6, 0.6, 0.1], &u).unwrap();
        assert_eq!(c.label, ScanLabel::Abnormal);
        assert!((c.weighted_probability - 1.3 / 3.0).abs() < 1e-12);
        let c = ensemble_classify(&[0.9, 0.1], &EnsembleConfig::uniform(2)).unwrap();
        assert_eq!((c.votes_abnormal, c.votes_normal), (1, 1));
        assert_eq!(c.label, ScanLabel::Abnormal);
        assert!(matches!(
            ensemble_classify(&[0.5], &u),
            Err(EnsembleError::CountMismatch { probs: 1, weights: 3 })
        ));
    }

    #[test]
    fn weights_from_accuracy() {
        // Member 0 correct on 4/5, member 1 on 2/5.
        let val = vec![
            (vec![0.9, 0.9], true),
            (vec![0.8, 0.2], true),
            (vec![0.1, 0.9], false),
            (vec![0.2, 0.1], true),
            (vec![0.3, 0.4], false),
        ];
        let w = fit_weights(&val).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12 && (w[1] - 1.0 / 3.0).abs() < 1e-12);
        let all_wrong = vec![(vec![0.9, 0.8], false)];
        assert_eq!(fit_weights(&all_wrong).unwrap(), vec![0.5, 0.5]);
        assert_eq!(fit_weights(&[]), Err(EnsembleError::EmptyValidation));
    }
}
