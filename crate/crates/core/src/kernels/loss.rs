use serde::{Deserialize, Serialize};

use super::{shape_err, KernelError};

pub const BCE_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub dice_weight: f64,
    pub bce_weight: f64,
    pub smooth_l1_beta: f64,
    pub dice_epsilon: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            dice_weight: 0.6,
            bce_weight: 0.4,
            smooth_l1_beta: 1.0,
            dice_epsilon: 1e-6,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<(), KernelError> {
        if self.dice_weight < 0.0 || self.bce_weight < 0.0 || (self.dice_weight + self.bce_weight - 1.0).abs() > 1e-9 {
            return Err(KernelError::Invalid(format!(
                "dice_weight + bce_weight must equal 1 (got {} + {})",
                self.dice_weight, self.bce_weight
            )));
        }
        if !(self.smooth_l1_beta > 0.0) || !(self.dice_epsilon >= 0.0) {
            return Err(KernelError::Invalid("smooth_l1_beta must be > 0 and dice_epsilon >= 0".into()));
        }
        Ok(())
    }
}

fn check_pair(name: &str, a: &[f64], b: &[f64]) -> Result<(), KernelError> {
    if a.len() != b.len() {
        return Err(shape_err(format!("{name} target length"), a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(KernelError::Empty("loss input"));
    }
    Ok(())
}

pub fn smooth_l1(pred: &[f64], target: &[f64], beta: f64) -> Result<f64, KernelError> {
    check_pair("smooth_l1", pred, target)?;
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = (p - t).abs();
            if d < beta {
                0.5 * d * d / beta
            } else {
                d - 0.5 * beta
            }
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

/// d smooth_l1 / d pred.
pub fn smooth_l1_grad(pred: &[f64], target: &[f64], beta: f64) -> Result<Vec<f64>, KernelError> {
    check_pair("smooth_l1", pred, target)?;
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let d = p - t;
            let g = if d.abs() < beta { d / beta } else { d.signum() };
            g / n
        })
        .collect())
}

/// 1 - (2 Σ p t + eps) / (Σ p + Σ t + eps)
pub fn dice_loss(pred: &[f64], target: &[f64], eps: f64) -> Result<f64, KernelError> {
    check_pair("dice", pred, target)?;
    let (i, s) = dice_sums(pred, target);
    Ok(1.0 - (2.0 * i + eps) / (s + eps))
}

fn dice_sums(pred: &[f64], target: &[f64]) -> (f64, f64) {
    let mut inter = 0.0;
    let mut sum = 0.0;
    for (p, t) in pred.iter().zip(target) {
        inter += p * t;
        sum += p + t;
    }
    (inter, sum)
}

pub fn dice_grad(pred: &[f64], target: &[f64], eps: f64) -> Result<Vec<f64>, KernelError> {
    check_pair("dice", pred, target)?;
    let (i, s) = dice_sums(pred, target);
    let num = 2.0 * i + eps;
    let den = s + eps;
    Ok(target.iter().map(|t| -(2.0 * t * den - num) / (den * den)).collect())
}

/// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
pub fn bce_loss(pred: &[f64], target: &[f64]) -> Result<f64, KernelError> {
    check_pair("bce", pred, target)?;
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let p = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Gradient of [`bce_loss`]; zero where the clamp is active.
pub fn bce_grad(pred: &[f64], target: &[f64]) -> Result<Vec<f64>, KernelError> {
    check_pair("bce", pred, target)?;
    let n = pred.len() as f64;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(&p, t)| {
            if !(BCE_CLAMP..=1.0 - BCE_CLAMP).contains(&p) {
                0.0
            } else {
                (-t / p + (1.0 - t) / (1.0 - p)) / n
            }
        })
        .collect())
}

pub fn combined_seg_loss(pred: &[f64], target: &[f64], w: &LossWeights) -> Result<f64, KernelError> {
    Ok(w.dice_weight * dice_loss(pred, target, w.dice_epsilon)? + w.bce_weight * bce_loss(pred, target)?)
}

pub fn combined_seg_loss_grad(pred: &[f64], target: &[f64], w: &LossWeights) -> Result<Vec<f64>, KernelError> {
    let d = dice_grad(pred, target, w.dice_epsilon)?;
    let b = bce_grad(pred, target)?;
    Ok(d.iter().zip(&b).map(|(d, b)| w.dice_weight * d + w.bce_weight * b).collect())
}
