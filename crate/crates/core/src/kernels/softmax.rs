use super::KernelError;

/// Softmax with max-subtraction.
pub fn softmax(x: &[f64]) -> Result<Vec<f64>, KernelError> {
    if x.is_empty() {
        return Err(KernelError::Empty("softmax input"));
    }
    let mut out = x.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

pub(crate) fn softmax_in_place(x: &mut [f64]) {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in x.iter_mut() {
        *v = (*v - m).exp();
        sum += *v;
    }
    for v in x.iter_mut() {
        *v /= sum;
    }
}

/// Vector-Jacobian product: given y = softmax(x) and dL/dy, returns dL/dx.
pub fn softmax_backward(y: &[f64], dy: &[f64]) -> Result<Vec<f64>, KernelError> {
    if y.len() != dy.len() {
        return Err(super::shape_err("softmax upstream gradient", y.len(), dy.len()));
    }
    let dot: f64 = y.iter().zip(dy).map(|(a, b)| a * b).sum();
    Ok(y.iter().zip(dy).map(|(yi, gi)| yi * (gi - dot)).collect())
}
