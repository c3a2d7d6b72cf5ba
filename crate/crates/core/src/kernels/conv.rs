use super::{shape_err, KernelError};

/// C x H x W activations, row-major within each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(c: usize, h: usize, w: usize) -> Tensor3 {
        Tensor3 {
            c,
            h,
            w,
            data: vec![0.0; c * h * w],
        }
    }

    pub fn from_vec(c: usize, h: usize, w: usize, data: Vec<f64>) -> Tensor3 {
        assert_eq!(data.len(), c * h * w, "tensor data length");
        Tensor3 { c, h, w, data }
    }

    #[inline]
    pub fn idx(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.h + y) * self.w + x
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.idx(c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        let i = self.idx(c, y, x);
        self.data[i] = v;
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.h * self.w..(c + 1) * self.h * self.w]
    }
}

/// K x C x kh x kw filter bank.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernels {
    pub k: usize,
    pub c: usize,
    pub kh: usize,
    pub kw: usize,
    pub data: Vec<f64>,
}

impl Kernels {
    pub fn zeros(k: usize, c: usize, kh: usize, kw: usize) -> Kernels {
        Kernels {
            k,
            c,
            kh,
            kw,
            data: vec![0.0; k * c * kh * kw],
        }
    }

    pub fn from_vec(k: usize, c: usize, kh: usize, kw: usize, data: Vec<f64>) -> Kernels {
        assert_eq!(data.len(), k * c * kh * kw, "kernel data length");
        Kernels { k, c, kh, kw, data }
    }

    #[inline]
    pub fn get(&self, k: usize, c: usize, i: usize, j: usize) -> f64 {
        self.data[((k * self.c + c) * self.kh + i) * self.kw + j]
    }
}

/// Output extent for one axis: (n + 2p - k) / s + 1.
pub fn conv_output_len(n: usize, k: usize, stride: usize, padding: usize) -> Option<usize> {
    let padded = n + 2 * padding;
    (padded >= k && stride > 0).then(|| (padded - k) / stride + 1)
}

/// Cross-correlation with zero padding.
pub fn conv2d_forward(input: &Tensor3, kernels: &Kernels, stride: usize, padding: usize) -> Result<Tensor3, KernelError> {
    if kernels.kh % 2 == 0 || kernels.kw % 2 == 0 {
        return Err(KernelError::Invalid(format!(
            "kernel size {}x{} must be odd",
            kernels.kh, kernels.kw
        )));
    }
    if kernels.c != input.c {
        return Err(shape_err("kernel input channels", input.c, kernels.c));
    }
    if stride == 0 {
        return Err(KernelError::Invalid("stride must be >= 1".into()));
    }
    let oh = conv_output_len(input.h, kernels.kh, stride, padding)
        .ok_or_else(|| shape_err("input height (with padding)", format!(">= {}", kernels.kh), input.h))?;
    let ow = conv_output_len(input.w, kernels.kw, stride, padding)
        .ok_or_else(|| shape_err("input width (with padding)", format!(">= {}", kernels.kw), input.w))?;
    let mut out = Tensor3::zeros(kernels.k, oh, ow);
    let p = padding as i64;
    for k in 0..kernels.k {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = 0.0;
                for c in 0..input.c {
                    for i in 0..kernels.kh {
                        let y = (oy * stride + i) as i64 - p;
                        if y < 0 || y >= input.h as i64 {
                            continue;
                        }
                        for j in 0..kernels.kw {
                            let x = (ox * stride + j) as i64 - p;
                            if x < 0 || x >= input.w as i64 {
                                continue;
                            }
                            acc += kernels.get(k, c, i, j) * input.get(c, y as usize, x as usize);
                        }
                    }
                }
                out.set(k, oy, ox, acc);
            }
        }
    }
    Ok(out)
}
