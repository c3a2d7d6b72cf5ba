//! Micro U-Net forward pass: conv + ReLU encoder with 2x max pooling,
//! nearest-neighbour upsampling with a 1x1 projection, cross-attention from
//! decoder tokens to the encoder skip tokens (added residually), skip
//! concatenation, and a sigmoid 1x1 head.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mask::Mask;
use super::SegmentError;
use crate::kernels::{conv2d_forward, cross_attention_forward, AttentionConfig, AttentionWeights, Kernels, Matrix, Tensor3};
use crate::volume::Grid2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MicroUNetConfig {
    pub depth: usize,
    pub base_channels: usize,
    pub heads: usize,
    pub key_dim: usize,
    pub value_dim: usize,
    pub patch_size: usize,
}

impl Default for MicroUNetConfig {
    fn default() -> Self {
        MicroUNetConfig {
            depth: 2,
            base_channels: 8,
            heads: 8,
            key_dim: 64,
            value_dim: 64,
            patch_size: 16,
        }
    }
}

impl MicroUNetConfig {
    pub fn channels(&self, level: usize) -> usize {
        self.base_channels << level
    }

    fn attention(&self, level: usize, tokens: usize) -> AttentionConfig {
        AttentionConfig {
            heads: self.heads,
            key_dim: self.key_dim,
            value_dim: self.value_dim,
            d_model: self.channels(level),
            query_len: tokens,
            kv_len: tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub kernels: Kernels,
    pub bias: Vec<f64>,
}

impl ConvLayer {
    fn zeros(k: usize, c: usize, size: usize) -> ConvLayer {
        ConvLayer {
            kernels: Kernels::zeros(k, c, size, size),
            bias: vec![0.0; k],
        }
    }

    fn random(k: usize, c: usize, size: usize, rng: &mut ChaCha8Rng) -> ConvLayer {
        let fan_in = (c * size * size) as f64;
        let m = Matrix::random(1, k * c * size * size, (6.0 / fan_in).sqrt(), rng);
        ConvLayer {
            kernels: Kernels::from_vec(k, c, size, size, m.data),
            bias: vec![0.0; k],
        }
    }

    fn apply(&self, x: &Tensor3, relu: bool) -> Result<Tensor3, SegmentError> {
        let pad = self.kernels.kh / 2;
        let mut y = conv2d_forward(x, &self.kernels, 1, pad)?;
        let plane = y.h * y.w;
        for (k, b) in self.bias.iter().enumerate() {
            for v in &mut y.data[k * plane..(k + 1) * plane] {
                *v += b;
                if relu && *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Ok(y)
    }
}

/// Weights per level, finest level first.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroUNetWeights {
    pub encoder: Vec<ConvLayer>,
    pub bottleneck: ConvLayer,
    pub up_projection: Vec<ConvLayer>,
    pub attention: Vec<AttentionWeights>,
    pub decoder: Vec<ConvLayer>,
    pub head: ConvLayer,
}

impl MicroUNetWeights {
    pub fn zeros(cfg: &MicroUNetConfig) -> MicroUNetWeights {
        Self::build(cfg, &mut |k, c, s| ConvLayer::zeros(k, c, s), &mut |a| AttentionWeights::zeros(a))
    }

    pub fn seeded(cfg: &MicroUNetConfig, seed: u64) -> MicroUNetWeights {
        let rng = std::cell::RefCell::new(ChaCha8Rng::seed_from_u64(seed));
        Self::build(
            cfg,
            &mut |k, c, s| ConvLayer::random(k, c, s, &mut rng.borrow_mut()),
            &mut |a| AttentionWeights::random(a, 1.0, &mut *rng.borrow_mut()),
        )
    }

    fn build(
        cfg: &MicroUNetConfig,
        conv: &mut dyn FnMut(usize, usize, usize) -> ConvLayer,
        attn: &mut dyn FnMut(&AttentionConfig) -> AttentionWeights,
    ) -> MicroUNetWeights {
        let d = cfg.depth;
        let encoder = (0..d)
            .map(|l| conv(cfg.channels(l), if l == 0 { 1 } else { cfg.channels(l - 1) }, 3))
            .collect();
        let bottleneck = conv(cfg.channels(d), cfg.channels(d - 1), 3);
        let up_projection = (0..d).map(|l| conv(cfg.channels(l), cfg.channels(l + 1), 1)).collect();
        // Token counts only matter for validation; weights depend on d_model.
        let attention = (0..d).map(|l| attn(&cfg.attention(l, 1))).collect();
        let decoder = (0..d).map(|l| conv(cfg.channels(l), 2 * cfg.channels(l), 3)).collect();
        let head = conv(1, cfg.channels(0), 1);
        MicroUNetWeights {
            encoder,
            bottleneck,
            up_projection,
            attention,
            decoder,
            head,
        }
    }
}

fn max_pool2(x: &Tensor3) -> Tensor3 {
    let (h, w) = (x.h / 2, x.w / 2);
    let mut out = Tensor3::zeros(x.c, h, w);
    for c in 0..x.c {
        for y in 0..h {
            for xx in 0..w {
                let m = x
                    .get(c, 2 * y, 2 * xx)
                    .max(x.get(c, 2 * y, 2 * xx + 1))
                    .max(x.get(c, 2 * y + 1, 2 * xx))
                    .max(x.get(c, 2 * y + 1, 2 * xx + 1));
                out.set(c, y, xx, m);
            }
        }
    }
    out
}

fn upsample2(x: &Tensor3) -> Tensor3 {
    let mut out = Tensor3::zeros(x.c, x.h * 2, x.w * 2);
    for c in 0..x.c {
        for y in 0..out.h {
            for xx in 0..out.w {
                out.set(c, y, xx, x.get(c, y / 2, xx / 2));
            }
        }
    }
    out
}

/// C x H x W to (H*W) x C tokens.
fn to_tokens(x: &Tensor3) -> Matrix {
    Matrix::from_fn(x.h * x.w, x.c, |t, c| x.data[c * x.h * x.w + t])
}

fn add_tokens(x: &mut Tensor3, t: &Matrix) {
    let plane = x.h * x.w;
    for c in 0..x.c {
        for p in 0..plane {
            x.data[c * plane + p] += t.get(p, c);
        }
    }
}

fn concat(a: &Tensor3, b: &Tensor3) -> Tensor3 {
    let mut data = a.data.clone();
    data.extend_from_slice(&b.data);
    Tensor3::from_vec(a.c + b.c, a.h, a.w, data)
}

pub fn micro_unet_forward(slice: &Grid2, w: &MicroUNetWeights, cfg: &MicroUNetConfig) -> Result<Mask, SegmentError> {
    if cfg.depth == 0 || cfg.base_channels == 0 {
        return Err(SegmentError::Config("depth and base_channels must be >= 1".into()));
    }
    let m = 1usize << cfg.depth;
    for (axis, n) in [("width", slice.width), ("height", slice.height)] {
        if n == 0 || n % m != 0 {
            let pad = (m - n % m) % m;
            return Err(SegmentError::Indivisible {
                axis,
                size: n,
                multiple: m,
                pad: if n == 0 { m } else { pad },
            });
        }
    }

    let mut x = Tensor3::from_vec(1, slice.height, slice.width, slice.data.iter().map(|&v| v as f64).collect());
    let mut skips = Vec::with_capacity(cfg.depth);
    for l in 0..cfg.depth {
        let e = w.encoder[l].apply(&x, true)?;
        x = max_pool2(&e);
        skips.push(e);
    }
    x = w.bottleneck.apply(&x, true)?;
    for l in (0..cfg.depth).rev() {
        let skip = &skips[l];
        let mut u = w.up_projection[l].apply(&upsample2(&x), false)?;
        let tokens = u.h * u.w;
        let acfg = cfg.attention(l, tokens);
        let att = cross_attention_forward(&to_tokens(&u), &to_tokens(skip), &w.attention[l], &acfg)?;
        add_tokens(&mut u, &att);
        x = w.decoder[l].apply(&concat(&u, skip), true)?;
    }
    let logits = w.head.apply(&x, false)?;
    let probs = logits.data.iter().map(|&z| (1.0 / (1.0 + (-z).exp())) as f32).collect();
    Ok(Mask::from_probabilities(slice.width, slice.height, probs))
}

/// Splits a slice into non-overlapping p x p patches, one flattened patch
/// per row in raster order.
pub fn patchify(slice: &Grid2, p: usize) -> Result<Matrix, SegmentError> {
    for (axis, n) in [("width", slice.width), ("height", slice.height)] {
        if p == 0 || n % p != 0 {
            return Err(SegmentError::Indivisible {
                axis,
                size: n,
                multiple: p.max(1),
                pad: if p == 0 { 0 } else { (p - n % p) % p },
            });
        }
    }
    let (pw, ph) = (slice.width / p, slice.height / p);
    Ok(Matrix::from_fn(pw * ph, p * p, |r, c| {
        let (px, py) = (r % pw, r / pw);
        let (dx, dy) = (c % p, c / p);
        slice.get(px * p + dx, py * p + dy) as f64
    }))
}
