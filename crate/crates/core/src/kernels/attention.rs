//! Multi-head cross-attention without biases.
//!
//! Queries come from `q_in` (Lq x d_model), keys and values from `kv_in`
//! (Lkv x d_model). Per head h:
//!   Q_h = q_in W_Q[:, h], K_h = kv_in W_K[:, h], V_h = kv_in W_V[:, h]
//!   O_h = softmax(Q_h K_hᵀ / sqrt(key_dim)) V_h
//! and the output is concat_h(O_h) W_O.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use super::softmax::softmax_in_place;
use super::{shape_err, KernelError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttentionConfig {
    pub heads: usize,
    pub key_dim: usize,
    pub value_dim: usize,
    pub d_model: usize,
    pub query_len: usize,
    pub kv_len: usize,
}

impl AttentionConfig {
    /// 8 heads with 64-dimensional keys and values.
    pub fn standard(d_model: usize, query_len: usize, kv_len: usize) -> AttentionConfig {
        AttentionConfig {
            heads: 8,
            key_dim: 64,
            value_dim: 64,
            d_model,
            query_len,
            kv_len,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let fields = [
            ("heads", self.heads),
            ("key_dim", self.key_dim),
            ("value_dim", self.value_dim),
            ("d_model", self.d_model),
            ("query_len", self.query_len),
            ("kv_len", self.kv_len),
        ];
        for (name, v) in fields {
            if v == 0 {
                return Err(KernelError::Invalid(format!("attention {name} must be >= 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    /// d_model x (heads * key_dim)
    pub wq: Matrix,
    /// d_model x (heads * key_dim)
    pub wk: Matrix,
    /// d_model x (heads * value_dim)
    pub wv: Matrix,
    /// (heads * value_dim) x d_model
    pub wo: Matrix,
}

impl AttentionWeights {
    pub fn zeros(cfg: &AttentionConfig) -> AttentionWeights {
        let hk = cfg.heads * cfg.key_dim;
        let hv = cfg.heads * cfg.value_dim;
        AttentionWeights {
            wq: Matrix::zeros(cfg.d_model, hk),
            wk: Matrix::zeros(cfg.d_model, hk),
            wv: Matrix::zeros(cfg.d_model, hv),
            wo: Matrix::zeros(hv, cfg.d_model),
        }
    }

    /// Uniform entries scaled by 1/sqrt(fan_in) times `gain`.
    pub fn random<R: Rng + ?Sized>(cfg: &AttentionConfig, gain: f64, rng: &mut R) -> AttentionWeights {
        let hk = cfg.heads * cfg.key_dim;
        let hv = cfg.heads * cfg.value_dim;
        let s_in = gain / (cfg.d_model as f64).sqrt();
        let s_out = gain / (hv as f64).sqrt();
        AttentionWeights {
            wq: Matrix::random(cfg.d_model, hk, s_in, rng),
            wk: Matrix::random(cfg.d_model, hk, s_in, rng),
            wv: Matrix::random(cfg.d_model, hv, s_in, rng),
            wo: Matrix::random(hv, cfg.d_model, s_out, rng),
        }
    }

    pub fn validate(&self, cfg: &AttentionConfig) -> Result<(), KernelError> {
        let hk = cfg.heads * cfg.key_dim;
        let hv = cfg.heads * cfg.value_dim;
        let expect = [
            ("W_Q", &self.wq, (cfg.d_model, hk)),
            ("W_K", &self.wk, (cfg.d_model, hk)),
            ("W_V", &self.wv, (cfg.d_model, hv)),
            ("W_O", &self.wo, (hv, cfg.d_model)),
        ];
        for (name, m, shape) in expect {
            if m.shape() != shape {
                return Err(shape_err(
                    name,
                    format!("{}x{}", shape.0, shape.1),
                    format!("{}x{}", m.rows, m.cols),
                ));
            }
            if !m.is_finite() {
                return Err(KernelError::Invalid(format!("{name} has non-finite entries")));
            }
        }
        Ok(())
    }
}

/// Intermediate values of a forward pass, reused by the backward pass.
#[derive(Debug, Clone)]
pub struct AttentionCache {
    pub q: Matrix,
    pub k: Matrix,
    pub v: Matrix,
    /// Per-head attention probabilities, Lq x Lkv.
    pub attn: Vec<Matrix>,
    /// Concatenated head outputs before W_O, Lq x (heads * value_dim).
    pub concat: Matrix,
    pub output: Matrix,
}

#[derive(Debug, Clone)]
pub struct AttentionGrads {
    pub q_in: Matrix,
    pub kv_in: Matrix,
    pub wq: Matrix,
    pub wk: Matrix,
    pub wv: Matrix,
    pub wo: Matrix,
}

fn check_inputs(q_in: &Matrix, kv_in: &Matrix, w: &AttentionWeights, cfg: &AttentionConfig) -> Result<(), KernelError> {
    cfg.validate()?;
    if q_in.shape() != (cfg.query_len, cfg.d_model) {
        return Err(shape_err(
            "q_in (Lq x d_model)",
            format!("{}x{}", cfg.query_len, cfg.d_model),
            format!("{}x{}", q_in.rows, q_in.cols),
        ));
    }
    if kv_in.shape() != (cfg.kv_len, cfg.d_model) {
        return Err(shape_err(
            "kv_in (Lkv x d_model)",
            format!("{}x{}", cfg.kv_len, cfg.d_model),
            format!("{}x{}", kv_in.rows, kv_in.cols),
        ));
    }
    w.validate(cfg)
}

pub fn cross_attention_forward_cached(
    q_in: &Matrix,
    kv_in: &Matrix,
    w: &AttentionWeights,
    cfg: &AttentionConfig,
) -> Result<AttentionCache, KernelError> {
    check_inputs(q_in, kv_in, w, cfg)?;
    let q = q_in.matmul(&w.wq);
    let k = kv_in.matmul(&w.wk);
    let v = kv_in.matmul(&w.wv);
    let scale = 1.0 / (cfg.key_dim as f64).sqrt();
    let mut concat = Matrix::zeros(cfg.query_len, cfg.heads * cfg.value_dim);
    let mut attn = Vec::with_capacity(cfg.heads);
    for h in 0..cfg.heads {
        let qh = q.col_block(h * cfg.key_dim, cfg.key_dim);
        let kh = k.col_block(h * cfg.key_dim, cfg.key_dim);
        let vh = v.col_block(h * cfg.value_dim, cfg.value_dim);
        let mut a = qh.matmul_t(&kh);
        for r in 0..a.rows {
            let row = &mut a.data[r * a.cols..(r + 1) * a.cols];
            row.iter_mut().for_each(|s| *s *= scale);
            softmax_in_place(row);
        }
        concat.set_col_block(h * cfg.value_dim, &a.matmul(&vh));
        attn.push(a);
    }
    let output = concat.matmul(&w.wo);
    Ok(AttentionCache {
        q,
        k,
        v,
        attn,
        concat,
        output,
    })
}

pub fn cross_attention_forward(
    q_in: &Matrix,
    kv_in: &Matrix,
    w: &AttentionWeights,
    cfg: &AttentionConfig,
) -> Result<Matrix, KernelError> {
    Ok(cross_attention_forward_cached(q_in, kv_in, w, cfg)?.output)
}

/// Gradients of a scalar loss L given dL/d(output).
pub fn cross_attention_backward(
    q_in: &Matrix,
    kv_in: &Matrix,
    w: &AttentionWeights,
    cfg: &AttentionConfig,
    d_out: &Matrix,
) -> Result<AttentionGrads, KernelError> {
    let cache = cross_attention_forward_cached(q_in, kv_in, w, cfg)?;
    if d_out.shape() != cache.output.shape() {
        return Err(shape_err(
            "upstream gradient (Lq x d_model)",
            format!("{}x{}", cache.output.rows, cache.output.cols),
            format!("{}x{}", d_out.rows, d_out.cols),
        ));
    }
    let scale = 1.0 / (cfg.key_dim as f64).sqrt();
    let d_wo = cache.concat.t_matmul(d_out);
    let d_concat = d_out.matmul_t(&w.wo);

    let mut d_q = Matrix::zeros(cache.q.rows, cache.q.cols);
    let mut d_k = Matrix::zeros(cache.k.rows, cache.k.cols);
    let mut d_v = Matrix::zeros(cache.v.rows, cache.v.cols);
    for h in 0..cfg.heads {
        let qh = cache.q.col_block(h * cfg.key_dim, cfg.key_dim);
        let kh = cache.k.col_block(h * cfg.key_dim, cfg.key_dim);
        let vh = cache.v.col_block(h * cfg.value_dim, cfg.value_dim);
        let a = &cache.attn[h];
        let d_oh = d_concat.col_block(h * cfg.value_dim, cfg.value_dim);

        let d_a = d_oh.matmul_t(&vh);
        d_v.set_col_block(h * cfg.value_dim, &a.t_matmul(&d_oh));

        // Row-wise softmax Jacobian, then the 1/sqrt(dk) scale.
        let mut d_s = Matrix::zeros(a.rows, a.cols);
        for r in 0..a.rows {
            let ar = a.row(r);
            let gr = d_a.row(r);
            let dot: f64 = ar.iter().zip(gr).map(|(x, y)| x * y).sum();
            for c in 0..a.cols {
                d_s.set(r, c, ar[c] * (gr[c] - dot) * scale);
            }
        }
        d_q.set_col_block(h * cfg.key_dim, &d_s.matmul(&kh));
        d_k.set_col_block(h * cfg.key_dim, &d_s.t_matmul(&qh));
    }

    let d_wq = q_in.t_matmul(&d_q);
    let d_wk = kv_in.t_matmul(&d_k);
    let d_wv = kv_in.t_matmul(&d_v);
    let d_q_in = d_q.matmul_t(&w.wq);
    let mut d_kv_in = d_k.matmul_t(&w.wk);
    d_kv_in.add_assign(&d_v.matmul_t(&w.wv));

    Ok(AttentionGrads {
        q_in: d_q_in,
        kv_in: d_kv_in,
        wq: d_wq,
        wk: d_wk,
        wv: d_wv,
        wo: d_wo,
    })
}
