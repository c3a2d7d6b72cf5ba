mod common;

use common::*;
use proptest::prelude::*;
use spinescan::kernels::{
    bce_grad, bce_loss, cross_attention_backward, cross_attention_forward, dice_grad, dice_loss, smooth_l1, smooth_l1_grad,
    softmax, softmax_backward, AttentionConfig, AttentionWeights, Matrix,
};

fn fd_all(x: &[f64], loss: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            central_difference(
                |v| {
                    let mut p = x.to_vec();
                    p[i] = v;
                    loss(&p)
                },
                x[i],
                FD_STEP,
            )
        })
        .collect()
}

#[test]
fn single_key_attention_has_no_key_gradient() {
    // With one key the softmax is identically 1, so W_K cannot affect the output.
    let mut r = rng(3);
    let cfg = AttentionConfig::standard(8, 2, 1);
    let w = AttentionWeights::random(&cfg, 1.0, &mut r);
    let q = Matrix::random(2, 8, 1.0, &mut r);
    let kv = Matrix::random(1, 8, 1.0, &mut r);
    let g = Matrix::random(2, 8, 1.0, &mut r);
    let grads = cross_attention_backward(&q, &kv, &w, &cfg, &g).unwrap();
    assert!(grads.wk.data.iter().all(|x| x.abs() < 1e-12));
    assert!(grads.wq.data.iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn attention_rejects_mismatched_shapes() {
    let mut r = rng(4);
    let cfg = AttentionConfig::standard(8, 2, 3);
    let w = AttentionWeights::random(&cfg, 1.0, &mut r);
    let q = Matrix::random(2, 8, 1.0, &mut r);
    let kv = Matrix::random(2, 8, 1.0, &mut r);
    assert!(cross_attention_forward(&q, &kv, &w, &cfg).is_err());
}

#[test]
fn dice_gradient_with_empty_target() {
    let pred = [0.2, 0.7, 0.4];
    let target = [0.0; 3];
    let g = dice_grad(&pred, &target, 1e-6).unwrap();
    let n = fd_all(&pred, |p| dice_loss(p, &target, 1e-6).unwrap());
    for (a, b) in g.iter().zip(&n) {
        assert!(grad_close(*a, *b), "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn softmax_is_a_shift_invariant_distribution(x in proptest::collection::vec(-30.0f64..30.0, 1..32), c in -100.0f64..100.0) {
        let y = softmax(&x).unwrap();
        prop_assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(y.iter().all(|v| *v >= 0.0));
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        for (a, b) in y.iter().zip(softmax(&shifted).unwrap()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_backward_matches_differences(x in proptest::collection::vec(-5.0f64..5.0, 1..16), seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let g: Vec<f64> = x.iter().map(|_| r.random_range(-1.0..1.0)).collect();
        let dx = softmax_backward(&softmax(&x).unwrap(), &g).unwrap();
        let n = fd_all(&x, |v| softmax(v).unwrap().iter().zip(&g).map(|(a, b)| a * b).sum());
        for (a, b) in dx.iter().zip(&n) {
            prop_assert!(grad_close(*a, *b), "{} vs {}", a, b);
        }
        prop_assert!(dx.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn smooth_l1_gradient_away_from_knee(d in proptest::collection::vec(-4.0f64..4.0, 1..16), beta in 0.2f64..2.0) {
        prop_assume!(d.iter().all(|v| (v.abs() - beta).abs() > 1e-3));
        let target = vec![0.5; d.len()];
        let pred: Vec<f64> = d.iter().map(|v| v + 0.5).collect();
        let g = smooth_l1_grad(&pred, &target, beta).unwrap();
        let n = fd_all(&pred, |p| smooth_l1(p, &target, beta).unwrap());
        for (a, b) in g.iter().zip(&n) {
            prop_assert!(grad_close(*a, *b), "{} vs {}", a, b);
        }
    }

    #[test]
    fn bce_gradient(pairs in proptest::collection::vec((0.05f64..0.95, 0.0f64..1.0), 1..16)) {
        let (pred, target): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let g = bce_grad(&pred, &target).unwrap();
        let n = fd_all(&pred, |p| bce_loss(p, &target).unwrap());
        for (a, b) in g.iter().zip(&n) {
            prop_assert!(grad_close(*a, *b), "{} vs {}", a, b);
        }
    }

    #[test]
    fn losses_are_bounded(pairs in proptest::collection::vec((0.0f64..1.0, 0u8..2), 1..32)) {
        let (pred, target): (Vec<f64>, Vec<f64>) = pairs.into_iter().map(|(p, t)| (p, t as f64)).unzip();
        let d = dice_loss(&pred, &target, 1e-6).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(bce_loss(&pred, &target).unwrap() >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn attention_input_gradients(seed in any::<u64>(), d in 4usize..12, lq in 1usize..4, lk in 1usize..4, gain in 0.2f64..2.0) {
        let mut r = rng(seed);
        let cfg = AttentionConfig::standard(d, lq, lk);
        let w = AttentionWeights::random(&cfg, gain, &mut r);
        let q = Matrix::random(lq, d, 1.0, &mut r);
        let kv = Matrix::random(lk, d, 1.0, &mut r);
        let g = Matrix::random(lq, d, 1.0, &mut r);
        let loss = |q: &Matrix, kv: &Matrix| -> f64 {
            let o = cross_attention_forward(q, kv, &w, &cfg).unwrap();
            o.data.iter().zip(&g.data).map(|(a, b)| a * b).sum()
        };
        let grads = cross_attention_backward(&q, &kv, &w, &cfg, &g).unwrap();
        let nq = fd_all(&q.data, |x| loss(&Matrix { data: x.to_vec(), ..q.clone() }, &kv));
        let nk = fd_all(&kv.data, |x| loss(&q, &Matrix { data: x.to_vec(), ..kv.clone() }));
        for (a, b) in grads.q_in.data.iter().zip(&nq).chain(grads.kv_in.data.iter().zip(&nk)) {
            prop_assert!(grad_close(*a, *b), "{} vs {}", a, b);
        }
    }
}
