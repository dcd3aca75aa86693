//! The complete finite-difference sweep: every differentiable graph op,
//! probed at >=100 random coordinates each. Callable from any test target.

use mcd_core::autodiff::nn::{
    lstm_step, transformer_layer, AttentionVars, FeedForwardVars, TransformerLayerVars,
};
use mcd_core::autodiff::{Graph, Tensor, Var};

use super::{check_gradients, sample_tensor};

/// sum(out ⊙ W) with W a fixed pseudo-random leaf of out's shape, so each
/// output coordinate carries a distinct downstream gradient.
fn weighted_sum(g: &mut Graph<f64>, out: Var, seed: u64) -> Var {
    let w = sample_tensor(g.value(out).shape().to_vec(), seed);
    let w = g.leaf(w);
    let prod = g.mul(out, w).unwrap();
    g.sum(prod).unwrap()
}

/// Run the sweep; returns (op name, points probed, worst relative error)
/// per op. Panics inside `check_gradients` on any violation.
#[allow(dead_code)]
pub fn run_all() -> Vec<(&'static str, usize, f64)> {
    let mut results = Vec::new();
    let mut push = |name: &'static str, r: (usize, f64)| results.push((name, r.0, r.1));

    let a = sample_tensor(vec![10, 10], 1);
    let b = sample_tensor(vec![10, 10], 2);
    push(
        "add",
        check_gradients(
            "add",
            &[a, b],
            |g, v| {
                let s = g.add(v[0], v[1]).unwrap();
                weighted_sum(g, s, 90)
            },
            100,
            200,
            11,
        ),
    );

    let a = sample_tensor(vec![10, 10], 3);
    let b = sample_tensor(vec![10, 10], 4);
    push(
        "mul",
        check_gradients(
            "mul",
            &[a, b],
            |g, v| {
                let s = g.mul(v[0], v[1]).unwrap();
                weighted_sum(g, s, 91)
            },
            100,
            200,
            12,
        ),
    );

    let a = sample_tensor(vec![11, 10], 5);
    push(
        "scale",
        check_gradients(
            "scale",
            &[a],
            |g, v| {
                let s = g.scale(v[0], -0.73).unwrap();
                weighted_sum(g, s, 92)
            },
            100,
            110,
            13,
        ),
    );

    let a = sample_tensor(vec![11, 10], 6);
    push("sum", check_gradients("sum", &[a], |g, v| g.sum(v[0]).unwrap(), 100, 110, 14));

    let a = sample_tensor(vec![9, 7], 7);
    let b = sample_tensor(vec![7, 8], 8);
    push(
        "matmul",
        check_gradients(
            "matmul",
            &[a, b],
            |g, v| {
                let s = g.matmul(v[0], v[1]).unwrap();
                weighted_sum(g, s, 93)
            },
            100,
            119,
            15,
        ),
    );

    let a = sample_tensor(vec![9, 7], 9);
    let b = sample_tensor(vec![8, 7], 10);
    push(
        "matmul_nt",
        check_gradients(
            "matmul_nt",
            &[a, b],
            |g, v| {
                let s = g.matmul_nt(v[0], v[1]).unwrap();
                weighted_sum(g, s, 94)
            },
            100,
            119,
            16,
        ),
    );

    let a = sample_tensor(vec![12, 10], 11);
    push(
        "relu",
        check_gradients(
            "relu",
            &[a],
            |g, v| {
                let s = g.relu(v[0]).unwrap();
                weighted_sum(g, s, 95)
            },
            100,
            120,
            17,
        ),
    );

    let a = sample_tensor(vec![12, 10], 12);
    push(
        "sigmoid",
        check_gradients(
            "sigmoid",
            &[a],
            |g, v| {
                let s = g.sigmoid(v[0]).unwrap();
                weighted_sum(g, s, 96)
            },
            100,
            120,
            18,
        ),
    );

    let a = sample_tensor(vec![12, 10], 13);
    push(
        "tanh",
        check_gradients(
            "tanh",
            &[a],
            |g, v| {
                let s = g.tanh(v[0]).unwrap();
                weighted_sum(g, s, 97)
            },
            100,
            120,
            19,
        ),
    );

    let x = sample_tensor(vec![12, 8], 14);
    let b = sample_tensor(vec![8], 15);
    push(
        "add_bias",
        check_gradients(
            "add_bias",
            &[x, b],
            |g, v| {
                let s = g.add_bias(v[0], v[1]).unwrap();
                weighted_sum(g, s, 98)
            },
            100,
            104,
            20,
        ),
    );

    let table = sample_tensor(vec![20, 6], 16);
    // Repeated ids force gradient accumulation into shared rows.
    let ids = [3u32, 7, 3, 0, 19, 7, 7, 2, 11, 3];
    push(
        "embedding",
        check_gradients(
            "embedding",
            &[table],
            |g, v| {
                let s = g.embedding(v[0], &ids).unwrap();
                weighted_sum(g, s, 99)
            },
            100,
            120,
            21,
        ),
    );

    let x = sample_tensor(vec![15, 8], 17);
    let mask: Vec<bool> = (0..15).map(|t| t % 3 != 2).collect();
    push(
        "mean_pool",
        check_gradients(
            "mean_pool",
            &[x],
            |g, v| {
                let s = g.mean_pool(v[0], &mask).unwrap();
                weighted_sum(g, s, 100)
            },
            100,
            120,
            22,
        ),
    );

    let x = sample_tensor(vec![10, 4], 18);
    let k = sample_tensor(vec![3, 4, 6], 19);
    let mask: Vec<bool> = (0..10).map(|t| t < 8).collect();
    push(
        "conv1d_masked",
        check_gradients(
            "conv1d_masked",
            &[x.clone(), k.clone()],
            |g, v| {
                let s = g.conv1d(v[0], v[1], Some(&mask)).unwrap();
                weighted_sum(g, s, 101)
            },
            100,
            112,
            23,
        ),
    );
    push(
        "conv1d_unmasked",
        check_gradients(
            "conv1d_unmasked",
            &[x, k],
            |g, v| {
                let s = g.conv1d(v[0], v[1], None).unwrap();
                weighted_sum(g, s, 102)
            },
            100,
            112,
            24,
        ),
    );

    let logits = sample_tensor(vec![20, 6], 20);
    let labels: Vec<usize> = (0..20).map(|r| (r * 5 + 1) % 6).collect();
    push(
        "softmax_cross_entropy",
        check_gradients(
            "softmax_cross_entropy",
            &[logits],
            |g, v| g.softmax_cross_entropy(v[0], &labels).unwrap(),
            100,
            120,
            25,
        ),
    );

    let x = sample_tensor(vec![12, 9], 21);
    let gain = sample_tensor(vec![9], 22);
    let shift = sample_tensor(vec![9], 23);
    push(
        "layer_norm",
        check_gradients(
            "layer_norm",
            &[x, gain, shift],
            |g, v| {
                let s = g.layer_norm(v[0], v[1], v[2]).unwrap();
                weighted_sum(g, s, 103)
            },
            100,
            126,
            26,
        ),
    );

    let scores = sample_tensor(vec![10, 12], 24);
    let mask: Vec<bool> = (0..12).map(|t| t != 4 && t != 9).collect();
    push(
        "masked_softmax",
        check_gradients(
            "masked_softmax",
            &[scores],
            |g, v| {
                let s = g.masked_softmax(v[0], &mask).unwrap();
                weighted_sum(g, s, 104)
            },
            100,
            120,
            27,
        ),
    );

    let x = sample_tensor(vec![10, 12], 25);
    push(
        "slice_cols",
        check_gradients(
            "slice_cols",
            &[x.clone()],
            |g, v| {
                let s = g.slice_cols(v[0], 3, 7).unwrap();
                weighted_sum(g, s, 105)
            },
            100,
            120,
            28,
        ),
    );
    push(
        "slice_rows",
        check_gradients(
            "slice_rows",
            &[x],
            |g, v| {
                let s = g.slice_rows(v[0], 2, 6).unwrap();
                weighted_sum(g, s, 106)
            },
            100,
            120,
            29,
        ),
    );

    let a = sample_tensor(vec![10, 6], 26);
    let b = sample_tensor(vec![10, 6], 27);
    push(
        "concat_cols",
        check_gradients(
            "concat_cols",
            &[a, b],
            |g, v| {
                let s = g.concat_cols(&[v[0], v[1]]).unwrap();
                weighted_sum(g, s, 107)
            },
            100,
            120,
            30,
        ),
    );

    let parts: Vec<Tensor<f64>> = (0..12).map(|i| sample_tensor(vec![10], 30 + i)).collect();
    push(
        "stack_rows",
        check_gradients(
            "stack_rows",
            &parts,
            |g, v| {
                let s = g.stack_rows(v).unwrap();
                weighted_sum(g, s, 108)
            },
            100,
            120,
            31,
        ),
    );

    let x = sample_tensor(vec![12, 10], 77);
    push(
        "reshape",
        check_gradients(
            "reshape",
            &[x],
            |g, v| {
                let r = g.reshape(v[0], vec![4, 30]).unwrap();
                weighted_sum(g, r, 109)
            },
            100,
            120,
            33,
        ),
    );

    let x = sample_tensor(vec![1, 4], 40);
    let h = sample_tensor(vec![1, 4], 41);
    let c = sample_tensor(vec![1, 4], 42);
    let wx = sample_tensor(vec![4, 16], 43);
    let wh = sample_tensor(vec![4, 16], 44);
    let b = sample_tensor(vec![16], 45);
    push(
        "lstm_step",
        check_gradients(
            "lstm_step",
            &[x, h, c, wx, wh, b],
            |g, v| {
                let (h_new, c_new) = lstm_step(g, v[0], v[1], v[2], v[3], v[4], v[5]).unwrap();
                let lh = weighted_sum(g, h_new, 109);
                let lc = weighted_sum(g, c_new, 110);
                g.add(lh, lc).unwrap()
            },
            100,
            156,
            32,
        ),
    );

    let (l, d, heads, ff) = (5, 8, 2, 32);
    let x = sample_tensor(vec![l, d], 50);
    let inputs = vec![
        x,
        sample_tensor(vec![d], 51),     // attn ln gain
        sample_tensor(vec![d], 52),     // attn ln shift
        sample_tensor(vec![d, d], 53),  // wq
        sample_tensor(vec![d, d], 54),  // wk
        sample_tensor(vec![d, d], 55),  // wv
        sample_tensor(vec![d, d], 56),  // wo
        sample_tensor(vec![d], 57),     // ff ln gain
        sample_tensor(vec![d], 58),     // ff ln shift
        sample_tensor(vec![d, ff], 59), // w1
        sample_tensor(vec![ff], 60),    // b1
        sample_tensor(vec![ff, d], 61), // w2
        sample_tensor(vec![d], 62),     // b2
    ];
    let mask = vec![true, true, true, true, false];
    push(
        "transformer_layer",
        check_gradients(
            "transformer_layer",
            &inputs,
            |g, v| {
                let p = TransformerLayerVars {
                    attn: AttentionVars {
                        ln_gain: v[1],
                        ln_shift: v[2],
                        wq: v[3],
                        wk: v[4],
                        wv: v[5],
                        wo: v[6],
                    },
                    ff: FeedForwardVars {
                        ln_gain: v[7],
                        ln_shift: v[8],
                        w1: v[9],
                        b1: v[10],
                        w2: v[11],
                        b2: v[12],
                    },
                };
                let out = transformer_layer(g, v[0], &p, heads, &mask).unwrap();
                let pooled = g.mean_pool(out, &mask).unwrap();
                weighted_sum(g, pooled, 111)
            },
            120,
            140,
            33,
        ),
    );

    results
}
