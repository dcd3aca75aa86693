//! Layer compositions on top of [`Graph`] primitives: LSTM cell,
//! multi-head self-attention, transformer block, positional encodings,
//! and the shared parameter-initialization scheme.

use crate::autodiff::graph::{Graph, Var};
use crate::autodiff::tensor::Tensor;
use crate::error::Result;
use crate::scalar::Scalar;
use rand::Rng;

/// Weights sampled uniform(-bound, bound) with bound = 1/sqrt(fan_in);
/// biases start at zero.
pub fn init_uniform<S: Scalar, R: Rng>(rng: &mut R, shape: Vec<usize>, fan_in: usize) -> Tensor<S> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| S::from_f64_lossy(rng.gen_range(-bound..bound))).collect();
    Tensor::new(shape, data).expect("shape/data agree")
}

/// Fixed sinusoidal position table [max_len, d]: even columns sine, odd
/// columns cosine, wavelengths geometric from 2π to 10000·2π.
pub fn sinusoidal_positions<S: Scalar>(max_len: usize, d: usize) -> Tensor<S> {
    let mut data = Vec::with_capacity(max_len * d);
    for t in 0..max_len {
        for j in 0..d {
            let pair = (j / 2) as f64;
            let rate = (10000f64).powf(2.0 * pair / d as f64);
            let angle = t as f64 / rate;
            let v = if j % 2 == 0 { angle.sin() } else { angle.cos() };
            data.push(S::from_f64_lossy(v));
        }
    }
    Tensor::new(vec![max_len, d], data).expect("shape/data agree")
}

/// One LSTM step. Gate order in the 4H preactivation is input, forget,
/// cell, output. Shapes: x [1,d], h/c [1,H], wx [d,4H], wh [H,4H], b [4H].
#[allow(clippy::too_many_arguments)]
pub fn lstm_step<S: Scalar>(
    g: &mut Graph<S>,
    x: Var,
    h_prev: Var,
    c_prev: Var,
    wx: Var,
    wh: Var,
    b: Var,
) -> Result<(Var, Var)> {
    let hidden = g.value(h_prev).cols();
    let zx = g.matmul(x, wx)?;
    let zh = g.matmul(h_prev, wh)?;
    let z = g.add(zx, zh)?;
    let z = g.add_bias(z, b)?;
    let i_gate = g.slice_cols(z, 0, hidden)?;
    let f_gate = g.slice_cols(z, hidden, hidden)?;
    let g_gate = g.slice_cols(z, 2 * hidden, hidden)?;
    let o_gate = g.slice_cols(z, 3 * hidden, hidden)?;
    let i_gate = g.sigmoid(i_gate)?;
    let f_gate = g.sigmoid(f_gate)?;
    let g_gate = g.tanh(g_gate)?;
    let o_gate = g.sigmoid(o_gate)?;
    let keep = g.mul(f_gate, c_prev)?;
    let write = g.mul(i_gate, g_gate)?;
    let c = g.add(keep, write)?;
    let c_act = g.tanh(c)?;
    let h = g.mul(o_gate, c_act)?;
    Ok((h, c))
}

/// Per-graph handles for one attention sublayer.
#[derive(Clone, Copy)]
pub struct AttentionVars {
    pub ln_gain: Var,
    pub ln_shift: Var,
    pub wq: Var,
    pub wk: Var,
    pub wv: Var,
    pub wo: Var,
}

/// Per-graph handles for one feed-forward sublayer.
#[derive(Clone, Copy)]
pub struct FeedForwardVars {
    pub ln_gain: Var,
    pub ln_shift: Var,
    pub w1: Var,
    pub b1: Var,
    pub w2: Var,
    pub b2: Var,
}

#[derive(Clone, Copy)]
pub struct TransformerLayerVars {
    pub attn: AttentionVars,
    pub ff: FeedForwardVars,
}

/// Multi-head self-attention over x [L,d]. Key/value columns where `mask`
/// is false receive zero attention weight, so padded rows cannot leak into
/// valid positions.
pub fn multi_head_self_attention<S: Scalar>(
    g: &mut Graph<S>,
    x: Var,
    p: &AttentionVars,
    heads: usize,
    mask: &[bool],
) -> Result<Var> {
    let d = g.value(x).cols();
    debug_assert_eq!(d % heads, 0, "model width must split across heads");
    let dh = d / heads;
    let q = g.matmul(x, p.wq)?;
    let k = g.matmul(x, p.wk)?;
    let v = g.matmul(x, p.wv)?;
    let scale = S::from_f64_lossy(1.0 / (dh as f64).sqrt());
    let mut ctx = Vec::with_capacity(heads);
    for h in 0..heads {
        let qh = g.slice_cols(q, h * dh, dh)?;
        let kh = g.slice_cols(k, h * dh, dh)?;
        let vh = g.slice_cols(v, h * dh, dh)?;
        let scores = g.matmul_nt(qh, kh)?;
        let scores = g.scale(scores, scale)?;
        let attn = g.masked_softmax(scores, mask)?;
        ctx.push(g.matmul(attn, vh)?);
    }
    let merged = g.concat_cols(&ctx)?;
    g.matmul(merged, p.wo)
}

/// Pre-norm transformer block: x + MHSA(LN(x)), then + FF(LN(·)).
pub fn transformer_layer<S: Scalar>(
    g: &mut Graph<S>,
    x: Var,
    p: &TransformerLayerVars,
    heads: usize,
    mask: &[bool],
) -> Result<Var> {
    let normed = g.layer_norm(x, p.attn.ln_gain, p.attn.ln_shift)?;
    let attn_out = multi_head_self_attention(g, normed, &p.attn, heads, mask)?;
    let x = g.add(x, attn_out)?;
    let normed = g.layer_norm(x, p.ff.ln_gain, p.ff.ln_shift)?;
    let h = g.matmul(normed, p.ff.w1)?;
    let h = g.add_bias(h, p.ff.b1)?;
    let h = g.relu(h)?;
    let h = g.matmul(h, p.ff.w2)?;
    let ff_out = g.add_bias(h, p.ff.b2)?;
    g.add(x, ff_out)
}
