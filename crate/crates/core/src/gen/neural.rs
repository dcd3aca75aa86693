//! Window-conditioned feedforward language model: the last three token
//! embeddings feed a ReLU stack whose depth is the capacity knob. Trained
//! with the autodiff tape; inference runs as plain loops since no
//! gradients are needed there.

use crate::autodiff::nn::init_uniform;
use crate::autodiff::{Adam, AdamConfig, Graph, Tensor};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const WINDOW: usize = 3;

#[derive(Debug, Clone)]
pub struct TinyNeuralConfig {
    pub embed_dim: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Cap on training windows; large corpora are subsampled house-deterministically.
    pub max_windows: usize,
}

impl Default for TinyNeuralConfig {
    fn default() -> Self {
        TinyNeuralConfig {
            embed_dim: 16,
            hidden: 32,
            epochs: 3,
            batch_size: 128,
            lr: 1e-3,
            max_windows: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TinyNeuralLm {
    layers: usize,
    vocab_size: usize,
    emb: Tensor<f64>,
    /// First entry maps [WINDOW·d → h]; the rest are [h → h].
    stack: Vec<(Tensor<f64>, Tensor<f64>)>,
    w_out: Tensor<f64>,
    b_out: Tensor<f64>,
}

impl TinyNeuralLm {
    pub fn fit(
        corpus: &[Vec<u32>],
        layers: usize,
        vocab_size: usize,
        seed: u64,
        cfg: &TinyNeuralConfig,
    ) -> Result<Self> {
        if corpus.is_empty() || corpus.iter().all(|d| d.is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        if layers == 0 {
            return Err(Error::InvalidConfig("layer count must be positive".into()));
        }
        let (d, h) = (cfg.embed_dim, cfg.hidden);

        // One window per token: the WINDOW preceding ids (PAD=0 before the
        // document start) predict the token.
        let mut windows: Vec<[u32; WINDOW + 1]> = Vec::new();
        for doc in corpus {
            for (i, &next) in doc.iter().enumerate() {
                if next as usize >= vocab_size {
                    return Err(Error::invalid(
                        "tiny_neural_fit",
                        format!("token id {next} >= vocabulary size {vocab_size}"),
                    ));
                }
                let mut w = [0u32; WINDOW + 1];
                for p in 0..WINDOW {
                    let back = WINDOW - p;
                    w[p] = if i >= back { doc[i - back] } else { 0 };
                }
                w[WINDOW] = next;
                windows.push(w);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
        if windows.len() > cfg.max_windows {
            windows.shuffle(&mut rng);
            windows.truncate(cfg.max_windows);
        }

        let mut model = TinyNeuralLm {
            layers,
            vocab_size,
            emb: init_uniform(&mut rng, vec![vocab_size, d], d),
            stack: (0..layers)
                .map(|l| {
                    let fan_in = if l == 0 { WINDOW * d } else { h };
                    (init_uniform(&mut rng, vec![fan_in, h], fan_in), Tensor::zeros(vec![h]))
                })
                .collect(),
            w_out: init_uniform(&mut rng, vec![h, vocab_size], h),
            b_out: Tensor::zeros(vec![vocab_size]),
        };

        let sizes: Vec<usize> = model.param_sizes();
        let mut opt = Adam::new(AdamConfig { lr: cfg.lr, ..AdamConfig::default() }, &sizes);

        for epoch in 0..cfg.epochs {
            let mut order: Vec<usize> = (0..windows.len()).collect();
            let mut erng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 1 + epoch as u64));
            order.shuffle(&mut erng);
            for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
                let mut g = Graph::new();
                let emb = g.param(model.emb.clone());
                let stack: Vec<_> = model
                    .stack
                    .iter()
                    .map(|(w, b)| (g.param(w.clone()), g.param(b.clone())))
                    .collect();
                let w_out = g.param(model.w_out.clone());
                let b_out = g.param(model.b_out.clone());

                let mut cols = Vec::with_capacity(WINDOW);
                for p in 0..WINDOW {
                    let ids: Vec<u32> = chunk.iter().map(|&i| windows[i][p]).collect();
                    cols.push(g.embedding(emb, &ids)?);
                }
                let mut x = g.concat_cols(&cols)?;
                for &(w, b) in &stack {
                    x = g.matmul(x, w)?;
                    x = g.add_bias(x, b)?;
                    x = g.relu(x)?;
                }
                let logits = g.matmul(x, w_out)?;
                let logits = g.add_bias(logits, b_out)?;
                let targets: Vec<usize> = chunk.iter().map(|&i| windows[i][WINDOW] as usize).collect();
                let loss = g.softmax_cross_entropy(logits, &targets)?;
                if !g.value(loss).item().is_finite() {
                    return Err(Error::NanLoss { seed, epoch, batch: batch_idx });
                }
                g.backward(loss)?;

                let grads: Vec<Tensor<f64>> = std::iter::once(emb)
                    .chain(stack.iter().flat_map(|&(w, b)| [w, b]))
                    .chain([w_out, b_out])
                    .map(|v| g.leaf_grad(v))
                    .collect();
                let mut params = model.params_mut();
                opt.step(&mut params, &grads)?;
            }
        }
        Ok(model)
    }

    fn param_sizes(&self) -> Vec<usize> {
        let mut s = vec![self.emb.numel()];
        for (w, b) in &self.stack {
            s.push(w.numel());
            s.push(b.numel());
        }
        s.push(self.w_out.numel());
        s.push(self.b_out.numel());
        s
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor<f64>> {
        let mut p: Vec<&mut Tensor<f64>> = vec![&mut self.emb];
        for (w, b) in &mut self.stack {
            p.push(w);
            p.push(b);
        }
        p.push(&mut self.w_out);
        p.push(&mut self.b_out);
        p
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// Softmax over the forward pass at the window ending the context.
    pub fn next_distribution(&self, context: &[u32]) -> Vec<f64> {
        let d = self.emb.cols();
        let mut x = vec![0.0f64; WINDOW * d];
        for p in 0..WINDOW {
            let back = WINDOW - p;
            let tok = if context.len() >= back { context[context.len() - back] } else { 0 };
            x[p * d..(p + 1) * d].copy_from_slice(self.emb.row(tok as usize));
        }
        for (w, b) in &self.stack {
            x = dense_relu(&x, w, b);
        }
        let mut logits = vec![0.0f64; self.vocab_size];
        for (j, l) in logits.iter_mut().enumerate() {
            let mut acc = self.b_out.data()[j];
            for (i, &xi) in x.iter().enumerate() {
                acc += xi * self.w_out.data()[i * self.vocab_size + j];
            }
            *l = acc;
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for l in logits.iter_mut() {
            *l = (*l - max).exp();
            sum += *l;
        }
        for l in logits.iter_mut() {
            *l /= sum;
        }
        logits
    }

    /// Named tensors for the checkpoint container, in fixed order.
    pub fn named_params(&self) -> Vec<(String, &Tensor<f64>)> {
        let mut out = vec![("emb".to_string(), &self.emb)];
        for (l, (w, b)) in self.stack.iter().enumerate() {
            out.push((format!("stack{l}/w"), w));
            out.push((format!("stack{l}/b"), b));
        }
        out.push(("out/w".to_string(), &self.w_out));
        out.push(("out/b".to_string(), &self.b_out));
        out
    }

    pub fn from_params(
        layers: usize,
        vocab_size: usize,
        mut take: impl FnMut(&str) -> Result<Tensor<f64>>,
    ) -> Result<Self> {
        let emb = take("emb")?;
        let mut stack = Vec::with_capacity(layers);
        for l in 0..layers {
            stack.push((take(&format!("stack{l}/w"))?, take(&format!("stack{l}/b"))?));
        }
        Ok(TinyNeuralLm { layers, vocab_size, emb, stack, w_out: take("out/w")?, b_out: take("out/b")? })
    }
}

fn dense_relu(x: &[f64], w: &Tensor<f64>, b: &Tensor<f64>) -> Vec<f64> {
    let (rows, cols) = (w.rows(), w.cols());
    debug_assert_eq!(x.len(), rows);
    let mut out = b.data().to_vec();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let w_row = &w.data()[i * cols..(i + 1) * cols];
        for (o, &wv) in out.iter_mut().zip(w_row) {
            *o += xi * wv;
        }
    }
    for o in out.iter_mut() {
        if *o < 0.0 {
            *o = 0.0;
        }
    }
    out
}
