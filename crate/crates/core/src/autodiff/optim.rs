//! Adam with bias correction. One [`Adam`] instance owns the moment
//! buffers for a fixed parameter list; step order defines parameter order.

use crate::autodiff::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct AdamConfig<S: Scalar> {
    pub lr: S,
    pub beta1: S,
    pub beta2: S,
    pub eps: S,
}

impl<S: Scalar> Default for AdamConfig<S> {
    fn default() -> Self {
        AdamConfig {
            lr: S::from_f64_lossy(1e-3),
            beta1: S::from_f64_lossy(0.9),
            beta2: S::from_f64_lossy(0.999),
            eps: S::from_f64_lossy(1e-8),
        }
    }
}

pub struct Adam<S: Scalar> {
    cfg: AdamConfig<S>,
    m: Vec<Vec<S>>,
    v: Vec<Vec<S>>,
    t: u64,
}

impl<S: Scalar> Adam<S> {
    pub fn new(cfg: AdamConfig<S>, param_sizes: &[usize]) -> Self {
        Adam {
            cfg,
            m: param_sizes.iter().map(|&n| vec![S::zero(); n]).collect(),
            v: param_sizes.iter().map(|&n| vec![S::zero(); n]).collect(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One update over all parameters. `params[i]` and `grads[i]` must have
    /// the size given at construction for slot i.
    pub fn step(&mut self, params: &mut [&mut Tensor<S>], grads: &[Tensor<S>]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::invalid(
                "adam_step",
                format!("expected {} parameter slots, got {}/{}", self.m.len(), params.len(), grads.len()),
            ));
        }
        self.t += 1;
        let t = self.t as i32;
        let one = S::one();
        let bc1 = one - self.cfg.beta1.powi(t);
        let bc2 = one - self.cfg.beta2.powi(t);
        for (i, p) in params.iter_mut().enumerate() {
            if p.numel() != self.m[i].len() || grads[i].numel() != self.m[i].len() {
                return Err(Error::invalid(
                    "adam_step",
                    format!("slot {i}: size {} registered, param {} grad {}", self.m[i].len(), p.numel(), grads[i].numel()),
                ));
            }
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            let g = grads[i].data();
            for (j, w) in p.data_mut().iter_mut().enumerate() {
                m[j] = self.cfg.beta1 * m[j] + (one - self.cfg.beta1) * g[j];
                v[j] = self.cfg.beta2 * v[j] + (one - self.cfg.beta2) * g[j] * g[j];
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                *w = *w - self.cfg.lr * m_hat / (v_hat.sqrt() + self.cfg.eps);
            }
        }
        Ok(())
    }
}
