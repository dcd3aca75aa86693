//! Interpolated n-gram language model with add-λ smoothing, chained from
//! uniform up through the top order:
//!
//!   P_0(v) = 1/V
//!   P_o(v | ctx) = (c(ctx,v) + λV · P_{o-1}(v | ctx')) / (total(ctx) + λV)
//!
//! Each level is classic add-λ with the level below as its prior, so an
//! unseen context falls through to the lower order untouched, and λ→0
//! recovers the maximum-likelihood estimate of the highest order with
//! evidence. Contexts pack into a u64 (21 bits per token), which caps the
//! order at 4; that covers every size class.

use crate::error::{Error, Result};
use std::collections::HashMap;

const TOKEN_BITS: u32 = 21;
const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Default)]
struct ContextCounts {
    total: u64,
    /// Successor counts sorted by token id; fixed order keeps the
    /// floating-point fill of the distribution bitwise reproducible.
    succ: Vec<(u32, u32)>,
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    vocab_size: usize,
    lambda: f64,
    /// tables[c] maps a packed c-token context to its counts.
    tables: Vec<HashMap<u64, ContextCounts>>,
}

fn pack(ctx: &[u32]) -> u64 {
    let mut key = 0u64;
    for &t in ctx {
        debug_assert!(t < (1 << TOKEN_BITS));
        key = (key << TOKEN_BITS) | t as u64;
    }
    key
}

impl NgramModel {
    /// Count n-grams of orders 1..=order over the corpus. Contexts never
    /// cross document boundaries; `eod` must already terminate each
    /// document (the backend layer appends it).
    pub fn fit(corpus: &[Vec<u32>], order: usize, vocab_size: usize, lambda: f64) -> Result<Self> {
        if corpus.is_empty() || corpus.iter().all(|d| d.is_empty()) {
            return Err(Error::EmptyCorpus);
        }
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidConfig(format!("n-gram order {order} outside 1..={MAX_ORDER}")));
        }
        if vocab_size == 0 || vocab_size > (1 << TOKEN_BITS) {
            return Err(Error::InvalidConfig(format!("vocabulary size {vocab_size} unsupported")));
        }
        let mut builders: Vec<HashMap<u64, HashMap<u32, u32>>> =
            (0..order).map(|_| HashMap::new()).collect();
        for doc in corpus {
            for (i, &next) in doc.iter().enumerate() {
                if next as usize >= vocab_size {
                    return Err(Error::invalid(
                        "ngram_fit",
                        format!("token id {next} >= vocabulary size {vocab_size}"),
                    ));
                }
                for ctx_len in 0..order {
                    if ctx_len > i {
                        break;
                    }
                    let key = pack(&doc[i - ctx_len..i]);
                    *builders[ctx_len].entry(key).or_default().entry(next).or_insert(0) += 1;
                }
            }
        }
        let tables = builders
            .into_iter()
            .map(|b| {
                b.into_iter()
                    .map(|(k, succ_map)| {
                        let mut succ: Vec<(u32, u32)> = succ_map.into_iter().collect();
                        succ.sort_unstable_by_key(|&(t, _)| t);
                        let total = succ.iter().map(|&(_, c)| c as u64).sum();
                        (k, ContextCounts { total, succ })
                    })
                    .collect()
            })
            .collect();
        Ok(NgramModel { order, vocab_size, lambda, tables })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Next-token distribution given the tokens generated so far (only the
    /// trailing order-1 are consulted). Always a valid probability vector.
    pub fn next_distribution(&self, context: &[u32]) -> Vec<f64> {
        let v = self.vocab_size;
        let mut dist = vec![1.0 / v as f64; v];
        let prior_mass = self.lambda * v as f64;
        for ctx_len in 0..self.order {
            if ctx_len > context.len() {
                break;
            }
            let key = pack(&context[context.len() - ctx_len..]);
            if let Some(cc) = self.tables[ctx_len].get(&key) {
                let denom = cc.total as f64 + prior_mass;
                let prior_w = prior_mass / denom;
                for d in dist.iter_mut() {
                    *d *= prior_w;
                }
                for &(tok, cnt) in &cc.succ {
                    dist[tok as usize] += cnt as f64 / denom;
                }
            }
            // Unseen context: this level equals the one below, exactly.
        }
        dist
    }

    /// Flat view of the count tables for checkpointing:
    /// (ctx_len, packed context, total, successors).
    pub fn export_counts(&self) -> Vec<(usize, u64, u64, Vec<(u32, u32)>)> {
        let mut out = Vec::new();
        for (ctx_len, table) in self.tables.iter().enumerate() {
            let mut keys: Vec<&u64> = table.keys().collect();
            keys.sort_unstable();
            for k in keys {
                let cc = &table[k];
                out.push((ctx_len, *k, cc.total, cc.succ.clone()));
            }
        }
        out
    }

    /// Rebuild from exported counts (inverse of [`NgramModel::export_counts`]).
    pub fn from_counts(
        order: usize,
        vocab_size: usize,
        lambda: f64,
        counts: Vec<(usize, u64, u64, Vec<(u32, u32)>)>,
    ) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidConfig(format!("n-gram order {order} outside 1..={MAX_ORDER}")));
        }
        let mut tables: Vec<HashMap<u64, ContextCounts>> =
            (0..order).map(|_| HashMap::new()).collect();
        for (ctx_len, key, total, succ) in counts {
            if ctx_len >= order {
                return Err(Error::invalid("ngram_counts", format!("context length {ctx_len} >= order {order}")));
            }
            tables[ctx_len].insert(key, ContextCounts { total, succ });
        }
        Ok(NgramModel { order, vocab_size, lambda, tables })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EOD: u32 = 2;
    const A: u32 = 3;
    const B: u32 = 4;

    fn assert_prob_vector(p: &[f64]) {
        assert!(p.iter().all(|&v| v >= 0.0));
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "mass {total}");
    }

    // "a b a b" + EOD, bigram: as λ→0, P(b|a) → c(a,b)/c(a·) = 1.
    #[test]
    fn degenerate_corpus_bigram_is_deterministic_in_the_small_lambda_limit() {
        let corpus = vec![vec![A, B, A, B, EOD]];
        let m = NgramModel::fit(&corpus, 2, 5, 1e-12).unwrap();
        let d = m.next_distribution(&[A]);
        assert!((d[B as usize] - 1.0).abs() < 1e-9, "P(b|a) = {}", d[B as usize]);
        assert_prob_vector(&d);
    }

    // Five-token corpus, λ=0.01, V=7: hand-computed chain. An unseen
    // context leaves the distribution at the unigram level:
    // P_1(v) = (c(v) + λ) / (N + λV).
    #[test]
    fn unseen_context_falls_back_to_hand_computed_unigram() {
        // tokens: x y x z w  (+ EOD), so N = 6.
        let (x, y, z, w) = (3u32, 4, 5, 6);
        let corpus = vec![vec![x, y, x, z, w, EOD]];
        let m = NgramModel::fit(&corpus, 2, 7, 0.01).unwrap();
        // Token id 1 (UNK) never appears, so as a context it is unseen.
        let d = m.next_distribution(&[1u32]);
        let n = 6.0;
        let lam = 0.01;
        let vv = 7.0;
        let unigram = |c: f64| (c + lam) / (n + lam * vv);
        assert!((d[x as usize] - unigram(2.0)).abs() < 1e-15);
        assert!((d[y as usize] - unigram(1.0)).abs() < 1e-15);
        assert!((d[z as usize] - unigram(1.0)).abs() < 1e-15);
        assert!((d[w as usize] - unigram(1.0)).abs() < 1e-15);
        assert!((d[EOD as usize] - unigram(1.0)).abs() < 1e-15);
        assert!((d[0] - unigram(0.0)).abs() < 1e-15);
        assert!(d[0] > 0.0, "unigram mixture component must stay positive");
        assert_prob_vector(&d);
    }

    // Seen context at λ=0.01: P_2(v|x) = (c(x,v) + λV·P_1(v)) / (c(x·) + λV).
    #[test]
    fn seen_context_matches_hand_computed_chain() {
        let (x, y, z, w) = (3u32, 4, 5, 6);
        let corpus = vec![vec![x, y, x, z, w, EOD]];
        let m = NgramModel::fit(&corpus, 2, 7, 0.01).unwrap();
        let d = m.next_distribution(&[x]);
        let lam_v = 0.01 * 7.0;
        let unigram = |c: f64| (c + 0.01) / (6.0 + lam_v);
        // x is followed by y once and z once; total 2.
        let bigram = |c_xv: f64, c_v: f64| (c_xv + lam_v * unigram(c_v)) / (2.0 + lam_v);
        assert!((d[y as usize] - bigram(1.0, 1.0)).abs() < 1e-15);
        assert!((d[z as usize] - bigram(1.0, 1.0)).abs() < 1e-15);
        assert!((d[w as usize] - bigram(0.0, 1.0)).abs() < 1e-15);
        assert!((d[x as usize] - bigram(0.0, 2.0)).abs() < 1e-15);
        assert_prob_vector(&d);
    }

    #[test]
    fn refitting_is_bitwise_identical() {
        let corpus = vec![vec![A, B, A, EOD], vec![B, B, A, EOD]];
        let m1 = NgramModel::fit(&corpus, 3, 6, 0.01).unwrap();
        let m2 = NgramModel::fit(&corpus, 3, 6, 0.01).unwrap();
        for ctx in [&[][..], &[A][..], &[A, B][..], &[B, A][..]] {
            let d1 = m1.next_distribution(ctx);
            let d2 = m2.next_distribution(ctx);
            assert_eq!(d1, d2);
        }
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(NgramModel::fit(&[], 2, 5, 0.01).is_err());
        assert!(NgramModel::fit(&[vec![]], 2, 5, 0.01).is_err());
    }

    #[test]
    fn counts_roundtrip_through_export() {
        let corpus = vec![vec![A, B, A, B, EOD], vec![B, A, EOD]];
        let m = NgramModel::fit(&corpus, 4, 6, 0.01).unwrap();
        let counts = m.export_counts();
        let m2 = NgramModel::from_counts(4, 6, 0.01, counts).unwrap();
        for ctx in [&[][..], &[A][..], &[A, B][..], &[B, A, B][..]] {
            assert_eq!(m.next_distribution(ctx), m2.next_distribution(ctx));
        }
    }

    #[test]
    fn short_context_uses_available_orders_only() {
        let corpus = vec![vec![A, B, A, B, EOD]];
        let m = NgramModel::fit(&corpus, 4, 6, 0.01).unwrap();
        // Empty context: unigram level only; still a valid distribution.
        let d = m.next_distribution(&[]);
        assert_prob_vector(&d);
        assert!(d[A as usize] > d[EOD as usize]);
    }
}
