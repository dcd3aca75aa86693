//! Backend dispatch: one enum in front of the n-gram and tiny-neural
//! models, with the size class mapped to each family's capacity knob.
//! Backends are immutable after fit; sampling only reads.

use crate::error::{Error, Result};
use crate::gen::config::SizeClass;
use crate::gen::neural::{TinyNeuralConfig, TinyNeuralLm};
use crate::gen::ngram::NgramModel;
use crate::data::vocab::EOD;
use serde::{Deserialize, Serialize};

pub const NGRAM_LAMBDA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Ngram,
    TinyNeural,
}

impl BackendKind {
    /// Capacity knob per size class: n-gram order 2/3/4, neural depth 2/4/6.
    pub fn capacity(self, size: SizeClass) -> usize {
        match (self, size) {
            (BackendKind::Ngram, SizeClass::Base) => 2,
            (BackendKind::Ngram, SizeClass::Large) => 3,
            (BackendKind::Ngram, SizeClass::Mega) => 4,
            (BackendKind::TinyNeural, SizeClass::Base) => 2,
            (BackendKind::TinyNeural, SizeClass::Large) => 4,
            (BackendKind::TinyNeural, SizeClass::Mega) => 6,
        }
    }
}

#[derive(Debug, Clone)]
pub enum LanguageModelBackend {
    Ngram(NgramModel),
    TinyNeural(TinyNeuralLm),
}

/// Fit a generator on raw token documents. An end-of-document token is
/// appended to every document before counting/training so generation can
/// terminate naturally.
pub fn fit_backend(
    corpus: &[Vec<u32>],
    kind: BackendKind,
    size: SizeClass,
    vocab_size: usize,
    seed: u64,
) -> Result<LanguageModelBackend> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let terminated: Vec<Vec<u32>> = corpus
        .iter()
        .map(|doc| {
            let mut t = doc.clone();
            t.push(EOD);
            t
        })
        .collect();
    match kind {
        BackendKind::Ngram => {
            let order = kind.capacity(size);
            Ok(LanguageModelBackend::Ngram(NgramModel::fit(
                &terminated,
                order,
                vocab_size,
                NGRAM_LAMBDA,
            )?))
        }
        BackendKind::TinyNeural => {
            let layers = kind.capacity(size);
            Ok(LanguageModelBackend::TinyNeural(TinyNeuralLm::fit(
                &terminated,
                layers,
                vocab_size,
                seed,
                &TinyNeuralConfig::default(),
            )?))
        }
    }
}

impl LanguageModelBackend {
    pub fn next_token_distribution(&self, context: &[u32]) -> Vec<f64> {
        match self {
            LanguageModelBackend::Ngram(m) => m.next_distribution(context),
            LanguageModelBackend::TinyNeural(m) => m.next_distribution(context),
        }
    }

    pub fn vocab_size(&self) -> usize {
        match self {
            LanguageModelBackend::Ngram(m) => m.vocab_size(),
            LanguageModelBackend::TinyNeural(m) => m.vocab_size(),
        }
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            LanguageModelBackend::Ngram(_) => BackendKind::Ngram,
            LanguageModelBackend::TinyNeural(_) => BackendKind::TinyNeural,
        }
    }

    pub fn capacity(&self) -> usize {
        match self {
            LanguageModelBackend::Ngram(m) => m.order(),
            LanguageModelBackend::TinyNeural(m) => m.layers(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_increases_strictly_with_size() {
        for kind in [BackendKind::Ngram, BackendKind::TinyNeural] {
            let caps: Vec<usize> = SizeClass::ALL.iter().map(|&s| kind.capacity(s)).collect();
            assert!(caps.windows(2).all(|w| w[0] < w[1]), "{kind:?}: {caps:?}");
        }
    }

    #[test]
    fn fit_appends_terminator_so_it_is_predicted() {
        // Corpus without explicit EOD; the backend must still give EOD
        // positive probability after the final token's context.
        let corpus = vec![vec![3, 4, 5], vec![3, 4, 5]];
        let b = fit_backend(&corpus, BackendKind::Ngram, SizeClass::Large, 6, 0).unwrap();
        let d = b.next_token_distribution(&[3, 4, 5]);
        let uniform = 1.0 / 6.0;
        assert!(d[EOD as usize] > uniform, "EOD mass {} not learned", d[EOD as usize]);
    }

    #[test]
    fn distributions_are_valid_for_both_kinds() {
        let corpus = vec![vec![3, 4, 3, 5, 4], vec![5, 5, 3]];
        for kind in [BackendKind::Ngram, BackendKind::TinyNeural] {
            let b = fit_backend(&corpus, kind, SizeClass::Base, 6, 7).unwrap();
            for ctx in [&[][..], &[3][..], &[3, 4][..]] {
                let d = b.next_token_distribution(ctx);
                assert_eq!(d.len(), 6);
                assert!(d.iter().all(|&p| p >= 0.0));
                assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(fit_backend(&[], BackendKind::Ngram, SizeClass::Base, 6, 0).is_err());
    }
}
