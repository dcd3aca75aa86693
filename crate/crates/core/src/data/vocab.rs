//! Vocabulary over the training portion of the corpus: the `max_size`
//! most frequent tokens (ties broken by count descending, then token
//! ascending) after three reserved ids.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashMap;

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const EOD: u32 = 2;

pub const DEFAULT_VOCAB_SIZE: usize = 20_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Vocabulary {
    id_to_token: Vec<String>,
    #[serde(skip)]
    token_to_id: HashMap<String, u32>,
}

impl Vocabulary {
    /// Count tokens across the given (training) documents and keep the
    /// `max_size` most frequent content tokens.
    pub fn build<'a, I, D>(train_docs: I, max_size: usize) -> Vocabulary
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = &'a String>,
    {
        let mut counts: HashMap<&'a String, u64> = HashMap::new();
        for doc in train_docs {
            for tok in doc {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&'a String, u64)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(max_size);

        let mut id_to_token: Vec<String> =
            vec!["<pad>".to_string(), "<unk>".to_string(), "<eod>".to_string()];
        id_to_token.extend(ranked.into_iter().map(|(t, _)| t.clone()));
        Vocabulary::from_tokens(id_to_token)
    }

    pub fn from_tokens(id_to_token: Vec<String>) -> Vocabulary {
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .skip(3)
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary { id_to_token, token_to_id }
    }

    /// Restore the lookup map after deserialization.
    pub fn rebuild_index(self) -> Vocabulary {
        Vocabulary::from_tokens(self.id_to_token)
    }

    pub fn id(&self, token: &str) -> u32 {
        self.token_to_id.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> &str {
        &self.id_to_token[id as usize]
    }

    pub fn size(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<&str> {
        ids.iter().map(|&i| self.token(i)).collect()
    }

    /// Content hash for manifests; any change to the mapping changes it.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.id_to_token {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split_whitespace().map(|w| w.to_string()).collect()
    }

    #[test]
    fn reserved_ids_are_fixed() {
        let v = Vocabulary::build([&words("a b a")], 10);
        assert_eq!(v.token(PAD), "<pad>");
        assert_eq!(v.token(UNK), "<unk>");
        assert_eq!(v.token(EOD), "<eod>");
        assert_eq!(v.id("a"), 3);
        assert_eq!(v.id("b"), 4);
    }

    #[test]
    fn absent_token_maps_to_unk() {
        let v = Vocabulary::build([&words("a a b")], 10);
        assert_eq!(v.id("zzz"), UNK);
    }

    #[test]
    fn frequency_then_lexicographic_order() {
        let v = Vocabulary::build([&words("c c b b a")], 10);
        // b and c both occur twice; the tie goes to "b" (ascending token).
        assert_eq!(v.id("b"), 3);
        assert_eq!(v.id("c"), 4);
        assert_eq!(v.id("a"), 5);
    }

    #[test]
    fn max_size_caps_content_tokens() {
        let v = Vocabulary::build([&words("a a a b b c")], 2);
        assert_eq!(v.size(), 5); // 3 reserved + 2 kept
        assert_eq!(v.id("c"), UNK);
    }

    #[test]
    fn rebuilding_is_deterministic() {
        let docs = words("the quick brown fox the lazy dog the end");
        let v1 = Vocabulary::build([&docs], 100);
        let v2 = Vocabulary::build([&docs], 100);
        assert_eq!(v1.fingerprint(), v2.fingerprint());
        for t in ["the", "quick", "zzz"] {
            assert_eq!(v1.id(t), v2.id(t));
        }
    }

    #[test]
    fn fingerprint_tracks_content() {
        let v1 = Vocabulary::build([&words("a b")], 10);
        let v2 = Vocabulary::build([&words("a c")], 10);
        assert_ne!(v1.fingerprint(), v2.fingerprint());
    }
}
