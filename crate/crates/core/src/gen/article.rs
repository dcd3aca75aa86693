//! Article generation: prompt assembly (title plus ℓ conditioning tokens)
//! and the seeded sample loop of temperature → truncation → draw.

use crate::data::vocab::EOD;
use crate::error::Result;
use crate::gen::backend::LanguageModelBackend;
use crate::gen::config::{Decoding, GenerationConfig};
use crate::gen::decode::{apply_temperature, sample_index, truncate_top_k, truncate_top_p};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub tokens: Vec<u32>,
    pub label: usize,
    pub label_name: String,
    pub title: Vec<u32>,
    /// Tokens before this index are the prompt (title + conditioning).
    pub prompt_boundary: usize,
    pub source_article_id: String,
}

impl Document {
    /// Continuation tokens (everything the generator produced).
    pub fn continuation(&self) -> &[u32] {
        &self.tokens[self.prompt_boundary.min(self.tokens.len())..]
    }

    pub fn stamp(mut self, label: usize, label_name: &str, source_article_id: &str) -> Document {
        self.label = label;
        self.label_name = label_name.to_string();
        self.source_article_id = source_article_id.to_string();
        self
    }
}

/// Generate one article. Returns `None` when the human body is shorter
/// than the conditioning length ℓ (the caller skips such articles, with a
/// warning at the orchestration layer).
pub fn generate_article(
    backend: &LanguageModelBackend,
    config: &GenerationConfig,
    title: &[u32],
    human_body: &[u32],
) -> Result<Option<Document>> {
    config.validate(backend.vocab_size())?;
    if human_body.len() < config.cond_len {
        return Ok(None);
    }
    let mut tokens = Vec::with_capacity(config.max_len);
    tokens.extend_from_slice(title);
    tokens.extend_from_slice(&human_body[..config.cond_len]);
    let prompt_boundary = tokens.len();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    while tokens.len() < config.max_len {
        let mut dist = backend.next_token_distribution(&tokens);
        apply_temperature(&mut dist, config.temperature)?;
        match config.decoding {
            Decoding::TopK { k } => truncate_top_k(&mut dist, k)?,
            Decoding::TopP { p } => truncate_top_p(&mut dist, p)?,
        }
        let tok = sample_index(&dist, &mut rng) as u32;
        tokens.push(tok);
        if tok == EOD {
            break;
        }
    }

    Ok(Some(Document {
        tokens,
        label: 0,
        label_name: config.to_string(),
        title: title.to_vec(),
        prompt_boundary,
        source_article_id: String::new(),
    }))
}
