//! Corpus ingestion: JSONL articles → tokenized, split-assigned, encoded.
//! Articles land in fixed global pools (8/1/1 by position) before any task
//! is built; the vocabulary sees only the train pool.

use crate::data::tokenize::tokenize;
use crate::data::vocab::Vocabulary;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::BufRead;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EncodedArticle {
    pub id: String,
    /// Stable position in ingest order; per-document seeds key off it.
    pub index: usize,
    pub title: Vec<u32>,
    pub body: Vec<u32>,
    pub split: Split,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub articles: Vec<EncodedArticle>,
    pub vocab: Vocabulary,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawRecord {
    #[serde(default)]
    id: Option<String>,
    title: String,
    body: String,
}

/// Position-based pool assignment: of every ten articles, eight train,
/// one dev, one test.
fn split_for_index(i: usize) -> Split {
    match i % 10 {
        8 => Split::Dev,
        9 => Split::Test,
        _ => Split::Train,
    }
}

pub fn ingest_corpus(path: &Path, max_vocab: usize) -> Result<Corpus> {
    let file = std::fs::File::open(path)?;
    ingest_corpus_reader(std::io::BufReader::new(file), max_vocab)
}

pub fn ingest_corpus_reader(reader: impl BufRead, max_vocab: usize) -> Result<Corpus> {
    let mut raw: Vec<(String, Vec<String>, Vec<String>, Split)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        let idx = raw.len();
        let id = rec.id.unwrap_or_else(|| format!("line{}", lineno + 1));
        raw.push((id, tokenize(&rec.title), tokenize(&rec.body), split_for_index(idx)));
    }
    if raw.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let vocab = Vocabulary::build(
        raw.iter()
            .filter(|(_, _, _, s)| *s == Split::Train)
            .flat_map(|(_, title, body, _)| [title, body]),
        max_vocab,
    );

    let articles = raw
        .into_iter()
        .enumerate()
        .map(|(index, (id, title, body, split))| EncodedArticle {
            id,
            index,
            title: vocab.encode(&title),
            body: vocab.encode(&body),
            split,
        })
        .collect();
    Ok(Corpus { articles, vocab })
}

impl Corpus {
    /// Training-pool sequences (title ++ body) for backend fitting.
    pub fn train_sequences(&self) -> Vec<Vec<u32>> {
        self.articles
            .iter()
            .filter(|a| a.split == Split::Train)
            .map(|a| {
                let mut s = a.title.clone();
                s.extend_from_slice(&a.body);
                s
            })
            .collect()
    }
}
