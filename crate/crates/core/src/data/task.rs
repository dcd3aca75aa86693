//! The ten discrimination tasks and their +h variants: class lists, base
//! configuration for the non-varied axes, and assembly of balanced
//! train/dev/test splits keyed by source article.

use crate::data::corpus::{Corpus, EncodedArticle, Split};
use crate::error::{Error, Result};
use crate::gen::article::{generate_article, Document};
use crate::gen::backend::LanguageModelBackend;
use crate::gen::config::{Decoding, GenerationConfig, SizeClass};
use crate::seeding::derive_seed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Hard cap on classifier input length.
pub const MAX_INPUT_LEN: usize = 500;

pub const TASK_NAMES: [&str; 10] = ["P1", "P2", "P3", "K1", "K2", "K3", "C1", "C2", "C3", "S1"];

/// One discrimination task: which axis varies and over which values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub name: String,
    pub classes: Vec<GenerationConfig>,
    pub class_names: Vec<String>,
    pub include_human: bool,
    pub base_config: GenerationConfig,
}

/// Defaults for every axis a task does not vary. max_len tracks ℓ so the
/// continuation budget is the same for every class.
pub fn base_config(run_seed: u64) -> GenerationConfig {
    GenerationConfig {
        size_class: SizeClass::Large,
        decoding: Decoding::TopK { k: 40 },
        temperature: 1.0,
        cond_len: 10,
        max_len: 510 + 10,
        seed: run_seed,
    }
}

impl TaskSpec {
    /// Build the spec for a catalog name, "+h" suffix included. Per-class
    /// seeds derive from `run_seed` and the class index.
    pub fn from_name(full_name: &str, run_seed: u64) -> Result<TaskSpec> {
        let (name, include_human) = match full_name.strip_suffix("+h") {
            Some(base) => (base, true),
            None => (full_name, false),
        };
        let base = base_config(run_seed);
        let (classes, class_names): (Vec<GenerationConfig>, Vec<String>) = match name {
            "P1" => p_classes(&base, &[0.95, 0.90, 0.85]),
            "P2" => p_classes(&base, &[0.95, 0.85, 0.75]),
            "P3" => p_classes(&base, &[0.95, 0.90, 0.85, 0.80, 0.75]),
            "K1" => k_classes(&base, &[10, 20, 30]),
            "K2" => k_classes(&base, &[10, 30, 50]),
            "K3" => k_classes(&base, &[10, 20, 30, 40, 50]),
            "C1" => c_classes(&base, &[10, 50, 100]),
            "C2" => c_classes(&base, &[10, 20, 30]),
            "C3" => c_classes(&base, &[10, 20, 30, 40, 50]),
            "S1" => s_classes(&base),
            _ => {
                return Err(Error::UnknownTask {
                    name: full_name.to_string(),
                    valid: TASK_NAMES.join(", "),
                })
            }
        };
        let mut spec = TaskSpec {
            name: full_name.to_string(),
            classes,
            class_names,
            include_human,
            base_config: base,
        };
        for (i, c) in spec.classes.iter_mut().enumerate() {
            c.seed = derive_seed(run_seed, i as u64);
        }
        Ok(spec)
    }

    /// Custom class list (pairwise studies, null tasks). Seeds are set the
    /// same way as for catalog tasks.
    pub fn custom(
        name: &str,
        mut classes: Vec<GenerationConfig>,
        class_names: Vec<String>,
        include_human: bool,
        run_seed: u64,
    ) -> TaskSpec {
        for (i, c) in classes.iter_mut().enumerate() {
            c.seed = derive_seed(run_seed, i as u64);
        }
        TaskSpec {
            name: name.to_string(),
            classes,
            class_names,
            include_human,
            base_config: base_config(run_seed),
        }
    }

    /// Total class count, human class included.
    pub fn num_classes(&self) -> usize {
        self.classes.len() + usize::from(self.include_human)
    }

    pub fn chance_percent(&self) -> f64 {
        100.0 / self.num_classes() as f64
    }

    /// All label names: machine classes, then "human" when present.
    pub fn all_class_names(&self) -> Vec<String> {
        let mut names = self.class_names.clone();
        if self.include_human {
            names.push("human".to_string());
        }
        names
    }

    pub fn required_sizes(&self) -> Vec<SizeClass> {
        let mut sizes: Vec<SizeClass> = self.classes.iter().map(|c| c.size_class).collect();
        sizes.dedup();
        sizes.sort_by_key(|s| s.name());
        sizes.dedup();
        sizes
    }

    fn max_cond_len(&self) -> usize {
        self.classes.iter().map(|c| c.cond_len).max().unwrap_or(0)
    }
}

fn p_classes(base: &GenerationConfig, ps: &[f64]) -> (Vec<GenerationConfig>, Vec<String>) {
    ps.iter()
        .map(|&p| {
            let mut c = base.clone();
            c.decoding = Decoding::TopP { p };
            (c, format!("p={p:.2}"))
        })
        .unzip()
}

fn k_classes(base: &GenerationConfig, ks: &[usize]) -> (Vec<GenerationConfig>, Vec<String>) {
    ks.iter()
        .map(|&k| {
            let mut c = base.clone();
            c.decoding = Decoding::TopK { k };
            (c, format!("k={k}"))
        })
        .unzip()
}

fn c_classes(base: &GenerationConfig, ls: &[usize]) -> (Vec<GenerationConfig>, Vec<String>) {
    ls.iter()
        .map(|&l| {
            let mut c = base.clone();
            c.cond_len = l;
            c.max_len = 510 + l;
            (c, format!("l={l}"))
        })
        .unzip()
}

fn s_classes(base: &GenerationConfig) -> (Vec<GenerationConfig>, Vec<String>) {
    SizeClass::ALL
        .iter()
        .map(|&s| {
            let mut c = base.clone();
            c.size_class = s;
            (c, format!("size={}", s.name()))
        })
        .unzip()
}

/// Fitted backends by size class.
pub struct BackendSet {
    backends: HashMap<SizeClass, LanguageModelBackend>,
}

impl BackendSet {
    pub fn new() -> BackendSet {
        BackendSet { backends: HashMap::new() }
    }

    pub fn insert(&mut self, size: SizeClass, backend: LanguageModelBackend) {
        self.backends.insert(size, backend);
    }

    pub fn get(&self, size: SizeClass) -> Result<&LanguageModelBackend> {
        self.backends
            .get(&size)
            .ok_or_else(|| Error::InvalidConfig(format!("no backend fitted for size {}", size.name())))
    }
}

impl Default for BackendSet {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<Document>,
    pub dev: Vec<Document>,
    pub test: Vec<Document>,
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.train.len() + self.dev.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn split(&self, s: Split) -> &[Document] {
        match s {
            Split::Train => &self.train,
            Split::Dev => &self.dev,
            Split::Test => &self.test,
        }
    }
}

/// Per-class article quota for one split: dev and test take ⌊n/10⌋ each,
/// train the rest.
pub fn split_quotas(n_per_class: usize) -> (usize, usize, usize) {
    let dev = n_per_class / 10;
    let test = n_per_class / 10;
    (n_per_class - dev - test, dev, test)
}

/// Generate the labeled dataset for one task. For every selected source
/// article, each machine class contributes one generated document (plus
/// the truncated human body when `include_human`), so splits stay balanced
/// and disjoint by construction.
pub fn build_task(
    spec: &TaskSpec,
    corpus: &Corpus,
    backends: &BackendSet,
    n_per_class: usize,
    run_seed: u64,
) -> Result<DatasetSplit> {
    let min_body = spec.max_cond_len();
    let eligible = |a: &&EncodedArticle| a.body.len() >= min_body && !a.body.is_empty();

    let mut pools: HashMap<Split, Vec<&EncodedArticle>> = HashMap::new();
    for a in corpus.articles.iter().filter(eligible) {
        pools.entry(a.split).or_default().push(a);
    }

    let (train_n, dev_n, test_n) = split_quotas(n_per_class);
    let mut out = DatasetSplit { train: Vec::new(), dev: Vec::new(), test: Vec::new() };
    for (split, want, stream) in [
        (Split::Train, train_n, 0u64),
        (Split::Dev, dev_n, 1),
        (Split::Test, test_n, 2),
    ] {
        let pool = pools.remove(&split).unwrap_or_default();
        if pool.len() < want {
            return Err(Error::InsufficientArticles { required: want, available: pool.len() });
        }
        let mut picked = pool;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(run_seed, 100 + stream));
        picked.shuffle(&mut rng);
        picked.truncate(want);

        let docs = match split {
            Split::Train => &mut out.train,
            Split::Dev => &mut out.dev,
            Split::Test => &mut out.test,
        };
        for article in picked {
            for (label, (config, name)) in
                spec.classes.iter().zip(&spec.class_names).enumerate()
            {
                let mut per_doc = config.clone();
                per_doc.seed = derive_seed(config.seed, article.index as u64);
                let doc = generate_article(
                    backends.get(per_doc.size_class)?,
                    &per_doc,
                    &article.title,
                    &article.body,
                )?
                .ok_or_else(|| {
                    Error::invalid(
                        "build_task",
                        format!("article {} shorter than eligibility bound", article.id),
                    )
                })?;
                docs.push(doc.stamp(label, name, &article.id));
            }
            if spec.include_human {
                let body: Vec<u32> =
                    article.body.iter().copied().take(MAX_INPUT_LEN).collect();
                docs.push(Document {
                    tokens: body,
                    label: spec.classes.len(),
                    label_name: "human".to_string(),
                    title: article.title.clone(),
                    prompt_boundary: 0,
                    source_article_id: article.id.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Classifier view of a document: the continuation alone by default, or
/// the full sequence; either way capped at [`MAX_INPUT_LEN`]. `None` marks
/// a document to exclude (nothing left after stripping).
pub fn classifier_input(doc: &Document, strip_prompt: bool) -> Option<Vec<u32>> {
    let seq: &[u32] = if strip_prompt { doc.continuation() } else { &doc.tokens };
    if seq.is_empty() {
        return None;
    }
    Some(seq.iter().copied().take(MAX_INPUT_LEN).collect())
}
