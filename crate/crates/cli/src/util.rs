//! Shared plumbing: progress events, corpus resolution, model-name
//! parsing, and the worker pool that fans (task, model) jobs out.

use anyhow::{bail, Context, Result};
use mcd_core::data::synth::{synthesize_jsonl, SynthConfig};
use mcd_core::data::{ingest_corpus, BackendSet, Corpus, TaskSpec};
use mcd_core::gen::{fit_backend, BackendKind, SizeClass};
use mcd_core::zoo::{EncoderKind, ALL_KINDS};
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// One structured progress event per line on stderr; stdout stays
/// reserved for command results.
pub fn emit(value: serde_json::Value) {
    eprintln!("{value}");
}

pub fn backend_name(kind: BackendKind) -> &'static str {
    match kind {
        BackendKind::Ngram => "ngram",
        BackendKind::TinyNeural => "tiny-neural",
    }
}

/// Accepts snake_case and kebab-case model names; empty selection means
/// all five architectures, in catalog order.
pub fn parse_models(names: &[String]) -> Result<Vec<EncoderKind>> {
    if names.is_empty() {
        return Ok(ALL_KINDS.to_vec());
    }
    let mut kinds = Vec::new();
    for name in names {
        let Ok(kind) = EncoderKind::from_name(&name.replace('_', "-")) else {
            let valid: Vec<&str> = ALL_KINDS.iter().map(|k| k.name()).collect();
            bail!("--models: unknown model {name:?}; valid names: {}", valid.join(", "));
        };
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    Ok(kinds)
}

/// Loads the corpus at `path`, or synthesizes one under `out` sized for
/// `n_per_class` draws per split. The returned path is what manifests
/// record, so reruns resolve the same bytes either way.
pub fn resolve_corpus(
    path: Option<&Path>,
    out: &Path,
    n_per_class: usize,
    max_vocab: usize,
) -> Result<(PathBuf, Corpus)> {
    let path = match path {
        Some(p) => {
            if !p.exists() {
                bail!("corpus {} does not exist", p.display());
            }
            p.to_path_buf()
        }
        None => {
            let cfg = SynthConfig {
                num_articles: (n_per_class + n_per_class / 4 + 40).max(240),
                ..SynthConfig::default()
            };
            std::fs::create_dir_all(out)?;
            let dest = out.join("corpus.jsonl");
            std::fs::write(&dest, synthesize_jsonl(&cfg))?;
            emit(serde_json::json!({
                "event": "corpus_synthesized",
                "path": dest.display().to_string(),
                "articles": cfg.num_articles,
            }));
            dest
        }
    };
    let corpus = ingest_corpus(&path, max_vocab)
        .with_context(|| format!("corpus {}", path.display()))?;
    emit(serde_json::json!({
        "event": "corpus_ready",
        "path": path.display().to_string(),
        "articles": corpus.articles.len(),
        "vocab": corpus.vocab.size(),
    }));
    Ok((path, corpus))
}

/// Fits one backend per size class the task touches.
pub fn fit_backends(
    corpus: &Corpus,
    kind: BackendKind,
    sizes: &[SizeClass],
    seed: u64,
) -> Result<BackendSet> {
    let seqs = corpus.train_sequences();
    let mut set = BackendSet::new();
    for &size in sizes {
        let backend = fit_backend(&seqs, kind, size, corpus.vocab.size(), seed)?;
        set.insert(size, backend);
        emit(serde_json::json!({
            "event": "backend_ready",
            "kind": backend_name(kind),
            "size": size.name(),
        }));
    }
    Ok(set)
}

pub fn task_sizes(spec: &TaskSpec) -> Vec<SizeClass> {
    let mut sizes = Vec::new();
    for c in &spec.classes {
        if !sizes.contains(&c.size_class) {
            sizes.push(c.size_class);
        }
    }
    sizes
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs `job` over `inputs` on up to `workers` threads; results come back
/// in input order. Each job is single-threaded by contract.
pub fn run_pool<I, R, F>(workers: usize, inputs: Vec<I>, job: F) -> Vec<R>
where
    I: Send,
    R: Send,
    F: Fn(I) -> R + Sync,
{
    let workers = workers.max(1).min(inputs.len().max(1));
    let queue: Mutex<VecDeque<(usize, I)>> = Mutex::new(inputs.into_iter().enumerate().collect());
    let results: Vec<Mutex<Option<R>>> =
        (0..queue.lock().unwrap().len()).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let next = queue.lock().unwrap().pop_front();
                let Some((idx, input)) = next else { break };
                *results[idx].lock().unwrap() = Some(job(input));
            });
        }
    });
    results.into_iter().map(|slot| slot.into_inner().unwrap().unwrap()).collect()
}

/// Resolves --data to the dataset manifest path: either the file itself
/// or a directory holding exactly one *.manifest.json.
pub fn find_manifest(data: &Path) -> Result<PathBuf> {
    if data.is_file() {
        return Ok(data.to_path_buf());
    }
    if !data.is_dir() {
        bail!("dataset path {} does not exist", data.display());
    }
    let mut found = Vec::new();
    for entry in std::fs::read_dir(data)? {
        let path = entry?.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| {
            n.ends_with(".manifest.json") && !n.starts_with("run.")
        }) {
            found.push(path);
        }
    }
    match found.len() {
        0 => bail!("no dataset manifest (*.manifest.json) in {}", data.display()),
        1 => Ok(found.pop().unwrap()),
        _ => bail!(
            "multiple dataset manifests in {}; pass one explicitly",
            data.display()
        ),
    }
}
