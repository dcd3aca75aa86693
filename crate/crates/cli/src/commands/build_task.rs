//! build-task: materialize a labeled dataset plus the manifest that makes
//! it reproducible.

use crate::args::BuildTaskArgs;
use crate::util::{backend_name, emit, fit_backends, resolve_corpus, task_sizes};
use anyhow::Result;
use mcd_core::data::io::{write_dataset, DatasetManifest};
use mcd_core::data::{build_task, Corpus, DatasetSplit, TaskSpec};
use std::path::PathBuf;

pub struct Built {
    pub spec: TaskSpec,
    pub corpus_path: PathBuf,
    pub corpus: Corpus,
    pub split: DatasetSplit,
    pub data_path: PathBuf,
    pub manifest_path: PathBuf,
}

pub fn execute(args: &BuildTaskArgs) -> Result<Built> {
    let spec = TaskSpec::from_name(&args.task, args.seed)?;
    let (corpus_path, corpus) =
        resolve_corpus(args.corpus.corpus.as_deref(), &args.out, args.n_per_class, args.corpus.max_vocab)?;
    let backends =
        fit_backends(&corpus, args.corpus.backend.kind(), &task_sizes(&spec), args.seed)?;
    let split = build_task(&spec, &corpus, &backends, args.n_per_class, args.seed)?;
    let manifest = DatasetManifest {
        task: spec.clone(),
        run_seed: args.seed,
        n_per_class: args.n_per_class,
        strip_prompt: args.strip(),
        backend: backend_name(args.corpus.backend.kind()).to_string(),
        corpus_path: corpus_path.display().to_string(),
        vocab_fingerprint: corpus.vocab.fingerprint(),
        vocab_size: corpus.vocab.size(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        counts: Default::default(),
    };
    let (data_path, manifest_path) = write_dataset(&args.out, &split, manifest, args.strip())?;
    emit(serde_json::json!({
        "event": "dataset_written",
        "task": spec.name,
        "path": data_path.display().to_string(),
        "train": split.train.len(), "dev": split.dev.len(), "test": split.test.len(),
    }));
    Ok(Built { spec, corpus_path, corpus, split, data_path, manifest_path })
}

pub fn run(args: &BuildTaskArgs) -> Result<()> {
    let built = execute(args)?;
    println!(
        "{}",
        serde_json::json!({
            "dataset": built.data_path.display().to_string(),
            "manifest": built.manifest_path.display().to_string(),
        })
    );
    Ok(())
}
