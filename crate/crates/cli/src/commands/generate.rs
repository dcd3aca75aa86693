//! generate: one JSONL of machine articles per configuration block.
//! Deterministic for a fixed seed, so a rerun reproduces every byte.

use crate::args::GenerateArgs;
use crate::config::load_config_file;
use crate::util::{backend_name, emit, fit_backends};
use anyhow::{bail, Context, Result};
use mcd_core::data::ingest_corpus;
use mcd_core::gen::{GenerationConfig, SizeClass};
use mcd_core::manifest::file_sha256;
use mcd_core::seeding::derive_seed;
use serde::Serialize;
use std::io::Write;

#[derive(Serialize)]
struct GeneratedRecord<'a> {
    config: &'a str,
    article: &'a str,
    tokens: &'a [u32],
    text: String,
}

#[derive(Serialize)]
struct GenerateManifest {
    tool_version: String,
    seed: u64,
    n: usize,
    corpus_path: String,
    corpus_sha256: String,
    max_vocab: usize,
    vocab_fingerprint: String,
    backend: String,
    configs: Vec<(String, GenerationConfig)>,
}

pub fn run(args: &GenerateArgs) -> Result<()> {
    let file = load_config_file(&args.config)?;
    if !args.corpus.exists() {
        bail!("corpus {} does not exist", args.corpus.display());
    }
    let corpus = ingest_corpus(&args.corpus, args.max_vocab)
        .with_context(|| format!("corpus {}", args.corpus.display()))?;
    let vocab_size = corpus.vocab.size();

    // Resolve and validate every config before spending time on backends.
    let mut configs: Vec<(String, GenerationConfig)> = Vec::new();
    for (i, entry) in file.config.iter().enumerate() {
        let cfg = entry.to_generation_config(derive_seed(args.seed, i as u64))?;
        cfg.validate(vocab_size).with_context(|| format!("config {:?}", entry.name))?;
        configs.push((entry.name.clone(), cfg));
    }

    let mut sizes: Vec<SizeClass> = Vec::new();
    for (_, cfg) in &configs {
        if !sizes.contains(&cfg.size_class) {
            sizes.push(cfg.size_class);
        }
    }
    let backends = fit_backends(&corpus, args.backend.kind(), &sizes, args.seed)?;

    std::fs::create_dir_all(&args.out)?;
    let mut outputs = Vec::new();
    for (name, cfg) in &configs {
        let backend = backends.get(cfg.size_class)?;
        let path = args.out.join(format!("{name}.jsonl"));
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        let mut written = 0;
        for article in &corpus.articles {
            if written == args.n {
                break;
            }
            let mut per_doc = cfg.clone();
            per_doc.seed = derive_seed(cfg.seed, article.index as u64);
            let Some(doc) =
                mcd_core::gen::generate_article(backend, &per_doc, &article.title, &article.body)?
            else {
                continue;
            };
            let record = GeneratedRecord {
                config: name,
                article: &article.id,
                tokens: &doc.tokens,
                text: corpus.vocab.decode(&doc.tokens).join(" "),
            };
            serde_json::to_writer(&mut w, &record)?;
            w.write_all(b"\n")?;
            written += 1;
        }
        w.flush()?;
        if written < args.n {
            bail!(
                "config {name:?}: only {written} of {} articles were eligible \
                 (need body length >= cond_len)",
                args.n
            );
        }
        emit(serde_json::json!({
            "event": "generated", "config": name, "path": path.display().to_string(),
            "records": written,
        }));
        outputs.push(path);
    }

    let manifest = GenerateManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: args.seed,
        n: args.n,
        corpus_path: args.corpus.display().to_string(),
        corpus_sha256: file_sha256(&args.corpus)?,
        max_vocab: args.max_vocab,
        vocab_fingerprint: corpus.vocab.fingerprint(),
        backend: backend_name(args.backend.kind()).to_string(),
        configs,
    };
    let manifest_path = args.out.join("generate.manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest)?;
    body.push('\n');
    std::fs::write(&manifest_path, body)?;

    println!(
        "{}",
        serde_json::json!({
            "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "manifest": manifest_path.display().to_string(),
        })
    );
    Ok(())
}
