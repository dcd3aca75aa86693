//! run-task: build the dataset and train in one step, leaving behind the
//! dataset, its manifest, the run manifest, and the report.

use crate::args::RunTaskArgs;
use crate::commands::{build_task, fail_on, train_models, write_report};
use crate::util::{default_workers, parse_models};
use anyhow::Result;
use mcd_core::manifest::{file_sha256, RunManifest, RunRecipe};
use mcd_core::train::{RunReport, TaskData, TrainConfig};

pub fn run(args: &RunTaskArgs) -> Result<()> {
    let kinds = parse_models(&args.models)?;
    let built = build_task::execute(&args.build)?;

    let cfg = TrainConfig {
        epochs: args.epochs,
        patience: args.patience,
        seed: args.train_seed.unwrap_or(args.build.seed),
        ..TrainConfig::default()
    };
    let recipe = RunRecipe {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        run_seed: args.build.seed,
        corpus_path: built.corpus_path.display().to_string(),
        corpus_sha256: file_sha256(&built.corpus_path)?,
        max_vocab: args.build.corpus.max_vocab,
        backend: args.build.corpus.backend.kind(),
        tasks: vec![built.spec.clone()],
        n_per_class: args.build.n_per_class,
        strip_prompt: args.build.strip(),
        train: cfg.clone(),
        models: kinds.clone(),
    };
    RunManifest::new(recipe).save(&args.build.out.join("run.manifest.json"))?;

    let data =
        TaskData::from_documents(&built.split, args.build.strip(), built.spec.num_classes())?;
    let workers = args.workers.unwrap_or_else(default_workers);
    let vocab_size = built.corpus.vocab.size();
    let (results, failures) =
        train_models(&built.spec.name, &data, vocab_size, &kinds, &cfg, workers);

    if !results.is_empty() {
        let report = RunReport::new(
            &built.spec.name,
            built.spec.all_class_names(),
            built.spec.chance_percent(),
            results,
            args.build.seed,
            &file_sha256(&built.manifest_path)?,
        )?;
        write_report(&args.build.out, &report)?;
        println!("{}", serde_json::to_string(&report)?);
    }
    fail_on(failures)
}
