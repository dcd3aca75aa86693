//! train: fit the selected classifiers on a dataset built earlier and
//! write the run report.

use crate::args::TrainArgs;
use crate::commands::{fail_on, train_models, write_report};
use crate::util::{default_workers, find_manifest, parse_models};
use anyhow::{Context, Result};
use mcd_core::data::io::{read_dataset_jsonl, read_manifest};
use mcd_core::manifest::file_sha256;
use mcd_core::train::{RunReport, TaskData, TrainConfig};

pub fn run(args: &TrainArgs) -> Result<()> {
    let manifest_path = find_manifest(&args.data)?;
    let manifest = read_manifest(&manifest_path)
        .with_context(|| format!("dataset manifest {}", manifest_path.display()))?;
    let data_path = {
        let name = manifest_path
            .file_name()
            .and_then(|n| n.to_str())
            .map(|n| n.replace(".manifest.json", ".jsonl"))
            .unwrap_or_default();
        manifest_path.with_file_name(name)
    };
    let records = read_dataset_jsonl(std::io::BufReader::new(
        std::fs::File::open(&data_path)
            .with_context(|| format!("dataset {}", data_path.display()))?,
    ))?;
    let data = TaskData::from_records(&records, manifest.task.num_classes())?;

    let cfg = TrainConfig {
        epochs: args.epochs,
        patience: args.patience,
        seed: args.train_seed.unwrap_or(manifest.run_seed),
        ..TrainConfig::default()
    };
    let kinds = parse_models(&args.models)?;
    let workers = args.workers.unwrap_or_else(default_workers);
    let (results, failures) =
        train_models(&manifest.task.name, &data, manifest.vocab_size, &kinds, &cfg, workers);

    if !results.is_empty() {
        let report = RunReport::new(
            &manifest.task.name,
            manifest.task.all_class_names(),
            manifest.task.chance_percent(),
            results,
            manifest.run_seed,
            &file_sha256(&manifest_path)?,
        )?;
        write_report(&args.out, &report)?;
        println!("{}", serde_json::to_string(&report)?);
    }
    fail_on(failures)
}
