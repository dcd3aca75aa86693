//! Dataset serialization: one JSONL record per document plus a sidecar
//! manifest carrying everything needed to rebuild the file bit for bit.

use crate::data::corpus::Split;
use crate::data::task::{classifier_input, DatasetSplit, TaskSpec};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

/// Classifier-ready record: tokens already prompt-stripped and capped as
/// recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct DatasetRecord {
    pub task: String,
    pub split: Split,
    pub label: usize,
    pub label_name: String,
    pub tokens: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub task: TaskSpec,
    pub run_seed: u64,
    pub n_per_class: usize,
    pub strip_prompt: bool,
    pub backend: String,
    pub corpus_path: String,
    pub vocab_fingerprint: String,
    /// Token id space of the records; classifiers must embed exactly this many.
    pub vocab_size: usize,
    pub tool_version: String,
    /// Document counts keyed by split name.
    pub counts: BTreeMap<String, usize>,
}

pub fn dataset_records(
    task_name: &str,
    ds: &DatasetSplit,
    strip_prompt: bool,
) -> Result<Vec<DatasetRecord>> {
    let mut records = Vec::with_capacity(ds.len());
    for split in [Split::Train, Split::Dev, Split::Test] {
        for doc in ds.split(split) {
            let tokens = classifier_input(doc, strip_prompt).ok_or_else(|| {
                Error::invalid(
                    "dataset_records",
                    format!("document from article {} has no classifier input", doc.source_article_id),
                )
            })?;
            records.push(DatasetRecord {
                task: task_name.to_string(),
                split,
                label: doc.label,
                label_name: doc.label_name.clone(),
                tokens,
            });
        }
    }
    Ok(records)
}

pub fn write_dataset_jsonl(mut w: impl Write, records: &[DatasetRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_dataset_jsonl(r: impl BufRead) -> Result<Vec<DatasetRecord>> {
    let mut records = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DatasetRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                line: idx + 1,
                msg: e.to_string(),
            })?;
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(records)
}

/// Writes `<task>.jsonl` and `<task>.manifest.json` under `dir`; returns
/// both paths. The manifest's counts are filled from the data.
pub fn write_dataset(
    dir: &Path,
    ds: &DatasetSplit,
    mut manifest: DatasetManifest,
    strip_prompt: bool,
) -> Result<(PathBuf, PathBuf)> {
    let records = dataset_records(&manifest.task.name, ds, strip_prompt)?;
    manifest.strip_prompt = strip_prompt;
    manifest.counts = BTreeMap::from([
        ("train".to_string(), ds.train.len()),
        ("dev".to_string(), ds.dev.len()),
        ("test".to_string(), ds.test.len()),
    ]);
    std::fs::create_dir_all(dir)?;
    let stem = manifest.task.name.replace('+', "_");
    let data_path = dir.join(format!("{stem}.jsonl"));
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    let mut f = std::io::BufWriter::new(std::fs::File::create(&data_path)?);
    write_dataset_jsonl(&mut f, &records)?;
    f.flush()?;
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok((data_path, manifest_path))
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
