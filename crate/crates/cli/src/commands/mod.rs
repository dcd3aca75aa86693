pub mod build_task;
pub mod generate;
pub mod pairwise;
pub mod report;
pub mod run_task;
pub mod train;

use crate::util::{emit, run_pool};
use anyhow::{bail, Result};
use mcd_core::train::{evaluate, train, ModelResult, RunReport, TrainConfig};
use mcd_core::zoo::{Classifier, EncoderKind, EncoderSpec};
use std::path::{Path, PathBuf};

/// Trains the selected models as independent jobs on a worker pool and
/// keeps per-model failures separate so one bad job cannot sink the rest.
pub fn train_models(
    task: &str,
    data: &mcd_core::train::TaskData,
    vocab_size: usize,
    kinds: &[EncoderKind],
    cfg: &TrainConfig,
    workers: usize,
) -> (Vec<ModelResult>, Vec<(String, String, String)>) {
    let outcomes = run_pool(workers, kinds.to_vec(), |kind| {
        emit(serde_json::json!({
            "event": "model_started", "task": task, "model": kind.name(),
        }));
        let run = || -> mcd_core::Result<ModelResult> {
            let clf: Classifier<f64> =
                Classifier::new(EncoderSpec::new(kind, data.num_classes), vocab_size, cfg.seed)?;
            let out = train(clf, data, cfg)?;
            let eval = evaluate(&out.classifier, &data.test, cfg.batch_size)?;
            Ok(ModelResult::new(kind, &eval, out.best_epoch, out.history.len()))
        };
        (kind, run())
    });

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (kind, outcome) in outcomes {
        match outcome {
            Ok(r) => {
                emit(serde_json::json!({
                    "event": "model_finished", "task": task, "model": kind.name(),
                    "test_accuracy": r.test_accuracy, "best_epoch": r.best_epoch,
                    "epochs_ran": r.epochs_ran,
                }));
                results.push(r);
            }
            Err(e) => {
                let msg = e.to_string();
                emit(serde_json::json!({
                    "event": "model_failed", "task": task, "model": kind.name(),
                    "error": msg,
                }));
                failures.push((task.to_string(), kind.name().to_string(), msg));
            }
        }
    }
    (results, failures)
}

/// Writes report.json next to a rendered report.txt; returns both paths.
pub fn write_report(out: &Path, report: &RunReport) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out)?;
    let json_path = out.join("report.json");
    let text_path = out.join("report.txt");
    let mut body = serde_json::to_string_pretty(report)?;
    body.push('\n');
    std::fs::write(&json_path, body)?;
    std::fs::write(&text_path, mcd_core::train::render_table(std::slice::from_ref(report)))?;
    Ok((json_path, text_path))
}

/// Exit-code contract: zero only when every (task, model) job completed.
pub fn fail_on(failures: Vec<(String, String, String)>) -> Result<()> {
    if failures.is_empty() {
        return Ok(());
    }
    let pairs: Vec<String> =
        failures.iter().map(|(t, m, e)| format!("({t}, {m}): {e}")).collect();
    bail!("{} job(s) failed: {}", pairs.len(), pairs.join("; "));
}
