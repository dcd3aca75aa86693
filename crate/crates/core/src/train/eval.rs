//! Test-time scoring: accuracy, confusion matrix, per-class recall.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::zoo::Classifier;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evaluation {
    /// Percent correct.
    pub accuracy: f64,
    /// confusion[i][j] = count(true class i, predicted class j).
    pub confusion: Vec<Vec<usize>>,
    /// Percent recall per true class; 0 when the class has no examples.
    pub recalls: Vec<f64>,
    pub total: usize,
    pub correct: usize,
}

pub fn evaluate<S: Scalar>(
    classifier: &Classifier<S>,
    docs: &[(Vec<u32>, usize)],
    batch_size: usize,
) -> Result<Evaluation> {
    if docs.is_empty() {
        return Err(Error::EmptySequence);
    }
    let c = classifier.spec.num_classes;
    let mut confusion = vec![vec![0usize; c]; c];
    for chunk in docs.chunks(batch_size.max(1)) {
        let refs: Vec<&[u32]> = chunk.iter().map(|(t, _)| t.as_slice()).collect();
        let preds = classifier.predict(&refs)?;
        for ((_, label), pred) in chunk.iter().zip(preds) {
            if *label >= c {
                return Err(Error::LabelOutOfRange { label: *label, classes: c });
            }
            confusion[*label][pred] += 1;
        }
    }
    let total = docs.len();
    let correct: usize = (0..c).map(|i| confusion[i][i]).sum();
    let recalls: Vec<f64> = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let n: usize = row.iter().sum();
            if n == 0 {
                0.0
            } else {
                100.0 * row[i] as f64 / n as f64
            }
        })
        .collect();
    Ok(Evaluation { accuracy: 100.0 * correct as f64 / total as f64, confusion, recalls, total, correct })
}
