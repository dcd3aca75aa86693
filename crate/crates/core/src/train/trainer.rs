//! Mini-batch Adam training with dev-accuracy early stopping and
//! best-checkpoint selection.

use crate::autodiff::optim::{Adam, AdamConfig};
use crate::autodiff::{Graph, Tensor};
use crate::data::corpus::Split;
use crate::data::io::DatasetRecord;
use crate::data::task::{classifier_input, DatasetSplit};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seeding::derive_seed;
use crate::train::eval::evaluate;
use crate::zoo::Classifier;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub seed: u64,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 50, batch_size: 64, patience: 3, seed: 0, learning_rate: 1e-3 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 || self.patience < 1 || self.batch_size < 1 {
            return Err(Error::InvalidConfig(format!(
                "epochs {}, patience {}, batch_size {} must all be >= 1",
                self.epochs, self.patience, self.batch_size
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Stops after `patience` consecutive epochs without strict improvement.
#[derive(Debug)]
pub struct EarlyStopper {
    patience: usize,
    best: Option<f64>,
    best_epoch: usize,
    streak: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> EarlyStopper {
        EarlyStopper { patience, best: None, best_epoch: 0, streak: 0 }
    }

    /// Epochs are 1-based. Ties do not improve, so the earlier epoch keeps
    /// the checkpoint.
    pub fn observe(&mut self, epoch: usize, dev_accuracy: f64) -> StopDecision {
        let improved = match self.best {
            Some(best) => dev_accuracy > best,
            None => true,
        };
        if improved {
            self.best = Some(dev_accuracy);
            self.best_epoch = epoch;
            self.streak = 0;
            StopDecision::Continue
        } else {
            self.streak += 1;
            if self.streak >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Continue
            }
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_accuracy(&self) -> Option<f64> {
        self.best
    }
}

/// Label-paired token sequences, one list per split.
#[derive(Debug, Clone, Default)]
pub struct TaskData {
    pub train: Vec<(Vec<u32>, usize)>,
    pub dev: Vec<(Vec<u32>, usize)>,
    pub test: Vec<(Vec<u32>, usize)>,
    pub num_classes: usize,
}

impl TaskData {
    pub fn from_documents(
        ds: &DatasetSplit,
        strip_prompt: bool,
        num_classes: usize,
    ) -> Result<TaskData> {
        let mut data = TaskData { num_classes, ..TaskData::default() };
        for (split, docs) in
            [(Split::Train, &ds.train), (Split::Dev, &ds.dev), (Split::Test, &ds.test)]
        {
            let out = data.split_mut(split);
            for doc in docs {
                if doc.label >= num_classes {
                    return Err(Error::LabelOutOfRange { label: doc.label, classes: num_classes });
                }
                let tokens = classifier_input(doc, strip_prompt).ok_or_else(|| {
                    Error::invalid("task_data", "document with empty classifier input")
                })?;
                out.push((tokens, doc.label));
            }
        }
        Ok(data)
    }

    pub fn from_records(records: &[DatasetRecord], num_classes: usize) -> Result<TaskData> {
        let mut data = TaskData { num_classes, ..TaskData::default() };
        for r in records {
            if r.label >= num_classes {
                return Err(Error::LabelOutOfRange { label: r.label, classes: num_classes });
            }
            if r.tokens.is_empty() {
                return Err(Error::invalid("task_data", "record with no tokens"));
            }
            data.split_mut(r.split).push((r.tokens.clone(), r.label));
        }
        Ok(data)
    }

    fn split_mut(&mut self, s: Split) -> &mut Vec<(Vec<u32>, usize)> {
        match s {
            Split::Train => &mut self.train,
            Split::Dev => &mut self.dev,
            Split::Test => &mut self.test,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

pub struct TrainOutcome<S: Scalar> {
    pub classifier: Classifier<S>,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_dev_accuracy: f64,
}

/// Train to the best-dev checkpoint. The returned classifier carries the
/// parameters of `best_epoch`, never the last epoch's.
pub fn train<S: Scalar>(
    mut classifier: Classifier<S>,
    data: &TaskData,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<S>> {
    cfg.validate()?;
    if data.train.is_empty() || data.dev.is_empty() {
        return Err(Error::invalid("train", "train and dev splits must be nonempty"));
    }
    let mut adam: Adam<S> = Adam::new(
        AdamConfig { lr: S::from_f64_lossy(cfg.learning_rate), ..AdamConfig::default() },
        &classifier.param_sizes(),
    );
    let mut stopper = EarlyStopper::new(cfg.patience);
    let mut history = Vec::new();
    let mut best_snapshot = classifier.snapshot_params();

    for epoch in 1..=cfg.epochs {
        let mut order: Vec<usize> = (0..data.train.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, epoch as u64));
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let docs: Vec<&[u32]> = chunk.iter().map(|&i| data.train[i].0.as_slice()).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| data.train[i].1).collect();

            let mut g: Graph<S> = Graph::new();
            let vars = classifier.graph_params(&mut g, true);
            let (loss, _) = classifier.batch_loss(&mut g, &vars, &docs, &labels)?;
            let loss_val = g.value(loss).item().as_f64();
            if !loss_val.is_finite() {
                return Err(Error::NanLoss { seed: cfg.seed, epoch, batch: batch_idx });
            }
            g.backward(loss)?;
            let grads: Vec<Tensor<S>> = vars.iter().map(|&v| g.leaf_grad(v)).collect();
            drop(g);
            adam.step(&mut classifier.params_mut(), &grads)?;
            loss_sum += loss_val;
            batches += 1;
        }

        let dev_accuracy = evaluate(&classifier, &data.dev, cfg.batch_size)?.accuracy;
        history.push(EpochStats { epoch, train_loss: loss_sum / batches as f64, dev_accuracy });
        let decision = stopper.observe(epoch, dev_accuracy);
        if stopper.best_epoch() == epoch {
            best_snapshot = classifier.snapshot_params();
        }
        if decision == StopDecision::Stop {
            break;
        }
    }

    classifier.restore_params(&best_snapshot)?;
    Ok(TrainOutcome {
        classifier,
        history,
        best_epoch: stopper.best_epoch(),
        best_dev_accuracy: stopper.best_accuracy().unwrap_or(0.0),
    })
}
