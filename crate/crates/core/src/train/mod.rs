//! Training loop, evaluation, statistics, and report emission.

pub mod eval;
pub mod pairwise;
pub mod report;
pub mod stats;
pub mod trainer;

pub use eval::{evaluate, Evaluation};
pub use pairwise::{pairwise_ordering_study, Axis, PairwiseStudy};
pub use report::{gain_percent, render_order_deltas, render_table, ModelResult, RunReport};
pub use trainer::{train, EarlyStopper, EpochStats, StopDecision, TaskData, TrainConfig, TrainOutcome};
