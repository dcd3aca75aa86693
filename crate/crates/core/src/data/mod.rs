//! Corpus ingestion, tokenization, task catalog, and dataset assembly.

pub mod corpus;
pub mod io;
pub mod synth;
pub mod task;
pub mod tokenize;
pub mod vocab;

pub use corpus::{ingest_corpus, Corpus, EncodedArticle, Split};
pub use task::{build_task, classifier_input, BackendSet, DatasetSplit, TaskSpec, MAX_INPUT_LEN};
pub use vocab::Vocabulary;
