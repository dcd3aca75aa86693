//! Generator family: decoding controls, two backend kinds behind one
//! dispatch enum, and the seeded article loop.

pub mod article;
pub mod backend;
pub mod config;
pub mod decode;
pub mod neural;
pub mod ngram;

pub use article::{generate_article, Document};
pub use backend::{fit_backend, BackendKind, LanguageModelBackend};
pub use config::{Decoding, GenerationConfig, SizeClass};
