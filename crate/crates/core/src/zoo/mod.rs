//! The classifier family: five encoders behind one embed → encode → pool →
//! project scaffold.

pub mod classifier;
pub mod spec;

pub use classifier::Classifier;
pub use spec::{EncoderKind, EncoderSpec, ALL_KINDS};
