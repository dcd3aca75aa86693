//! Dense tensors, a reverse-mode tape, layer compositions, and Adam.

pub mod graph;
mod kernels;
pub mod nn;
pub mod optim;
pub mod tensor;

pub use graph::{Graph, Var};
pub use optim::{Adam, AdamConfig};
pub use tensor::Tensor;
