//! Minimal deterministic neural-network toolkit.
//!
//! Reverse-mode autodiff on `f64` matrices, built for reproducibility rather
//! than raw speed: single-threaded, no SIMD tricks beyond what the matrix
//! multiply backend provides, and every random draw comes from a caller-owned
//! seeded generator. Training twice with the same seed produces bit-identical
//! parameters.
//!
//! The design is a flat tape of eagerly-evaluated ops ([`Tape`]); parameters
//! live outside the tape in a [`ParamStore`] so one set of weights can be
//! threaded through many per-batch graphs.

mod checkpoint;
mod graph;
mod layers;
mod optim;

#[cfg(test)]
mod tests;

pub use checkpoint::Checkpoint;
pub use graph::{row_softmax, Im2ColSpec, NodeId, ParamId, ParamStore, Tape};
pub use layers::{he_normal, Conv2d, Linear};
pub use optim::{cosine_lr, AdamW};
