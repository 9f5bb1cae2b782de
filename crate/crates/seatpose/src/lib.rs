//! Seated pose estimation from chair pressure maps.
//!
//! The pipeline turns a 80x28 pressure video plus a chair scan into a
//! full-body joint-rotation sequence:
//!
//! 1. [`body`] defines the 22-joint skeleton, forward kinematics, capsule
//!    surface sampling, and per-frame motion descriptors.
//! 2. [`sim`] drapes a virtual pressure mat over a scanned chair, settles a
//!    posed body onto it, and renders calibrated pressure maps, which lets us
//!    grow the training corpus synthetically.
//! 3. [`quantizer`] learns a discrete codebook of short motion snippets
//!    (a VQ-VAE over windowed descriptors).
//! 4. [`predictor`] autoregressively maps pressure + chair geometry to
//!    codebook tokens, which decode back into poses.
//! 5. [`metrics`] and [`analysis`] score reconstructions and derive
//!    ergonomic quantities (centre of mass, spine angles, activity labels).
//!
//! Everything runs on a single CPU core with deterministic seeding: the same
//! config and inputs reproduce checkpoints and reports bit for bit.

pub mod analysis;
pub mod body;
pub mod config;
pub mod data;
pub mod error;
pub mod manifest;
pub mod metrics;
pub mod nn;
pub mod predictor;
pub mod quantizer;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
