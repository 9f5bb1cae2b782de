//! Motion tokenization: a VQ-VAE that maps each descriptor window to one
//! entry of a learned codebook and decodes entries back to pose frames.
//!
//! The encoder collapses a whole window (default 15 frames) to a single
//! 512-vector, so one token stands for one second of motion. Quantization
//! uses a straight-through gradient; the codebook itself learns by
//! exponential moving average, never by backprop.

mod codebook;
mod model;
mod train;

pub use codebook::{Codebook, TokenSequence, CLUSTER_EPS};
pub use model::{quantization_dropout, MotionQuantizer, CHECKPOINT_KIND};
pub use train::{mq_loss, reconstruction_mse, train_mq, AnnealSchedule, MqTrainReport};
