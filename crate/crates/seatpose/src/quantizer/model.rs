//! The motion quantizer: descriptor window in, one discrete token out, and
//! tokens back to pose frames.

use nalgebra::Vector3;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use crate::body::{canonicalize_axis_angle, FeatureChunk, PoseFrame, J};
use crate::nn::{Checkpoint, Linear, NodeId, ParamStore, Tape};
use crate::{Error, Result};

use super::codebook::Codebook;

/// Hidden width of the first encoder layer and last decoder layer.
const HIDDEN_WIDE: usize = 768;
/// Hidden width of the second encoder layer.
const HIDDEN_NARROW: usize = 512;

pub const CHECKPOINT_KIND: &str = "motion_quantizer";

/// VQ-VAE over flattened descriptor windows. The encoder collapses a whole
/// window to one latent; the codebook snaps it to a token; the decoder
/// rebuilds the window.
#[derive(Debug, Clone)]
pub struct MotionQuantizer {
    pub store: ParamStore,
    enc1: Linear,
    enc2: Linear,
    enc3: Linear,
    dec1: Linear,
    dec2: Linear,
    pub codebook: Codebook,
    pub t_frames: usize,
    pub window_seconds: f64,
    pub rate_hz: f64,
    pub dropout_p: f64,
}

impl MotionQuantizer {
    pub fn new(
        window_seconds: f64,
        rate_hz: f64,
        codebook_size: usize,
        token_width: usize,
        alpha: f64,
        dropout_p: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<MotionQuantizer> {
        let t_exact = window_seconds * rate_hz;
        let t_frames = t_exact.round() as usize;
        if t_frames == 0 || (t_exact - t_frames as f64).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "window of {window_seconds}s is not a whole number of frames at {rate_hz} Hz"
            )));
        }
        let width = FeatureChunk::flat_width(t_frames);
        let mut store = ParamStore::new();
        let enc1 = Linear::new(&mut store, rng, "mq.enc1", width, HIDDEN_WIDE);
        let enc2 = Linear::new(&mut store, rng, "mq.enc2", HIDDEN_WIDE, HIDDEN_NARROW);
        let enc3 = Linear::new(&mut store, rng, "mq.enc3", HIDDEN_NARROW, token_width);
        let dec1 = Linear::new(&mut store, rng, "mq.dec1", token_width, HIDDEN_WIDE);
        let dec2 = Linear::new(&mut store, rng, "mq.dec2", HIDDEN_WIDE, width);
        // Entries start as small noise around the origin; training reseeds
        // them from first-pass latents before the first step.
        let mut entries = Array2::zeros((codebook_size, token_width));
        for v in entries.iter_mut() {
            *v = 0.01 * (rng.random::<f64>() - 0.5);
        }
        let codebook = Codebook::new(entries, alpha)?;
        Ok(MotionQuantizer {
            store,
            enc1,
            enc2,
            enc3,
            dec1,
            dec2,
            codebook,
            t_frames,
            window_seconds,
            rate_hz,
            dropout_p,
        })
    }

    pub fn input_width(&self) -> usize {
        FeatureChunk::flat_width(self.t_frames)
    }

    pub fn token_width(&self) -> usize {
        self.codebook.width()
    }

    /// Encoder forward on the tape; `x` rows are flat windows.
    pub fn encode_node(&self, t: &mut Tape, x: NodeId) -> NodeId {
        let h = self.enc1.apply(t, &self.store, x);
        let h = t.relu(h);
        let h = self.enc2.apply(t, &self.store, h);
        let h = t.relu(h);
        self.enc3.apply(t, &self.store, h)
    }

    /// Decoder forward on the tape; rows are token embeddings.
    pub fn decode_node(&self, t: &mut Tape, emb: NodeId) -> NodeId {
        let h = self.dec1.apply(t, &self.store, emb);
        let h = t.relu(h);
        self.dec2.apply(t, &self.store, h)
    }

    /// Decoder forward with parameters held constant: gradients flow to the
    /// embeddings only. The predictor's sequence loss uses this.
    pub fn decode_node_frozen(&self, t: &mut Tape, emb: NodeId) -> NodeId {
        let h = self.dec1.apply_frozen(t, &self.store, emb);
        let h = t.relu(h);
        self.dec2.apply_frozen(t, &self.store, h)
    }

    /// Stacks chunks into a row matrix after shape validation.
    pub fn flatten_chunks(&self, chunks: &[FeatureChunk]) -> Result<Array2<f64>> {
        let width = self.input_width();
        let mut x = Array2::zeros((chunks.len(), width));
        for (r, c) in chunks.iter().enumerate() {
            if c.frames() != self.t_frames {
                return Err(Error::Dimension {
                    context: "MotionQuantizer chunk",
                    expected: format!("{} frames", self.t_frames),
                    got: format!("{} frames", c.frames()),
                });
            }
            let flat = c.flat();
            for (col, v) in flat.iter().enumerate() {
                x[(r, col)] = *v;
            }
        }
        Ok(x)
    }

    /// Frozen encoder pass over whole chunks: one latent row per chunk.
    pub fn encode_chunks(&self, chunks: &[FeatureChunk]) -> Result<Array2<f64>> {
        let x = self.flatten_chunks(chunks)?;
        Ok(self.encode_rows(x.view()))
    }

    /// Frozen encoder pass over pre-flattened rows.
    pub fn encode_rows(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut t = Tape::new();
        let xn = t.value(x.to_owned());
        let z = self.encode_node(&mut t, xn);
        t.val(z).to_owned()
    }

    /// Encode a single chunk to its latent.
    pub fn encode(&self, chunk: &FeatureChunk) -> Result<Array1<f64>> {
        let z = self.encode_chunks(std::slice::from_ref(chunk))?;
        Ok(z.index_axis(Axis(0), 0).to_owned())
    }

    /// Encode and hard-quantize a batch of chunks to token indices.
    pub fn tokenize(&self, chunks: &[FeatureChunk]) -> Result<Vec<usize>> {
        let z = self.encode_chunks(chunks)?;
        Ok(self.codebook.quantize_rows(z.view()).0)
    }

    /// Frozen decoder pass: one window of pose frames per embedding row.
    /// The root comes from the pelvis row of the position block; joint
    /// rotations come from the theta block, folded into canonical range.
    pub fn decode_embeddings(&self, embeddings: ArrayView2<f64>) -> Result<Vec<PoseFrame>> {
        if embeddings.ncols() != self.token_width() {
            return Err(Error::Dimension {
                context: "MotionQuantizer::decode_embeddings",
                expected: format!("{} columns", self.token_width()),
                got: format!("{} columns", embeddings.ncols()),
            });
        }
        let mut t = Tape::new();
        let e = t.value(embeddings.to_owned());
        let y = self.decode_node(&mut t, e);
        let flat = t.val(y);
        let mut frames = Vec::with_capacity(embeddings.nrows() * self.t_frames);
        for row in flat.rows() {
            let chunk = FeatureChunk::from_flat(row.as_slice().unwrap(), self.t_frames)?;
            for k in 0..self.t_frames {
                let root = Vector3::new(
                    chunk.positions[(k, 0, 0)],
                    chunk.positions[(k, 0, 1)],
                    chunk.positions[(k, 0, 2)],
                );
                let theta = (0..J)
                    .map(|j| {
                        canonicalize_axis_angle(Vector3::new(
                            chunk.theta[(k, j, 0)],
                            chunk.theta[(k, j, 1)],
                            chunk.theta[(k, j, 2)],
                        ))
                    })
                    .collect();
                frames.push(PoseFrame { theta, root });
            }
        }
        Ok(frames)
    }

    /// Decode token indices through their codebook embeddings.
    pub fn decode_tokens(&self, indices: &[usize]) -> Result<Vec<PoseFrame>> {
        let mut emb = Array2::zeros((indices.len(), self.token_width()));
        for (r, &i) in indices.iter().enumerate() {
            if i >= self.codebook.size() {
                return Err(Error::Range {
                    field: "token index",
                    value: i as f64,
                    min: 0.0,
                    max: (self.codebook.size() - 1) as f64,
                });
            }
            emb.row_mut(r).assign(&self.codebook.entry(i));
        }
        self.decode_embeddings(emb.view())
    }

    /// Full round trip for one chunk: encode, quantize, decode.
    pub fn reconstruct(&self, chunk: &FeatureChunk) -> Result<(usize, Vec<PoseFrame>)> {
        let z = self.encode(chunk)?;
        let (index, _) = self.codebook.quantize(z.view());
        let frames = self.decode_tokens(&[index])?;
        Ok((index, frames))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut meta = toml::Table::new();
        meta.insert("window_seconds".into(), toml::Value::Float(self.window_seconds));
        meta.insert("rate_hz".into(), toml::Value::Float(self.rate_hz));
        meta.insert("codebook_size".into(), toml::Value::Integer(self.codebook.size() as i64));
        meta.insert("token_width".into(), toml::Value::Integer(self.token_width() as i64));
        meta.insert("alpha".into(), toml::Value::Float(self.codebook.alpha));
        meta.insert("dropout_p".into(), toml::Value::Float(self.dropout_p));
        let mut ckpt = Checkpoint::new(CHECKPOINT_KIND, meta);
        for id in self.store.ids() {
            ckpt.push(self.store.name(id), self.store.value(id).clone());
        }
        ckpt.push("codebook.entries", self.codebook.entries().clone());
        ckpt.push(
            "codebook.ema_cluster_size",
            self.codebook.cluster_sizes().clone().insert_axis(Axis(0)),
        );
        ckpt.push("codebook.ema_embed_sum", self.codebook.ema_embed_sum().clone());
        ckpt.write(path)
    }

    pub fn load(path: &Path) -> Result<MotionQuantizer> {
        let ckpt = Checkpoint::read(path)?;
        if ckpt.kind != CHECKPOINT_KIND {
            return Err(Error::Parse {
                path: path.display().to_string(),
                field: "kind",
                reason: format!("expected `{CHECKPOINT_KIND}`, got `{}`", ckpt.kind),
            });
        }
        let window_seconds = ckpt.meta_f64("window_seconds")?;
        let rate_hz = ckpt.meta_f64("rate_hz")?;
        let codebook_size = ckpt.meta_usize("codebook_size")?;
        let token_width = ckpt.meta_usize("token_width")?;
        let alpha = ckpt.meta_f64("alpha")?;
        let dropout_p = ckpt.meta_f64("dropout_p")?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mq = MotionQuantizer::new(
            window_seconds,
            rate_hz,
            codebook_size,
            token_width,
            alpha,
            dropout_p,
            &mut rng,
        )?;
        for id in mq.store.ids().collect::<Vec<_>>() {
            let name = mq.store.name(id).to_string();
            let saved = ckpt.array(&name)?;
            if saved.dim() != mq.store.value(id).dim() {
                return Err(Error::Dimension {
                    context: "MotionQuantizer::load",
                    expected: format!("{:?} for {name}", mq.store.value(id).dim()),
                    got: format!("{:?}", saved.dim()),
                });
            }
            mq.store.value_mut(id).assign(saved);
        }
        let entries = ckpt.array("codebook.entries")?.clone();
        let sizes = ckpt.array("codebook.ema_cluster_size")?.clone();
        let sums = ckpt.array("codebook.ema_embed_sum")?.clone();
        mq.codebook = Codebook::restore(entries, sizes.remove_axis(Axis(0)), sums, alpha)?;
        Ok(mq)
    }
}

/// Zeroes whole token rows with probability `p` during training; identity in
/// evaluation mode. The kept fraction is 1−p in expectation and values are
/// not rescaled, so the decoder learns to ride out missing tokens.
pub fn quantization_dropout(
    embeddings: ArrayView2<f64>,
    p: f64,
    training: bool,
    rng: &mut ChaCha8Rng,
) -> Array2<f64> {
    let mut out = embeddings.to_owned();
    if !training || p <= 0.0 {
        return out;
    }
    for mut row in out.rows_mut() {
        if rng.random::<f64>() < p {
            row.fill(0.0);
        }
    }
    out
}
