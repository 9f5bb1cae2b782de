//! Autoregressive token predictor: pressure window + chair shape + previous
//! token in, a distribution over codebook entries out.

use ndarray::{Array1, Array3, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use crate::data::{PressureSequence, PRESSURE_COLS, PRESSURE_ROWS};
use crate::nn::{Checkpoint, Conv2d, Im2ColSpec, Linear, NodeId, ParamId, ParamStore, Tape};
use crate::quantizer::{Codebook, TokenSequence};
use crate::{Error, Result};

use super::data::flatten_pressure_window;

/// Width of the pressure feature and the chair feature.
pub const FEATURE_WIDTH: usize = 256;

pub const CHECKPOINT_KIND: &str = "pressure2pose";

/// One autoregressive step's inputs. Pressure arrives in mmHg; the model
/// scales it to [0,1] itself.
#[derive(Debug, Clone)]
pub struct StepInput {
    /// t_frames x 80 x 28 window.
    pub pressure_chunk: Array3<f64>,
    pub chair_feature: Array1<f64>,
    /// Embedding of the previous token, or the learned start vector.
    pub prev_token: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct Pressure2Pose {
    pub store: ParamStore,
    conv1: Conv2d,
    conv2: Conv2d,
    p_lin: Linear,
    c_lin1: Linear,
    c_lin2: Linear,
    c_lin3: Linear,
    fuse: Linear,
    head: Linear,
    v_s: ParamId,
    pub t_frames: usize,
    pub codebook_size: usize,
    pub token_width: usize,
    pub lambda: f64,
    /// Hash of the quantizer checkpoint this model was trained against;
    /// empty for models trained in memory.
    pub mq_sha256: String,
}

impl Pressure2Pose {
    pub fn new(
        t_frames: usize,
        codebook_size: usize,
        token_width: usize,
        lambda: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Pressure2Pose> {
        if t_frames == 0 || codebook_size == 0 || token_width == 0 {
            return Err(Error::Config(
                "t_frames, codebook_size, and token_width must be positive".to_string(),
            ));
        }
        let mut store = ParamStore::new();
        let spec1 = Im2ColSpec {
            in_h: PRESSURE_ROWS,
            in_w: PRESSURE_COLS,
            in_c: 1,
            kh: 3,
            kw: 3,
            stride: 2,
            pad: 1,
        };
        let conv1 = Conv2d::new(&mut store, rng, "p2p.conv1", spec1, 8);
        let spec2 = Im2ColSpec {
            in_h: spec1.out_h(),
            in_w: spec1.out_w(),
            in_c: 8,
            kh: 3,
            kw: 3,
            stride: 2,
            pad: 1,
        };
        let conv2 = Conv2d::new(&mut store, rng, "p2p.conv2", spec2, 16);
        let p_lin = Linear::new(&mut store, rng, "p2p.p_lin", conv2.out_cols(), FEATURE_WIDTH);
        let c_lin1 = Linear::new(&mut store, rng, "p2p.c_lin1", 3, 64);
        let c_lin2 = Linear::new(&mut store, rng, "p2p.c_lin2", 64, 64);
        let c_lin3 = Linear::new(&mut store, rng, "p2p.c_lin3", 64, FEATURE_WIDTH);
        let fuse = Linear::new(
            &mut store,
            rng,
            "p2p.fuse",
            2 * FEATURE_WIDTH + token_width,
            512,
        );
        let head = Linear::new(&mut store, rng, "p2p.head", 512, codebook_size);
        let v_s = store.add(
            "p2p.v_s",
            crate::nn::he_normal(rng, 1, token_width, token_width),
        );
        Ok(Pressure2Pose {
            store,
            conv1,
            conv2,
            p_lin,
            c_lin1,
            c_lin2,
            c_lin3,
            fuse,
            head,
            v_s,
            t_frames,
            codebook_size,
            token_width,
            lambda,
            mq_sha256: String::new(),
        })
    }

    pub fn set_mq_hash(&mut self, sha256: &str) {
        self.mq_sha256 = sha256.to_string();
    }

    /// Learned start-of-sequence embedding.
    pub fn start_token(&self) -> Array1<f64> {
        self.store.value(self.v_s).row(0).to_owned()
    }

    pub(super) fn start_token_node(&self, t: &mut Tape) -> NodeId {
        t.param(&self.store, self.v_s)
    }

    /// Pressure branch: rows are normalized frames, `group` consecutive rows
    /// per window. Returns one feature row per window.
    pub(super) fn pressure_node(&self, t: &mut Tape, frames: NodeId, group: usize) -> NodeId {
        let h = self.conv1.apply(t, &self.store, frames);
        let h = t.relu(h);
        let h = self.conv2.apply(t, &self.store, h);
        let h = t.relu(h);
        let h = self.p_lin.apply(t, &self.store, h);
        let h = t.relu(h);
        t.group_mean(h, group)
    }

    /// Chair branch: per-point features max-pooled over the cloud. The pool
    /// is an exact column maximum, so point order cannot matter.
    pub(super) fn chair_node(&self, t: &mut Tape, cloud: NodeId) -> NodeId {
        let h = self.c_lin1.apply(t, &self.store, cloud);
        let h = t.relu(h);
        let h = self.c_lin2.apply(t, &self.store, h);
        let h = t.relu(h);
        let h = self.c_lin3.apply(t, &self.store, h);
        t.max_cols(h)
    }

    /// Fusion and classification over per-sample feature rows.
    pub(super) fn logits_node(
        &self,
        t: &mut Tape,
        pressure: NodeId,
        chair: NodeId,
        prev: NodeId,
    ) -> NodeId {
        let x = t.concat_cols(&[pressure, chair, prev]);
        let h = self.fuse.apply(t, &self.store, x);
        let h = t.relu(h);
        self.head.apply(t, &self.store, h)
    }

    /// Encodes a normalized 5000x3 cloud to its 256-vector feature.
    pub fn encode_chair(&self, cloud: ArrayView2<f64>) -> Result<Array1<f64>> {
        if cloud.ncols() != 3 || cloud.nrows() == 0 {
            return Err(Error::Dimension {
                context: "encode_chair",
                expected: "n x 3 with n > 0".to_string(),
                got: format!("{}x{}", cloud.nrows(), cloud.ncols()),
            });
        }
        let mut t = Tape::new();
        let c = t.value(cloud.to_owned());
        let f = self.chair_node(&mut t, c);
        Ok(t.val(f).row(0).to_owned())
    }

    /// One autoregressive step: unnormalized scores over the codebook.
    pub fn step(&self, input: &StepInput) -> Result<Array1<f64>> {
        if input.pressure_chunk.len_of(Axis(0)) != self.t_frames {
            return Err(Error::Dimension {
                context: "Pressure2Pose::step",
                expected: format!("{} pressure frames", self.t_frames),
                got: input.pressure_chunk.len_of(Axis(0)).to_string(),
            });
        }
        if input.chair_feature.len() != FEATURE_WIDTH || input.prev_token.len() != self.token_width
        {
            return Err(Error::Dimension {
                context: "Pressure2Pose::step",
                expected: format!("chair {FEATURE_WIDTH}, prev {}", self.token_width),
                got: format!("chair {}, prev {}", input.chair_feature.len(), input.prev_token.len()),
            });
        }
        let frames = flatten_pressure_window(input.pressure_chunk.view())?;
        let mut t = Tape::new();
        let fr = t.value(frames);
        let p = self.pressure_node(&mut t, fr, self.t_frames);
        let c = t.value(input.chair_feature.clone().insert_axis(Axis(0)));
        let prev = t.value(input.prev_token.clone().insert_axis(Axis(0)));
        let logits = self.logits_node(&mut t, p, c, prev);
        Ok(t.val(logits).row(0).to_owned())
    }

    /// Greedy decoding over all full windows of a pressure sequence. Step 0
    /// feeds the learned start vector; later steps feed the codebook entry
    /// of the previous prediction. Only windows before a step's own are ever
    /// read, so later pressure cannot change earlier tokens.
    pub fn generate(
        &self,
        pressure: &PressureSequence,
        chair_feature: &Array1<f64>,
        codebook: &Codebook,
    ) -> Result<TokenSequence> {
        if codebook.size() != self.codebook_size || codebook.width() != self.token_width {
            return Err(Error::Dimension {
                context: "Pressure2Pose::generate",
                expected: format!("codebook {}x{}", self.codebook_size, self.token_width),
                got: format!("codebook {}x{}", codebook.size(), codebook.width()),
            });
        }
        let windows = pressure.len() / self.t_frames;
        if windows == 0 {
            return Err(Error::TooShort {
                context: "Pressure2Pose::generate",
                needed: self.t_frames,
                got: pressure.len(),
            });
        }
        let frames = pressure.frames();
        let mut prev = self.start_token();
        let mut indices = Vec::with_capacity(windows);
        for w in 0..windows {
            let window = frames
                .slice(ndarray::s![w * self.t_frames..(w + 1) * self.t_frames, .., ..])
                .to_owned();
            let logits = self.step(&StepInput {
                pressure_chunk: window,
                chair_feature: chair_feature.clone(),
                prev_token: prev,
            })?;
            let token = argmax(logits.view());
            indices.push(token);
            prev = codebook.entry(token).to_owned();
        }
        TokenSequence::from_indices(codebook, indices)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut meta = toml::Table::new();
        meta.insert("t_frames".into(), toml::Value::Integer(self.t_frames as i64));
        meta.insert("codebook_size".into(), toml::Value::Integer(self.codebook_size as i64));
        meta.insert("token_width".into(), toml::Value::Integer(self.token_width as i64));
        meta.insert("lambda".into(), toml::Value::Float(self.lambda));
        meta.insert("mq_sha256".into(), toml::Value::String(self.mq_sha256.clone()));
        let mut ckpt = Checkpoint::new(CHECKPOINT_KIND, meta);
        for id in self.store.ids() {
            ckpt.push(self.store.name(id), self.store.value(id).clone());
        }
        ckpt.write(path)
    }

    pub fn load(path: &Path) -> Result<Pressure2Pose> {
        let ckpt = Checkpoint::read(path)?;
        if ckpt.kind != CHECKPOINT_KIND {
            return Err(Error::Parse {
                path: path.display().to_string(),
                field: "kind",
                reason: format!("expected `{CHECKPOINT_KIND}`, got `{}`", ckpt.kind),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut model = Pressure2Pose::new(
            ckpt.meta_usize("t_frames")?,
            ckpt.meta_usize("codebook_size")?,
            ckpt.meta_usize("token_width")?,
            ckpt.meta_f64("lambda")?,
            &mut rng,
        )?;
        model.mq_sha256 = ckpt.meta_str("mq_sha256")?.to_string();
        for id in model.store.ids().collect::<Vec<_>>() {
            let name = model.store.name(id).to_string();
            let saved = ckpt.array(&name)?;
            if saved.dim() != model.store.value(id).dim() {
                return Err(Error::Dimension {
                    context: "Pressure2Pose::load",
                    expected: format!("{:?} for {name}", model.store.value(id).dim()),
                    got: format!("{:?}", saved.dim()),
                });
            }
            model.store.value_mut(id).assign(saved);
        }
        Ok(model)
    }
}

/// Index of the largest element; ties go to the lowest index.
pub fn argmax(v: ndarray::ArrayView1<f64>) -> usize {
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &x) in v.iter().enumerate() {
        if x > best_v {
            best_v = x;
            best = i;
        }
    }
    best
}

/// Teacher-forced objective: mean token cross-entropy plus `lambda` times
/// the mean squared error over decoded joint positions.
pub fn p2p_loss(
    logits: ArrayView2<f64>,
    targets: &[usize],
    decoded_positions: ArrayView2<f64>,
    gt_positions: ArrayView2<f64>,
    lambda: f64,
) -> f64 {
    assert_eq!(logits.nrows(), targets.len(), "one target per logits row");
    assert_eq!(decoded_positions.dim(), gt_positions.dim(), "position shape mismatch");
    let mut ce = 0.0;
    for (row, &target) in logits.rows().into_iter().zip(targets) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        ce += lse - row[target];
    }
    ce /= targets.len() as f64;
    let mut mse = 0.0;
    for (a, b) in decoded_positions.iter().zip(gt_positions.iter()) {
        let d = a - b;
        mse += d * d;
    }
    mse /= decoded_positions.len() as f64;
    ce + lambda * mse
}
