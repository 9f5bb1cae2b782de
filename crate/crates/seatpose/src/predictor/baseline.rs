//! Direct regression baseline: the same pressure and chair encoders as the
//! token predictor, but the head emits joint positions for the whole window
//! with no quantization in the path.

use ndarray::{Array1, Array2, Array3, ArrayView2, ArrayView3, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

use crate::body::J;
use crate::config::{ExperimentConfig, LrSchedule};
use crate::data::{Recording, PRESSURE_COLS, PRESSURE_ROWS};
use crate::nn::{
    cosine_lr, AdamW, Checkpoint, Conv2d, Im2ColSpec, Linear, NodeId, ParamStore, Tape,
};
use crate::{Error, Result};

use super::data::{build_regression_dataset, flatten_pressure_window, RegressionDataset};
use super::model::FEATURE_WIDTH;

pub const CHECKPOINT_KIND: &str = "baseline_regressor";

#[derive(Debug, Clone)]
pub struct BaselineRegressor {
    pub store: ParamStore,
    conv1: Conv2d,
    conv2: Conv2d,
    p_lin: Linear,
    c_lin1: Linear,
    c_lin2: Linear,
    c_lin3: Linear,
    fuse: Linear,
    head: Linear,
    pub t_frames: usize,
}

impl BaselineRegressor {
    pub fn new(t_frames: usize, rng: &mut ChaCha8Rng) -> Result<BaselineRegressor> {
        if t_frames == 0 {
            return Err(Error::Config("t_frames must be positive".to_string()));
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
        let conv1 = Conv2d::new(&mut store, rng, "base.conv1", spec1, 8);
        let spec2 = Im2ColSpec {
            in_h: spec1.out_h(),
            in_w: spec1.out_w(),
            in_c: 8,
            kh: 3,
            kw: 3,
            stride: 2,
            pad: 1,
        };
        let conv2 = Conv2d::new(&mut store, rng, "base.conv2", spec2, 16);
        let p_lin = Linear::new(&mut store, rng, "base.p_lin", conv2.out_cols(), FEATURE_WIDTH);
        let c_lin1 = Linear::new(&mut store, rng, "base.c_lin1", 3, 64);
        let c_lin2 = Linear::new(&mut store, rng, "base.c_lin2", 64, 64);
        let c_lin3 = Linear::new(&mut store, rng, "base.c_lin3", 64, FEATURE_WIDTH);
        let fuse = Linear::new(&mut store, rng, "base.fuse", 2 * FEATURE_WIDTH, 512);
        let head = Linear::new(&mut store, rng, "base.head", 512, t_frames * J * 3);
        Ok(BaselineRegressor {
            store,
            conv1,
            conv2,
            p_lin,
            c_lin1,
            c_lin2,
            c_lin3,
            fuse,
            head,
            t_frames,
        })
    }

    fn pressure_node(&self, t: &mut Tape, frames: NodeId, group: usize) -> NodeId {
        let h = self.conv1.apply(t, &self.store, frames);
        let h = t.relu(h);
        let h = self.conv2.apply(t, &self.store, h);
        let h = t.relu(h);
        let h = self.p_lin.apply(t, &self.store, h);
        let h = t.relu(h);
        t.group_mean(h, group)
    }

    fn chair_node(&self, t: &mut Tape, cloud: NodeId) -> NodeId {
        let h = self.c_lin1.apply(t, &self.store, cloud);
        let h = t.relu(h);
        let h = self.c_lin2.apply(t, &self.store, h);
        let h = t.relu(h);
        let h = self.c_lin3.apply(t, &self.store, h);
        t.max_cols(h)
    }

    fn positions_node(&self, t: &mut Tape, pressure: NodeId, chair: NodeId) -> NodeId {
        let x = t.concat_cols(&[pressure, chair]);
        let h = self.fuse.apply(t, &self.store, x);
        let h = t.relu(h);
        self.head.apply(t, &self.store, h)
    }

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

    /// Regresses joint positions for one pressure window, in mmHg. Returns
    /// a (t_frames, J, 3) array of positions in meters.
    pub fn regress(
        &self,
        pressure_chunk: ArrayView3<f64>,
        chair_feature: &Array1<f64>,
    ) -> Result<Array3<f64>> {
        if pressure_chunk.len_of(Axis(0)) != self.t_frames {
            return Err(Error::Dimension {
                context: "BaselineRegressor::regress",
                expected: format!("{} pressure frames", self.t_frames),
                got: pressure_chunk.len_of(Axis(0)).to_string(),
            });
        }
        if chair_feature.len() != FEATURE_WIDTH {
            return Err(Error::Dimension {
                context: "BaselineRegressor::regress",
                expected: format!("chair feature of {FEATURE_WIDTH}"),
                got: chair_feature.len().to_string(),
            });
        }
        let frames = flatten_pressure_window(pressure_chunk)?;
        let mut t = Tape::new();
        let fr = t.value(frames);
        let p = self.pressure_node(&mut t, fr, self.t_frames);
        let c = t.value(chair_feature.clone().insert_axis(Axis(0)));
        let out = self.positions_node(&mut t, p, c);
        let flat = t.val(out);
        let mut positions = Array3::zeros((self.t_frames, J, 3));
        for k in 0..self.t_frames {
            for j in 0..J {
                for d in 0..3 {
                    positions[(k, j, d)] = flat[(0, (k * J + j) * 3 + d)];
                }
            }
        }
        Ok(positions)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut meta = toml::Table::new();
        meta.insert("t_frames".into(), toml::Value::Integer(self.t_frames as i64));
        let mut ckpt = Checkpoint::new(CHECKPOINT_KIND, meta);
        for id in self.store.ids() {
            ckpt.push(self.store.name(id), self.store.value(id).clone());
        }
        ckpt.write(path)
    }

    pub fn load(path: &Path) -> Result<BaselineRegressor> {
        let ckpt = Checkpoint::read(path)?;
        if ckpt.kind != CHECKPOINT_KIND {
            return Err(Error::Parse {
                path: path.display().to_string(),
                field: "kind",
                reason: format!("expected `{CHECKPOINT_KIND}`, got `{}`", ckpt.kind),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut model = BaselineRegressor::new(ckpt.meta_usize("t_frames")?, &mut rng)?;
        for id in model.store.ids().collect::<Vec<_>>() {
            let name = model.store.name(id).to_string();
            let saved = ckpt.array(&name)?;
            if saved.dim() != model.store.value(id).dim() {
                return Err(Error::Dimension {
                    context: "BaselineRegressor::load",
                    expected: format!("{:?} for {name}", model.store.value(id).dim()),
                    got: format!("{:?}", saved.dim()),
                });
            }
            model.store.value_mut(id).assign(saved);
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineTrainReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
}

/// Trains the regression baseline with a plain position MSE objective.
pub fn train_baseline(
    train: &[Recording],
    val: &[Recording],
    chairs: &[(String, Array2<f64>)],
    cfg: &ExperimentConfig,
) -> Result<(BaselineRegressor, BaselineTrainReport)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainSet("baseline training needs at least one recording"));
    }
    let ds_train = build_regression_dataset(train, chairs, cfg.window_seconds)?;
    let ds_val = build_regression_dataset(val, chairs, cfg.window_seconds)?;

    // Stream 2: distinct draws from quantizer (0) and predictor (1) training.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(2);
    let mut model = BaselineRegressor::new(ds_train.t_frames, &mut rng)?;

    let mut opt = AdamW::new(&model.store, cfg.weight_decay);
    let mut report = BaselineTrainReport {
        epochs_run: 0,
        best_epoch: 0,
        train_loss: Vec::new(),
        val_loss: Vec::new(),
    };
    let mut best_monitor = f64::INFINITY;
    let mut best_state: Option<Vec<Array2<f64>>> = None;
    let mut since_best = 0usize;

    let mut order: Vec<usize> = (0..ds_train.len()).collect();
    for epoch in 0..cfg.max_epochs {
        let lr = match cfg.lr_schedule {
            LrSchedule::Cosine => cosine_lr(cfg.lr, epoch, cfg.max_epochs),
            LrSchedule::Constant => cfg.lr,
        };
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(cfg.batch) {
            let mut t = Tape::new();
            let loss = regression_loss_node(&model, &ds_train, batch, &mut t);
            model.store.zero_grads();
            t.backward(loss, &mut model.store);
            opt.step(&mut model.store, lr);
            epoch_loss += t.scalar(loss);
            batches += 1;
        }
        report.train_loss.push(epoch_loss / batches as f64);

        let monitor = if ds_val.is_empty() {
            regression_loss(&model, &ds_train)
        } else {
            regression_loss(&model, &ds_val)
        };
        report.val_loss.push(monitor);
        report.epochs_run = epoch + 1;

        if monitor < best_monitor {
            best_monitor = monitor;
            report.best_epoch = epoch;
            best_state = Some(model.store.ids().map(|id| model.store.value(id).clone()).collect());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }

    if let Some(params) = best_state {
        for (id, saved) in model.store.ids().collect::<Vec<_>>().into_iter().zip(params) {
            model.store.value_mut(id).assign(&saved);
        }
    }
    Ok((model, report))
}

/// Mean squared position error over a whole dataset.
pub fn regression_loss(model: &BaselineRegressor, ds: &RegressionDataset) -> f64 {
    if ds.is_empty() {
        return f64::NAN;
    }
    let all: Vec<usize> = (0..ds.len()).collect();
    let mut total = 0.0;
    for chunk in all.chunks(64) {
        let mut t = Tape::new();
        let loss = regression_loss_node(model, ds, chunk, &mut t);
        total += t.scalar(loss) * chunk.len() as f64;
    }
    total / ds.len() as f64
}

fn regression_loss_node(
    model: &BaselineRegressor,
    ds: &RegressionDataset,
    idx: &[usize],
    t: &mut Tape,
) -> NodeId {
    let b = idx.len();
    let tf = ds.t_frames;

    let mut frames = Array2::zeros((b * tf, ds.pressure_rows.ncols()));
    for (r, &s) in idx.iter().enumerate() {
        for k in 0..tf {
            frames.row_mut(r * tf + k).assign(&ds.pressure_rows.row(s * tf + k));
        }
    }
    let fr = t.value(frames);
    let pressure = model.pressure_node(t, fr, tf);

    let mut distinct: Vec<usize> = idx.iter().map(|&s| ds.chair_of[s]).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let mut acc: Option<NodeId> = None;
    for c in distinct {
        let cloud = t.value(ds.clouds[c].1.clone());
        let feat = model.chair_node(t, cloud);
        let rows = t.repeat_rows(feat, b);
        let mut mask = Array2::zeros((b, FEATURE_WIDTH));
        for (r, &s) in idx.iter().enumerate() {
            if ds.chair_of[s] == c {
                mask.row_mut(r).fill(1.0);
            }
        }
        let masked = t.mul_mask(rows, mask);
        acc = Some(match acc {
            Some(a) => t.add(a, masked),
            None => masked,
        });
    }
    let chair = acc.expect("regression batch must be non-empty");

    let pred = model.positions_node(t, pressure, chair);
    let mut target = Array2::zeros((b, ds.gt_positions.ncols()));
    for (r, &s) in idx.iter().enumerate() {
        target.row_mut(r).assign(&ds.gt_positions.row(s));
    }
    t.mse_const(pred, target)
}
