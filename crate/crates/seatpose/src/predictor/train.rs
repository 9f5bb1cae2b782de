//! Predictor training: teacher-forced token cross-entropy plus a pose
//! consistency term routed through the frozen quantizer decoder.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, LrSchedule};
use crate::data::Recording;
use crate::nn::{cosine_lr, AdamW, NodeId, Tape};
use crate::quantizer::MotionQuantizer;
use crate::{Error, Result};

use super::data::{build_step_dataset, position_columns, StepDataset};
use super::model::{argmax, Pressure2Pose, FEATURE_WIDTH};

#[derive(Debug, Clone, PartialEq)]
pub struct P2pTrainReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// Mean teacher-forced batch loss per epoch.
    pub train_loss: Vec<f64>,
    /// Held-out teacher-forced loss per epoch (the early-stopping monitor).
    pub val_loss: Vec<f64>,
}

/// Trains a predictor against a frozen quantizer. `val` drives early
/// stopping; when empty, a fresh pass over the train set stands in for it.
/// `cfg.lambda = 0` drops the pose consistency term, leaving pure token
/// cross-entropy.
pub fn train_p2p(
    train: &[Recording],
    val: &[Recording],
    chairs: &[(String, Array2<f64>)],
    mq: &MotionQuantizer,
    cfg: &ExperimentConfig,
) -> Result<(Pressure2Pose, P2pTrainReport)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainSet("predictor training needs at least one recording"));
    }
    let ds_train = build_step_dataset(train, chairs, mq)?;
    let ds_val = build_step_dataset(val, chairs, mq)?;

    // Stream 1 keeps the draw sequence distinct from quantizer training,
    // which seeds the same way on stream 0.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut model = Pressure2Pose::new(
        mq.t_frames,
        mq.codebook.size(),
        mq.codebook.width(),
        cfg.lambda,
        &mut rng,
    )?;
    let pos_cols = position_columns(mq.t_frames);

    let mut opt = AdamW::new(&model.store, cfg.weight_decay);
    let mut report = P2pTrainReport {
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
            let (_, loss) = batch_nodes(&model, mq, &ds_train, batch, &pos_cols, &mut t);
            model.store.zero_grads();
            t.backward(loss, &mut model.store);
            opt.step(&mut model.store, lr);
            epoch_loss += t.scalar(loss);
            batches += 1;
        }
        report.train_loss.push(epoch_loss / batches as f64);

        let monitor = if ds_val.is_empty() {
            dataset_loss(&model, mq, &ds_train, &pos_cols)
        } else {
            dataset_loss(&model, mq, &ds_val, &pos_cols)
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

/// Teacher-forced loss over a whole dataset, evaluated in fixed-size slices.
pub fn dataset_loss(
    model: &Pressure2Pose,
    mq: &MotionQuantizer,
    ds: &StepDataset,
    pos_cols: &[usize],
) -> f64 {
    if ds.is_empty() {
        return f64::NAN;
    }
    let all: Vec<usize> = (0..ds.len()).collect();
    let mut total = 0.0;
    for chunk in all.chunks(64) {
        let mut t = Tape::new();
        let (_, loss) = batch_nodes(model, mq, ds, chunk, pos_cols, &mut t);
        total += t.scalar(loss) * chunk.len() as f64;
    }
    total / ds.len() as f64
}

/// Fraction of samples whose argmax logit matches the target token under
/// teacher forcing.
pub fn teacher_forced_accuracy(
    model: &Pressure2Pose,
    mq: &MotionQuantizer,
    ds: &StepDataset,
) -> f64 {
    if ds.is_empty() {
        return f64::NAN;
    }
    let pos_cols = position_columns(ds.t_frames);
    let all: Vec<usize> = (0..ds.len()).collect();
    let mut hits = 0usize;
    for chunk in all.chunks(64) {
        let mut t = Tape::new();
        let (logits, _) = batch_nodes(model, mq, ds, chunk, &pos_cols, &mut t);
        let lv = t.val(logits);
        for (r, &s) in chunk.iter().enumerate() {
            if argmax(lv.row(r)) == ds.targets[s] {
                hits += 1;
            }
        }
    }
    hits as f64 / ds.len() as f64
}

/// Builds the teacher-forced graph for the samples in `idx`; returns the
/// logits node and the scalar loss node.
fn batch_nodes(
    model: &Pressure2Pose,
    mq: &MotionQuantizer,
    ds: &StepDataset,
    idx: &[usize],
    pos_cols: &[usize],
    t: &mut Tape,
) -> (NodeId, NodeId) {
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

    let chair = chair_rows(model, ds, idx, t);

    // Previous-token rows: ground-truth codebook entries as constants, with
    // the learned start vector scattered into sequence-start rows so its
    // gradient stays exact under batching.
    let w = mq.codebook.width();
    let mut prev_const = Array2::zeros((b, w));
    let mut start_mask = Array2::zeros((b, w));
    for (r, &s) in idx.iter().enumerate() {
        match ds.prev_token[s] {
            Some(token) => prev_const.row_mut(r).assign(&mq.codebook.entry(token)),
            None => start_mask.row_mut(r).fill(1.0),
        }
    }
    let prev_const = t.value(prev_const);
    let vs = model.start_token_node(t);
    let vs_rows = t.repeat_rows(vs, b);
    let vs_masked = t.mul_mask(vs_rows, start_mask);
    let prev = t.add(prev_const, vs_masked);

    let logits = model.logits_node(t, pressure, chair, prev);
    let targets: Vec<usize> = idx.iter().map(|&s| ds.targets[s]).collect();
    let ce = t.softmax_cross_entropy(logits, &targets);

    if model.lambda <= 0.0 {
        return (logits, ce);
    }

    // Expected embedding under the predicted distribution, decoded by the
    // frozen quantizer; only joint-position columns enter the error.
    let probs = t.softmax(logits);
    let emb = t.matmul_const(probs, mq.codebook.entries().to_owned());
    let x_hat = mq.decode_node_frozen(t, emb);
    let flat = t.val(x_hat).ncols();
    let mut mask = Array2::zeros((b, flat));
    let mut target = Array2::zeros((b, flat));
    for (r, &s) in idx.iter().enumerate() {
        for (k, &c) in pos_cols.iter().enumerate() {
            mask[(r, c)] = 1.0;
            target[(r, c)] = ds.gt_positions[(s, k)];
        }
    }
    let masked = t.mul_mask(x_hat, mask);
    let mse = t.mse_const(masked, target);
    // The full-width mean understates the per-position error by the ratio of
    // total to masked columns; rescaling makes the term a true position MSE.
    let scale = model.lambda * flat as f64 / pos_cols.len() as f64;
    let seq = t.scale(mse, scale);
    let loss = t.add(ce, seq);
    (logits, loss)
}

/// Chair features for a batch: one encoder run per distinct chair, scattered
/// to sample rows through 0/1 masks so every sample sees its own chair.
fn chair_rows(model: &Pressure2Pose, ds: &StepDataset, idx: &[usize], t: &mut Tape) -> NodeId {
    let b = idx.len();
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
    acc.expect("chair_rows needs a non-empty batch")
}
