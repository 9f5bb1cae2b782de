//! Quantizer training: annealed reconstruction + commitment loss, EMA
//! codebook updates, early stopping on held-out reconstruction error.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::body::{FeatureChunk, FRAME_RATE_HZ};
use crate::config::{ExperimentConfig, LrSchedule};
use crate::nn::{cosine_lr, AdamW, Tape};
use crate::{Error, Result};

use super::model::MotionQuantizer;

/// Loss weights by epoch: reconstruction holds at 1 while the quantization
/// term ramps linearly from 0 to 1 over the first fifth of the run, letting
/// early epochs chase reconstruction before the codebook tightens.
#[derive(Debug, Clone, Copy)]
pub struct AnnealSchedule {
    pub ramp_epochs: usize,
}

impl AnnealSchedule {
    pub fn for_run(max_epochs: usize) -> AnnealSchedule {
        AnnealSchedule { ramp_epochs: ((max_epochs as f64) * 0.2).ceil().max(1.0) as usize }
    }

    pub fn w_r(&self, _epoch: usize) -> f64 {
        1.0
    }

    pub fn w_q(&self, epoch: usize) -> f64 {
        (epoch as f64 / self.ramp_epochs as f64).min(1.0)
    }
}

/// Training objective value: `w_r(t)·L_r + w_q(t)·L_q` where `L_r` is the
/// mean squared error over every descriptor element and `L_q` doubles the
/// latent-to-entry squared distance, one half for each side of the
/// quantization gap. Only the latent side receives gradients; entries move
/// by EMA.
pub fn mq_loss(
    x: ArrayView2<f64>,
    x_hat: ArrayView2<f64>,
    latent: ArrayView2<f64>,
    quantized: ArrayView2<f64>,
    schedule: &AnnealSchedule,
    epoch: usize,
) -> f64 {
    let l_r = mean_sq_diff(x, x_hat);
    let l_q = 2.0 * mean_sq_diff(latent, quantized);
    schedule.w_r(epoch) * l_r + schedule.w_q(epoch) * l_q
}

fn mean_sq_diff(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "mean_sq_diff shape mismatch");
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc += d * d;
    }
    acc / (a.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MqTrainReport {
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// Mean annealed batch loss per epoch.
    pub train_loss: Vec<f64>,
    /// Held-out reconstruction MSE per epoch (the early-stopping monitor).
    pub val_loss: Vec<f64>,
}

/// Trains a quantizer from scratch. `val` drives early stopping; when empty,
/// the train-set reconstruction error stands in for it.
pub fn train_mq(
    train: &[FeatureChunk],
    val: &[FeatureChunk],
    cfg: &ExperimentConfig,
) -> Result<(MotionQuantizer, MqTrainReport)> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyTrainSet("quantizer training needs at least one chunk"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut mq = MotionQuantizer::new(
        cfg.window_seconds,
        FRAME_RATE_HZ,
        cfg.codebook_size,
        cfg.token_width,
        cfg.alpha,
        cfg.dropout_p,
        &mut rng,
    )?;
    let x_train = mq.flatten_chunks(train)?;
    let x_val = mq.flatten_chunks(val)?;

    // First pass with the untrained encoder seeds the codebook near the
    // data so no entry starts dead.
    let latents = mq.encode_rows(x_train.view());
    mq.codebook.seed_from_latents(latents.view(), &mut rng);

    let schedule = AnnealSchedule::for_run(cfg.max_epochs);
    let mut opt = AdamW::new(&mq.store, cfg.weight_decay);
    let mut report = MqTrainReport {
        epochs_run: 0,
        best_epoch: 0,
        train_loss: Vec::new(),
        val_loss: Vec::new(),
    };
    let mut best_monitor = f64::INFINITY;
    let mut best_state: Option<(Vec<Array2<f64>>, super::codebook::Codebook)> = None;
    let mut since_best = 0usize;

    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..cfg.max_epochs {
        let lr = match cfg.lr_schedule {
            LrSchedule::Cosine => cosine_lr(cfg.lr, epoch, cfg.max_epochs),
            LrSchedule::Constant => cfg.lr,
        };
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(cfg.batch) {
            let xb = gather_rows(&x_train, batch);
            let mut t = Tape::new();
            let xn = t.value(xb.clone());
            let z = mq.encode_node(&mut t, xn);
            let zv = t.val(z).to_owned();
            let (indices, q) = mq.codebook.quantize_rows(zv.view());

            let st = t.straight_through(z, q.clone());
            let mask = dropout_mask(batch.len(), q.ncols(), cfg.dropout_p, &mut rng);
            let masked = t.mul_mask(st, mask);
            let x_hat = mq.decode_node(&mut t, masked);

            let l_r = t.mse_const(x_hat, xb);
            // Commitment gradient on the latent; the codebook half of L_q
            // joins as a constant so the reported value matches mq_loss.
            let l_q_live = t.mse_const(z, q);
            let l_q_const = t.value(Array2::from_elem((1, 1), t.scalar(l_q_live)));
            let l_q = t.add(l_q_live, l_q_const);

            let wr = t.scale(l_r, schedule.w_r(epoch));
            let wq = t.scale(l_q, schedule.w_q(epoch));
            let loss = t.add(wr, wq);

            mq.store.zero_grads();
            t.backward(loss, &mut mq.store);
            opt.step(&mut mq.store, lr);
            mq.codebook.ema_update(zv.view(), &indices);

            epoch_loss += t.scalar(loss);
            batches += 1;
        }
        report.train_loss.push(epoch_loss / batches as f64);

        let monitor = if val.is_empty() {
            reconstruction_mse(&mq, x_train.view())
        } else {
            reconstruction_mse(&mq, x_val.view())
        };
        report.val_loss.push(monitor);
        report.epochs_run = epoch + 1;

        if monitor < best_monitor {
            best_monitor = monitor;
            report.best_epoch = epoch;
            let params = mq.store.ids().map(|id| mq.store.value(id).clone()).collect();
            best_state = Some((params, mq.codebook.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }

    if let Some((params, codebook)) = best_state {
        for (id, saved) in mq.store.ids().collect::<Vec<_>>().into_iter().zip(params) {
            mq.store.value_mut(id).assign(&saved);
        }
        mq.codebook = codebook;
    }
    Ok((mq, report))
}

/// Evaluation-mode round trip error: encode, hard quantize, decode, mean
/// squared error against the input rows. No dropout.
pub fn reconstruction_mse(mq: &MotionQuantizer, x: ArrayView2<f64>) -> f64 {
    if x.nrows() == 0 {
        return f64::NAN;
    }
    let z = mq.encode_rows(x);
    let (_, q) = mq.codebook.quantize_rows(z.view());
    let mut t = Tape::new();
    let qn = t.value(q);
    let y = mq.decode_node(&mut t, qn);
    mean_sq_diff(t.val(y).view(), x)
}

fn gather_rows(x: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), x.ncols()));
    for (r, &src) in rows.iter().enumerate() {
        out.row_mut(r).assign(&x.index_axis(Axis(0), src));
    }
    out
}

/// Row-constant Bernoulli mask: a dropped token zeroes its whole embedding.
fn dropout_mask(rows: usize, cols: usize, p: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut mask = Array2::ones((rows, cols));
    if p <= 0.0 {
        return mask;
    }
    for mut row in mask.rows_mut() {
        if rng.random::<f64>() < p {
            row.fill(0.0);
        }
    }
    mask
}
