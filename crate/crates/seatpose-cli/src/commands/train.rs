//! Stage training. The quantizer learns first; the token predictor requires
//! its checkpoint; the baseline regressor is independent of both.

use std::fmt::Write as _;
use std::path::Path;

use seatpose::body::{motion_descriptors, Skeleton};
use seatpose::data::Recording;
use seatpose::manifest::sha256_file;
use seatpose::predictor::{train_baseline, train_p2p};
use seatpose::quantizer::{train_mq, MotionQuantizer};
use seatpose::{Error, Result};

use crate::context::{train_val_split, Context};
use crate::Stage;

pub fn run(ctx: &Context, stage: Stage) -> Result<()> {
    let recordings = ctx.load_recordings()?;
    let (train, val) = train_val_split(&recordings);
    let mut manifest = ctx.manifest(&format!("train {}", stage.name()));
    for (name, _) in &recordings {
        manifest.add_input(&ctx.cfg.data_dir.join(name).join("pose.bin"))?;
        manifest.add_input(&ctx.cfg.data_dir.join(name).join("pressure.bin"))?;
    }

    std::fs::create_dir_all(&ctx.cfg.out_dir)
        .map_err(|e| Error::io(ctx.cfg.out_dir.display().to_string(), e))?;
    let ckpt = ctx.checkpoint_path(stage.name());

    let (epochs_run, best_epoch, curve) = match stage {
        Stage::Mq => {
            let train_chunks = descriptor_chunks(&train, ctx)?;
            let val_chunks = descriptor_chunks(&val, ctx)?;
            let (mq, report) = train_mq(&train_chunks, &val_chunks, &ctx.cfg)?;
            mq.save(&ckpt)?;
            (report.epochs_run, report.best_epoch, curve_text(&report.train_loss, &report.val_loss))
        }
        Stage::P2p => {
            let mq_path = ctx.require_checkpoint("mq")?;
            let mq = MotionQuantizer::load(&mq_path)?;
            manifest.add_input(&mq_path)?;
            let clouds = ctx.chair_clouds()?;
            let (mut model, report) = train_p2p(&train, &val, &clouds, &mq, &ctx.cfg)?;
            model.set_mq_hash(sha256_file(&mq_path)?);
            model.save(&ckpt)?;
            (report.epochs_run, report.best_epoch, curve_text(&report.train_loss, &report.val_loss))
        }
        Stage::Baseline => {
            let clouds = ctx.chair_clouds()?;
            let (model, report) = train_baseline(&train, &val, &clouds, &ctx.cfg)?;
            model.save(&ckpt)?;
            (report.epochs_run, report.best_epoch, curve_text(&report.train_loss, &report.val_loss))
        }
    };

    let curve_path = ctx.cfg.out_dir.join(format!("{}_curve.tsv", stage.name()));
    std::fs::write(&curve_path, curve)
        .map_err(|e| Error::io(curve_path.display().to_string(), e))?;

    manifest.add_output(&ckpt)?;
    manifest.add_output(&curve_path)?;
    manifest.note(format!("epochs_run = {epochs_run}"));
    manifest.note(format!("best_epoch = {best_epoch}"));
    manifest.note(format!("train_recordings = {}", train.len()));
    manifest.note(format!("val_recordings = {}", val.len()));
    ctx.write_manifest(&manifest, &format!("train_{}_manifest.toml", stage.name()))?;

    println!(
        "train {}: {} epochs (best {}), checkpoint -> {}",
        stage.name(),
        epochs_run,
        best_epoch,
        ckpt.display()
    );
    Ok(())
}

fn descriptor_chunks(
    recordings: &[Recording],
    ctx: &Context,
) -> Result<Vec<seatpose::body::FeatureChunk>> {
    let mut chunks = Vec::new();
    for rec in recordings {
        let skel = Skeleton::with_height(rec.pose.subject_height_m)?;
        chunks.extend(motion_descriptors(&rec.pose, &skel, ctx.cfg.window_seconds)?);
    }
    Ok(chunks)
}

fn curve_text(train_loss: &[f64], val_loss: &[f64]) -> String {
    let mut out = String::from("epoch\ttrain\tval\n");
    for (e, (t, v)) in train_loss.iter().zip(val_loss).enumerate() {
        writeln!(out, "{e}\t{t:.9}\t{v:.9}").unwrap();
    }
    out
}

/// Trained-stage loader shared by eval and infer; the error names the stage
/// whose checkpoint is absent.
pub fn checkpoint_input(ctx: &Context, stage: &'static str) -> Result<std::path::PathBuf> {
    ctx.require_checkpoint(stage)
}

pub fn load_mq(path: &Path) -> Result<MotionQuantizer> {
    MotionQuantizer::load(path)
}
