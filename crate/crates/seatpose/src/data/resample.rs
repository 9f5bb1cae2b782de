//! Rate conversion. Pose channels interpolate linearly (axis-angle
//! component-wise, folded back into the canonical range); pressure takes the
//! nearest source frame. Output spans the same duration to within one frame
//! period.

use nalgebra::Vector3;
use ndarray::Array3;

use crate::body::{canonicalize_axis_angle, PoseFrame, PoseSequence};
use crate::error::{Error, Result};

use super::recording::PressureSequence;

/// Sample instants 0, 1/target, ... covering the source duration.
fn sample_count(src_frames: usize, src_hz: f64, target_hz: f64) -> usize {
    let duration = (src_frames - 1) as f64 / src_hz;
    (duration * target_hz).floor() as usize + 1
}

pub fn resample_pose(seq: &PoseSequence, target_hz: f64) -> Result<PoseSequence> {
    seq.validate()?;
    if target_hz <= 0.0 {
        return Err(Error::Config(format!("target rate {target_hz} Hz")));
    }
    let n = seq.frames.len();
    if n == 1 {
        return Ok(PoseSequence { rate_hz: target_hz, ..seq.clone() });
    }
    let m = sample_count(n, seq.rate_hz, target_hz);
    let mut frames = Vec::with_capacity(m);
    for k in 0..m {
        let t = k as f64 / target_hz * seq.rate_hz;
        let i0 = (t.floor() as usize).min(n - 1);
        let i1 = (i0 + 1).min(n - 1);
        let frac = t - i0 as f64;
        let a = &seq.frames[i0];
        let b = &seq.frames[i1];
        let mut out = PoseFrame::identity();
        out.root = a.root.lerp(&b.root, frac);
        for j in 0..out.theta.len() {
            let lerped: Vector3<f64> = a.theta[j].lerp(&b.theta[j], frac);
            out.theta[j] = canonicalize_axis_angle(lerped);
        }
        frames.push(out);
    }
    Ok(PoseSequence {
        frames,
        rate_hz: target_hz,
        subject_mass_kg: seq.subject_mass_kg,
        subject_height_m: seq.subject_height_m,
    })
}

pub fn resample_pressure(seq: &PressureSequence, target_hz: f64) -> Result<PressureSequence> {
    if target_hz <= 0.0 {
        return Err(Error::Config(format!("target rate {target_hz} Hz")));
    }
    let n = seq.len();
    if n == 0 {
        return Err(Error::TooShort { context: "resample_pressure", needed: 1, got: 0 });
    }
    let m = if n == 1 { 1 } else { sample_count(n, seq.rate_hz, target_hz) };
    let (_, rows, cols) = seq.frames().dim();
    let mut frames = Array3::zeros((m, rows, cols));
    for k in 0..m {
        let t = k as f64 / target_hz * seq.rate_hz;
        let src = (t.round() as usize).min(n - 1);
        for r in 0..rows {
            for c in 0..cols {
                frames[(k, r, c)] = seq.frames()[(src, r, c)];
            }
        }
    }
    PressureSequence::new(frames, target_hz, seq.mat_geometry_id.clone())
}
