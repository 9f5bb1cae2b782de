//! Fixed motion-feature extractors feeding the Fréchet distances.

use ndarray::{Array1, Array2};

use crate::body::{forward_kinematics, PoseSequence, Skeleton, J};
use crate::error::{Error, Result};

/// Per-sequence summary features.
#[derive(Debug, Clone)]
pub struct MotionFeatures {
    /// Per-joint mean speed then mean acceleration magnitude (2J values).
    pub kinetic: Array1<f64>,
    /// Mean pelvis-relative joint positions (3J) then mean joint-angle
    /// magnitudes (J).
    pub geometric: Array1<f64>,
}

/// Summarizes a sequence with forward differences, so uniform motion yields
/// speed entries exactly equal to the true velocity magnitude.
pub fn extract_features(seq: &PoseSequence, skel: &Skeleton) -> Result<MotionFeatures> {
    let n = seq.frames.len();
    if n < 2 {
        return Err(Error::TooShort { context: "extract_features", needed: 2, got: n });
    }
    let rate = seq.rate_hz;
    let pos: Vec<Vec<nalgebra::Vector3<f64>>> = seq
        .frames
        .iter()
        .map(|f| forward_kinematics(f, skel))
        .collect::<Result<_>>()?;

    let mut kinetic = Array1::zeros(2 * J);
    let mut geometric = Array1::zeros(3 * J + J);
    for j in 0..J {
        let mut speed = 0.0;
        for t in 0..n - 1 {
            speed += ((pos[t + 1][j] - pos[t][j]) * rate).norm();
        }
        kinetic[j] = speed / (n - 1) as f64;

        let mut acc = 0.0;
        if n > 2 {
            for t in 0..n - 2 {
                let a = (pos[t + 2][j] - pos[t + 1][j] * 2.0 + pos[t][j]) * rate * rate;
                acc += a.norm();
            }
            acc /= (n - 2) as f64;
        }
        kinetic[J + j] = acc;

        let mut rel = nalgebra::Vector3::zeros();
        let mut ang = 0.0;
        for t in 0..n {
            rel += pos[t][j] - pos[t][0];
            ang += seq.frames[t].theta[j].norm();
        }
        rel /= n as f64;
        geometric[3 * j] = rel.x;
        geometric[3 * j + 1] = rel.y;
        geometric[3 * j + 2] = rel.z;
        geometric[3 * J + j] = ang / n as f64;
    }
    Ok(MotionFeatures { kinetic, geometric })
}

/// Feature rows for distribution metrics: the sequence is cut into
/// non-overlapping windows and each window contributes one kinetic and one
/// geometric row. Windows shorter than 2 frames cannot carry derivatives, so
/// `window_frames` must be at least 2; a trailing partial window is dropped.
pub fn windowed_features(
    seq: &PoseSequence,
    skel: &Skeleton,
    window_frames: usize,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if window_frames < 2 {
        return Err(Error::TooShort { context: "windowed_features", needed: 2, got: window_frames });
    }
    let windows = seq.frames.len() / window_frames;
    let mut kinetic = Array2::zeros((windows, 2 * J));
    let mut geometric = Array2::zeros((windows, 4 * J));
    for w in 0..windows {
        let sub = PoseSequence {
            frames: seq.frames[w * window_frames..(w + 1) * window_frames].to_vec(),
            rate_hz: seq.rate_hz,
            subject_mass_kg: seq.subject_mass_kg,
            subject_height_m: seq.subject_height_m,
        };
        let f = extract_features(&sub, skel)?;
        kinetic.row_mut(w).assign(&f.kinetic);
        geometric.row_mut(w).assign(&f.geometric);
    }
    Ok((kinetic, geometric))
}
