//! Windowed motion descriptors: positions, rotations, and their first and
//! second finite-difference derivatives.

use ndarray::{Array3, Axis};

use crate::error::{Error, Result};

use super::fk::forward_kinematics;
use super::skeleton::{PoseSequence, Skeleton, J};

/// Number of per-joint descriptor blocks (P, θ, v_l, v_a, a_l, a_a).
pub const DESCRIPTOR_BLOCKS: usize = 6;

/// One fixed-length window of motion descriptors, each block shaped (T, J, 3).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureChunk {
    pub positions: Array3<f64>,
    pub theta: Array3<f64>,
    pub lin_vel: Array3<f64>,
    pub ang_vel: Array3<f64>,
    pub lin_acc: Array3<f64>,
    pub ang_acc: Array3<f64>,
}

impl FeatureChunk {
    pub fn frames(&self) -> usize {
        self.positions.len_of(Axis(0))
    }

    /// Flat width of a T-frame chunk: T·J·18.
    pub fn flat_width(t_frames: usize) -> usize {
        t_frames * J * 3 * DESCRIPTOR_BLOCKS
    }

    /// Row layout used everywhere downstream: per frame, per joint, the six
    /// 3-vectors in order [P, θ, v_l, v_a, a_l, a_a].
    pub fn flat(&self) -> Vec<f64> {
        let t_frames = self.frames();
        let mut out = Vec::with_capacity(Self::flat_width(t_frames));
        for t in 0..t_frames {
            for j in 0..J {
                for block in [
                    &self.positions,
                    &self.theta,
                    &self.lin_vel,
                    &self.ang_vel,
                    &self.lin_acc,
                    &self.ang_acc,
                ] {
                    for d in 0..3 {
                        out.push(block[(t, j, d)]);
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`FeatureChunk::flat`].
    pub fn from_flat(v: &[f64], t_frames: usize) -> Result<FeatureChunk> {
        if v.len() != Self::flat_width(t_frames) {
            return Err(Error::Dimension {
                context: "FeatureChunk::from_flat",
                expected: Self::flat_width(t_frames).to_string(),
                got: v.len().to_string(),
            });
        }
        let shape = (t_frames, J, 3);
        let mut blocks = vec![Array3::zeros(shape); DESCRIPTOR_BLOCKS];
        let mut i = 0;
        for t in 0..t_frames {
            for j in 0..J {
                for block in blocks.iter_mut() {
                    for d in 0..3 {
                        block[(t, j, d)] = v[i];
                        i += 1;
                    }
                }
            }
        }
        let mut it = blocks.into_iter();
        Ok(FeatureChunk {
            positions: it.next().unwrap(),
            theta: it.next().unwrap(),
            lin_vel: it.next().unwrap(),
            ang_vel: it.next().unwrap(),
            lin_acc: it.next().unwrap(),
            ang_acc: it.next().unwrap(),
        })
    }
}

/// Central finite difference with replicate padding, scaled by `rate`.
fn central_diff(x: &Array3<f64>, rate: f64) -> Array3<f64> {
    let n = x.len_of(Axis(0));
    let mut out = Array3::zeros(x.raw_dim());
    for t in 0..n {
        let prev = t.saturating_sub(1);
        let next = (t + 1).min(n - 1);
        for j in 0..x.len_of(Axis(1)) {
            for d in 0..x.len_of(Axis(2)) {
                out[(t, j, d)] = (x[(next, j, d)] - x[(prev, j, d)]) * rate / 2.0;
            }
        }
    }
    out
}

/// Splits a sequence into non-overlapping windows of `window_s` seconds and
/// computes the six descriptor blocks per window. Derivatives are taken over
/// the whole sequence before chunking, so chunk boundaries see true
/// neighbours. A sequence shorter than one window yields no chunks.
pub fn motion_descriptors(
    seq: &PoseSequence,
    skel: &Skeleton,
    window_s: f64,
) -> Result<Vec<FeatureChunk>> {
    seq.validate()?;
    let t_exact = window_s * seq.rate_hz;
    let t_win = t_exact.round() as usize;
    if t_win == 0 || (t_exact - t_win as f64).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "window of {window_s}s is not a whole number of frames at {} Hz",
            seq.rate_hz
        )));
    }
    let n = seq.frames.len();
    if n < t_win {
        return Ok(Vec::new());
    }

    let mut positions = Array3::zeros((n, J, 3));
    let mut theta = Array3::zeros((n, J, 3));
    for (t, frame) in seq.frames.iter().enumerate() {
        let joints = forward_kinematics(frame, skel)?;
        for j in 0..J {
            for d in 0..3 {
                positions[(t, j, d)] = joints[j][d];
                theta[(t, j, d)] = frame.theta[j][d];
            }
        }
    }

    let lin_vel = central_diff(&positions, seq.rate_hz);
    let ang_vel = central_diff(&theta, seq.rate_hz);
    let lin_acc = central_diff(&lin_vel, seq.rate_hz);
    let ang_acc = central_diff(&ang_vel, seq.rate_hz);

    let chunks = n / t_win;
    let slice_of = |a: &Array3<f64>, c: usize| {
        a.slice(ndarray::s![c * t_win..(c + 1) * t_win, .., ..]).to_owned()
    };
    Ok((0..chunks)
        .map(|c| FeatureChunk {
            positions: slice_of(&positions, c),
            theta: slice_of(&theta, c),
            lin_vel: slice_of(&lin_vel, c),
            ang_vel: slice_of(&ang_vel, c),
            lin_acc: slice_of(&lin_acc, c),
            ang_acc: slice_of(&ang_acc, c),
        })
        .collect())
}
