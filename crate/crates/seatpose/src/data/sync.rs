//! Tap-based stream alignment. Both streams open with three deliberate taps
//! on the seat; the third tap anchors a shared time origin. Detection runs on
//! scalar activity traces: total raster pressure on one side, inverted wrist
//! height on the other.

use crate::body::{forward_kinematics, joint_index, PoseSequence, Skeleton};
use crate::error::{Error, Result};

use super::recording::{Activity, PressureSequence, Recording};
use super::resample::{resample_pose, resample_pressure};

/// Minimum spacing between distinct taps, in seconds.
const TAP_SEPARATION_S: f64 = 0.3;
/// Peaks must clear this many standard deviations above the trace mean.
const TAP_SIGMA: f64 = 4.0;
/// Rate both streams are resampled to after trimming.
const SYNC_RATE_HZ: f64 = 15.0;

/// Metadata attached to the synchronized output.
#[derive(Debug, Clone)]
pub struct RecordingLabels {
    pub chair_id: String,
    pub subject_id: String,
    pub activity: Activity,
    pub synthetic: bool,
}

/// Finds tap peaks in a scalar trace: local maxima whose z-score exceeds 4,
/// thinned greedily by amplitude so survivors sit at least 0.3 s apart.
/// Returns frame indices in time order.
pub fn detect_taps(signal: &[f64], rate_hz: f64) -> Vec<usize> {
    let n = signal.len();
    if n < 3 {
        return Vec::new();
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let var = signal.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let sd = var.sqrt();
    if sd <= 0.0 {
        return Vec::new();
    }
    let mut candidates: Vec<usize> = (1..n - 1)
        .filter(|&i| {
            signal[i] > signal[i - 1]
                && signal[i] >= signal[i + 1]
                && (signal[i] - mean) / sd > TAP_SIGMA
        })
        .collect();
    candidates.sort_by(|&a, &b| signal[b].partial_cmp(&signal[a]).unwrap());

    let min_gap = (TAP_SEPARATION_S * rate_hz).ceil() as usize;
    let mut kept: Vec<usize> = Vec::new();
    for i in candidates {
        if kept.iter().all(|&k| k.abs_diff(i) >= min_gap) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

/// Per-frame total mat load.
fn pressure_trace(seq: &PressureSequence) -> Vec<f64> {
    let (n, rows, cols) = seq.frames().dim();
    (0..n)
        .map(|t| {
            let mut s = 0.0;
            for r in 0..rows {
                for c in 0..cols {
                    s += seq.frames()[(t, r, c)];
                }
            }
            s
        })
        .collect()
}

/// Per-frame hand-contact proxy: negated height of the lower wrist, so a tap
/// (hand driven down onto the seat) shows up as a maximum.
fn wrist_trace(pose: &PoseSequence, skel: &Skeleton) -> Result<Vec<f64>> {
    let lw = joint_index("left_wrist").expect("skeleton names");
    let rw = joint_index("right_wrist").expect("skeleton names");
    let mut out = Vec::with_capacity(pose.frames.len());
    for f in &pose.frames {
        let pos = forward_kinematics(f, skel)?;
        out.push(-pos[lw].z.min(pos[rw].z));
    }
    Ok(out)
}

fn third_tap(signal: &[f64], rate_hz: f64, stream: &'static str) -> Result<usize> {
    let taps = detect_taps(signal, rate_hz);
    if taps.len() < 3 {
        return Err(Error::SyncFailure { stream, detected: taps.len() });
    }
    Ok(taps[2])
}

/// Aligns the two raw streams on their third start-tap, trims the preamble,
/// and resamples both to 15 Hz. Returns the clock offset in seconds (pose
/// third-tap time minus pressure third-tap time) and the trimmed recording.
pub fn tap_synchronize(
    pressure: &PressureSequence,
    pose: &PoseSequence,
    skel: &Skeleton,
    labels: RecordingLabels,
) -> Result<(f64, Recording)> {
    pose.validate()?;
    let p_tap = third_tap(&pressure_trace(pressure), pressure.rate_hz, "pressure")?;
    let q_tap = third_tap(&wrist_trace(pose, skel)?, pose.rate_hz, "pose")?;
    let offset = q_tap as f64 / pose.rate_hz - p_tap as f64 / pressure.rate_hz;

    let trimmed_pressure = PressureSequence::new(
        pressure.frames().slice(ndarray::s![p_tap.., .., ..]).to_owned(),
        pressure.rate_hz,
        pressure.mat_geometry_id.clone(),
    )?;
    let trimmed_pose = PoseSequence { frames: pose.frames[q_tap..].to_vec(), ..pose.clone() };

    let mut res_pressure = resample_pressure(&trimmed_pressure, SYNC_RATE_HZ)?;
    let mut res_pose = resample_pose(&trimmed_pose, SYNC_RATE_HZ)?;

    let common = res_pressure.len().min(res_pose.frames.len());
    if common == 0 {
        return Err(Error::TooShort { context: "tap_synchronize", needed: 1, got: 0 });
    }
    if res_pressure.len() != common {
        res_pressure = PressureSequence::new(
            res_pressure.frames().slice(ndarray::s![..common, .., ..]).to_owned(),
            SYNC_RATE_HZ,
            res_pressure.mat_geometry_id.clone(),
        )?;
    }
    res_pose.frames.truncate(common);

    let rec = Recording::new(
        res_pressure,
        res_pose,
        labels.chair_id,
        labels.subject_id,
        labels.activity,
        labels.synthetic,
    )?;
    Ok((offset, rec))
}
