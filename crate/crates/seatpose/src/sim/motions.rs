//! Parametric seated-motion generators, one per activity class. Roots are
//! relative to the chair's pelvis anchor; the vertical comes from settling,
//! plus an explicit lift channel for motions that push the body off the seat.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Rotation3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::body::{canonicalize_axis_angle, joint_index, PoseFrame};
use crate::data::Activity;

/// One generated clip. `frames[i].root` holds (x, y) offsets from the pelvis
/// anchor with a placeholder z; `lift[i]` is added above the settled height.
#[derive(Debug, Clone)]
pub struct SynthMotion {
    pub activity: Activity,
    pub rate_hz: f64,
    pub frames: Vec<PoseFrame>,
    pub lift: Vec<f64>,
}

fn rx(a: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::x_axis(), a)
}

fn ry(a: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::y_axis(), a)
}

fn rz(a: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), a)
}

fn aa(r: Rotation3<f64>) -> Vector3<f64> {
    canonicalize_axis_angle(r.scaled_axis())
}

fn j(name: &str) -> usize {
    joint_index(name).expect("skeleton joint names")
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Neutral sitting: thighs forward, shins down, arms hanging.
pub fn seated_rest() -> PoseFrame {
    let mut f = PoseFrame::identity();
    f.theta[j("left_hip")] = aa(ry(-FRAC_PI_2));
    f.theta[j("right_hip")] = aa(ry(-FRAC_PI_2));
    f.theta[j("left_knee")] = aa(ry(FRAC_PI_2 * 0.95));
    f.theta[j("right_knee")] = aa(ry(FRAC_PI_2 * 0.95));
    f.theta[j("left_shoulder")] = aa(rx(-1.25));
    f.theta[j("right_shoulder")] = aa(rx(1.25));
    f.theta[j("left_elbow")] = aa(rx(-0.15));
    f.theta[j("right_elbow")] = aa(rx(0.15));
    f.theta[j("spine1")] = aa(ry(0.05));
    f
}

/// Generates one clip. The rng jitters period, amplitude, and phase so
/// repeated clips of the same class differ while staying recognizable.
pub fn motion_frames(
    activity: Activity,
    seconds: f64,
    rate_hz: f64,
    rng: &mut ChaCha8Rng,
) -> SynthMotion {
    let n = (seconds * rate_hz).round().max(1.0) as usize;
    let period = 3.2 + 1.6 * rng.random::<f64>();
    let amp = 0.85 + 0.30 * rng.random::<f64>();
    let phase = rng.random::<f64>() * TAU;

    let mut frames = Vec::with_capacity(n);
    let mut lifts = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / rate_hz;
        let arg = TAU * t / period + phase;
        let s = arg.sin();
        // 0 -> 1 -> 0 over each period.
        let cycle = 0.5 - 0.5 * arg.cos();
        let clip = smoothstep(t / seconds.max(1e-9));

        let mut f = seated_rest();
        let mut lift = 0.0;
        match activity {
            Activity::UprightSitting => {
                f.theta[j("spine2")] = aa(ry(0.05 * amp * s) * rx(0.04 * amp * (0.7 * arg).sin()));
            }
            Activity::ForwardLeaning => {
                let lean = 0.25 + 0.30 * amp * cycle;
                f.theta[j("spine1")] = aa(ry(lean));
                f.theta[j("neck")] = aa(ry(0.10 * amp));
            }
            Activity::Reclining => {
                f.theta[j("spine1")] = aa(ry(-0.30 * amp - 0.06 * cycle));
                f.theta[j("neck")] = aa(ry(-0.10));
                f.root.x = -0.04;
            }
            Activity::Slouching => {
                f.theta[j("pelvis")] = aa(ry(-0.18 * amp));
                f.theta[j("spine2")] = aa(ry(0.40 * amp + 0.05 * s));
                f.theta[j("neck")] = aa(ry(0.15));
            }
            Activity::CrossingLegs => {
                let q = smoothstep(t / (0.25 * seconds)) * amp.min(1.0);
                f.theta[j("left_hip")] =
                    aa(rz(0.45 * q) * ry(-FRAC_PI_2 * (1.0 - 0.15 * q)) * rx(0.50 * q));
                f.theta[j("left_knee")] = aa(ry(FRAC_PI_2 * 0.95 + 0.35 * q));
            }
            Activity::ReachingForward => {
                let reach = amp.min(1.0) * cycle;
                f.theta[j("left_shoulder")] = aa(rz(-FRAC_PI_2 * reach) * rx(-1.25 * (1.0 - reach)));
                f.theta[j("right_shoulder")] = aa(rz(FRAC_PI_2 * reach) * rx(1.25 * (1.0 - reach)));
                f.theta[j("left_elbow")] = Vector3::zeros();
                f.theta[j("right_elbow")] = Vector3::zeros();
                f.theta[j("spine1")] = aa(ry(0.30 * reach));
            }
            Activity::TwistingTorso => {
                f.theta[j("spine2")] = aa(rz(0.50 * amp * s));
                f.theta[j("neck")] = aa(rz(-0.20 * amp * s));
            }
            Activity::LegOnChair => {
                let q = smoothstep(t / (0.25 * seconds)) * amp.min(1.0);
                let hip = -(FRAC_PI_2 * (1.0 - q) + 1.90 * q);
                f.theta[j("left_hip")] = aa(rz(0.40 * q) * ry(hip));
                f.theta[j("left_knee")] = aa(ry(FRAC_PI_2 * 0.95 * (1.0 - q) + 1.45 * q));
            }
            Activity::BodyLift => {
                f.theta[j("left_shoulder")] = aa(rx(-1.50));
                f.theta[j("right_shoulder")] = aa(rx(1.50));
                f.theta[j("spine1")] = aa(ry(0.15 * cycle));
                lift = 0.06 * amp * cycle * cycle;
            }
            Activity::Sliding => {
                f.root.x = 0.06 * amp * s;
                f.theta[j("spine1")] = aa(ry(0.10 * s));
            }
            Activity::LeaningSide => {
                f.theta[j("spine1")] = aa(rx(0.35 * amp * s));
                f.root.y = 0.02 * s;
            }
            Activity::SittingBack => {
                f.root.x = 0.06 * (1.0 - clip) - 0.02 * clip;
                f.theta[j("spine1")] = aa(ry(0.35 * (1.0 - clip) - 0.12 * clip));
            }
        }
        frames.push(f);
        lifts.push(lift);
    }
    SynthMotion { activity, rate_hz, frames, lift: lifts }
}
