//! Shared helpers for integration tests.
#![allow(dead_code)]

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seatpose::body::{PoseFrame, PoseSequence, J};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>()
}

pub fn symmetric(rng: &mut ChaCha8Rng, half_range: f64) -> f64 {
    (rng.random::<f64>() * 2.0 - 1.0) * half_range
}

/// Random pose with bounded joint angles; stays within the canonical
/// axis-angle range.
pub fn random_pose(rng: &mut ChaCha8Rng, angle_range: f64) -> PoseFrame {
    let mut pose = PoseFrame::identity();
    for j in 0..J {
        pose.theta[j] =
            Vector3::new(symmetric(rng, angle_range), symmetric(rng, angle_range), symmetric(rng, angle_range));
    }
    pose.root = Vector3::new(symmetric(rng, 0.5), symmetric(rng, 0.5), 0.45 + symmetric(rng, 0.1));
    pose
}

/// Random smooth-ish sequence built from a random walk over poses.
pub fn random_sequence(rng: &mut ChaCha8Rng, frames: usize) -> PoseSequence {
    let mut current = random_pose(rng, 0.4);
    let mut out = Vec::with_capacity(frames);
    for _ in 0..frames {
        let mut next = current.clone();
        for j in 0..J {
            next.theta[j] += Vector3::new(
                symmetric(rng, 0.02),
                symmetric(rng, 0.02),
                symmetric(rng, 0.02),
            );
        }
        next.root += Vector3::new(symmetric(rng, 0.01), symmetric(rng, 0.01), symmetric(rng, 0.005));
        out.push(next.clone());
        current = next;
    }
    PoseSequence { frames: out, rate_hz: 15.0, subject_mass_kg: 70.0, subject_height_m: 1.75 }
}
