//! Batch synthetic-recording generation: every (chair, subject, activity)
//! triple becomes one settled, rendered, labeled Recording.

use ndarray::Array3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::body::{PoseSequence, Skeleton, FRAME_RATE_HZ};
use crate::data::{Activity, PressureSequence, Recording, PRESSURE_COLS, PRESSURE_ROWS};
use crate::error::{Error, Result};

use super::chair::ChairModel;
use super::drape::drape_mat;
use super::motions::motion_frames;
use super::render::render;
use super::settle::settle;

#[derive(Debug, Clone)]
pub struct SubjectSpec {
    pub id: String,
    pub height_m: f64,
    pub mass_kg: f64,
}

#[derive(Debug)]
pub struct GeneratedCorpus {
    pub recordings: Vec<Recording>,
    /// Frames dropped because settling failed; recordings keep their
    /// remaining frames.
    pub skipped_frames: usize,
}

/// Generates `chairs x subjects x activities` synthetic recordings of the
/// given length. Each triple draws from its own rng stream keyed by (seed,
/// triple index), so output is deterministic and order-independent.
pub fn generate_corpus(
    chairs: &[ChairModel],
    subjects: &[SubjectSpec],
    activities: &[Activity],
    seconds: f64,
    seed: u64,
) -> Result<GeneratedCorpus> {
    if chairs.is_empty() || subjects.is_empty() || activities.is_empty() {
        return Err(Error::Config(
            "corpus generation needs at least one chair, subject, and activity".into(),
        ));
    }
    let mut recordings = Vec::new();
    let mut skipped = 0usize;
    let mut stream = 0u64;
    for chair in chairs {
        let mat = drape_mat(chair)?;
        for subject in subjects {
            let skel = Skeleton::with_height(subject.height_m)?;
            for &activity in activities {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                stream += 1;

                let motion = motion_frames(activity, seconds, FRAME_RATE_HZ, &mut rng);
                let mut poses = Vec::with_capacity(motion.frames.len());
                let mut rasters = Vec::with_capacity(motion.frames.len());
                // Warm start each frame from the previous settled height.
                let mut prev_z = mat.seat_z + 0.35;
                for (k, rel) in motion.frames.iter().enumerate() {
                    let mut pose = rel.clone();
                    pose.root.x += mat.pelvis_anchor.x;
                    pose.root.y += mat.pelvis_anchor.y;
                    pose.root.z = prev_z;
                    match settle(&pose, &skel, &mat) {
                        Ok(mut settled) => {
                            prev_z = settled.root.z;
                            settled.root.z += motion.lift[k];
                            rasters.push(render(&settled, &skel, &mat, subject.mass_kg)?.mmhg);
                            poses.push(settled);
                        }
                        Err(Error::SettleFailure { .. }) => skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
                if poses.is_empty() {
                    continue;
                }
                let mut frames = Array3::zeros((rasters.len(), PRESSURE_ROWS, PRESSURE_COLS));
                for (t, raster) in rasters.iter().enumerate() {
                    for r in 0..PRESSURE_ROWS {
                        for c in 0..PRESSURE_COLS {
                            frames[(t, r, c)] = raster[(r, c)];
                        }
                    }
                }
                let pressure = PressureSequence::new(frames, FRAME_RATE_HZ, chair.id.clone())?;
                let pose_seq = PoseSequence {
                    frames: poses,
                    rate_hz: FRAME_RATE_HZ,
                    subject_mass_kg: subject.mass_kg,
                    subject_height_m: subject.height_m,
                };
                recordings.push(Recording::new(
                    pressure,
                    pose_seq,
                    chair.id.clone(),
                    subject.id.clone(),
                    activity,
                    true,
                )?);
            }
        }
    }
    Ok(GeneratedCorpus { recordings, skipped_frames: skipped })
}
