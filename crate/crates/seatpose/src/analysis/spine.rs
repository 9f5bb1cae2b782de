//! Spine posture angles measured in the pelvis frame, so a subject can face
//! any direction without changing the reading.

use nalgebra::Vector3;

use crate::body::{global_transforms, joint_index, PoseFrame, PoseSequence, Skeleton};
use crate::{Error, Result};

/// Lumbar flexion above this many degrees flags a frame as slouching.
pub const DEFAULT_SLOUCH_THRESHOLD_DEG: f64 = 20.0;

/// Sagittal and coronal posture angles in degrees, both in (-180, 180].
/// Flexion is positive leaning forward; tilt is positive toward the
/// subject's left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineAngles {
    pub lumbar_flexion_deg: f64,
    pub thoracic_tilt_deg: f64,
}

/// Lumbar flexion is the pelvis→spine2 vector against world vertical in the
/// sagittal plane; thoracic tilt is spine2→neck against vertical in the
/// coronal plane. Both planes come from the pelvis frame: the sagittal
/// normal is the pelvis lateral axis, the coronal normal its forward axis.
pub fn spine_angles(pose: &PoseFrame, skel: &Skeleton) -> Result<SpineAngles> {
    let pelvis = joint_index("pelvis").unwrap();
    let spine2 = joint_index("spine2").unwrap();
    let neck = joint_index("neck").unwrap();
    let transforms = global_transforms(pose, skel)?;

    let lateral = transforms[pelvis].rotation * Vector3::y();
    let forward = transforms[pelvis].rotation * Vector3::x();
    let lumbar_vec = transforms[spine2].position - transforms[pelvis].position;
    let thoracic_vec = transforms[neck].position - transforms[spine2].position;

    Ok(SpineAngles {
        lumbar_flexion_deg: signed_plane_angle(lumbar_vec, lateral, "lumbar")?,
        thoracic_tilt_deg: signed_plane_angle(thoracic_vec, -forward, "thoracic")?,
    })
}

/// Signed angle from world-up to `v`, both projected onto the plane with the
/// given normal, measured about that normal.
fn signed_plane_angle(v: Vector3<f64>, normal: Vector3<f64>, which: &str) -> Result<f64> {
    let n = normal.normalize();
    let up = Vector3::z();
    let v_p = v - n * v.dot(&n);
    let up_p = up - n * up.dot(&n);
    if v.norm() < 1e-9 || v_p.norm() < 1e-12 || up_p.norm() < 1e-12 {
        return Err(Error::Config(format!("degenerate {which} spine vector")));
    }
    let sin = n.dot(&up_p.cross(&v_p));
    let cos = up_p.dot(&v_p);
    Ok(sin.atan2(cos).to_degrees())
}

/// One frame of the posture report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostureSample {
    pub frame: usize,
    pub angles: SpineAngles,
    pub slouching: bool,
}

/// Per-frame angles with a slouch flag at the given lumbar threshold.
pub fn posture_report(
    seq: &PoseSequence,
    skel: &Skeleton,
    slouch_threshold_deg: f64,
) -> Result<Vec<PostureSample>> {
    let mut out = Vec::with_capacity(seq.frames.len());
    for (frame, pose) in seq.frames.iter().enumerate() {
        let angles = spine_angles(pose, skel)?;
        out.push(PostureSample {
            frame,
            angles,
            slouching: angles.lumbar_flexion_deg > slouch_threshold_deg,
        });
    }
    Ok(out)
}
