//! Capsule surface sampling, the mesh stand-in used for vertex error and
//! contact simulation.

use nalgebra::Vector3;

use crate::error::Result;

use super::fk::global_transforms;
use super::skeleton::{PoseFrame, Skeleton, J};

/// One body-surface sample in world space.
#[derive(Debug, Clone)]
pub struct SurfacePoint {
    pub position: Vector3<f64>,
    pub area: f64,
    pub segment: usize,
}

/// Transforms each segment's local capsule samples by the segment's world
/// frame. A segment rides its parent joint's frame (the bone from parent to
/// joint rotates with the parent); the root segment rides the root frame.
/// Counts and areas never depend on the pose.
pub fn surface_points(pose: &PoseFrame, skel: &Skeleton) -> Result<Vec<SurfacePoint>> {
    let transforms = global_transforms(pose, skel)?;
    let mut out = Vec::with_capacity(J * skel.segment_samples(0).len());
    for j in 0..J {
        let frame = match skel.parent(j) {
            None => &transforms[0],
            Some(p) => &transforms[p],
        };
        for s in skel.segment_samples(j) {
            out.push(SurfacePoint {
                position: frame.position + frame.rotation * s.point,
                area: s.area,
                segment: j,
            });
        }
    }
    Ok(out)
}
