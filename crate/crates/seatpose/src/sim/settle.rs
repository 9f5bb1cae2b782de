//! Gravity-axis settling: translate the root straight down (or up, when the
//! start pose penetrates) until the lowest body surface sample rests on the
//! mat. Limb rotations never change.

use crate::body::{surface_points, PoseFrame, Skeleton};
use crate::error::{Error, Result};

use super::drape::MatGeometry;

/// Allowed penetration after settling, meters.
pub const PENETRATION_TOL_M: f64 = 0.002;
/// Hover tolerance: a body this close above the mat counts as resting.
const REST_TOL_M: f64 = 0.0005;
/// Per-iteration translation cap, meters.
const STEP_M: f64 = 0.02;
const MAX_ITERATIONS: usize = 200;

/// Smallest gap between a body sample and the support surface under it, or
/// None when no sample sits above any up-facing cell. Negative means
/// penetration.
fn min_clearance(pose: &PoseFrame, skel: &Skeleton, mat: &MatGeometry) -> Result<Option<f64>> {
    let mut min: Option<f64> = None;
    for s in surface_points(pose, skel)? {
        if let Some(z) = mat.support_z(s.position.x, s.position.y) {
            let c = s.position.z - z;
            min = Some(match min {
                None => c,
                Some(m) => m.min(c),
            });
        }
    }
    Ok(min)
}

/// Drops the pose onto the mat in capped steps; the final step closes the
/// remaining gap exactly, so convergence is deterministic.
pub fn settle(pose: &PoseFrame, skel: &Skeleton, mat: &MatGeometry) -> Result<PoseFrame> {
    let mut out = pose.clone();
    for iteration in 0..MAX_ITERATIONS {
        let clearance = match min_clearance(&out, skel, mat)? {
            Some(c) => c,
            None => {
                return Err(Error::SettleFailure {
                    iterations: iteration,
                    reason: "no supporting mat cells under the body".into(),
                })
            }
        };
        if (-PENETRATION_TOL_M..=REST_TOL_M).contains(&clearance) {
            return Ok(out);
        }
        out.root.z -= clearance.clamp(-STEP_M, STEP_M);
        if out.root.z < -2.0 {
            return Err(Error::SettleFailure {
                iterations: iteration,
                reason: "root fell below the scene".into(),
            });
        }
    }
    Err(Error::SettleFailure {
        iterations: MAX_ITERATIONS,
        reason: "clearance did not converge".into(),
    })
}
