//! Forward kinematics over the joint tree.

use nalgebra::{Rotation3, Vector3};

use crate::error::{Error, Result};

use super::skeleton::{PoseFrame, Skeleton, J};

/// World-space frame of one joint.
#[derive(Debug, Clone)]
pub struct JointTransform {
    pub rotation: Rotation3<f64>,
    pub position: Vector3<f64>,
}

/// Global rotation and position of every joint. Joint `j`'s position is the
/// parent position plus the parent's global rotation applied to the rest
/// offset; its rotation is the parent chain composed with its own axis-angle.
pub fn global_transforms(pose: &PoseFrame, skel: &Skeleton) -> Result<Vec<JointTransform>> {
    if pose.theta.len() != J {
        return Err(Error::Dimension {
            context: "forward_kinematics pose",
            expected: J.to_string(),
            got: pose.theta.len().to_string(),
        });
    }
    let mut out: Vec<JointTransform> = Vec::with_capacity(J);
    for j in 0..J {
        let local = Rotation3::from_scaled_axis(pose.theta[j]);
        let t = match skel.parent(j) {
            None => JointTransform { rotation: local, position: pose.root },
            Some(p) => {
                let parent = &out[p];
                JointTransform {
                    rotation: parent.rotation * local,
                    position: parent.position + parent.rotation * skel.offset(j),
                }
            }
        };
        out.push(t);
    }
    Ok(out)
}

/// Joint positions only; see [`global_transforms`].
pub fn forward_kinematics(pose: &PoseFrame, skel: &Skeleton) -> Result<Vec<Vector3<f64>>> {
    Ok(global_transforms(pose, skel)?.into_iter().map(|t| t.position).collect())
}
