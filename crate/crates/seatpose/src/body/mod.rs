//! Kinematic body model: 22-joint skeleton, forward kinematics, capsule
//! surface sampling, and per-chunk motion descriptors.
//!
//! Conventions: z is up, x is forward (the way the body faces at identity
//! pose), y is left. Rotations are axis-angle vectors (radians), positions
//! are meters. The rest pose is a T-pose; offsets scale linearly with
//! subject height.

mod descriptors;
mod fk;
mod skeleton;
mod surface;

pub use descriptors::{motion_descriptors, FeatureChunk, DESCRIPTOR_BLOCKS};
pub use fk::{forward_kinematics, global_transforms, JointTransform};
pub use skeleton::{
    canonicalize_axis_angle, joint_index, PoseFrame, PoseSequence, Skeleton, JOINT_NAMES, J,
};
pub use surface::{surface_points, SurfacePoint};

/// Spatial dimensions; fixed at 3 throughout the pipeline.
pub const D: usize = 3;

/// Native capture/playback rate in frames per second.
pub const FRAME_RATE_HZ: f64 = 15.0;
