//! Skeleton topology, anthropometry, and pose containers.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Joint count. The tree covers pelvis, three spine joints, neck, head, and
/// left/right hip-knee-ankle-foot and collar-shoulder-elbow-wrist chains.
pub const J: usize = 22;

pub const JOINT_NAMES: [&str; J] = [
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "left_collar",
    "right_collar",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
];

/// Parent of each joint; the root's parent is `usize::MAX`.
pub const PARENTS: [usize; J] = [
    usize::MAX,
    0,
    0,
    0,
    1,
    2,
    3,
    4,
    5,
    6,
    7,
    8,
    9,
    9,
    9,
    12,
    13,
    14,
    16,
    17,
    18,
    19,
];

/// Rest offsets from parent at the reference height, meters (T-pose).
const REF_HEIGHT_M: f64 = 1.75;
const REF_OFFSETS: [[f64; 3]; J] = [
    [0.0, 0.0, 0.0],
    [0.0, 0.09, -0.06],
    [0.0, -0.09, -0.06],
    [0.0, 0.0, 0.11],
    [0.0, 0.0, -0.42],
    [0.0, 0.0, -0.42],
    [0.0, 0.0, 0.12],
    [0.0, 0.0, -0.44],
    [0.0, 0.0, -0.44],
    [0.0, 0.0, 0.12],
    [0.13, 0.0, -0.05],
    [0.13, 0.0, -0.05],
    [0.0, 0.0, 0.18],
    [0.0, 0.07, 0.14],
    [0.0, -0.07, 0.14],
    [0.0, 0.0, 0.12],
    [0.0, 0.11, 0.01],
    [0.0, -0.11, 0.01],
    [0.0, 0.28, 0.0],
    [0.0, -0.28, 0.0],
    [0.0, 0.25, 0.0],
    [0.0, -0.25, 0.0],
];

/// Segment mass numerators (parts per 10000 of body mass). Segment `j` is the
/// bone from `PARENTS[j]` to `j`; the root entry is the pelvis body itself.
/// Derived from standard anthropometric proportions: trunk split across
/// pelvis and spine joints, thigh dominating the leg, head plus neck near 7%.
const MASS_E4: [u32; J] = [
    1117, // pelvis
    50, 50, // hip stubs
    1633, // lower trunk
    1366, 1366, // thighs
    798,  // mid trunk
    433, 433, // shanks
    698,  // upper trunk
    137, 137, // feet
    70,   // neck
    50, 50, // collars
    524, // head
    50, 50, // shoulder stubs
    271, 271, // upper arms
    223, 223, // forearms (incl. hands)
];

/// Capsule radius per segment at the reference height, meters.
const REF_RADII: [f64; J] = [
    0.110, // pelvis
    0.080, 0.080, // hip stubs
    0.110, // lower trunk
    0.075, 0.075, // thighs
    0.115, // mid trunk
    0.050, 0.050, // shanks
    0.115, // upper trunk
    0.040, 0.040, // feet
    0.045, // neck
    0.050, 0.050, // collars
    0.095, // head
    0.055, 0.055, // shoulder stubs
    0.042, 0.042, // upper arms
    0.038, 0.038, // forearms
];

/// The pelvis capsule axis runs laterally through the hips rather than along
/// a bone; endpoints in root-local coordinates at the reference height. The
/// axis depth puts the capsule underside level with the thigh undersides, so
/// a seated body rests on pelvis and thighs together.
const REF_ROOT_AXIS: ([f64; 3], [f64; 3]) = ([0.0, -0.10, -0.025], [0.0, 0.10, -0.025]);

pub fn joint_index(name: &str) -> Option<usize> {
    JOINT_NAMES.iter().position(|&n| n == name)
}

/// Per-point surface sample in segment-local coordinates.
#[derive(Debug, Clone)]
pub struct LocalSample {
    pub point: Vector3<f64>,
    pub area: f64,
}

/// Kinematic tree plus anthropometry for one subject height.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub height_m: f64,
    offsets: [Vector3<f64>; J],
    radii: [f64; J],
    mass_fraction: [f64; J],
    root_axis: (Vector3<f64>, Vector3<f64>),
    /// 32 capsule samples per segment, built once at construction.
    segment_samples: Vec<Vec<LocalSample>>,
}

pub const SAMPLES_PER_SEGMENT: usize = 32;
const RINGS: usize = 4;
const RING_POINTS: usize = 8;

impl Skeleton {
    /// Builds the skeleton for a subject of the given standing height.
    pub fn with_height(height_m: f64) -> Result<Self> {
        if !(0.5..=2.5).contains(&height_m) {
            return Err(Error::Range { field: "height_m", value: height_m, min: 0.5, max: 2.5 });
        }
        let s = height_m / REF_HEIGHT_M;
        let offsets: [Vector3<f64>; J] =
            std::array::from_fn(|j| Vector3::from(REF_OFFSETS[j]) * s);
        let radii: [f64; J] = std::array::from_fn(|j| REF_RADII[j] * s);
        let mass_fraction: [f64; J] = std::array::from_fn(|j| MASS_E4[j] as f64 / 10000.0);
        let root_axis = (
            Vector3::from(REF_ROOT_AXIS.0) * s,
            Vector3::from(REF_ROOT_AXIS.1) * s,
        );
        let mut skel = Skeleton {
            height_m,
            offsets,
            radii,
            mass_fraction,
            root_axis,
            segment_samples: Vec::new(),
        };
        skel.segment_samples = (0..J).map(|j| skel.build_segment_samples(j)).collect();
        Ok(skel)
    }

    pub fn parent(&self, j: usize) -> Option<usize> {
        if j == 0 {
            None
        } else {
            Some(PARENTS[j])
        }
    }

    pub fn offset(&self, j: usize) -> Vector3<f64> {
        self.offsets[j]
    }

    pub fn radius(&self, j: usize) -> f64 {
        self.radii[j]
    }

    pub fn mass_fraction(&self, j: usize) -> f64 {
        self.mass_fraction[j]
    }

    pub fn mass_fractions(&self) -> &[f64; J] {
        &self.mass_fraction
    }

    /// Capsule axis endpoints for segment `j`, in the segment's local frame
    /// (the parent joint's frame; the root frame for segment 0).
    pub fn segment_axis_local(&self, j: usize) -> (Vector3<f64>, Vector3<f64>) {
        if j == 0 {
            self.root_axis
        } else {
            (Vector3::zeros(), self.offsets[j])
        }
    }

    pub fn segment_samples(&self, j: usize) -> &[LocalSample] {
        &self.segment_samples[j]
    }

    /// Capsule side+cap area of segment `j`, meters².
    pub fn segment_area(&self, j: usize) -> f64 {
        let (a, b) = self.segment_axis_local(j);
        let len = (b - a).norm();
        let r = self.radii[j];
        2.0 * std::f64::consts::PI * r * len + 4.0 * std::f64::consts::PI * r * r
    }

    /// Rings of points on the capsule's cylindrical part. Ring angles are
    /// 2πk/m, a set closed under negation so mirrored segments produce
    /// mirrored sample clouds.
    fn build_segment_samples(&self, j: usize) -> Vec<LocalSample> {
        let (a, b) = self.segment_axis_local(j);
        let axis = b - a;
        let len = axis.norm();
        assert!(len > 1e-9, "segment {j} has zero-length axis");
        let d = axis / len;
        // Deterministic perpendicular basis; x is preferred so lateral
        // (left/right) mirroring maps the basis onto itself.
        let e = if d.x.abs() < 0.9 { Vector3::x() } else { Vector3::z() };
        let u = (e - d * e.dot(&d)).normalize();
        let v = d.cross(&u);
        let r = self.radii[j];
        let area = self.segment_area(j) / SAMPLES_PER_SEGMENT as f64;
        let mut out = Vec::with_capacity(SAMPLES_PER_SEGMENT);
        for ring in 0..RINGS {
            let t = (ring as f64 + 0.5) / RINGS as f64;
            let c = a + axis * t;
            for k in 0..RING_POINTS {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / RING_POINTS as f64;
                let point = c + (u * phi.cos() + v * phi.sin()) * r;
                out.push(LocalSample { point, area });
            }
        }
        out
    }
}

/// One pose: root translation plus axis-angle rotation per joint.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    pub theta: Vec<Vector3<f64>>,
    pub root: Vector3<f64>,
}

impl PoseFrame {
    pub fn identity() -> Self {
        PoseFrame { theta: vec![Vector3::zeros(); J], root: Vector3::zeros() }
    }

    /// Checks joint count and the canonical axis-angle magnitude range.
    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != J {
            return Err(Error::Dimension {
                context: "PoseFrame.theta",
                expected: J.to_string(),
                got: self.theta.len().to_string(),
            });
        }
        for t in &self.theta {
            let mag = t.norm();
            if mag >= std::f64::consts::PI + 1e-6 {
                return Err(Error::Range {
                    field: "axis-angle magnitude",
                    value: mag,
                    min: 0.0,
                    max: std::f64::consts::PI,
                });
            }
        }
        Ok(())
    }
}

/// Folds an axis-angle vector into the canonical range [0, π].
pub fn canonicalize_axis_angle(aa: Vector3<f64>) -> Vector3<f64> {
    let mag = aa.norm();
    if mag < 1e-12 {
        return Vector3::zeros();
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut angle = mag % two_pi;
    let mut axis = aa / mag;
    if angle > std::f64::consts::PI {
        angle = two_pi - angle;
        axis = -axis;
    }
    axis * angle
}

/// A fixed-rate pose stream for one subject.
#[derive(Debug, Clone)]
pub struct PoseSequence {
    pub frames: Vec<PoseFrame>,
    pub rate_hz: f64,
    pub subject_mass_kg: f64,
    pub subject_height_m: f64,
}

impl PoseSequence {
    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::TooShort { context: "PoseSequence", needed: 1, got: 0 });
        }
        for f in &self.frames {
            f.validate()?;
        }
        Ok(())
    }
}
