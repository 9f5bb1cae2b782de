//! Recordings: a synchronized pressure and pose pair with labels, stored as
//! a directory of `meta.toml`, `pressure.bin`, and `pose.bin`.
//!
//! In-memory values are f64 for arithmetic, but every stored channel is
//! quantized through f32 at construction so that a write/read round trip is
//! bit-exact.

use std::path::Path;

use nalgebra::Vector3;
use ndarray::Array3;
use serde::{Deserialize, Serialize};

use crate::body::{PoseFrame, PoseSequence, J};
use crate::error::{Error, Result};

use super::binfmt::{read_tensor, write_tensor, MAGIC_POSE, MAGIC_PRESSURE};

pub const PRESSURE_ROWS: usize = 80;
pub const PRESSURE_COLS: usize = 28;
pub const PRESSURE_MAX_MMHG: f64 = 5000.0;
pub const ACTIVITY_COUNT: usize = 12;

/// The twelve seated actions covered by the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activity {
    UprightSitting,
    ForwardLeaning,
    Reclining,
    Slouching,
    CrossingLegs,
    ReachingForward,
    TwistingTorso,
    LegOnChair,
    BodyLift,
    Sliding,
    LeaningSide,
    SittingBack,
}

impl Activity {
    pub const ALL: [Activity; ACTIVITY_COUNT] = [
        Activity::UprightSitting,
        Activity::ForwardLeaning,
        Activity::Reclining,
        Activity::Slouching,
        Activity::CrossingLegs,
        Activity::ReachingForward,
        Activity::TwistingTorso,
        Activity::LegOnChair,
        Activity::BodyLift,
        Activity::Sliding,
        Activity::LeaningSide,
        Activity::SittingBack,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Activity::UprightSitting => "upright_sitting",
            Activity::ForwardLeaning => "forward_leaning",
            Activity::Reclining => "reclining",
            Activity::Slouching => "slouching",
            Activity::CrossingLegs => "crossing_legs",
            Activity::ReachingForward => "reaching_forward",
            Activity::TwistingTorso => "twisting_torso",
            Activity::LegOnChair => "leg_on_chair",
            Activity::BodyLift => "body_lift",
            Activity::Sliding => "sliding",
            Activity::LeaningSide => "leaning_side",
            Activity::SittingBack => "sitting_back",
        }
    }

    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|a| a == self).unwrap()
    }

    pub fn from_name(name: &str) -> Option<Activity> {
        Self::ALL.iter().copied().find(|a| a.name() == name)
    }

    pub fn from_index(i: usize) -> Option<Activity> {
        Self::ALL.get(i).copied()
    }
}

/// A fixed-rate stream of 80x28 rasters in mmHg.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSequence {
    frames: Array3<f64>,
    pub rate_hz: f64,
    pub mat_geometry_id: String,
}

impl PressureSequence {
    /// Validates shape and range, then quantizes every cell to f32
    /// precision so persistence round-trips exactly.
    pub fn new(frames: Array3<f64>, rate_hz: f64, mat_geometry_id: String) -> Result<Self> {
        let (_, rows, cols) = frames.dim();
        if rows != PRESSURE_ROWS {
            return Err(Error::Dimension {
                context: "PressureSequence rows",
                expected: PRESSURE_ROWS.to_string(),
                got: rows.to_string(),
            });
        }
        if cols != PRESSURE_COLS {
            return Err(Error::Dimension {
                context: "PressureSequence columns",
                expected: PRESSURE_COLS.to_string(),
                got: cols.to_string(),
            });
        }
        let frames = frames.mapv(|v| v as f32 as f64);
        for &v in frames.iter() {
            if !(0.0..=PRESSURE_MAX_MMHG).contains(&v) {
                return Err(Error::Range {
                    field: "pressure cell",
                    value: v,
                    min: 0.0,
                    max: PRESSURE_MAX_MMHG,
                });
            }
        }
        Ok(PressureSequence { frames, rate_hz, mat_geometry_id })
    }

    pub fn frames(&self) -> &Array3<f64> {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.dim().0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Quantizes a pose sequence through f32, matching the storage precision.
fn quantize_pose(mut pose: PoseSequence) -> PoseSequence {
    for f in &mut pose.frames {
        for t in &mut f.theta {
            *t = Vector3::new(t.x as f32 as f64, t.y as f32 as f64, t.z as f32 as f64);
        }
        f.root = Vector3::new(f.root.x as f32 as f64, f.root.y as f32 as f64, f.root.z as f32 as f64);
    }
    pose
}

/// One synchronized pressure + pose recording with labels.
#[derive(Debug, Clone)]
pub struct Recording {
    pub pressure: PressureSequence,
    pub pose: PoseSequence,
    pub chair_id: String,
    pub subject_id: String,
    pub activity: Activity,
    pub synthetic: bool,
}

impl Recording {
    pub fn new(
        pressure: PressureSequence,
        pose: PoseSequence,
        chair_id: String,
        subject_id: String,
        activity: Activity,
        synthetic: bool,
    ) -> Result<Self> {
        if pressure.len() != pose.frames.len() {
            return Err(Error::Dimension {
                context: "Recording frame counts",
                expected: pressure.len().to_string(),
                got: pose.frames.len().to_string(),
            });
        }
        pose.validate()?;
        Ok(Recording {
            pressure,
            pose: quantize_pose(pose),
            chair_id,
            subject_id,
            activity,
            synthetic,
        })
    }

    pub fn frames(&self) -> usize {
        self.pressure.len()
    }
}

/// The human-readable half of a stored recording.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RecordingMeta {
    pub subject_id: String,
    pub chair_id: String,
    pub activity: String,
    pub mass_kg: f64,
    pub height_m: f64,
    pub rate_hz: f64,
    pub frames: u32,
    pub synthetic: bool,
    pub mat_geometry_id: String,
}

pub fn write_recording(rec: &Recording, dir: &Path) -> Result<()> {
    let io_err = |e| Error::io(dir.display().to_string(), e);
    std::fs::create_dir_all(dir).map_err(io_err)?;

    let meta = RecordingMeta {
        subject_id: rec.subject_id.clone(),
        chair_id: rec.chair_id.clone(),
        activity: rec.activity.name().to_string(),
        mass_kg: rec.pose.subject_mass_kg,
        height_m: rec.pose.subject_height_m,
        rate_hz: rec.pressure.rate_hz,
        frames: rec.frames() as u32,
        synthetic: rec.synthetic,
        mat_geometry_id: rec.pressure.mat_geometry_id.clone(),
    };
    let meta_path = dir.join("meta.toml");
    let text = toml::to_string_pretty(&meta)
        .map_err(|e| Error::Parse { path: meta_path.display().to_string(), field: "meta", reason: e.to_string() })?;
    std::fs::write(&meta_path, text).map_err(|e| Error::io(meta_path.display().to_string(), e))?;

    let n = rec.frames();
    let mut pressure = Vec::with_capacity(n * PRESSURE_ROWS * PRESSURE_COLS);
    for v in rec.pressure.frames().iter() {
        pressure.push(*v as f32);
    }
    write_tensor(
        &dir.join("pressure.bin"),
        MAGIC_PRESSURE,
        &[n as u32, PRESSURE_ROWS as u32, PRESSURE_COLS as u32],
        &pressure,
    )?;

    let mut pose = Vec::with_capacity(n * (3 + J * 3));
    for f in &rec.pose.frames {
        pose.extend_from_slice(&[f.root.x as f32, f.root.y as f32, f.root.z as f32]);
        for t in &f.theta {
            pose.extend_from_slice(&[t.x as f32, t.y as f32, t.z as f32]);
        }
    }
    write_tensor(&dir.join("pose.bin"), MAGIC_POSE, &[n as u32, (3 + J * 3) as u32], &pose)?;
    Ok(())
}

pub fn read_recording(dir: &Path) -> Result<Recording> {
    let meta_path = dir.join("meta.toml");
    let text = std::fs::read_to_string(&meta_path)
        .map_err(|e| Error::io(meta_path.display().to_string(), e))?;
    let meta: RecordingMeta = toml::from_str(&text).map_err(|e| Error::Parse {
        path: meta_path.display().to_string(),
        field: "meta",
        reason: e.to_string(),
    })?;
    let activity = Activity::from_name(&meta.activity).ok_or_else(|| Error::Parse {
        path: meta_path.display().to_string(),
        field: "activity",
        reason: format!("unknown activity `{}`", meta.activity),
    })?;

    let pressure_path = dir.join("pressure.bin");
    let (dims, data) = read_tensor(&pressure_path, MAGIC_PRESSURE, 3)?;
    let display = pressure_path.display().to_string();
    if dims[0] != meta.frames {
        return Err(Error::Parse {
            path: display,
            field: "frames",
            reason: format!("meta says {}, file has {}", meta.frames, dims[0]),
        });
    }
    if dims[1] as usize != PRESSURE_ROWS {
        return Err(Error::Parse {
            path: display,
            field: "rows",
            reason: format!("expected {PRESSURE_ROWS}, found {}", dims[1]),
        });
    }
    if dims[2] as usize != PRESSURE_COLS {
        return Err(Error::Parse {
            path: display,
            field: "columns",
            reason: format!("expected {PRESSURE_COLS}, found {}", dims[2]),
        });
    }
    let n = dims[0] as usize;
    let mut frames = Array3::zeros((n, PRESSURE_ROWS, PRESSURE_COLS));
    for (slot, &v) in frames.iter_mut().zip(data.iter()) {
        *slot = v as f64;
    }
    for &v in frames.iter() {
        if !(0.0..=PRESSURE_MAX_MMHG).contains(&v) {
            return Err(Error::Parse {
                path: pressure_path.display().to_string(),
                field: "pressure cell",
                reason: format!("{v} outside [0, {PRESSURE_MAX_MMHG}] mmHg"),
            });
        }
    }
    let pressure = PressureSequence {
        frames,
        rate_hz: meta.rate_hz,
        mat_geometry_id: meta.mat_geometry_id.clone(),
    };

    let pose_path = dir.join("pose.bin");
    let (pdims, pdata) = read_tensor(&pose_path, MAGIC_POSE, 2)?;
    let stride = 3 + J * 3;
    if pdims[0] != meta.frames {
        return Err(Error::Parse {
            path: pose_path.display().to_string(),
            field: "frames",
            reason: format!("meta says {}, file has {}", meta.frames, pdims[0]),
        });
    }
    if pdims[1] as usize != stride {
        return Err(Error::Parse {
            path: pose_path.display().to_string(),
            field: "values per frame",
            reason: format!("expected {stride}, found {}", pdims[1]),
        });
    }
    let mut frames = Vec::with_capacity(n);
    for t in 0..n {
        let base = t * stride;
        let root = Vector3::new(
            pdata[base] as f64,
            pdata[base + 1] as f64,
            pdata[base + 2] as f64,
        );
        let theta = (0..J)
            .map(|j| {
                let o = base + 3 + j * 3;
                Vector3::new(pdata[o] as f64, pdata[o + 1] as f64, pdata[o + 2] as f64)
            })
            .collect();
        frames.push(PoseFrame { theta, root });
    }
    let pose = PoseSequence {
        frames,
        rate_hz: meta.rate_hz,
        subject_mass_kg: meta.mass_kg,
        subject_height_m: meta.height_m,
    };

    Recording::new(pressure, pose, meta.chair_id, meta.subject_id, activity, meta.synthetic)
}
