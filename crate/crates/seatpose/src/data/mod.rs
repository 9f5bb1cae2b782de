//! Dataset plumbing: on-disk formats, stream synchronization, resampling,
//! and cross-validation split generation.

mod binfmt;
mod recording;
mod resample;
mod splits;
mod sync;

pub use binfmt::{
    read_tensor, write_tensor, FORMAT_VERSION, MAGIC_CHAIR, MAGIC_POSE, MAGIC_PRESSURE,
};
pub use recording::{
    read_recording, write_recording, Activity, PressureSequence, Recording, RecordingMeta,
    ACTIVITY_COUNT, PRESSURE_COLS, PRESSURE_MAX_MMHG, PRESSURE_ROWS,
};
pub use resample::{resample_pose, resample_pressure};
pub use splits::{make_splits, Fold, Protocol, RosterEntry, SplitPlan};
pub use sync::{detect_taps, tap_synchronize, RecordingLabels};
