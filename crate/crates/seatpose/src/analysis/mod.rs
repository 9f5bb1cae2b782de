//! Downstream consumers of predicted poses: virtual center of mass, spine
//! angles and posture flags, and seated activity recognition. Everything here
//! reads pose sequences or pressure windows; nothing reaches back into the
//! predictor, so the same code runs on ground truth and on reconstructions.

mod har;
mod pressure;
mod spine;
mod vcom;

pub use har::{har_windows, HarClassifier, HarDataset, HAR_WINDOW_SECONDS};
pub use pressure::{pressure_window_features, PRESSURE_FEATURES};
pub use spine::{
    posture_report, spine_angles, PostureSample, SpineAngles, DEFAULT_SLOUCH_THRESHOLD_DEG,
};
pub use vcom::{vcom, vcom_direct, VcomMethod, VcomRegressor, VcomResult};
