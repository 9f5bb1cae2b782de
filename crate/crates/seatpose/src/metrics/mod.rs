//! Evaluation metrics: joint/vertex position errors, Fréchet distances over
//! motion features, retrieval precision, and classification F1.

mod classify;
mod features;
mod fid;
mod pose_error;
mod retrieval;

pub use classify::{macro_f1, MacroF1};
pub use features::{extract_features, windowed_features, MotionFeatures};
pub use fid::{fid, DistStats};
pub use pose_error::{mpjpe, mpve, pa_mpjpe, surface_array};
pub use retrieval::{r_precision, RPrecision};
