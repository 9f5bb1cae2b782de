//! Autoregressive pressure-to-token prediction.
//!
//! A window of pressure frames, the chair's point-cloud feature, and the
//! previous motion token feed a classifier over the codebook; greedy decoding
//! walks a recording window by window, so a token depends only on pressure up
//! to its own window. Training is teacher-forced cross-entropy plus a pose
//! consistency term decoded through the frozen quantizer. A direct regression
//! baseline shares the encoders but skips tokens entirely.

mod baseline;
mod data;
mod eval;
mod model;
mod train;

pub use baseline::{
    regression_loss, train_baseline, BaselineRegressor, BaselineTrainReport,
    CHECKPOINT_KIND as BASELINE_CHECKPOINT_KIND,
};
pub use data::{
    build_regression_dataset, build_step_dataset, flatten_pressure_window, normalize_cloud,
    position_columns, RegressionDataset, StepDataset, FRAME_WIDTH,
};
pub use eval::{eval_baseline, eval_p2p, joints_array, PoseErrors};
pub use model::{
    argmax, p2p_loss, Pressure2Pose, StepInput, CHECKPOINT_KIND as P2P_CHECKPOINT_KIND,
    FEATURE_WIDTH,
};
pub use train::{dataset_loss, teacher_forced_accuracy, train_p2p, P2pTrainReport};
