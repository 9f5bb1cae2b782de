//! Physics-lite pressure simulation: drape a sensor mat over a chair, settle
//! a posed body onto it along gravity, and render the 80x28 contact raster.
//! Batch mode turns motion clips into synthetic recordings.

mod chair;
mod corpus;
mod drape;
mod motions;
mod render;
mod settle;

pub use chair::{ChairModel, CHAIR_POINTS, MAT_LENGTH_M, PROFILE_POINTS, ROW_PITCH_M};
pub use corpus::{generate_corpus, GeneratedCorpus, SubjectSpec};
pub use drape::{drape_mat, MatGeometry, CELL_AREA_M2, COL_PITCH_M, MAT_COLS, MAT_ROWS};
pub use motions::{motion_frames, seated_rest, SynthMotion};
pub use render::{
    render, render_pressure, PressureRender, CONTACT_THRESHOLD_M, GRAVITY_M_S2, PA_PER_MMHG,
};
pub use settle::{settle, PENETRATION_TOL_M};
