//! Turns recordings into per-window training samples: one pressure window,
//! the previous ground-truth token, the target token, and the true joint
//! positions for the pose consistency term.

use ndarray::{Array2, ArrayView3};

use crate::body::{motion_descriptors, FeatureChunk, Skeleton, FRAME_RATE_HZ, J};
use crate::data::{Recording, PRESSURE_COLS, PRESSURE_MAX_MMHG, PRESSURE_ROWS};
use crate::quantizer::MotionQuantizer;
use crate::{Error, Result};

/// Flat width of one pressure frame fed to the convolution stack.
pub const FRAME_WIDTH: usize = PRESSURE_ROWS * PRESSURE_COLS;

/// Centers a point cloud on its centroid and scales the farthest point to
/// radius 1, the normalization the chair encoder expects.
pub fn normalize_cloud(points: &Array2<f64>) -> Result<Array2<f64>> {
    if points.ncols() != 3 || points.nrows() == 0 {
        return Err(Error::Dimension {
            context: "normalize_cloud",
            expected: "n x 3 with n > 0".to_string(),
            got: format!("{}x{}", points.nrows(), points.ncols()),
        });
    }
    let n = points.nrows() as f64;
    let mut centroid = [0.0; 3];
    for row in points.rows() {
        for d in 0..3 {
            centroid[d] += row[d] / n;
        }
    }
    let mut out = points.clone();
    let mut radius: f64 = 0.0;
    for mut row in out.rows_mut() {
        let mut r2 = 0.0;
        for d in 0..3 {
            row[d] -= centroid[d];
            r2 += row[d] * row[d];
        }
        radius = radius.max(r2.sqrt());
    }
    if radius <= 0.0 {
        return Err(Error::Config("chair cloud is a single point".to_string()));
    }
    out.mapv_inplace(|v| v / radius);
    Ok(out)
}

/// Scales a window of pressure frames to [0,1] and lays each frame out as
/// one flat row for the convolution stack.
pub fn flatten_pressure_window(frames: ArrayView3<f64>) -> Result<Array2<f64>> {
    let (t, rows, cols) = frames.dim();
    if rows != PRESSURE_ROWS || cols != PRESSURE_COLS {
        return Err(Error::Dimension {
            context: "flatten_pressure_window",
            expected: format!("{PRESSURE_ROWS}x{PRESSURE_COLS} frames"),
            got: format!("{rows}x{cols}"),
        });
    }
    let mut out = Array2::zeros((t, FRAME_WIDTH));
    for k in 0..t {
        for r in 0..rows {
            for c in 0..cols {
                out[(k, r * cols + c)] = frames[(k, r, c)] / PRESSURE_MAX_MMHG;
            }
        }
    }
    Ok(out)
}

/// Column indices of joint positions inside a flat descriptor window.
pub fn position_columns(t_frames: usize) -> Vec<usize> {
    let mut cols = Vec::with_capacity(t_frames * J * 3);
    for t in 0..t_frames {
        for j in 0..J {
            let base = (t * J + j) * 18;
            cols.extend([base, base + 1, base + 2]);
        }
    }
    cols
}

/// All per-window samples of a recording set, flattened for batching.
#[derive(Debug, Clone)]
pub struct StepDataset {
    pub t_frames: usize,
    /// (samples * t_frames) x FRAME_WIDTH: normalized frames, window-major.
    pub pressure_rows: Array2<f64>,
    /// samples x (t_frames * J * 3): true joint positions per window.
    pub gt_positions: Array2<f64>,
    pub targets: Vec<usize>,
    /// Previous ground-truth token; None at a sequence start.
    pub prev_token: Vec<Option<usize>>,
    /// Index into `clouds` per sample.
    pub chair_of: Vec<usize>,
    /// Normalized chair clouds, keyed by id.
    pub clouds: Vec<(String, Array2<f64>)>,
}

impl StepDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Per-window samples for the direct regression baseline: pressure in, true
/// joint positions out, no tokens involved.
#[derive(Debug, Clone)]
pub struct RegressionDataset {
    pub t_frames: usize,
    pub pressure_rows: Array2<f64>,
    pub gt_positions: Array2<f64>,
    pub chair_of: Vec<usize>,
    pub clouds: Vec<(String, Array2<f64>)>,
}

impl RegressionDataset {
    pub fn len(&self) -> usize {
        self.chair_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chair_of.is_empty()
    }
}

/// Tokenizes every recording with the frozen quantizer and collects step
/// samples. Recordings shorter than one window are rejected.
pub fn build_step_dataset(
    recordings: &[Recording],
    chairs: &[(String, Array2<f64>)],
    mq: &MotionQuantizer,
) -> Result<StepDataset> {
    let clouds = normalize_chairs(chairs)?;
    let mut pressure_blocks = Vec::new();
    let mut gt_rows = Vec::new();
    let mut targets = Vec::new();
    let mut prev_token = Vec::new();
    let mut chair_of = Vec::new();

    for rec in recordings {
        let chair = chair_index(&clouds, &rec.chair_id)?;
        let (chunks, blocks, rows) = rec_windows(rec, mq.window_seconds)?;
        let tokens = mq.tokenize(&chunks)?;
        for (w, (block, row)) in blocks.into_iter().zip(rows).enumerate() {
            pressure_blocks.push(block);
            gt_rows.push(row);
            targets.push(tokens[w]);
            prev_token.push(if w == 0 { None } else { Some(tokens[w - 1]) });
            chair_of.push(chair);
        }
    }

    let (pressure_rows, gt_positions) = stack_samples(&pressure_blocks, &gt_rows, mq.t_frames);
    Ok(StepDataset {
        t_frames: mq.t_frames,
        pressure_rows,
        gt_positions,
        targets,
        prev_token,
        chair_of,
        clouds,
    })
}

/// Collects regression samples without any quantizer involvement.
pub fn build_regression_dataset(
    recordings: &[Recording],
    chairs: &[(String, Array2<f64>)],
    window_seconds: f64,
) -> Result<RegressionDataset> {
    let t_frames = (window_seconds * FRAME_RATE_HZ).round() as usize;
    let clouds = normalize_chairs(chairs)?;
    let mut pressure_blocks = Vec::new();
    let mut gt_rows = Vec::new();
    let mut chair_of = Vec::new();

    for rec in recordings {
        let chair = chair_index(&clouds, &rec.chair_id)?;
        let (_, blocks, rows) = rec_windows(rec, window_seconds)?;
        for (block, row) in blocks.into_iter().zip(rows) {
            pressure_blocks.push(block);
            gt_rows.push(row);
            chair_of.push(chair);
        }
    }

    let (pressure_rows, gt_positions) = stack_samples(&pressure_blocks, &gt_rows, t_frames);
    Ok(RegressionDataset { t_frames, pressure_rows, gt_positions, chair_of, clouds })
}

fn normalize_chairs(chairs: &[(String, Array2<f64>)]) -> Result<Vec<(String, Array2<f64>)>> {
    let mut clouds = Vec::with_capacity(chairs.len());
    for (id, pts) in chairs {
        clouds.push((id.clone(), normalize_cloud(pts)?));
    }
    Ok(clouds)
}

fn chair_index(clouds: &[(String, Array2<f64>)], chair_id: &str) -> Result<usize> {
    clouds
        .iter()
        .position(|(id, _)| id == chair_id)
        .ok_or_else(|| Error::Config(format!("no chair cloud for id `{chair_id}`")))
}

/// Windows of one recording: descriptor chunks, normalized pressure blocks,
/// and flat ground-truth position rows, all in window order.
fn rec_windows(
    rec: &Recording,
    window_seconds: f64,
) -> Result<(Vec<FeatureChunk>, Vec<Array2<f64>>, Vec<Vec<f64>>)> {
    let skel = Skeleton::with_height(rec.pose.subject_height_m)?;
    let chunks = motion_descriptors(&rec.pose, &skel, window_seconds)?;
    if chunks.is_empty() {
        return Err(Error::TooShort {
            context: "rec_windows",
            needed: (window_seconds * FRAME_RATE_HZ).round() as usize,
            got: rec.frames(),
        });
    }
    let t_frames = chunks[0].positions.dim().0;
    let pressure = rec.pressure.frames();
    let mut blocks = Vec::with_capacity(chunks.len());
    let mut rows = Vec::with_capacity(chunks.len());
    for (w, chunk) in chunks.iter().enumerate() {
        let window = pressure.slice(ndarray::s![w * t_frames..(w + 1) * t_frames, .., ..]);
        blocks.push(flatten_pressure_window(window)?);
        let mut row = Vec::with_capacity(t_frames * J * 3);
        for t in 0..t_frames {
            for j in 0..J {
                for d in 0..3 {
                    row.push(chunk.positions[(t, j, d)]);
                }
            }
        }
        rows.push(row);
    }
    Ok((chunks, blocks, rows))
}

fn stack_samples(
    blocks: &[Array2<f64>],
    gt_rows: &[Vec<f64>],
    t_frames: usize,
) -> (Array2<f64>, Array2<f64>) {
    let samples = blocks.len();
    let mut pressure_rows = Array2::zeros((samples * t_frames, FRAME_WIDTH));
    for (s, block) in blocks.iter().enumerate() {
        for k in 0..t_frames {
            for c in 0..FRAME_WIDTH {
                pressure_rows[(s * t_frames + k, c)] = block[(k, c)];
            }
        }
    }
    let width = gt_rows.first().map_or(t_frames * J * 3, Vec::len);
    let mut gt_positions = Array2::zeros((samples, width));
    for (s, row) in gt_rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            gt_positions[(s, c)] = *v;
        }
    }
    (pressure_rows, gt_positions)
}
