//! Evaluation output: a structured per-fold metrics table with aggregates,
//! posture summaries, and static PNG figures of pressure frames and poses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use image::{Rgb, RgbImage};
use nalgebra::Vector3;
use ndarray::ArrayView2;

use crate::analysis::PostureSample;
use crate::body::{forward_kinematics, PoseFrame, Skeleton, J};
use crate::data::{PRESSURE_COLS, PRESSURE_MAX_MMHG, PRESSURE_ROWS};
use crate::{Error, Result};

/// One evaluated (fold, model variant) pair with its named metric values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub fold: String,
    pub variant: String,
    pub metrics: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub folds: usize,
}

/// Per-fold metric rows plus free-form notes, rendered as tab-separated text
/// so downstream tooling can reparse it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
}

impl MetricsReport {
    pub fn new() -> MetricsReport {
        MetricsReport::default()
    }

    pub fn push(&mut self, fold: &str, variant: &str, metrics: &[(&str, f64)]) {
        self.rows.push(ReportRow {
            fold: fold.to_string(),
            variant: variant.to_string(),
            metrics: metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Mean and sample standard deviation per (variant, metric) over folds,
    /// in sorted key order.
    pub fn aggregate(&self) -> Vec<(String, String, MeanStd)> {
        let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
        for row in &self.rows {
            for (name, value) in &row.metrics {
                groups.entry((row.variant.clone(), name.clone())).or_default().push(*value);
            }
        }
        groups
            .into_iter()
            .map(|((variant, metric), values)| {
                let n = values.len();
                let mean = values.iter().sum::<f64>() / n as f64;
                let std = if n > 1 {
                    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
                        .sqrt()
                } else {
                    0.0
                };
                (variant, metric, MeanStd { mean, std, folds: n })
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# per-fold\nfold\tvariant\tmetric\tvalue\n");
        for row in &self.rows {
            for (name, value) in &row.metrics {
                writeln!(out, "{}\t{}\t{}\t{value:.6}", row.fold, row.variant, name).unwrap();
            }
        }
        out.push_str("\n# aggregate\nvariant\tmetric\tmean\tstd\tfolds\n");
        for (variant, metric, stats) in self.aggregate() {
            writeln!(
                out,
                "{variant}\t{metric}\t{:.6}\t{:.6}\t{}",
                stats.mean, stats.std, stats.folds
            )
            .unwrap();
        }
        if !self.notes.is_empty() {
            out.push_str("\n# notes\n");
            for note in &self.notes {
                writeln!(out, "{note}").unwrap();
            }
        }
        out
    }
}

/// Per-frame spine angles with slouch flags, same tab-separated shape as the
/// metrics table.
pub fn posture_text(samples: &[PostureSample], threshold_deg: f64) -> String {
    let mut out = String::new();
    writeln!(out, "# posture (slouch threshold {threshold_deg:.1} deg)").unwrap();
    out.push_str("frame\tlumbar_flexion_deg\tthoracic_tilt_deg\tslouching\n");
    for s in samples {
        writeln!(
            out,
            "{}\t{:.3}\t{:.3}\t{}",
            s.frame, s.angles.lumbar_flexion_deg, s.angles.thoracic_tilt_deg, s.slouching
        )
        .unwrap();
    }
    let slouched = samples.iter().filter(|s| s.slouching).count();
    writeln!(out, "\nslouching {slouched} of {} frames", samples.len()).unwrap();
    out
}

/// Pixels per pressure cell in rendered figures.
pub const PRESSURE_FIGURE_SCALE: u32 = 6;

/// Heat-map PNG of one pressure frame, blue at zero through red at the
/// sensor ceiling.
pub fn pressure_figure(frame: ArrayView2<f64>) -> Result<RgbImage> {
    let (rows, cols) = frame.dim();
    if rows != PRESSURE_ROWS || cols != PRESSURE_COLS {
        return Err(Error::Dimension {
            context: "pressure_figure",
            expected: format!("{PRESSURE_ROWS}x{PRESSURE_COLS}"),
            got: format!("{rows}x{cols}"),
        });
    }
    let s = PRESSURE_FIGURE_SCALE;
    let mut img = RgbImage::new(cols as u32 * s, rows as u32 * s);
    for r in 0..rows {
        for c in 0..cols {
            let level = (frame[(r, c)] / PRESSURE_MAX_MMHG).clamp(0.0, 1.0);
            let px = Rgb([
                (255.0 * level) as u8,
                (96.0 * level) as u8,
                (255.0 * (1.0 - level)) as u8,
            ]);
            for dy in 0..s {
                for dx in 0..s {
                    img.put_pixel(c as u32 * s + dx, r as u32 * s + dy, px);
                }
            }
        }
    }
    Ok(img)
}

const POSE_FIGURE_SIZE: u32 = 480;
const POSE_FIGURE_PX_PER_M: f64 = 200.0;

/// Sagittal-view skeleton render: ground truth in green, prediction (when
/// given) overlaid in red, centered on the ground-truth pelvis.
pub fn pose_figure(gt: &PoseFrame, pred: Option<&PoseFrame>, skel: &Skeleton) -> Result<RgbImage> {
    let mut img = RgbImage::from_pixel(POSE_FIGURE_SIZE, POSE_FIGURE_SIZE, Rgb([16, 16, 16]));
    let center = gt.root;
    draw_skeleton(&mut img, gt, skel, center, Rgb([64, 208, 64]))?;
    if let Some(p) = pred {
        draw_skeleton(&mut img, p, skel, center, Rgb([224, 64, 64]))?;
    }
    Ok(img)
}

fn draw_skeleton(
    img: &mut RgbImage,
    pose: &PoseFrame,
    skel: &Skeleton,
    center: Vector3<f64>,
    color: Rgb<u8>,
) -> Result<()> {
    let joints = forward_kinematics(pose, skel)?;
    let project = |p: &Vector3<f64>| -> (f64, f64) {
        let u = POSE_FIGURE_SIZE as f64 / 2.0 + (p.x - center.x) * POSE_FIGURE_PX_PER_M;
        let v = POSE_FIGURE_SIZE as f64 / 2.0 - (p.z - center.z) * POSE_FIGURE_PX_PER_M;
        (u, v)
    };
    for j in 1..J {
        let a = project(&joints[skel.parent(j).unwrap()]);
        let b = project(&joints[j]);
        draw_line(img, a, b, color);
    }
    Ok(())
}

fn draw_line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64), color: Rgb<u8>) {
    let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let x = a.0 + (b.0 - a.0) * t;
        let y = a.1 + (b.1 - a.1) * t;
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, color);
        }
    }
}
