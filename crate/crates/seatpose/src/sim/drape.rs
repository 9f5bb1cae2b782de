//! Expands a chair's mat midline into the full 80x28 cell grid with normals
//! and spatial indices for contact queries.

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::Result;

use super::chair::ChairModel;

pub const MAT_ROWS: usize = 80;
pub const MAT_COLS: usize = 28;
/// Lateral spacing between columns, meters (560 mm over 28 cells).
pub const COL_PITCH_M: f64 = 0.020;
/// Sensing area per cell: 21 mm x 20 mm pitch.
pub const CELL_AREA_M2: f64 = 0.021 * 0.020;

/// Cells whose normal clears this z component support weight during settling.
const SUPPORT_NORMAL_Z: f64 = 0.7;
/// Hash bucket edge for the nearest-cell index, meters.
const BUCKET_M: f64 = 0.05;
/// Hash bucket edge for the settle support field; kept near the cell pitch
/// so support does not extend far past the mat edge.
const SUPPORT_BUCKET_M: f64 = 0.02;

/// The draped mat: world-space cell centers and normals on the 80x28 grid.
/// Row 0 is the seat front edge; columns run left (+y) to right.
#[derive(Debug, Clone)]
pub struct MatGeometry {
    pub geometry_id: String,
    pub cell_area_m2: f64,
    pub seat_z: f64,
    pub pelvis_anchor: Vector3<f64>,
    centers: Vec<Vector3<f64>>,
    normals: Vec<Vector3<f64>>,
    row_tangents: Vec<Vector3<f64>>,
    /// Cell indices bucketed on floor(xyz / BUCKET_M) for nearest queries.
    buckets: HashMap<(i64, i64, i64), Vec<u32>>,
    /// Max up-facing cell height per horizontal bucket, for settling.
    support: HashMap<(i64, i64), f64>,
}

fn bucket3(p: &Vector3<f64>) -> (i64, i64, i64) {
    (
        (p.x / BUCKET_M).floor() as i64,
        (p.y / BUCKET_M).floor() as i64,
        (p.z / BUCKET_M).floor() as i64,
    )
}

fn bucket2(x: f64, y: f64) -> (i64, i64) {
    ((x / SUPPORT_BUCKET_M).floor() as i64, (y / SUPPORT_BUCKET_M).floor() as i64)
}

/// Lays the mat over the chair: the midline supplies row positions and
/// tangents, columns offset laterally, and normals face away from the chair.
pub fn drape_mat(chair: &ChairModel) -> Result<MatGeometry> {
    let profile = &chair.profile;
    let lateral = Vector3::y();

    let mut centers = Vec::with_capacity(MAT_ROWS * MAT_COLS);
    let mut normals = Vec::with_capacity(MAT_ROWS * MAT_COLS);
    let mut row_tangents = Vec::with_capacity(MAT_ROWS);
    for r in 0..MAT_ROWS {
        let tangent = if r == 0 {
            profile[1] - profile[0]
        } else if r == MAT_ROWS - 1 {
            profile[r] - profile[r - 1]
        } else {
            profile[r + 1] - profile[r - 1]
        }
        .normalize();
        let normal = lateral.cross(&tangent).normalize();
        row_tangents.push(tangent);
        for c in 0..MAT_COLS {
            centers.push(profile[r] + lateral * ((c as f64 - 13.5) * COL_PITCH_M));
            normals.push(normal);
        }
    }

    let mut buckets: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    let mut support: HashMap<(i64, i64), f64> = HashMap::new();
    for (i, p) in centers.iter().enumerate() {
        buckets.entry(bucket3(p)).or_default().push(i as u32);
        if normals[i].z > SUPPORT_NORMAL_Z {
            // Splat into the 3x3 neighborhood so queries near bucket edges
            // still see this cell.
            let (bx, by) = bucket2(p.x, p.y);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    support
                        .entry((bx + dx, by + dy))
                        .and_modify(|z| *z = z.max(p.z))
                        .or_insert(p.z);
                }
            }
        }
    }

    Ok(MatGeometry {
        geometry_id: chair.id.clone(),
        cell_area_m2: CELL_AREA_M2,
        seat_z: chair.seat_z,
        pelvis_anchor: chair.pelvis_anchor,
        centers,
        normals,
        row_tangents,
        buckets,
        support,
    })
}

impl MatGeometry {
    pub fn center(&self, r: usize, c: usize) -> Vector3<f64> {
        self.centers[r * MAT_COLS + c]
    }

    pub fn normal(&self, r: usize, c: usize) -> Vector3<f64> {
        self.normals[r * MAT_COLS + c]
    }

    pub fn row_tangent(&self, r: usize) -> Vector3<f64> {
        self.row_tangents[r]
    }

    /// Height of the supporting surface under (x, y), if any up-facing cell
    /// lies within one bucket. Used by gravity-axis settling.
    pub fn support_z(&self, x: f64, y: f64) -> Option<f64> {
        self.support.get(&bucket2(x, y)).copied()
    }

    /// Nearest cell center to `p` among cells within one bucket radius.
    /// Ties break toward the lower cell index.
    pub fn nearest_cell(&self, p: &Vector3<f64>) -> Option<(usize, usize, f64)> {
        let (bx, by, bz) = bucket3(p);
        let mut best: Option<(u32, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(cells) = self.buckets.get(&(bx + dx, by + dy, bz + dz)) else {
                        continue;
                    };
                    for &i in cells {
                        let d = (self.centers[i as usize] - p).norm();
                        let better = match best {
                            None => true,
                            Some((bi, bd)) => d < bd - 1e-15 || (d < bd + 1e-15 && i < bi),
                        };
                        if better {
                            best = Some((i, d));
                        }
                    }
                }
            }
        }
        best.map(|(i, d)| (i as usize / MAT_COLS, i as usize % MAT_COLS, d))
    }
}
