//! Chair geometry: a 5000-point cloud plus the mat midline derived from it.
//!
//! The midline ("drape profile") is the path the mat's long axis takes over
//! the chair: it starts at the seat front edge, runs rearward across the
//! seat, then either climbs the backrest or folds down over the rear edge.
//! Consecutive profile points are exactly one row pitch apart, so the
//! polyline length equals the mat length by construction.

use nalgebra::Vector3;
use ndarray::Array2;

use crate::error::{Error, Result};

/// Chairs are resampled to exactly this many points.
pub const CHAIR_POINTS: usize = 5000;
/// Physical mat length, meters.
pub const MAT_LENGTH_M: f64 = 1.68;
/// Midline sample count; one per mat row.
pub const PROFILE_POINTS: usize = 80;

/// Spacing between consecutive midline points.
pub const ROW_PITCH_M: f64 = MAT_LENGTH_M / (PROFILE_POINTS - 1) as f64;

/// z-histogram bin used for seat detection, meters.
const SEAT_BIN_M: f64 = 0.02;
/// The winning z-bin must hold this share of all points to count as a seat.
const SEAT_MIN_SHARE: f64 = 0.10;
/// Backrest candidates sit at least this far above the seat plane.
const BACKREST_RISE_M: f64 = 0.08;
/// Minimum backrest point share for a backrest to be recognized.
const BACKREST_MIN_SHARE: f64 = 0.02;
/// Pelvis anchor distance forward of the seat's rear fold or junction.
const ANCHOR_SETBACK_M: f64 = 0.13;

/// A chair in its own upright frame: +x forward (toward the sitter's knees),
/// +y left, +z up.
#[derive(Debug, Clone)]
pub struct ChairModel {
    pub id: String,
    /// 5000x3 point cloud, meters.
    pub points: Array2<f64>,
    /// 80 mat midline points, front of seat first.
    pub profile: Vec<Vector3<f64>>,
    /// Seat surface height.
    pub seat_z: f64,
    /// Point on the seat surface where a sitter's pelvis belongs.
    pub pelvis_anchor: Vector3<f64>,
}

impl ChairModel {
    /// Builds a chair from an arbitrary point cloud: resamples to 5000
    /// points, locates the seat plane, and lays out the mat midline.
    pub fn from_points(id: &str, points: Array2<f64>) -> Result<ChairModel> {
        if points.ncols() != 3 {
            return Err(Error::Dimension {
                context: "chair point cloud",
                expected: "3 columns".into(),
                got: points.ncols().to_string(),
            });
        }
        if points.nrows() == 0 {
            return Err(Error::Undrapeable(format!("chair `{id}` has an empty point cloud")));
        }
        for &v in points.iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite("chair point cloud"));
            }
        }
        let points = resample_points(points);
        let (seat_z, y_center, x_front, x_rear) = find_seat(&points, id)?;
        let backrest = find_backrest(&points, seat_z, y_center);

        // Guide polyline the mat follows, front edge first. Tail segments
        // are long enough that the chord walk never runs out of path.
        let mut guide = vec![Vector3::new(x_front, y_center, seat_z)];
        let junction_x = match backrest {
            Some((a, b)) => {
                let xj = a + b * seat_z;
                if x_front - xj < 0.05 {
                    return Err(Error::Undrapeable(format!(
                        "chair `{id}` backrest meets the seat {:.0} mm behind the front edge",
                        (x_front - xj) * 1000.0
                    )));
                }
                guide.push(Vector3::new(xj, y_center, seat_z));
                let up = Vector3::new(b, 0.0, 1.0).normalize();
                guide.push(guide[1] + up * 2.5);
                xj
            }
            None => {
                guide.push(Vector3::new(x_rear, y_center, seat_z));
                guide.push(Vector3::new(x_rear, y_center, 0.0));
                guide.push(Vector3::new(x_rear - 2.5, y_center, 0.0));
                x_rear
            }
        };

        let profile = chord_walk(&guide, PROFILE_POINTS, ROW_PITCH_M);

        // Keep the sitter far enough forward that the knees clear the seat
        // front edge, but leave pelvis room ahead of any backrest.
        let junction_arc = x_front - junction_x;
        let anchor_arc = (junction_arc - ANCHOR_SETBACK_M).clamp(0.20, 0.33);
        let pelvis_anchor = Vector3::new(x_front - anchor_arc, y_center, seat_z);

        Ok(ChairModel { id: id.to_string(), points, profile, seat_z, pelvis_anchor })
    }

    /// Polyline length of the midline; equals the mat length by construction.
    pub fn profile_arc_length(&self) -> f64 {
        self.profile.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// A large horizontal surface at bench height; the whole mat lies flat.
    pub fn flat_plane(id: &str) -> ChairModel {
        let mut pts = Array2::zeros((CHAIR_POINTS, 3));
        let (nx, ny) = (100, 50);
        for i in 0..nx {
            for j in 0..ny {
                let r = i * ny + j;
                pts[(r, 0)] = -1.0 + 2.0 * i as f64 / (nx - 1) as f64;
                pts[(r, 1)] = -0.5 + 1.0 * j as f64 / (ny - 1) as f64;
                pts[(r, 2)] = 0.45;
            }
        }
        ChairModel::from_points(id, pts).expect("flat plane is drapeable")
    }

    /// Seat slab plus a near-vertical backrest and four legs.
    pub fn office_shape(
        id: &str,
        seat_h: f64,
        seat_depth: f64,
        seat_width: f64,
        back_h: f64,
        recline_deg: f64,
    ) -> Result<ChairModel> {
        let slope = recline_deg.to_radians().tan();
        let mut rows: Vec<[f64; 3]> = Vec::with_capacity(CHAIR_POINTS);
        // Seat top: 60 x 50 grid.
        for i in 0..60 {
            for j in 0..50 {
                rows.push([
                    -seat_depth / 2.0 + seat_depth * i as f64 / 59.0,
                    -seat_width / 2.0 + seat_width * j as f64 / 49.0,
                    seat_h,
                ]);
            }
        }
        // Backrest front face: 36 x 50 grid, leaning back with height.
        for i in 0..36 {
            for j in 0..50 {
                let z = seat_h + back_h * (i as f64 + 1.0) / 36.0;
                rows.push([
                    -seat_depth / 2.0 - slope * (z - seat_h),
                    -seat_width / 2.0 + seat_width * j as f64 / 49.0,
                    z,
                ]);
            }
        }
        // Legs: four vertical posts.
        for (cx, cy) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
            for k in 0..50 {
                rows.push([
                    cx * (seat_depth / 2.0 - 0.03),
                    cy * (seat_width / 2.0 - 0.03),
                    seat_h * k as f64 / 54.0,
                ]);
            }
        }
        let mut pts = Array2::zeros((rows.len(), 3));
        for (r, row) in rows.iter().enumerate() {
            for c in 0..3 {
                pts[(r, c)] = row[c];
            }
        }
        ChairModel::from_points(id, pts)
    }

    pub fn office(id: &str) -> ChairModel {
        ChairModel::office_shape(id, 0.46, 0.50, 0.50, 0.60, 5.0).expect("office chair")
    }

    pub fn recliner(id: &str) -> ChairModel {
        ChairModel::office_shape(id, 0.40, 0.55, 0.55, 0.70, 28.0).expect("recliner chair")
    }

    /// Round backless seat on four legs.
    pub fn stool(id: &str) -> ChairModel {
        let height = 0.44;
        let radius = 0.19;
        let mut rows: Vec<[f64; 3]> = Vec::with_capacity(CHAIR_POINTS);
        // Sunflower-spiral disc keeps point density uniform.
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        for k in 0..4800 {
            let r = radius * ((k as f64 + 0.5) / 4800.0).sqrt();
            let phi = golden * k as f64;
            rows.push([r * phi.cos(), r * phi.sin(), height]);
        }
        for (cx, cy) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
            for k in 0..50 {
                rows.push([cx * 0.12, cy * 0.12, height * k as f64 / 54.0]);
            }
        }
        let mut pts = Array2::zeros((rows.len(), 3));
        for (r, row) in rows.iter().enumerate() {
            for c in 0..3 {
                pts[(r, c)] = row[c];
            }
        }
        ChairModel::from_points(id, pts).expect("stool")
    }

    /// The four fixed chair shapes used for synthetic corpora.
    pub fn standard_set() -> Vec<ChairModel> {
        vec![
            ChairModel::flat_plane("flat_plane"),
            ChairModel::office("office"),
            ChairModel::stool("stool"),
            ChairModel::recliner("recliner"),
        ]
    }
}

/// Deterministic resampling to exactly `CHAIR_POINTS` rows.
fn resample_points(points: Array2<f64>) -> Array2<f64> {
    let n = points.nrows();
    if n == CHAIR_POINTS {
        return points;
    }
    let mut out = Array2::zeros((CHAIR_POINTS, 3));
    for i in 0..CHAIR_POINTS {
        let src = if n > CHAIR_POINTS { i * n / CHAIR_POINTS } else { i % n };
        for c in 0..3 {
            out[(i, c)] = points[(src, c)];
        }
    }
    out
}

/// Locates the seat as the most populated z-bin. Returns the seat height,
/// lateral center, and front/rear x extent of the seat cluster.
fn find_seat(points: &Array2<f64>, id: &str) -> Result<(f64, f64, f64, f64)> {
    let n = points.nrows();
    let z_min = (0..n).map(|i| points[(i, 2)]).fold(f64::INFINITY, f64::min);
    let z_max = (0..n).map(|i| points[(i, 2)]).fold(f64::NEG_INFINITY, f64::max);
    let bins = (((z_max - z_min) / SEAT_BIN_M).ceil() as usize + 1).max(1);
    let mut counts = vec![0usize; bins];
    for i in 0..n {
        let b = (((points[(i, 2)] - z_min) / SEAT_BIN_M) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let (best, &best_count) =
        counts.iter().enumerate().max_by_key(|(_, &c)| c).expect("bins nonempty");
    if (best_count as f64) < SEAT_MIN_SHARE * n as f64 {
        return Err(Error::Undrapeable(format!(
            "chair `{id}` has no near-horizontal cluster: best z-bin holds {best_count} of {n} points"
        )));
    }
    let lo = z_min + best as f64 * SEAT_BIN_M - 0.01;
    let hi = z_min + (best + 1) as f64 * SEAT_BIN_M + 0.01;

    let mut seat: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..n {
        let z = points[(i, 2)];
        if z >= lo && z <= hi {
            seat.push((points[(i, 0)], points[(i, 1)], z));
        }
    }
    let seat_z = seat.iter().map(|p| p.2).sum::<f64>() / seat.len() as f64;
    let y_center = seat.iter().map(|p| p.1).sum::<f64>() / seat.len() as f64;
    // Front/rear from points near the midline so armrest-like outliers do
    // not stretch the seat.
    let half_w = seat.iter().map(|p| (p.1 - y_center).abs()).fold(0.0, f64::max);
    let lane = half_w.min(0.30) * 0.5;
    let mut x_front = f64::NEG_INFINITY;
    let mut x_rear = f64::INFINITY;
    for &(x, y, _) in &seat {
        if (y - y_center).abs() <= lane.max(0.02) {
            x_front = x_front.max(x);
            x_rear = x_rear.min(x);
        }
    }
    Ok((seat_z, y_center, x_front, x_rear))
}

/// Fits the backrest front face as a line x = a + b z over per-height-bin
/// maxima. Returns None when too few points rise above the seat.
fn find_backrest(points: &Array2<f64>, seat_z: f64, y_center: f64) -> Option<(f64, f64)> {
    let n = points.nrows();
    let mut bins: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
    let mut count = 0usize;
    for i in 0..n {
        let z = points[(i, 2)];
        if z > seat_z + BACKREST_RISE_M && (points[(i, 1)] - y_center).abs() < 0.35 {
            count += 1;
            let bin = ((z - seat_z) / SEAT_BIN_M) as i64;
            let x = points[(i, 0)];
            bins.entry(bin).and_modify(|m| *m = m.max(x)).or_insert(x);
        }
    }
    if (count as f64) < BACKREST_MIN_SHARE * n as f64 || bins.len() < 2 {
        return None;
    }
    // Least squares over (z, max x) pairs.
    let m = bins.len() as f64;
    let mut sz = 0.0;
    let mut sx = 0.0;
    let mut szz = 0.0;
    let mut szx = 0.0;
    for (&bin, &x) in &bins {
        let z = seat_z + (bin as f64 + 0.5) * SEAT_BIN_M;
        sz += z;
        sx += x;
        szz += z * z;
        szx += z * x;
    }
    let denom = m * szz - sz * sz;
    if denom.abs() < 1e-12 {
        return None;
    }
    let b = (m * szx - sz * sx) / denom;
    let a = (sx - b * sz) / m;
    Some((a, b))
}

/// Walks the guide polyline placing `n` points, each at Euclidean distance
/// `step` from its predecessor. At corners the step chords across, so the
/// output polyline length is exactly (n-1) * step.
fn chord_walk(guide: &[Vector3<f64>], n: usize, step: f64) -> Vec<Vector3<f64>> {
    let mut out = Vec::with_capacity(n);
    out.push(guide[0]);
    let mut seg = 0usize;
    let mut lo = 0.0f64;
    while out.len() < n {
        let prev = *out.last().unwrap();
        loop {
            let a = guide[seg];
            let d = guide[seg + 1] - a;
            let end = a + d;
            if (end - prev).norm() >= step - 1e-12 {
                // Solve |a + t d - prev| = step for the forward root.
                let w = a - prev;
                let dd = d.dot(&d);
                let dw = d.dot(&w);
                let ww = w.dot(&w);
                let disc = (dw * dw - dd * (ww - step * step)).max(0.0);
                let t = ((-dw + disc.sqrt()) / dd).clamp(lo, 1.0);
                out.push(a + d * t);
                lo = t;
                break;
            }
            seg += 1;
            lo = 0.0;
            assert!(seg + 1 < guide.len(), "guide polyline too short for the mat");
        }
    }
    out
}
