//! Position-error metrics over frame sequences, reported in millimeters.
//! Inputs are (frames, points, 3) arrays in meters.

use nalgebra::{Matrix3, Vector3};
use ndarray::Array3;

use crate::body::{surface_points, PoseFrame, Skeleton};
use crate::error::{Error, Result};

const M_TO_MM: f64 = 1000.0;

fn check_shapes(pred: &Array3<f64>, gt: &Array3<f64>, context: &'static str) -> Result<()> {
    if pred.dim() != gt.dim() || pred.dim().2 != 3 {
        return Err(Error::Dimension {
            context,
            expected: format!("{:?}", gt.dim()),
            got: format!("{:?}", pred.dim()),
        });
    }
    Ok(())
}

/// Mean per-point Euclidean distance, mm.
fn mean_point_distance(pred: &Array3<f64>, gt: &Array3<f64>) -> f64 {
    let (frames, points, _) = pred.dim();
    let mut acc = 0.0;
    for t in 0..frames {
        for p in 0..points {
            let dx = pred[(t, p, 0)] - gt[(t, p, 0)];
            let dy = pred[(t, p, 1)] - gt[(t, p, 1)];
            let dz = pred[(t, p, 2)] - gt[(t, p, 2)];
            acc += (dx * dx + dy * dy + dz * dz).sqrt();
        }
    }
    acc / (frames * points) as f64 * M_TO_MM
}

/// Mean per-joint position error, mm.
pub fn mpjpe(pred: &Array3<f64>, gt: &Array3<f64>) -> Result<f64> {
    check_shapes(pred, gt, "mpjpe")?;
    Ok(mean_point_distance(pred, gt))
}

/// Mean per-vertex error over body-surface points, mm.
pub fn mpve(pred: &Array3<f64>, gt: &Array3<f64>) -> Result<f64> {
    check_shapes(pred, gt, "mpve")?;
    Ok(mean_point_distance(pred, gt))
}

/// Stacks per-frame surface samples into a (frames, V, 3) array, the vertex
/// set used by [`mpve`].
pub fn surface_array(poses: &[PoseFrame], skel: &Skeleton) -> Result<Array3<f64>> {
    let first = surface_points(
        poses.first().ok_or(Error::TooShort { context: "surface_array", needed: 1, got: 0 })?,
        skel,
    )?;
    let v = first.len();
    let mut out = Array3::zeros((poses.len(), v, 3));
    for (t, pose) in poses.iter().enumerate() {
        let pts = surface_points(pose, skel)?;
        for (i, p) in pts.iter().enumerate() {
            out[(t, i, 0)] = p.position.x;
            out[(t, i, 1)] = p.position.y;
            out[(t, i, 2)] = p.position.z;
        }
    }
    Ok(out)
}

/// Rigid Procrustes alignment per frame (rotation plus translation, no
/// scaling, reflections excluded), then MPJPE. Errors when either point set
/// in any frame is collinear, which leaves the rotation unconstrained.
pub fn pa_mpjpe(pred: &Array3<f64>, gt: &Array3<f64>) -> Result<f64> {
    check_shapes(pred, gt, "pa_mpjpe")?;
    let (frames, points, _) = pred.dim();
    if points < 3 {
        return Err(Error::AlignmentDegenerate);
    }
    let mut acc = 0.0;
    for t in 0..frames {
        let p: Vec<Vector3<f64>> = (0..points)
            .map(|i| Vector3::new(pred[(t, i, 0)], pred[(t, i, 1)], pred[(t, i, 2)]))
            .collect();
        let g: Vec<Vector3<f64>> = (0..points)
            .map(|i| Vector3::new(gt[(t, i, 0)], gt[(t, i, 1)], gt[(t, i, 2)]))
            .collect();
        let aligned = rigid_align(&p, &g)?;
        for i in 0..points {
            acc += (aligned[i] - g[i]).norm();
        }
    }
    Ok(acc / (frames * points) as f64 * M_TO_MM)
}

fn centroid(pts: &[Vector3<f64>]) -> Vector3<f64> {
    pts.iter().sum::<Vector3<f64>>() / pts.len() as f64
}

/// Second-largest eigenvalue of the point scatter vanishing means the set is
/// collinear (or a single point).
fn is_collinear(centered: &[Vector3<f64>]) -> bool {
    let mut scatter = Matrix3::zeros();
    for p in centered {
        scatter += p * p.transpose();
    }
    let mut eig: Vec<f64> = scatter.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eig[1] <= eig[0].max(1e-30) * 1e-12
}

/// Kabsch: optimal rotation with det = +1, then optimal translation.
fn rigid_align(pred: &[Vector3<f64>], gt: &[Vector3<f64>]) -> Result<Vec<Vector3<f64>>> {
    let cp = centroid(pred);
    let cg = centroid(gt);
    let p: Vec<Vector3<f64>> = pred.iter().map(|v| v - cp).collect();
    let g: Vec<Vector3<f64>> = gt.iter().map(|v| v - cg).collect();
    if is_collinear(&p) || is_collinear(&g) {
        return Err(Error::AlignmentDegenerate);
    }
    let mut h = Matrix3::zeros();
    for i in 0..p.len() {
        h += g[i] * p[i].transpose();
    }
    let svd = h.svd(true, true);
    let u = svd.u.ok_or(Error::AlignmentDegenerate)?;
    let v_t = svd.v_t.ok_or(Error::AlignmentDegenerate)?;
    let d = (u * v_t).determinant();
    let mut s = Matrix3::identity();
    if d < 0.0 {
        s[(2, 2)] = -1.0;
    }
    let r = u * s * v_t;
    Ok(p.iter().map(|x| r * x + cg).collect())
}
