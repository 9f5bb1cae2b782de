//! Volumetric center of mass: mass-fraction weighted mean of per-segment
//! capsule centroids, plus a small pressure-only regressor for comparison.

use nalgebra::{DMatrix, Vector3};
use ndarray::ArrayView3;

use crate::body::{global_transforms, PoseFrame, Skeleton, J};
use crate::{Error, Result};

use super::pressure::{pressure_window_features, PRESSURE_FEATURES};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VcomMethod {
    MeshBased,
    DirectRegression,
}

/// A center-of-mass estimate. Mesh-based results carry one capsule centroid
/// per segment and satisfy `position = Σ mass_fraction_j · per_segment_com_j`;
/// direct regression has no segments to report, so the list is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct VcomResult {
    pub position: Vector3<f64>,
    pub per_segment_com: Vec<Vector3<f64>>,
    pub method: VcomMethod,
}

/// Body center of mass from the posed capsules. Each capsule is symmetric
/// about its axis midpoint, so under uniform density its centroid is that
/// midpoint exactly; the body total weights the midpoints by segment mass
/// fraction.
pub fn vcom(pose: &PoseFrame, skel: &Skeleton) -> Result<VcomResult> {
    let transforms = global_transforms(pose, skel)?;
    let mut per_segment_com = Vec::with_capacity(J);
    for j in 0..J {
        let (a, b) = skel.segment_axis_local(j);
        let mid = (a + b) * 0.5;
        let frame = &transforms[skel.parent(j).unwrap_or(0)];
        per_segment_com.push(frame.rotation * mid + frame.position);
    }
    let mut position = Vector3::zeros();
    for (j, com) in per_segment_com.iter().enumerate() {
        position += com * skel.mass_fraction(j);
    }
    Ok(VcomResult { position, per_segment_com, method: VcomMethod::MeshBased })
}

/// Ridge regression from pressure summary features straight to the center
/// of mass, the sensor-only comparison point for the mesh-based estimate.
#[derive(Debug, Clone, Default)]
pub struct VcomRegressor {
    /// (PRESSURE_FEATURES + 1) x 3, bias row last.
    w: Option<DMatrix<f64>>,
}

impl VcomRegressor {
    pub fn new() -> VcomRegressor {
        VcomRegressor { w: None }
    }

    pub fn is_trained(&self) -> bool {
        self.w.is_some()
    }

    /// Closed-form ridge fit; `ridge` > 0 keeps the normal matrix invertible
    /// even when features are collinear.
    pub fn fit(&mut self, windows: &[ArrayView3<f64>], targets: &[Vector3<f64>], ridge: f64) -> Result<()> {
        if windows.is_empty() || windows.len() != targets.len() {
            return Err(Error::Dimension {
                context: "VcomRegressor::fit",
                expected: "equal non-zero window and target counts".to_string(),
                got: format!("{} windows, {} targets", windows.len(), targets.len()),
            });
        }
        if ridge <= 0.0 {
            return Err(Error::Range { field: "ridge", value: ridge, min: f64::MIN_POSITIVE, max: f64::INFINITY });
        }
        let d = PRESSURE_FEATURES + 1;
        let n = windows.len();
        let mut x = DMatrix::zeros(n, d);
        let mut y = DMatrix::zeros(n, 3);
        for (r, (win, target)) in windows.iter().zip(targets).enumerate() {
            let f = pressure_window_features(*win)?;
            for (c, v) in f.iter().enumerate() {
                x[(r, c)] = *v;
            }
            x[(r, d - 1)] = 1.0;
            y[(r, 0)] = target.x;
            y[(r, 1)] = target.y;
            y[(r, 2)] = target.z;
        }
        let gram = x.transpose() * &x + DMatrix::identity(d, d) * ridge;
        let rhs = x.transpose() * y;
        let w = gram
            .lu()
            .solve(&rhs)
            .ok_or(Error::NonFinite("vcom ridge normal equations"))?;
        self.w = Some(w);
        Ok(())
    }

    pub fn predict(&self, window: ArrayView3<f64>) -> Result<Vector3<f64>> {
        let w = self.w.as_ref().ok_or(Error::Untrained("vcom regressor"))?;
        let f = pressure_window_features(window)?;
        let mut out = Vector3::zeros();
        for c in 0..3 {
            let mut acc = w[(PRESSURE_FEATURES, c)];
            for (r, v) in f.iter().enumerate() {
                acc += w[(r, c)] * v;
            }
            out[c] = acc;
        }
        Ok(out)
    }
}

/// Sensor-only estimate wrapped with its method tag.
pub fn vcom_direct(model: &VcomRegressor, window: ArrayView3<f64>) -> Result<VcomResult> {
    Ok(VcomResult {
        position: model.predict(window)?,
        per_segment_com: Vec::new(),
        method: VcomMethod::DirectRegression,
    })
}
