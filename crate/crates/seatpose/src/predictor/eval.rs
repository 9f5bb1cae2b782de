//! Held-out evaluation: run a trained model over whole recordings and score
//! the decoded poses against ground truth in millimeters.

use ndarray::{concatenate, Array2, Array3, Axis};

use crate::body::{forward_kinematics, PoseFrame, Skeleton, J};
use crate::data::Recording;
use crate::metrics::{mpjpe, mpve, pa_mpjpe, surface_array};
use crate::quantizer::MotionQuantizer;
use crate::{Error, Result};

use super::baseline::BaselineRegressor;
use super::data::normalize_cloud;
use super::model::Pressure2Pose;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseErrors {
    pub mpjpe_mm: f64,
    pub pa_mpjpe_mm: f64,
    /// Absent for models that emit joint positions with no underlying pose.
    pub mpve_mm: Option<f64>,
}

/// Generates tokens for every recording, decodes them, and scores the poses.
/// Ground truth is truncated to the whole windows the model could see.
pub fn eval_p2p(
    model: &Pressure2Pose,
    mq: &MotionQuantizer,
    recordings: &[Recording],
    chairs: &[(String, Array2<f64>)],
) -> Result<PoseErrors> {
    if recordings.is_empty() {
        return Err(Error::EmptyTrainSet("evaluation needs at least one recording"));
    }
    let features = chair_features(chairs, |cloud| model.encode_chair(cloud.view()))?;
    let mut pred_joints = Vec::new();
    let mut gt_joints = Vec::new();
    let mut pred_surface = Vec::new();
    let mut gt_surface = Vec::new();

    for rec in recordings {
        let feat = lookup(&features, &rec.chair_id)?;
        let tokens = model.generate(&rec.pressure, feat, &mq.codebook)?;
        let decoded = mq.decode_tokens(&tokens.indices)?;
        let n = decoded.len();
        let skel = Skeleton::with_height(rec.pose.subject_height_m)?;
        let gt = &rec.pose.frames[..n];

        pred_joints.push(joints_array(&decoded, &skel)?);
        gt_joints.push(joints_array(gt, &skel)?);
        pred_surface.push(surface_array(&decoded, &skel)?);
        gt_surface.push(surface_array(gt, &skel)?);
    }

    let pred = concat_frames(&pred_joints);
    let gt = concat_frames(&gt_joints);
    let pred_s = concat_frames(&pred_surface);
    let gt_s = concat_frames(&gt_surface);
    Ok(PoseErrors {
        mpjpe_mm: mpjpe(&pred, &gt)?,
        pa_mpjpe_mm: pa_mpjpe(&pred, &gt)?,
        mpve_mm: Some(mpve(&pred_s, &gt_s)?),
    })
}

/// Scores the regression baseline. Its output is already joint positions,
/// so there is no surface to compare and `mpve_mm` is absent.
pub fn eval_baseline(
    model: &BaselineRegressor,
    recordings: &[Recording],
    chairs: &[(String, Array2<f64>)],
) -> Result<PoseErrors> {
    if recordings.is_empty() {
        return Err(Error::EmptyTrainSet("evaluation needs at least one recording"));
    }
    let features = chair_features(chairs, |cloud| model.encode_chair(cloud.view()))?;
    let mut pred_joints = Vec::new();
    let mut gt_joints = Vec::new();

    for rec in recordings {
        let feat = lookup(&features, &rec.chair_id)?;
        let tf = model.t_frames;
        let windows = rec.frames() / tf;
        if windows == 0 {
            return Err(Error::TooShort {
                context: "eval_baseline",
                needed: tf,
                got: rec.frames(),
            });
        }
        let frames = rec.pressure.frames();
        let mut pred = Array3::zeros((windows * tf, J, 3));
        for w in 0..windows {
            let window = frames.slice(ndarray::s![w * tf..(w + 1) * tf, .., ..]);
            let block = model.regress(window, feat)?;
            pred.slice_mut(ndarray::s![w * tf..(w + 1) * tf, .., ..]).assign(&block);
        }
        let skel = Skeleton::with_height(rec.pose.subject_height_m)?;
        pred_joints.push(pred);
        gt_joints.push(joints_array(&rec.pose.frames[..windows * tf], &skel)?);
    }

    let pred = concat_frames(&pred_joints);
    let gt = concat_frames(&gt_joints);
    Ok(PoseErrors {
        mpjpe_mm: mpjpe(&pred, &gt)?,
        pa_mpjpe_mm: pa_mpjpe(&pred, &gt)?,
        mpve_mm: None,
    })
}

/// Runs forward kinematics over a pose slice into a (frames, J, 3) array.
pub fn joints_array(poses: &[PoseFrame], skel: &Skeleton) -> Result<Array3<f64>> {
    let mut out = Array3::zeros((poses.len(), J, 3));
    for (f, pose) in poses.iter().enumerate() {
        let joints = forward_kinematics(pose, skel)?;
        for (j, p) in joints.iter().enumerate() {
            out[(f, j, 0)] = p.x;
            out[(f, j, 1)] = p.y;
            out[(f, j, 2)] = p.z;
        }
    }
    Ok(out)
}

fn chair_features<F>(
    chairs: &[(String, Array2<f64>)],
    encode: F,
) -> Result<Vec<(String, ndarray::Array1<f64>)>>
where
    F: Fn(&Array2<f64>) -> Result<ndarray::Array1<f64>>,
{
    let mut features = Vec::with_capacity(chairs.len());
    for (id, pts) in chairs {
        let cloud = normalize_cloud(pts)?;
        features.push((id.clone(), encode(&cloud)?));
    }
    Ok(features)
}

fn lookup<'a>(
    features: &'a [(String, ndarray::Array1<f64>)],
    chair_id: &str,
) -> Result<&'a ndarray::Array1<f64>> {
    features
        .iter()
        .find(|(id, _)| id == chair_id)
        .map(|(_, f)| f)
        .ok_or_else(|| Error::Config(format!("no chair cloud for id `{chair_id}`")))
}

fn concat_frames(blocks: &[Array3<f64>]) -> Array3<f64> {
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    concatenate(Axis(0), &views).expect("frame blocks share point counts")
}
