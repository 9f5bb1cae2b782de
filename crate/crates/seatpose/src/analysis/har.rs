//! Seated activity recognition over short windows: a multinomial logistic
//! classifier on pose motion features fused with pressure statistics, or on
//! pressure statistics alone for the sensor-only comparison.

use ndarray::{Array1, Array2, ArrayView1};

use crate::body::{PoseSequence, Skeleton};
use crate::data::{Recording, ACTIVITY_COUNT};
use crate::metrics::extract_features;
use crate::nn::{ParamStore, Tape};
use crate::{Error, Result};

use super::pressure::pressure_window_features;

pub const HAR_WINDOW_SECONDS: f64 = 2.0;

/// Windowed examples ready for classifier training.
#[derive(Debug, Clone)]
pub struct HarDataset {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
    pub fusion: bool,
}

impl HarDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Cuts recordings into 2 s windows with 50% overlap and extracts features:
/// pressure quadrant statistics, plus pose motion features when `fusion` is
/// set. Recordings shorter than one window contribute nothing.
pub fn har_windows(recordings: &[Recording], fusion: bool) -> Result<HarDataset> {
    let mut rows: Vec<Array1<f64>> = Vec::new();
    let mut labels = Vec::new();
    for rec in recordings {
        let window = (HAR_WINDOW_SECONDS * rec.pose.rate_hz).round() as usize;
        let stride = window / 2;
        if rec.frames() < window {
            continue;
        }
        let skel = Skeleton::with_height(rec.pose.subject_height_m)?;
        let mut start = 0;
        while start + window <= rec.frames() {
            let pressure = rec
                .pressure
                .frames()
                .slice(ndarray::s![start..start + window, .., ..]);
            let p_feat = pressure_window_features(pressure)?;
            let mut row = Vec::new();
            if fusion {
                let sub = PoseSequence {
                    frames: rec.pose.frames[start..start + window].to_vec(),
                    rate_hz: rec.pose.rate_hz,
                    subject_mass_kg: rec.pose.subject_mass_kg,
                    subject_height_m: rec.pose.subject_height_m,
                };
                let mf = extract_features(&sub, &skel)?;
                row.extend(mf.kinetic.iter());
                row.extend(mf.geometric.iter());
            }
            row.extend(p_feat.iter());
            rows.push(Array1::from_vec(row));
            labels.push(rec.activity.index());
            start += stride;
        }
    }
    let width = rows.first().map_or(0, Array1::len);
    let mut features = Array2::zeros((rows.len(), width));
    for (r, row) in rows.iter().enumerate() {
        features.row_mut(r).assign(row);
    }
    Ok(HarDataset { features, labels, fusion })
}

/// Multinomial logistic regression trained by full-batch gradient descent
/// from a zero init: convex, so the fit is deterministic with no seed.
#[derive(Debug, Clone)]
pub struct HarClassifier {
    classes: usize,
    mean: Array1<f64>,
    std: Array1<f64>,
    /// (features + 1) x classes, bias row last.
    w: Option<Array2<f64>>,
}

impl HarClassifier {
    pub fn new(classes: usize) -> HarClassifier {
        HarClassifier { classes, mean: Array1::zeros(0), std: Array1::zeros(0), w: None }
    }

    pub fn for_activities() -> HarClassifier {
        HarClassifier::new(ACTIVITY_COUNT)
    }

    pub fn is_trained(&self) -> bool {
        self.w.is_some()
    }

    pub fn fit(
        &mut self,
        features: &Array2<f64>,
        labels: &[usize],
        epochs: usize,
        lr: f64,
    ) -> Result<()> {
        if features.nrows() == 0 || features.nrows() != labels.len() {
            return Err(Error::Dimension {
                context: "HarClassifier::fit",
                expected: "matching non-zero feature and label counts".to_string(),
                got: format!("{} rows, {} labels", features.nrows(), labels.len()),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= self.classes) {
            return Err(Error::Range {
                field: "har label",
                value: bad as f64,
                min: 0.0,
                max: (self.classes - 1) as f64,
            });
        }
        let d = features.ncols();
        let n = features.nrows() as f64;
        let mut mean = Array1::zeros(d);
        let mut std = Array1::zeros(d);
        for c in 0..d {
            let col = features.column(c);
            let m = col.sum() / n;
            let v = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            mean[c] = m;
            std[c] = v.sqrt().max(1e-9);
        }
        let mut x = Array2::ones((features.nrows(), d + 1));
        for r in 0..features.nrows() {
            for c in 0..d {
                x[(r, c)] = (features[(r, c)] - mean[c]) / std[c];
            }
        }

        let mut store = ParamStore::new();
        let w = store.add("har.w", Array2::zeros((d + 1, self.classes)));
        for _ in 0..epochs {
            let mut t = Tape::new();
            let xn = t.value(x.clone());
            let wn = t.param(&store, w);
            let logits = t.matmul(xn, wn);
            let loss = t.softmax_cross_entropy(logits, labels);
            store.zero_grads();
            t.backward(loss, &mut store);
            let g = store.grad(w).clone();
            store.value_mut(w).zip_mut_with(&g, |v, gv| *v -= lr * gv);
        }
        self.mean = mean;
        self.std = std;
        self.w = Some(store.value(w).clone());
        Ok(())
    }

    pub fn classify(&self, features: ArrayView1<f64>) -> Result<usize> {
        let w = self.w.as_ref().ok_or(Error::Untrained("activity classifier"))?;
        if features.len() != self.mean.len() {
            return Err(Error::Dimension {
                context: "HarClassifier::classify",
                expected: self.mean.len().to_string(),
                got: features.len().to_string(),
            });
        }
        let d = self.mean.len();
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..self.classes {
            let mut score = w[(d, c)];
            for r in 0..d {
                score += (features[r] - self.mean[r]) / self.std[r] * w[(r, c)];
            }
            if score > best_score {
                best_score = score;
                best = c;
            }
        }
        Ok(best)
    }

    pub fn classify_rows(&self, features: &Array2<f64>) -> Result<Vec<usize>> {
        features.rows().into_iter().map(|r| self.classify(r)).collect()
    }
}
