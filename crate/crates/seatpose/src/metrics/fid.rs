//! Fréchet distance between Gaussian summaries of feature sets.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;

use crate::error::{Error, Result};

/// Mean, covariance, and sample count of one feature set.
#[derive(Debug, Clone)]
pub struct DistStats {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub sample_count: usize,
}

impl DistStats {
    /// Sample statistics of row-vector features (unbiased covariance,
    /// divisor n−1). A single sample gets a zero covariance.
    pub fn from_rows(rows: &Array2<f64>) -> Result<DistStats> {
        let (n, d) = rows.dim();
        if n == 0 {
            return Err(Error::TooShort { context: "DistStats::from_rows", needed: 1, got: 0 });
        }
        let mut mean = DVector::zeros(d);
        for r in rows.rows() {
            for (i, &v) in r.iter().enumerate() {
                mean[i] += v;
            }
        }
        mean /= n as f64;
        let mut cov = DMatrix::zeros(d, d);
        if n > 1 {
            for r in rows.rows() {
                let x = DVector::from_iterator(d, r.iter().cloned()) - &mean;
                cov += &x * x.transpose();
            }
            cov /= (n - 1) as f64;
        }
        let stats = DistStats { mean, covariance: cov, sample_count: n };
        stats.validate()?;
        Ok(stats)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.iter().all(|v| v.is_finite())
            || !self.covariance.iter().all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("DistStats"));
        }
        let d = self.dim();
        if self.covariance.nrows() != d || self.covariance.ncols() != d {
            return Err(Error::Dimension {
                context: "DistStats covariance",
                expected: format!("{d}x{d}"),
                got: format!("{}x{}", self.covariance.nrows(), self.covariance.ncols()),
            });
        }
        let asym = (&self.covariance - self.covariance.transpose()).abs().max();
        if asym > 1e-9 {
            return Err(Error::NonFinite("DistStats covariance asymmetry"));
        }
        Ok(())
    }
}

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues
/// (numerical noise) are clamped to zero.
fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let sqrt_vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let d = DMatrix::from_diagonal(&DVector::from_vec(sqrt_vals));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Fréchet distance ‖μ_x − μ_y‖² + Tr(Σ_x + Σ_y − 2 (Σ_x Σ_y)^{1/2}).
///
/// Tr((Σ_x Σ_y)^{1/2}) is computed as the trace square root of the
/// symmetrized product Σ_x^{1/2} Σ_y Σ_x^{1/2}, which shares its eigenvalues
/// with Σ_x Σ_y but stays symmetric, so a plain symmetric eigensolver
/// applies. Small negative results from rounding clamp to zero.
pub fn fid(x: &DistStats, y: &DistStats) -> Result<f64> {
    x.validate()?;
    y.validate()?;
    if x.dim() != y.dim() {
        return Err(Error::Dimension {
            context: "fid",
            expected: x.dim().to_string(),
            got: y.dim().to_string(),
        });
    }
    let dmu = &x.mean - &y.mean;
    let sx = psd_sqrt(&x.covariance);
    let inner = &sx * &y.covariance * &sx;
    let sym = (&inner + inner.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let trace_sqrt: f64 = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    let value =
        dmu.norm_squared() + x.covariance.trace() + y.covariance.trace() - 2.0 * trace_sqrt;
    if !value.is_finite() {
        return Err(Error::NonFinite("fid"));
    }
    if value < -1e-6 {
        return Err(Error::NonFinite("fid below tolerance"));
    }
    Ok(value.max(0.0))
}
