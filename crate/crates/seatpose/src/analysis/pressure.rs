//! Pressure summary statistics shared by the sensor-only estimators: mean
//! and variance per raster quadrant, pooled over a window.

use ndarray::{Array1, ArrayView3};

use crate::data::{PRESSURE_COLS, PRESSURE_ROWS};
use crate::{Error, Result};

/// Four quadrants, mean and population variance each.
pub const PRESSURE_FEATURES: usize = 8;

/// Quadrant statistics over a pressure window of any length. Quadrants split
/// the 80x28 raster at the halfway row and column.
pub fn pressure_window_features(window: ArrayView3<f64>) -> Result<Array1<f64>> {
    let (t, rows, cols) = window.dim();
    if t == 0 || rows != PRESSURE_ROWS || cols != PRESSURE_COLS {
        return Err(Error::Dimension {
            context: "pressure_window_features",
            expected: format!("t x {PRESSURE_ROWS} x {PRESSURE_COLS} with t > 0"),
            got: format!("{t}x{rows}x{cols}"),
        });
    }
    let half_r = PRESSURE_ROWS / 2;
    let half_c = PRESSURE_COLS / 2;
    let mut out = Array1::zeros(PRESSURE_FEATURES);
    for q in 0..4 {
        let (r0, c0) = (if q < 2 { 0 } else { half_r }, if q % 2 == 0 { 0 } else { half_c });
        let quad = window.slice(ndarray::s![.., r0..r0 + half_r, c0..c0 + half_c]);
        let n = quad.len() as f64;
        let mean = quad.iter().sum::<f64>() / n;
        let var = quad.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        out[2 * q] = mean;
        out[2 * q + 1] = var;
    }
    Ok(out)
}
