//! Analytic contact-pressure rendering. Body surface samples near the mat
//! deposit load onto cells by bilinear splatting; the raster is scaled so
//! the total normal force equals the supported body weight.

use ndarray::Array2;

use crate::body::{surface_points, PoseFrame, Skeleton, J};
use crate::data::PRESSURE_MAX_MMHG;
use crate::error::Result;

use super::drape::{MatGeometry, COL_PITCH_M, MAT_COLS, MAT_ROWS};
use super::chair::ROW_PITCH_M;

/// A body sample within this distance of a cell plane is in contact.
pub const CONTACT_THRESHOLD_M: f64 = 0.005;
pub const GRAVITY_M_S2: f64 = 9.81;
pub const PA_PER_MMHG: f64 = 133.322;

/// One rendered frame, with the pre-clamp raster kept for diagnostics.
#[derive(Debug, Clone)]
pub struct PressureRender {
    /// 80x28 raster in mmHg, clamped to the sensor range.
    pub mmhg: Array2<f64>,
    /// Same raster before clamping.
    pub raw_mmhg: Array2<f64>,
    /// Body mass resolved through the mat, kg.
    pub supported_mass_kg: f64,
    /// Segments with at least one contacting sample, ascending.
    pub contacting_segments: Vec<usize>,
}

/// Renders the contact pressure of a settled pose. A pose with no contact
/// yields an all-zero raster.
pub fn render(
    pose: &PoseFrame,
    skel: &Skeleton,
    mat: &MatGeometry,
    mass_kg: f64,
) -> Result<PressureRender> {
    let samples = surface_points(pose, skel)?;

    // Contact pass: perpendicular distance to the nearest cell plane.
    struct Contact {
        segment: usize,
        row: f64,
        col: f64,
    }
    let mut contacts: Vec<Contact> = Vec::new();
    let mut seg_contacts = [0usize; J];
    for s in &samples {
        let Some((r, c, _)) = mat.nearest_cell(&s.position) else { continue };
        let center = mat.center(r, c);
        let normal = mat.normal(r, c);
        let d = s.position - center;
        if d.dot(&normal).abs() > CONTACT_THRESHOLD_M {
            continue;
        }
        let tangent = mat.row_tangent(r);
        let row = r as f64 + d.dot(&tangent) / ROW_PITCH_M;
        let col = c as f64 + d.y / COL_PITCH_M;
        seg_contacts[s.segment] += 1;
        contacts.push(Contact { segment: s.segment, row, col });
    }

    let mut raw = Array2::zeros((MAT_ROWS, MAT_COLS));
    if contacts.is_empty() {
        return Ok(PressureRender {
            mmhg: raw.clone(),
            raw_mmhg: raw,
            supported_mass_kg: 0.0,
            contacting_segments: Vec::new(),
        });
    }

    // A segment is supported when it or any ancestor touches the mat.
    let mut supported_fraction = 0.0;
    for j in 0..J {
        let mut k = j;
        let held = loop {
            if seg_contacts[k] > 0 {
                break true;
            }
            match skel.parent(k) {
                Some(p) => k = p,
                None => break false,
            }
        };
        if held {
            supported_fraction += skel.mass_fraction(j);
        }
    }
    let supported_mass = supported_fraction * mass_kg;
    let total_force = supported_mass * GRAVITY_M_S2;

    // Per-sample share: segments split the total by their own mass, then
    // evenly across their contacting samples.
    let contact_fraction: f64 =
        (0..J).filter(|&j| seg_contacts[j] > 0).map(|j| skel.mass_fraction(j)).sum();
    for contact in &contacts {
        let share = skel.mass_fraction(contact.segment) / contact_fraction;
        let force = total_force * share / seg_contacts[contact.segment] as f64;
        splat(&mut raw, contact.row, contact.col, force);
    }

    // Newtons per cell to mmHg.
    let scale = 1.0 / (mat.cell_area_m2 * PA_PER_MMHG);
    raw.mapv_inplace(|f| f * scale);
    let clamped = raw.mapv(|v| v.clamp(0.0, PRESSURE_MAX_MMHG));
    let contacting = (0..J).filter(|&j| seg_contacts[j] > 0).collect();

    Ok(PressureRender {
        mmhg: clamped,
        raw_mmhg: raw,
        supported_mass_kg: supported_mass,
        contacting_segments: contacting,
    })
}

/// Convenience wrapper returning only the clamped raster.
pub fn render_pressure(
    pose: &PoseFrame,
    skel: &Skeleton,
    mat: &MatGeometry,
    mass_kg: f64,
) -> Result<Array2<f64>> {
    Ok(render(pose, skel, mat, mass_kg)?.mmhg)
}

/// Bilinear deposit over the four cells around the continuous grid position,
/// clamped to the raster so no force is lost at the edges.
fn splat(raster: &mut Array2<f64>, row: f64, col: f64, force: f64) {
    let r0 = row.floor();
    let c0 = col.floor();
    let fr = row - r0;
    let fc = col - c0;
    for (dr, wr) in [(0.0, 1.0 - fr), (1.0, fr)] {
        for (dc, wc) in [(0.0, 1.0 - fc), (1.0, fc)] {
            let r = ((r0 + dr) as isize).clamp(0, MAT_ROWS as isize - 1) as usize;
            let c = ((c0 + dc) as isize).clamp(0, MAT_COLS as isize - 1) as usize;
            raster[(r, c)] += force * wr * wc;
        }
    }
}
