//! Drape geometry, settling, pressure rendering, and corpus generation.

mod common;

use nalgebra::Vector3;
use ndarray::Array2;
use rand::Rng;

use seatpose::body::{joint_index, surface_points, PoseFrame, Skeleton, J, JOINT_NAMES};
use seatpose::data::Activity;
use seatpose::sim::{
    drape_mat, generate_corpus, render, seated_rest, settle, ChairModel, MatGeometry, SubjectSpec,
    CELL_AREA_M2, COL_PITCH_M, GRAVITY_M_S2, MAT_COLS, MAT_LENGTH_M, MAT_ROWS, PA_PER_MMHG,
    ROW_PITCH_M,
};
use seatpose::Error;

fn skel() -> Skeleton {
    Skeleton::with_height(1.75).unwrap()
}

/// Settles the neutral sitting pose onto the chair's pelvis anchor.
fn seated_on(mat: &MatGeometry, skel: &Skeleton) -> PoseFrame {
    let mut pose = seated_rest();
    pose.root.x += mat.pelvis_anchor.x;
    pose.root.y += mat.pelvis_anchor.y;
    pose.root.z = mat.seat_z + 0.35;
    settle(&pose, skel, mat).unwrap()
}

// Draping --------------------------------------------------------------------

#[test]
fn flat_plane_drapes_to_a_regular_grid() {
    let chair = ChairModel::flat_plane("flat");
    let mat = drape_mat(&chair).unwrap();
    for r in 0..MAT_ROWS {
        for c in 0..MAT_COLS {
            let n = mat.normal(r, c);
            assert!((n - Vector3::z()).norm() < 1e-9, "normal at ({r},{c}) is {n:?}");
        }
    }
    // Row steps match the midline pitch, column steps the 20 mm lateral
    // pitch, everywhere on the grid.
    for r in 0..MAT_ROWS - 1 {
        for c in 0..MAT_COLS {
            let d = mat.center(r + 1, c) - mat.center(r, c);
            assert!((d.norm() - ROW_PITCH_M).abs() < 1e-9);
            assert!(d.z.abs() < 1e-9);
        }
    }
    for r in 0..MAT_ROWS {
        for c in 0..MAT_COLS - 1 {
            let d = mat.center(r, c + 1) - mat.center(r, c);
            assert!((d - Vector3::new(0.0, COL_PITCH_M, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn office_chair_rows_climb_the_backrest() {
    let chair = ChairModel::office("office");
    let mat = drape_mat(&chair).unwrap();
    // Seat rows: normals straight up.
    for r in 0..20 {
        assert!(mat.normal(r, 0).z > 0.999, "row {r} should lie on the seat");
    }
    // Rows past the fold: normals near-horizontal, facing the seat front,
    // and perpendicular to the row tangent.
    let recline = 5.0_f64.to_radians();
    for r in 28..MAT_ROWS {
        let n = mat.normal(r, 0);
        let t = mat.row_tangent(r);
        assert!(n.dot(&t).abs() < 1e-9);
        assert!(n.z < recline.sin() + 1e-6, "row {r} normal {n:?}");
        assert!(n.x > 0.99, "row {r} should face forward, normal {n:?}");
    }
}

#[test]
fn midline_arc_length_is_the_mat_length_on_random_chairs() {
    let mut r = common::rng(41);
    for k in 0..4 {
        let chair = ChairModel::office_shape(
            &format!("random{k}"),
            0.38 + 0.12 * r.random::<f64>(),
            0.42 + 0.16 * r.random::<f64>(),
            0.45 + 0.15 * r.random::<f64>(),
            0.50 + 0.25 * r.random::<f64>(),
            30.0 * r.random::<f64>(),
        )
        .unwrap();
        let arc = chair.profile_arc_length();
        assert!((arc - MAT_LENGTH_M).abs() < 1e-6, "chair {k} arc {arc}");
    }
    for chair in ChairModel::standard_set() {
        let arc = chair.profile_arc_length();
        assert!((arc - MAT_LENGTH_M).abs() < 1e-6, "{} arc {arc}", chair.id);
    }
}

#[test]
fn vertical_wall_is_not_drapeable() {
    let mut pts = Array2::zeros((5000, 3));
    for i in 0..5000 {
        pts[(i, 1)] = -0.5 + (i % 50) as f64 / 49.0;
        pts[(i, 2)] = 2.0 * (i / 50) as f64 / 99.0;
    }
    match ChairModel::from_points("wall", pts) {
        Err(Error::Undrapeable(msg)) => assert!(msg.contains("wall")),
        other => panic!("expected undrapeable, got {other:?}"),
    }
}

#[test]
fn point_clouds_resample_to_exactly_5000() {
    let mut pts = Array2::zeros((7321, 3));
    for i in 0..7321 {
        pts[(i, 0)] = -0.5 + (i % 80) as f64 / 79.0;
        pts[(i, 1)] = -0.5 + ((i / 80) % 90) as f64 / 89.0;
        pts[(i, 2)] = 0.45;
    }
    let chair = ChairModel::from_points("dense", pts).unwrap();
    assert_eq!(chair.points.nrows(), 5000);
}

// Settling -------------------------------------------------------------------

#[test]
fn resting_body_settles_to_itself() {
    let mat = drape_mat(&ChairModel::flat_plane("flat")).unwrap();
    let sk = skel();
    let settled = seated_on(&mat, &sk);
    let again = settle(&settled, &sk, &mat).unwrap();
    assert_eq!(again, settled);
}

#[test]
fn hovering_body_drops_by_its_clearance() {
    let mat = drape_mat(&ChairModel::flat_plane("flat")).unwrap();
    let sk = skel();
    let settled = seated_on(&mat, &sk);
    let mut raised = settled.clone();
    raised.root.z += 0.10;
    let dropped = settle(&raised, &sk, &mat).unwrap();
    assert!(
        (dropped.root.z - settled.root.z).abs() <= 2e-3,
        "settled to {} vs {}",
        dropped.root.z,
        settled.root.z
    );
}

#[test]
fn penetrating_body_is_pushed_out() {
    let mat = drape_mat(&ChairModel::flat_plane("flat")).unwrap();
    let sk = skel();
    let settled = seated_on(&mat, &sk);
    let mut sunk = settled.clone();
    sunk.root.z -= 0.05;
    let fixed = settle(&sunk, &sk, &mat).unwrap();
    // No surface sample may sit more than 2 mm below the support under it.
    for s in surface_points(&fixed, &sk).unwrap() {
        if let Some(z) = mat.support_z(s.position.x, s.position.y) {
            assert!(
                s.position.z >= z - 2e-3 - 1e-9,
                "sample of segment {} penetrates {:.4} m",
                s.segment,
                z - s.position.z
            );
        }
    }
}

#[test]
fn body_far_from_the_seat_fails_to_settle() {
    let mat = drape_mat(&ChairModel::stool("stool")).unwrap();
    let sk = skel();
    let mut pose = seated_rest();
    pose.root = Vector3::new(5.0, 5.0, 1.0);
    match settle(&pose, &sk, &mat) {
        Err(Error::SettleFailure { .. }) => {}
        other => panic!("expected settle failure, got {other:?}"),
    }
}

// Rendering ------------------------------------------------------------------

#[test]
fn rendered_force_matches_body_weight() {
    let sk = skel();
    let mass = 65.3;
    for chair in [ChairModel::flat_plane("flat"), ChairModel::office("office")] {
        let mat = drape_mat(&chair).unwrap();
        let pose = seated_on(&mat, &sk);
        let out = render(&pose, &sk, &mat, mass).unwrap();
        assert!(
            (out.supported_mass_kg - mass).abs() < 1e-9,
            "{}: supported {} of {mass} kg",
            chair.id,
            out.supported_mass_kg
        );
        let force: f64 = out.mmhg.iter().map(|&p| p * PA_PER_MMHG * CELL_AREA_M2).sum();
        let weight = mass * GRAVITY_M_S2;
        assert!(
            (force - weight).abs() <= 0.05 * weight,
            "{}: rendered {force:.1} N vs weight {weight:.1} N",
            chair.id
        );
    }
}

#[test]
fn airborne_body_renders_zero() {
    let mat = drape_mat(&ChairModel::flat_plane("flat")).unwrap();
    let sk = skel();
    let mut pose = seated_on(&mat, &sk);
    pose.root.z += 0.5;
    let out = render(&pose, &sk, &mat, 70.0).unwrap();
    assert!(out.mmhg.iter().all(|&v| v == 0.0));
    assert_eq!(out.supported_mass_kg, 0.0);
    assert!(out.contacting_segments.is_empty());
}

/// Reflects a pose across the body's sagittal plane: left/right joints swap
/// and axis-angle components flip per the y-mirror.
fn mirror_pose(pose: &PoseFrame) -> PoseFrame {
    let mut out = pose.clone();
    out.root.y = -pose.root.y;
    for (idx, name) in JOINT_NAMES.iter().enumerate() {
        let src = if let Some(rest) = name.strip_prefix("left_") {
            joint_index(&format!("right_{rest}")).unwrap()
        } else if let Some(rest) = name.strip_prefix("right_") {
            joint_index(&format!("left_{rest}")).unwrap()
        } else {
            idx
        };
        let t = pose.theta[src];
        out.theta[idx] = Vector3::new(-t.x, t.y, -t.z);
    }
    out
}

#[test]
fn mirrored_poses_render_mirrored_rasters() {
    let mat = drape_mat(&ChairModel::flat_plane("flat")).unwrap();
    let sk = skel();
    // An asymmetric pose: one leg crossing, torso twisted.
    let mut pose = seated_rest();
    pose.theta[joint_index("left_hip").unwrap()] =
        Vector3::new(0.3, -std::f64::consts::FRAC_PI_2 * 0.9, 0.3);
    pose.theta[joint_index("spine2").unwrap()] = Vector3::new(0.1, 0.0, 0.3);
    pose.root.x += mat.pelvis_anchor.x;
    pose.root.y += mat.pelvis_anchor.y;
    pose.root.z = mat.seat_z + 0.35;
    let settled = settle(&pose, &sk, &mat).unwrap();
    let mirrored = settle(&mirror_pose(&settled), &sk, &mat).unwrap();

    let a = render(&settled, &sk, &mat, 65.3).unwrap().mmhg;
    let b = render(&mirrored, &sk, &mat, 65.3).unwrap().mmhg;
    let peak = a.iter().cloned().fold(0.0, f64::max);
    assert!(peak > 0.0, "pose must touch the mat");
    for r in 0..MAT_ROWS {
        for c in 0..MAT_COLS {
            let diff = (a[(r, c)] - b[(r, MAT_COLS - 1 - c)]).abs();
            assert!(
                diff <= 0.01 * peak,
                "cell ({r},{c}) differs by {diff:.2} mmHg (peak {peak:.2})"
            );
        }
    }
}

#[test]
fn doubling_mass_doubles_every_cell_before_clamping() {
    let mat = drape_mat(&ChairModel::office("office")).unwrap();
    let sk = skel();
    let pose = seated_on(&mat, &sk);
    let one = render(&pose, &sk, &mat, 65.3).unwrap();
    let two = render(&pose, &sk, &mat, 130.6).unwrap();
    for r in 0..MAT_ROWS {
        for c in 0..MAT_COLS {
            assert_eq!(two.raw_mmhg[(r, c)], 2.0 * one.raw_mmhg[(r, c)], "cell ({r},{c})");
        }
    }
}

#[test]
fn raster_shape_is_fixed_for_every_chair() {
    let sk = skel();
    for chair in ChairModel::standard_set() {
        let mat = drape_mat(&chair).unwrap();
        let pose = seated_on(&mat, &sk);
        let out = render(&pose, &sk, &mat, 70.0).unwrap();
        assert_eq!(out.mmhg.dim(), (MAT_ROWS, MAT_COLS), "{}", chair.id);
    }
}

#[test]
fn supported_mass_counts_descendants_of_contact() {
    let mat = drape_mat(&ChairModel::flat_plane("flat")).unwrap();
    let sk = skel();
    let pose = seated_on(&mat, &sk);
    let out = render(&pose, &sk, &mat, 65.3).unwrap();
    // Sitting rests on pelvis and thighs; the pelvis is the root, so the
    // whole tree hangs from contact.
    assert!(out.contacting_segments.contains(&0), "pelvis should touch");
    let full: f64 = (0..J).map(|j| sk.mass_fraction(j)).sum();
    assert!((out.supported_mass_kg - full * 65.3).abs() < 1e-9);
}

// Corpus ---------------------------------------------------------------------

#[test]
fn corpus_frame_count_matches_the_arithmetic() {
    let chairs = vec![
        ChairModel::flat_plane("flat_plane"),
        ChairModel::office("office"),
        ChairModel::stool("stool"),
    ];
    let subjects = vec![SubjectSpec { id: "s0".into(), height_m: 1.75, mass_kg: 70.0 }];
    let activities: Vec<Activity> = Activity::ALL[..10].to_vec();
    let corpus = generate_corpus(&chairs, &subjects, &activities, 60.0, 7).unwrap();
    let frames: usize = corpus.recordings.iter().map(|r| r.frames()).sum();
    assert_eq!(frames + corpus.skipped_frames, 3 * 10 * 900);
    assert!(
        corpus.skipped_frames < 27_000 / 20,
        "{} frames skipped",
        corpus.skipped_frames
    );
    for rec in &corpus.recordings {
        assert!(rec.synthetic);
        assert!(rec.pressure.frames().iter().all(|&v| (0.0..=5000.0).contains(&v)));
    }
}

#[test]
fn same_seed_reproduces_the_corpus_bit_for_bit() {
    let chairs = vec![ChairModel::office("office")];
    let subjects = vec![SubjectSpec { id: "s0".into(), height_m: 1.68, mass_kg: 61.0 }];
    let activities = [Activity::UprightSitting, Activity::Sliding];
    let a = generate_corpus(&chairs, &subjects, &activities, 4.0, 99).unwrap();
    let b = generate_corpus(&chairs, &subjects, &activities, 4.0, 99).unwrap();
    assert_eq!(a.recordings.len(), b.recordings.len());
    for (x, y) in a.recordings.iter().zip(&b.recordings) {
        assert_eq!(x.pressure, y.pressure);
        assert_eq!(x.pose.frames, y.pose.frames);
        assert_eq!(x.activity, y.activity);
    }
}
