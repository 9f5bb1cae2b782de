mod common;

use image::Rgb;
use ndarray::Array2;
use seatpose::analysis::{posture_report, DEFAULT_SLOUCH_THRESHOLD_DEG};
use seatpose::body::{PoseFrame, PoseSequence, Skeleton, FRAME_RATE_HZ};
use seatpose::data::{PRESSURE_COLS, PRESSURE_MAX_MMHG, PRESSURE_ROWS};
use seatpose::report::{posture_text, pose_figure, pressure_figure, MetricsReport, PRESSURE_FIGURE_SCALE};
use seatpose::Error;

#[test]
fn report_emits_one_row_per_fold_per_variant_and_exact_aggregates() {
    let mut report = MetricsReport::new();
    let folds = ["fold_0", "fold_1", "fold_2"];
    let mpjpe = [50.0, 62.5, 41.0];
    let mpve = [70.25, 80.0, 66.5];
    for ((fold, a), b) in folds.iter().zip(mpjpe).zip(mpve) {
        report.push(fold, "full", &[("mpjpe_mm", a), ("mpve_mm", b)]);
        report.push(fold, "baseline", &[("mpjpe_mm", a * 2.0)]);
    }
    assert_eq!(report.rows.len(), folds.len() * 2);

    let agg = report.aggregate();
    let key = |variant: &str, metric: &str| {
        agg.iter()
            .find(|(v, m, _)| v == variant && m == metric)
            .map(|(_, _, s)| *s)
            .unwrap()
    };
    let hand_mean = mpjpe.iter().sum::<f64>() / 3.0;
    let full = key("full", "mpjpe_mm");
    assert!((full.mean - hand_mean).abs() <= 1e-9);
    assert_eq!(full.folds, 3);
    let hand_std = (mpjpe.iter().map(|v| (v - hand_mean).powi(2)).sum::<f64>() / 2.0).sqrt();
    assert!((full.std - hand_std).abs() <= 1e-9);
    assert!((key("baseline", "mpjpe_mm").mean - hand_mean * 2.0).abs() <= 1e-9);

    let text = report.to_text();
    assert!(text.contains("# per-fold"));
    assert!(text.contains("# aggregate"));
    assert!(text.contains("fold_1\tfull\tmpjpe_mm\t62.5"));
    let fold_lines = text.lines().filter(|l| l.starts_with("fold_")).count();
    assert_eq!(fold_lines, 3 * 3);
}

#[test]
fn single_fold_aggregate_has_zero_spread() {
    let mut report = MetricsReport::new();
    report.push("only", "full", &[("fid_k", 3.25)]);
    let (_, _, stats) = report.aggregate().into_iter().next().unwrap();
    assert_eq!(stats.mean, 3.25);
    assert_eq!(stats.std, 0.0);
    assert_eq!(stats.folds, 1);
}

#[test]
fn posture_text_lists_every_frame_and_counts_slouches() {
    let skel = Skeleton::with_height(1.7).unwrap();
    let mut slouched = PoseFrame::identity();
    slouched.theta[0] = nalgebra::Vector3::y() * 35f64.to_radians();
    let seq = PoseSequence {
        frames: vec![PoseFrame::identity(), slouched],
        rate_hz: FRAME_RATE_HZ,
        subject_mass_kg: 70.0,
        subject_height_m: 1.7,
    };
    let samples = posture_report(&seq, &skel, DEFAULT_SLOUCH_THRESHOLD_DEG).unwrap();
    let text = posture_text(&samples, DEFAULT_SLOUCH_THRESHOLD_DEG);
    assert!(text.lines().any(|l| l.starts_with("0\t0.000\t") && l.ends_with("\tfalse")));
    assert!(text.contains("1\t35.000"));
    assert!(text.contains("slouching 1 of 2 frames"));
}

#[test]
fn pressure_figure_maps_the_sensor_range_to_a_heat_ramp() {
    let mut frame = Array2::zeros((PRESSURE_ROWS, PRESSURE_COLS));
    frame[(0, 0)] = PRESSURE_MAX_MMHG;
    let img = pressure_figure(frame.view()).unwrap();
    assert_eq!(img.width(), PRESSURE_COLS as u32 * PRESSURE_FIGURE_SCALE);
    assert_eq!(img.height(), PRESSURE_ROWS as u32 * PRESSURE_FIGURE_SCALE);
    assert_eq!(*img.get_pixel(0, 0), Rgb([255, 96, 0]));
    assert_eq!(*img.get_pixel(img.width() - 1, img.height() - 1), Rgb([0, 0, 255]));

    match pressure_figure(Array2::zeros((10, PRESSURE_COLS)).view()) {
        Err(Error::Dimension { .. }) => {}
        other => panic!("expected dimension error, got {other:?}"),
    }
}

#[test]
fn pose_figure_overlays_prediction_on_ground_truth() {
    let skel = Skeleton::with_height(1.75).unwrap();
    let mut rng = common::rng(2);
    let gt = common::random_pose(&mut rng, 0.3);
    let pred = common::random_pose(&mut rng, 0.3);

    let gt_only = pose_figure(&gt, None, &skel).unwrap();
    let green = Rgb([64, 208, 64]);
    let red = Rgb([224, 64, 64]);
    assert!(gt_only.pixels().any(|p| *p == green));
    assert!(gt_only.pixels().all(|p| *p != red));

    let both = pose_figure(&gt, Some(&pred), &skel).unwrap();
    assert!(both.pixels().any(|p| *p == green));
    assert!(both.pixels().any(|p| *p == red));
    assert_eq!(both, pose_figure(&gt, Some(&pred), &skel).unwrap());
}
