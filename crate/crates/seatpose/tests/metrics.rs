//! Metric checks against independent oracles: naive double loops for the
//! position errors, a grid+refinement rotation search for Procrustes
//! alignment, closed-form Gaussian Fréchet distances, and chance-level
//! simulations for retrieval and F1.

mod common;

use common::{random_pose, random_sequence, rng, symmetric};
use nalgebra::{DMatrix, DVector, Matrix2, Rotation3, Vector2, Vector3};
use ndarray::{Array2, Array3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use seatpose::body::{PoseFrame, PoseSequence, Skeleton, J};
use seatpose::metrics::{
    extract_features, fid, macro_f1, mpjpe, mpve, pa_mpjpe, r_precision, surface_array,
    windowed_features, DistStats,
};
use seatpose::Error;

fn rand_points(r: &mut ChaCha8Rng, frames: usize, pts: usize) -> Array3<f64> {
    let mut a = Array3::zeros((frames, pts, 3));
    for v in a.iter_mut() {
        *v = symmetric(r, 1.0);
    }
    a
}

#[test]
fn mpjpe_identical_is_zero() {
    let mut r = rng(21);
    let a = rand_points(&mut r, 4, J);
    assert_eq!(mpjpe(&a, &a).unwrap(), 0.0);
}

#[test]
fn mpjpe_single_offset_joint() {
    let mut r = rng(22);
    let gt = rand_points(&mut r, 1, J);
    let mut pred = gt.clone();
    pred[(0, 7, 0)] += 0.003;
    pred[(0, 7, 2)] += 0.004;
    let got = mpjpe(&pred, &gt).unwrap();
    assert!((got - 5.0 / 22.0).abs() < 1e-12, "got {got}");
}

#[test]
fn mpjpe_matches_double_loop_oracle() {
    let mut r = rng(23);
    for _ in 0..20 {
        let a = rand_points(&mut r, 3, J);
        let b = rand_points(&mut r, 3, J);
        let mut acc = 0.0;
        let mut count = 0;
        for t in 0..3 {
            for j in 0..J {
                let mut s = 0.0;
                for d in 0..3 {
                    let diff = a[(t, j, d)] - b[(t, j, d)];
                    s += diff * diff;
                }
                acc += s.sqrt() * 1000.0;
                count += 1;
            }
        }
        let oracle = acc / count as f64;
        let got = mpjpe(&a, &b).unwrap();
        assert!((got - oracle).abs() <= 1e-9 * oracle.max(1.0), "{got} vs {oracle}");
    }
}

#[test]
fn mpjpe_shape_mismatch_errors() {
    let mut r = rng(24);
    let a = rand_points(&mut r, 2, J);
    let b = rand_points(&mut r, 3, J);
    assert!(matches!(mpjpe(&a, &b), Err(Error::Dimension { .. })));
}

#[test]
fn mpjpe_triangle_inequality() {
    let mut r = rng(25);
    for _ in 0..50 {
        let a = rand_points(&mut r, 2, 10);
        let b = rand_points(&mut r, 2, 10);
        let c = rand_points(&mut r, 2, 10);
        let ab = mpjpe(&a, &b).unwrap();
        let bc = mpjpe(&b, &c).unwrap();
        let ac = mpjpe(&a, &c).unwrap();
        assert!(ac <= ab + bc + 1e-9);
    }
}

fn apply_rigid(points: &Array3<f64>, rot: &Rotation3<f64>, t: Vector3<f64>) -> Array3<f64> {
    let mut out = points.clone();
    for f in 0..points.dim().0 {
        for p in 0..points.dim().1 {
            let v = Vector3::new(points[(f, p, 0)], points[(f, p, 1)], points[(f, p, 2)]);
            let w = rot * v + t;
            out[(f, p, 0)] = w.x;
            out[(f, p, 1)] = w.y;
            out[(f, p, 2)] = w.z;
        }
    }
    out
}

#[test]
fn pa_mpjpe_zero_for_rigidly_transformed_copy() {
    let mut r = rng(26);
    let gt = rand_points(&mut r, 3, J);
    let rot = Rotation3::from_scaled_axis(Vector3::new(0.4, -1.1, 0.8));
    let pred = apply_rigid(&gt, &rot, Vector3::new(0.3, 2.0, -0.7));
    let got = pa_mpjpe(&pred, &gt).unwrap();
    assert!(got.abs() < 1e-9, "got {got} mm");
}

#[test]
fn pa_mpjpe_never_exceeds_mpjpe() {
    let mut r = rng(27);
    for _ in 0..20 {
        let a = rand_points(&mut r, 2, J);
        let b = rand_points(&mut r, 2, J);
        assert!(pa_mpjpe(&a, &b).unwrap() <= mpjpe(&a, &b).unwrap() + 1e-9);
    }
}

#[test]
fn pa_mpjpe_invariant_under_rigid_transform_of_predictions() {
    let mut r = rng(28);
    let pred = rand_points(&mut r, 2, J);
    let gt = rand_points(&mut r, 2, J);
    let base = pa_mpjpe(&pred, &gt).unwrap();
    for _ in 0..10 {
        let rot = Rotation3::from_scaled_axis(Vector3::new(
            symmetric(&mut r, 3.0),
            symmetric(&mut r, 3.0),
            symmetric(&mut r, 3.0),
        ));
        let t = Vector3::new(symmetric(&mut r, 5.0), symmetric(&mut r, 5.0), symmetric(&mut r, 5.0));
        let moved = apply_rigid(&pred, &rot, t);
        let got = pa_mpjpe(&moved, &gt).unwrap();
        assert!((got - base).abs() < 1e-9, "{got} vs {base}");
    }
}

#[test]
fn pa_mpjpe_collinear_points_error() {
    let mut pred = Array3::zeros((1, 5, 3));
    let mut gt = Array3::zeros((1, 5, 3));
    for p in 0..5 {
        pred[(0, p, 0)] = p as f64;
        gt[(0, p, 1)] = 2.0 * p as f64;
    }
    assert!(matches!(pa_mpjpe(&pred, &gt), Err(Error::AlignmentDegenerate)));
}

/// Squared alignment cost with centroids matched, for a fixed rotation.
fn squared_cost(pred: &Array3<f64>, gt: &Array3<f64>, w: Vector3<f64>) -> f64 {
    let rot = Rotation3::from_scaled_axis(w);
    let n = pred.dim().1;
    let get = |a: &Array3<f64>, p: usize| Vector3::new(a[(0, p, 0)], a[(0, p, 1)], a[(0, p, 2)]);
    let cp: Vector3<f64> = (0..n).map(|p| get(pred, p)).sum::<Vector3<f64>>() / n as f64;
    let cg: Vector3<f64> = (0..n).map(|p| get(gt, p)).sum::<Vector3<f64>>() / n as f64;
    (0..n)
        .map(|p| (rot * (get(pred, p) - cp) - (get(gt, p) - cg)).norm_squared())
        .sum()
}

fn mean_dist(pred: &Array3<f64>, gt: &Array3<f64>, w: Vector3<f64>) -> f64 {
    let rot = Rotation3::from_scaled_axis(w);
    let n = pred.dim().1;
    let get = |a: &Array3<f64>, p: usize| Vector3::new(a[(0, p, 0)], a[(0, p, 1)], a[(0, p, 2)]);
    let cp: Vector3<f64> = (0..n).map(|p| get(pred, p)).sum::<Vector3<f64>>() / n as f64;
    let cg: Vector3<f64> = (0..n).map(|p| get(gt, p)).sum::<Vector3<f64>>() / n as f64;
    (0..n)
        .map(|p| (rot * (get(pred, p) - cp) - (get(gt, p) - cg)).norm() * 1000.0)
        .sum::<f64>()
        / n as f64
}

/// Oracle: coarse grid over axis-angle space, then pattern-search refinement
/// of the squared cost, reporting the mean distance at the optimum.
#[test]
fn pa_mpjpe_matches_rotation_search_oracle() {
    let mut r = rng(29);
    for case in 0..5 {
        let pred = rand_points(&mut r, 1, 6);
        let gt = rand_points(&mut r, 1, 6);

        let mut best_w = Vector3::zeros();
        let mut best = f64::INFINITY;
        let steps = 14;
        for ix in 0..steps {
            for iy in 0..steps {
                for iz in 0..steps {
                    let w = Vector3::new(
                        (ix as f64 / (steps - 1) as f64 * 2.0 - 1.0) * std::f64::consts::PI,
                        (iy as f64 / (steps - 1) as f64 * 2.0 - 1.0) * std::f64::consts::PI,
                        (iz as f64 / (steps - 1) as f64 * 2.0 - 1.0) * std::f64::consts::PI,
                    );
                    let c = squared_cost(&pred, &gt, w);
                    if c < best {
                        best = c;
                        best_w = w;
                    }
                }
            }
        }
        let mut delta = 0.3f64;
        while delta > 1e-9 {
            let mut improved = false;
            for axis in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut w = best_w;
                    w[axis] += sign * delta;
                    let c = squared_cost(&pred, &gt, w);
                    if c < best {
                        best = c;
                        best_w = w;
                        improved = true;
                    }
                }
            }
            if !improved {
                delta *= 0.5;
            }
        }
        let oracle = mean_dist(&pred, &gt, best_w);
        let got = pa_mpjpe(&pred, &gt).unwrap();
        assert!(
            (got - oracle).abs() <= 1e-6 * oracle.max(1.0),
            "case {case}: {got} vs oracle {oracle}"
        );
    }
}

#[test]
fn mpve_identical_and_uniform_offset() {
    let mut r = rng(30);
    let gt = rand_points(&mut r, 2, 50);
    assert_eq!(mpve(&gt, &gt).unwrap(), 0.0);
    let mut pred = gt.clone();
    for f in 0..2 {
        for p in 0..50 {
            pred[(f, p, 1)] += 0.007;
        }
    }
    let got = mpve(&pred, &gt).unwrap();
    assert!((got - 7.0).abs() < 1e-12, "got {got}");
}

#[test]
fn mpve_on_surface_arrays_matches_naive_loop() {
    let sk = Skeleton::with_height(1.7).unwrap();
    let mut r = rng(31);
    let poses_a: Vec<PoseFrame> = (0..3).map(|_| random_pose(&mut r, 0.8)).collect();
    let poses_b: Vec<PoseFrame> = (0..3).map(|_| random_pose(&mut r, 0.8)).collect();
    let a = surface_array(&poses_a, &sk).unwrap();
    let b = surface_array(&poses_b, &sk).unwrap();
    let (frames, verts, _) = a.dim();
    assert_eq!(verts, 22 * 32);
    let mut acc = 0.0;
    for t in 0..frames {
        for v in 0..verts {
            let dx = a[(t, v, 0)] - b[(t, v, 0)];
            let dy = a[(t, v, 1)] - b[(t, v, 1)];
            let dz = a[(t, v, 2)] - b[(t, v, 2)];
            acc += (dx * dx + dy * dy + dz * dz).sqrt();
        }
    }
    let oracle = acc / (frames * verts) as f64 * 1000.0;
    let got = mpve(&a, &b).unwrap();
    assert!((got - oracle).abs() < 1e-9);
}

fn stats_1d(mu: f64, var: f64) -> DistStats {
    DistStats {
        mean: DVector::from_vec(vec![mu]),
        covariance: DMatrix::from_vec(1, 1, vec![var]),
        sample_count: 100,
    }
}

#[test]
fn fid_identical_stats_is_zero() {
    let mut r = rng(32);
    let mut rows = Array2::zeros((40, 5));
    for v in rows.iter_mut() {
        *v = symmetric(&mut r, 2.0);
    }
    let s = DistStats::from_rows(&rows).unwrap();
    let d = fid(&s, &s).unwrap();
    assert!(d.abs() < 1e-6, "got {d}");
}

#[test]
fn fid_one_dimensional_closed_form() {
    let a = stats_1d(0.0, 1.0);
    let b = stats_1d(1.0, 1.0);
    let d = fid(&a, &b).unwrap();
    assert!((d - 1.0).abs() < 1e-9, "got {d}");
}

/// 2x2 oracle: Tr((Σx Σy)^{1/2}) = sqrt(tr + 2 sqrt(det)) for the product
/// matrix, via the Cayley-Hamilton square-root formula.
#[test]
fn fid_matches_two_dimensional_analytic_oracle() {
    let mut r = rng(33);
    for _ in 0..20 {
        let ax = Matrix2::new(
            symmetric(&mut r, 1.0),
            symmetric(&mut r, 1.0),
            symmetric(&mut r, 1.0),
            symmetric(&mut r, 1.0),
        );
        let ay = Matrix2::new(
            symmetric(&mut r, 1.0),
            symmetric(&mut r, 1.0),
            symmetric(&mut r, 1.0),
            symmetric(&mut r, 1.0),
        );
        let sx = ax * ax.transpose() + Matrix2::identity() * 0.05;
        let sy = ay * ay.transpose() + Matrix2::identity() * 0.05;
        let mx = Vector2::new(symmetric(&mut r, 2.0), symmetric(&mut r, 2.0));
        let my = Vector2::new(symmetric(&mut r, 2.0), symmetric(&mut r, 2.0));

        let prod = sx * sy;
        let tr_sqrt = (prod.trace() + 2.0 * prod.determinant().sqrt()).sqrt();
        let oracle = (mx - my).norm_squared() + sx.trace() + sy.trace() - 2.0 * tr_sqrt;

        let a = DistStats {
            mean: DVector::from_vec(vec![mx.x, mx.y]),
            covariance: DMatrix::from_vec(2, 2, vec![sx[(0, 0)], sx[(1, 0)], sx[(0, 1)], sx[(1, 1)]]),
            sample_count: 10,
        };
        let b = DistStats {
            mean: DVector::from_vec(vec![my.x, my.y]),
            covariance: DMatrix::from_vec(2, 2, vec![sy[(0, 0)], sy[(1, 0)], sy[(0, 1)], sy[(1, 1)]]),
            sample_count: 10,
        };
        let got = fid(&a, &b).unwrap();
        assert!((got - oracle).abs() <= 1e-6 * oracle.max(1.0), "{got} vs {oracle}");
    }
}

#[test]
fn fid_is_symmetric() {
    let mut r = rng(34);
    let mut rows_a = Array2::zeros((30, 4));
    let mut rows_b = Array2::zeros((25, 4));
    for v in rows_a.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    for v in rows_b.iter_mut() {
        *v = symmetric(&mut r, 1.0) + 0.3;
    }
    let a = DistStats::from_rows(&rows_a).unwrap();
    let b = DistStats::from_rows(&rows_b).unwrap();
    let ab = fid(&a, &b).unwrap();
    let ba = fid(&b, &a).unwrap();
    assert!((ab - ba).abs() <= 1e-9, "{ab} vs {ba}");
}

#[test]
fn fid_rejects_dimension_mismatch_and_non_finite() {
    let a = stats_1d(0.0, 1.0);
    let b = DistStats {
        mean: DVector::from_vec(vec![0.0, 0.0]),
        covariance: DMatrix::identity(2, 2),
        sample_count: 5,
    };
    assert!(matches!(fid(&a, &b), Err(Error::Dimension { .. })));
    let bad = stats_1d(f64::NAN, 1.0);
    assert!(matches!(fid(&bad, &a), Err(Error::NonFinite(_))));
}

#[test]
fn dist_stats_matches_manual_covariance() {
    let rows = ndarray::array![[1.0, 2.0], [3.0, 4.0], [5.0, 9.0]];
    let s = DistStats::from_rows(&rows).unwrap();
    assert_eq!(s.sample_count, 3);
    assert!((s.mean[0] - 3.0).abs() < 1e-12);
    assert!((s.mean[1] - 5.0).abs() < 1e-12);
    // Unbiased: Σ(x−x̄)(y−ȳ)/2.
    assert!((s.covariance[(0, 0)] - 4.0).abs() < 1e-12);
    assert!((s.covariance[(0, 1)] - 7.0).abs() < 1e-12);
    assert!((s.covariance[(1, 0)] - 7.0).abs() < 1e-12);
    assert!((s.covariance[(1, 1)] - 13.0).abs() < 1e-12);
}

#[test]
fn features_static_sequence_has_zero_kinetic() {
    let sk = Skeleton::with_height(1.75).unwrap();
    let mut r = rng(35);
    let pose = random_pose(&mut r, 0.6);
    let seq = PoseSequence {
        frames: vec![pose; 10],
        rate_hz: 15.0,
        subject_mass_kg: 70.0,
        subject_height_m: 1.75,
    };
    let f = extract_features(&seq, &sk).unwrap();
    assert_eq!(f.kinetic.len(), 44);
    assert_eq!(f.geometric.len(), 88);
    for &v in f.kinetic.iter() {
        assert_eq!(v, 0.0);
    }
}

#[test]
fn features_uniform_velocity_recovers_speed() {
    let sk = Skeleton::with_height(1.75).unwrap();
    let rate = 15.0;
    let vel = Vector3::new(0.15, -0.2, 0.0);
    let frames: Vec<PoseFrame> = (0..12)
        .map(|t| {
            let mut p = PoseFrame::identity();
            p.root = vel * (t as f64 / rate);
            p
        })
        .collect();
    let seq = PoseSequence { frames, rate_hz: rate, subject_mass_kg: 70.0, subject_height_m: 1.75 };
    let f = extract_features(&seq, &sk).unwrap();
    for j in 0..J {
        assert!((f.kinetic[j] - vel.norm()).abs() < 1e-9, "joint {j}: {}", f.kinetic[j]);
        assert!(f.kinetic[J + j].abs() < 1e-9);
    }
}

#[test]
fn features_too_short_errors() {
    let sk = Skeleton::with_height(1.75).unwrap();
    let seq = PoseSequence {
        frames: vec![PoseFrame::identity()],
        rate_hz: 15.0,
        subject_mass_kg: 70.0,
        subject_height_m: 1.75,
    };
    assert!(matches!(extract_features(&seq, &sk), Err(Error::TooShort { .. })));
}

#[test]
fn features_dimensions_on_random_sequence() {
    let sk = Skeleton::with_height(1.6).unwrap();
    let mut r = rng(36);
    let seq = random_sequence(&mut r, 20);
    let f = extract_features(&seq, &sk).unwrap();
    assert_eq!(f.kinetic.len(), 2 * J);
    assert_eq!(f.geometric.len(), 3 * J + J);
}

#[test]
fn r_precision_identical_sets_is_one() {
    let mut r = rng(37);
    let mut rows = Array2::zeros((64, 8));
    for v in rows.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    let out = r_precision(&rows, &rows, 32, 3, 7).unwrap();
    assert_eq!(out.value, 1.0);
    assert_eq!(out.pool_size, 32);
    assert!(!out.pool_shrunk);
}

#[test]
fn r_precision_chance_level_for_noise() {
    let mut r = rng(38);
    let mut generated = Array2::zeros((1000, 6));
    let mut real = Array2::zeros((1000, 6));
    for v in generated.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    for v in real.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    let out = r_precision(&generated, &real, 32, 3, 99).unwrap();
    let chance = 3.0 / 32.0;
    assert!((out.value - chance).abs() < 0.03, "got {} vs chance {chance}", out.value);
}

#[test]
fn r_precision_k_equal_pool_is_one() {
    let mut r = rng(39);
    let mut generated = Array2::zeros((40, 4));
    let mut real = Array2::zeros((40, 4));
    for v in generated.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    for v in real.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    let out = r_precision(&generated, &real, 8, 8, 3).unwrap();
    assert_eq!(out.value, 1.0);
}

#[test]
fn r_precision_pool_shrinks_for_small_sets() {
    let mut r = rng(40);
    let mut rows = Array2::zeros((10, 4));
    for v in rows.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    let out = r_precision(&rows, &rows, 32, 3, 1).unwrap();
    assert!(out.pool_shrunk);
    assert_eq!(out.pool_size, 10);
}

#[test]
fn r_precision_deterministic_given_seed() {
    let mut r = rng(41);
    let mut generated = Array2::zeros((100, 5));
    let mut real = Array2::zeros((100, 5));
    for v in generated.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    for v in real.iter_mut() {
        *v = symmetric(&mut r, 1.0);
    }
    let a = r_precision(&generated, &real, 32, 3, 5).unwrap();
    let b = r_precision(&generated, &real, 32, 3, 5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn macro_f1_perfect_predictions() {
    let gt: Vec<usize> = (0..120).map(|i| i % 12).collect();
    let out = macro_f1(&gt, &gt, 12).unwrap();
    assert_eq!(out.value, 1.0);
    assert!(out.absent_classes.is_empty());
}

#[test]
fn macro_f1_constructed_half_case() {
    // Two classes, each with TP=1, FP=1, FN=1.
    let gt = vec![0, 0, 1, 1];
    let pred = vec![0, 1, 1, 0];
    let out = macro_f1(&pred, &gt, 2).unwrap();
    assert!((out.value - 0.5).abs() < 1e-12, "got {}", out.value);
    assert!((out.per_class[0] - 0.5).abs() < 1e-12);
    assert!((out.per_class[1] - 0.5).abs() < 1e-12);
}

#[test]
fn macro_f1_chance_level_for_random_predictions() {
    let mut r = rng(42);
    let n = 12_000;
    let gt: Vec<usize> = (0..n).map(|i| i % 12).collect();
    let pred: Vec<usize> = (0..n).map(|_| (r.random::<u64>() % 12) as usize).collect();
    let out = macro_f1(&pred, &gt, 12).unwrap();
    let chance = 1.0 / 12.0;
    assert!((out.value - chance).abs() < 0.02, "got {} vs {chance}", out.value);
}

#[test]
fn macro_f1_flags_absent_classes_and_checks_lengths() {
    let gt = vec![0, 0, 1];
    let pred = vec![0, 1, 1];
    let out = macro_f1(&pred, &gt, 4).unwrap();
    assert_eq!(out.absent_classes, vec![2, 3]);
    assert!(matches!(macro_f1(&pred[..2], &gt, 4), Err(Error::Dimension { .. })));
    assert!(matches!(macro_f1(&[9], &[0], 4), Err(Error::Range { .. })));
}

#[test]
fn windowed_features_agree_with_per_window_extraction() {
    let mut r = rng(33);
    let skel = Skeleton::with_height(1.75).unwrap();
    let seq = random_sequence(&mut r, 47);
    let window = 10;
    let (kin, geo) = windowed_features(&seq, &skel, window).unwrap();
    assert_eq!(kin.nrows(), 4);
    assert_eq!(geo.nrows(), 4);
    assert_eq!(kin.ncols(), 2 * J);
    assert_eq!(geo.ncols(), 4 * J);
    for w in 0..4 {
        let sub = PoseSequence {
            frames: seq.frames[w * window..(w + 1) * window].to_vec(),
            rate_hz: seq.rate_hz,
            subject_mass_kg: seq.subject_mass_kg,
            subject_height_m: seq.subject_height_m,
        };
        let f = extract_features(&sub, &skel).unwrap();
        assert_eq!(kin.row(w).to_owned(), f.kinetic);
        assert_eq!(geo.row(w).to_owned(), f.geometric);
    }
    assert!(matches!(
        windowed_features(&seq, &skel, 1),
        Err(Error::TooShort { .. })
    ));
}
