//! Predictor behaviour: chair-encoder invariances, autoregressive decoding,
//! loss arithmetic, training, and checkpointing.

mod common;

use common::{rng, random_sequence};
use ndarray::{Array1, Array2, Array3};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use seatpose::body::{motion_descriptors, Skeleton, FRAME_RATE_HZ, J};
use seatpose::config::ExperimentConfig;
use seatpose::data::{Activity, PressureSequence, Recording};
use seatpose::predictor::{
    build_step_dataset, eval_baseline, eval_p2p, flatten_pressure_window, normalize_cloud,
    p2p_loss, position_columns, teacher_forced_accuracy, train_baseline, train_p2p, Pressure2Pose,
    StepInput, FEATURE_WIDTH,
};
use seatpose::quantizer::MotionQuantizer;
use seatpose::Error;

/// Five-frame windows keep the descriptor width (and the test runtime) small.
const WINDOW_SECONDS: f64 = 1.0 / 3.0;
const T_FRAMES: usize = 5;
const C: usize = 12;
const W: usize = 32;

fn toy_mq(seed: u64) -> MotionQuantizer {
    let mut r = rng(seed);
    MotionQuantizer::new(WINDOW_SECONDS, FRAME_RATE_HZ, C, W, 0.99, 0.2, &mut r).unwrap()
}

fn toy_model(seed: u64) -> Pressure2Pose {
    let mut r = rng(seed);
    Pressure2Pose::new(T_FRAMES, C, W, 0.5, &mut r).unwrap()
}

fn toy_cloud(r: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let mut pts = Array2::zeros((n, 3));
    for v in pts.iter_mut() {
        *v = r.random::<f64>() * 2.0 - 1.0;
    }
    pts
}

/// Pressure frames carrying a blob that tracks the root position, so the
/// maps actually encode something about the pose.
fn pressure_from_poses(seq: &seatpose::body::PoseSequence) -> PressureSequence {
    let n = seq.frames.len();
    let mut frames = Array3::zeros((n, 80, 28));
    for (k, pose) in seq.frames.iter().enumerate() {
        let cr = (40.0 + pose.root.x * 40.0).clamp(8.0, 71.0);
        let cc = (14.0 + pose.root.y * 20.0).clamp(8.0, 19.0);
        for r in 0..80 {
            for c in 0..28 {
                let d2 = (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2);
                frames[(k, r, c)] = 2500.0 * (-d2 / 18.0).exp();
            }
        }
    }
    PressureSequence::new(frames, FRAME_RATE_HZ, "toy".into()).unwrap()
}

fn toy_recording(r: &mut ChaCha8Rng, frames: usize, chair_id: &str) -> Recording {
    let pose = random_sequence(r, frames);
    let pressure = pressure_from_poses(&pose);
    Recording::new(
        pressure,
        pose,
        chair_id.to_string(),
        "subj_t".to_string(),
        Activity::UprightSitting,
        true,
    )
    .unwrap()
}

struct Fixture {
    mq: MotionQuantizer,
    chairs: Vec<(String, Array2<f64>)>,
    recs: Vec<Recording>,
}

/// Recordings over two chairs with the codebook reseeded from real latents,
/// so tokenization spreads across entries instead of collapsing onto the
/// random init.
fn fixture(seed: u64, recs_per_chair: usize, frames: usize) -> Fixture {
    let mut r = rng(seed);
    let mut mq = toy_mq(seed);
    let chairs = vec![
        ("chair_a".to_string(), toy_cloud(&mut r, 50)),
        ("chair_b".to_string(), toy_cloud(&mut r, 50)),
    ];
    let mut recs = Vec::new();
    for i in 0..recs_per_chair * 2 {
        let chair = if i % 2 == 0 { "chair_a" } else { "chair_b" };
        recs.push(toy_recording(&mut r, frames, chair));
    }
    let mut chunks = Vec::new();
    for rec in &recs {
        let skel = Skeleton::with_height(rec.pose.subject_height_m).unwrap();
        chunks.extend(motion_descriptors(&rec.pose, &skel, mq.window_seconds).unwrap());
    }
    let x = mq.flatten_chunks(&chunks).unwrap();
    let latents = mq.encode_rows(x.view());
    mq.codebook.seed_from_latents(latents.view(), &mut r);
    Fixture { mq, chairs, recs }
}

#[test]
fn chair_feature_is_permutation_invariant() {
    let mut r = rng(11);
    let model = toy_model(1);
    let cloud = toy_cloud(&mut r, 64);
    let mut order: Vec<usize> = (0..64).collect();
    order.shuffle(&mut r);
    let mut shuffled = Array2::zeros((64, 3));
    for (dst, &src) in order.iter().enumerate() {
        shuffled.row_mut(dst).assign(&cloud.row(src));
    }

    let a = model.encode_chair(cloud.view()).unwrap();
    let b = model.encode_chair(shuffled.view()).unwrap();
    assert_eq!(a, b, "max-pool must erase point order exactly");
}

#[test]
fn chair_feature_ignores_duplicated_points() {
    let mut r = rng(12);
    let model = toy_model(2);
    let cloud = toy_cloud(&mut r, 40);
    let mut doubled = Array2::zeros((80, 3));
    for i in 0..40 {
        doubled.row_mut(i).assign(&cloud.row(i));
        doubled.row_mut(40 + i).assign(&cloud.row(i));
    }

    let a = model.encode_chair(cloud.view()).unwrap();
    let b = model.encode_chair(doubled.view()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn distinct_chairs_get_distinct_features() {
    let mut r = rng(13);
    let model = toy_model(3);
    let a = model.encode_chair(toy_cloud(&mut r, 50).view()).unwrap();
    let b = model.encode_chair(toy_cloud(&mut r, 50).view()).unwrap();
    let diff = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff > 1e-9, "independent clouds collapsed to one feature");
}

#[test]
fn step_scores_every_codebook_entry() {
    let mut r = rng(14);
    let model = toy_model(4);
    let input = StepInput {
        pressure_chunk: Array3::from_shape_fn((T_FRAMES, 80, 28), |_| r.random::<f64>() * 100.0),
        chair_feature: Array1::from_shape_fn(FEATURE_WIDTH, |_| r.random::<f64>()),
        prev_token: model.start_token(),
    };

    let logits = model.step(&input).unwrap();
    assert_eq!(logits.len(), C);
    assert!(logits.iter().all(|v| v.is_finite()));
    assert_eq!(logits, model.step(&input).unwrap(), "step must be deterministic");
}

#[test]
fn step_rejects_wrong_window_length() {
    let model = toy_model(5);
    let input = StepInput {
        pressure_chunk: Array3::zeros((T_FRAMES + 1, 80, 28)),
        chair_feature: Array1::zeros(FEATURE_WIDTH),
        prev_token: Array1::zeros(W),
    };
    assert!(matches!(model.step(&input), Err(Error::Dimension { .. })));
}

#[test]
fn generate_emits_one_token_per_window() {
    let fx = fixture(20, 1, 4 * T_FRAMES);
    let model = toy_model(6);
    let feat = model.encode_chair(normalize_cloud(&fx.chairs[0].1).unwrap().view()).unwrap();

    let tokens = model.generate(&fx.recs[0].pressure, &feat, &fx.mq.codebook).unwrap();
    assert_eq!(tokens.indices.len(), 4);
    assert!(tokens.indices.iter().all(|&i| i < C));
    assert_eq!(tokens.embeddings.dim(), (4, W));

    let again = model.generate(&fx.recs[0].pressure, &feat, &fx.mq.codebook).unwrap();
    assert_eq!(tokens.indices, again.indices);
}

#[test]
fn generate_rejects_short_pressure() {
    let model = toy_model(7);
    let mq = toy_mq(7);
    let frames = Array3::zeros((T_FRAMES - 2, 80, 28));
    let pressure = PressureSequence::new(frames, FRAME_RATE_HZ, "toy".into()).unwrap();
    let err = model.generate(&pressure, &Array1::zeros(FEATURE_WIDTH), &mq.codebook);
    assert!(matches!(err, Err(Error::TooShort { .. })));
}

#[test]
fn tokens_depend_only_on_past_pressure() {
    let fx = fixture(21, 1, 5 * T_FRAMES);
    let model = toy_model(8);
    let feat = model.encode_chair(normalize_cloud(&fx.chairs[0].1).unwrap().view()).unwrap();

    let base = fx.recs[0].pressure.clone();
    let mut altered = base.frames().clone();
    // Rewrite everything from window 2 onward.
    let mut r = rng(99);
    for k in 2 * T_FRAMES..altered.dim().0 {
        for row in 0..80 {
            for col in 0..28 {
                altered[(k, row, col)] = r.random::<f64>() * 800.0;
            }
        }
    }
    let altered = PressureSequence::new(altered, FRAME_RATE_HZ, "toy".into()).unwrap();

    let a = model.generate(&base, &feat, &fx.mq.codebook).unwrap();
    let b = model.generate(&altered, &feat, &fx.mq.codebook).unwrap();
    assert_eq!(
        a.indices[..2],
        b.indices[..2],
        "future pressure reached back into past tokens"
    );
}

#[test]
fn p2p_loss_zero_for_perfect_prediction() {
    let mut logits = Array2::zeros((3, C));
    let targets = [4usize, 0, 11];
    for (r, &t) in targets.iter().enumerate() {
        logits[(r, t)] = 60.0;
    }
    let pos = Array2::from_elem((3, 30), 0.25);
    let loss = p2p_loss(logits.view(), &targets, pos.view(), pos.view(), 0.5);
    assert!(loss.abs() < 1e-9, "perfect prediction should cost nothing, got {loss}");
}

#[test]
fn p2p_loss_matches_hand_computation() {
    let logits = ndarray::arr2(&[[1.0, 2.0], [3.0, 1.0]]);
    let targets = [1usize, 0];
    let decoded = ndarray::arr2(&[[0.1, 0.2], [0.3, 0.4]]);
    let gt = ndarray::arr2(&[[0.0, 0.2], [0.3, 0.0]]);

    // Cross-entropy per row is log(sum exp) - logit[target].
    let ce0 = (1.0f64.exp() + 2.0f64.exp()).ln() - 2.0;
    let ce1 = (3.0f64.exp() + 1.0f64.exp()).ln() - 3.0;
    let mse = (0.1f64 * 0.1 + 0.4 * 0.4) / 4.0;
    let want = 0.5 * (ce0 + ce1) + 0.5 * mse;

    let got = p2p_loss(logits.view(), &targets, decoded.view(), gt.view(), 0.5);
    assert!((got - want).abs() < 1e-12, "want {want}, got {got}");
}

#[test]
fn p2p_loss_lambda_zero_is_pure_cross_entropy() {
    let mut r = rng(30);
    let logits = Array2::from_shape_fn((6, C), |_| r.random::<f64>() * 4.0 - 2.0);
    let targets: Vec<usize> = (0..6).map(|_| r.random_range(0..C)).collect();
    let decoded = Array2::from_shape_fn((6, 12), |_| r.random::<f64>());
    let gt = Array2::from_shape_fn((6, 12), |_| r.random::<f64>());

    let mut want = 0.0;
    for (row, &t) in logits.rows().into_iter().zip(&targets) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        want += lse - row[t];
    }
    want /= 6.0;

    let got = p2p_loss(logits.view(), &targets, decoded.view(), gt.view(), 0.0);
    assert!((got - want).abs() < 1e-12);
}

#[test]
fn step_dataset_lays_out_windows_and_teacher_tokens() {
    let fx = fixture(22, 1, 3 * T_FRAMES);
    let ds = build_step_dataset(&fx.recs, &fx.chairs, &fx.mq).unwrap();

    assert_eq!(ds.len(), 6, "two recordings of three windows each");
    assert_eq!(ds.pressure_rows.dim(), (6 * T_FRAMES, 80 * 28));
    assert_eq!(ds.gt_positions.dim(), (6, T_FRAMES * J * 3));
    assert_eq!(ds.prev_token[0], None);
    assert_eq!(ds.prev_token[3], None, "second recording starts a new sequence");
    assert_eq!(ds.prev_token[1], Some(ds.targets[0]));
    assert_eq!(ds.prev_token[2], Some(ds.targets[1]));
    assert_eq!(ds.chair_of[0], 0);
    assert_eq!(ds.chair_of[3], 1);

    // Ground-truth positions must be the descriptor positions, recomputed
    // independently here.
    let skel = Skeleton::with_height(fx.recs[0].pose.subject_height_m).unwrap();
    let chunks = motion_descriptors(&fx.recs[0].pose, &skel, WINDOW_SECONDS).unwrap();
    for t in 0..T_FRAMES {
        for j in 0..J {
            for d in 0..3 {
                let want = chunks[0].positions[(t, j, d)];
                let got = ds.gt_positions[(0, (t * J + j) * 3 + d)];
                assert_eq!(got, want);
            }
        }
    }

    let mut bad = fx.recs.clone();
    bad[0].chair_id = "unknown".to_string();
    assert!(matches!(
        build_step_dataset(&bad, &fx.chairs, &fx.mq),
        Err(Error::Config(_))
    ));
}

#[test]
fn position_columns_walk_the_descriptor_layout() {
    let cols = position_columns(2);
    assert_eq!(cols.len(), 2 * J * 3);
    assert_eq!(&cols[..6], &[0, 1, 2, 18, 19, 20], "joint blocks are 18 wide");
    assert_eq!(cols[J * 3], J * 18, "second frame starts after J joint blocks");
}

#[test]
fn pressure_window_flattening_scales_to_unit_range() {
    let mut frames = Array3::zeros((2, 80, 28));
    frames[(0, 0, 0)] = 5000.0;
    frames[(1, 79, 27)] = 2500.0;
    let flat = flatten_pressure_window(frames.view()).unwrap();
    assert_eq!(flat.dim(), (2, 2240));
    assert_eq!(flat[(0, 0)], 1.0);
    assert_eq!(flat[(1, 2239)], 0.5);
    assert!(matches!(
        flatten_pressure_window(Array3::<f64>::zeros((2, 80, 27)).view()),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn normalize_cloud_centers_and_scales() {
    let mut r = rng(31);
    let cloud = toy_cloud(&mut r, 30);
    let normed = normalize_cloud(&cloud).unwrap();

    let centroid: f64 = normed.sum_axis(ndarray::Axis(0)).iter().map(|v| v.abs()).sum();
    assert!(centroid < 1e-9, "centroid must sit at the origin");
    let max_r = normed
        .rows()
        .into_iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        .fold(0.0, f64::max);
    assert!((max_r - 1.0).abs() < 1e-12);

    let point = Array2::from_elem((4, 3), 0.7);
    assert!(matches!(normalize_cloud(&point), Err(Error::Config(_))));
}

#[test]
fn overfitting_a_tiny_corpus_memorizes_tokens() {
    let fx = fixture(23, 1, 6 * T_FRAMES);
    let cfg = ExperimentConfig {
        seed: 23,
        window_seconds: WINDOW_SECONDS,
        codebook_size: C,
        token_width: W,
        batch: 12,
        lr: 1e-3,
        max_epochs: 150,
        patience: 150,
        lambda: 0.5,
        ..ExperimentConfig::default()
    };

    let (model, report) = train_p2p(&fx.recs, &[], &fx.chairs, &fx.mq, &cfg).unwrap();
    assert!(report.epochs_run > 0);
    assert!(
        report.train_loss.last().unwrap() < report.train_loss.first().unwrap(),
        "loss failed to drop: {:?}",
        report.train_loss
    );

    let ds = build_step_dataset(&fx.recs, &fx.chairs, &fx.mq).unwrap();
    let acc = teacher_forced_accuracy(&model, &fx.mq, &ds);
    assert!(acc >= 0.99, "teacher-forced accuracy {acc} below memorization bar");
}

#[test]
fn predictor_training_is_deterministic() {
    let fx = fixture(24, 1, 3 * T_FRAMES);
    let cfg = ExperimentConfig {
        seed: 7,
        window_seconds: WINDOW_SECONDS,
        codebook_size: C,
        token_width: W,
        batch: 4,
        max_epochs: 3,
        patience: 3,
        ..ExperimentConfig::default()
    };

    let (a, ra) = train_p2p(&fx.recs, &[], &fx.chairs, &fx.mq, &cfg).unwrap();
    let (b, rb) = train_p2p(&fx.recs, &[], &fx.chairs, &fx.mq, &cfg).unwrap();
    assert_eq!(ra, rb, "training reports diverged across identical runs");

    let mut r = rng(55);
    let input = StepInput {
        pressure_chunk: Array3::from_shape_fn((T_FRAMES, 80, 28), |_| r.random::<f64>() * 50.0),
        chair_feature: Array1::from_shape_fn(FEATURE_WIDTH, |_| r.random::<f64>()),
        prev_token: a.start_token(),
    };
    assert_eq!(a.step(&input).unwrap(), b.step(&input).unwrap());
}

#[test]
fn predictor_checkpoint_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p2p.ckpt");
    let mut model = toy_model(40);
    model.set_mq_hash("abc123");
    model.save(&path).unwrap();

    let loaded = Pressure2Pose::load(&path).unwrap();
    assert_eq!(loaded.mq_sha256, "abc123");
    assert_eq!(loaded.t_frames, T_FRAMES);
    assert_eq!(loaded.codebook_size, C);
    for (a, b) in model.store.ids().zip(loaded.store.ids()) {
        assert_eq!(model.store.value(a), loaded.store.value(b));
    }

    let mut r = rng(41);
    let input = StepInput {
        pressure_chunk: Array3::from_shape_fn((T_FRAMES, 80, 28), |_| r.random::<f64>() * 50.0),
        chair_feature: Array1::from_shape_fn(FEATURE_WIDTH, |_| r.random::<f64>()),
        prev_token: model.start_token(),
    };
    assert_eq!(model.step(&input).unwrap(), loaded.step(&input).unwrap());
}

#[test]
fn checkpoint_kind_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    let mut r = rng(42);
    let baseline = seatpose::predictor::BaselineRegressor::new(T_FRAMES, &mut r).unwrap();
    baseline.save(&path).unwrap();
    assert!(matches!(
        Pressure2Pose::load(&path),
        Err(Error::Parse { field: "kind", .. })
    ));
}

#[test]
fn baseline_regresses_window_positions() {
    let mut r = rng(43);
    let model = seatpose::predictor::BaselineRegressor::new(T_FRAMES, &mut r).unwrap();
    let chunk = Array3::from_shape_fn((T_FRAMES, 80, 28), |_| r.random::<f64>() * 100.0);
    let feat = Array1::from_shape_fn(FEATURE_WIDTH, |_| r.random::<f64>());

    let out = model.regress(chunk.view(), &feat).unwrap();
    assert_eq!(out.dim(), (T_FRAMES, J, 3));
    assert!(out.iter().all(|v| v.is_finite()));
    assert_eq!(out, model.regress(chunk.view(), &feat).unwrap());

    let short = Array3::zeros((T_FRAMES - 1, 80, 28));
    assert!(matches!(
        model.regress(short.view(), &feat),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn baseline_training_reduces_position_error() {
    let fx = fixture(25, 1, 4 * T_FRAMES);
    let cfg = ExperimentConfig {
        seed: 25,
        window_seconds: WINDOW_SECONDS,
        codebook_size: C,
        token_width: W,
        batch: 8,
        lr: 1e-3,
        max_epochs: 40,
        patience: 40,
        ..ExperimentConfig::default()
    };

    let (_, report) = train_baseline(&fx.recs, &[], &fx.chairs, &cfg).unwrap();
    let first = report.val_loss.first().unwrap();
    let last = report.val_loss.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(last < first * 0.9, "position MSE failed to drop: {first} -> {last}");
}

#[test]
fn evaluation_scores_both_model_families() {
    let fx = fixture(26, 1, 3 * T_FRAMES);
    let model = toy_model(44);
    let p2p = eval_p2p(&model, &fx.mq, &fx.recs, &fx.chairs).unwrap();
    assert!(p2p.mpjpe_mm.is_finite() && p2p.mpjpe_mm > 0.0);
    assert!(p2p.pa_mpjpe_mm.is_finite());
    assert!(p2p.pa_mpjpe_mm <= p2p.mpjpe_mm + 1e-9, "alignment cannot hurt");
    assert!(p2p.mpve_mm.is_some());

    let mut r = rng(45);
    let baseline = seatpose::predictor::BaselineRegressor::new(T_FRAMES, &mut r).unwrap();
    let base = eval_baseline(&baseline, &fx.recs, &fx.chairs).unwrap();
    assert!(base.mpjpe_mm.is_finite());
    assert!(base.mpve_mm.is_none(), "regressed joints have no surface");
}
