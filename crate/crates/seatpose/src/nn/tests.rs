use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
    let mut m = Array2::zeros((r, c));
    for v in m.iter_mut() {
        *v = rng.random::<f64>() * 2.0 - 1.0;
    }
    m
}

/// Checks every parameter gradient against central differences.
fn gradcheck(store: &mut ParamStore, build: impl Fn(&mut Tape, &ParamStore) -> NodeId, tol: f64) {
    store.zero_grads();
    let mut tape = Tape::new();
    let loss = build(&mut tape, store);
    tape.backward(loss, store);
    let analytic: Vec<Array2<f64>> = store.ids().map(|id| store.grad(id).clone()).collect();

    let h = 1e-6;
    for id in store.ids().collect::<Vec<_>>() {
        let dim = store.value(id).raw_dim();
        for r in 0..dim[0] {
            for c in 0..dim[1] {
                let orig = store.value(id)[(r, c)];
                store.value_mut(id)[(r, c)] = orig + h;
                let mut t1 = Tape::new();
                let l1 = build(&mut t1, store);
                let f1 = t1.scalar(l1);
                store.value_mut(id)[(r, c)] = orig - h;
                let mut t2 = Tape::new();
                let l2 = build(&mut t2, store);
                let f2 = t2.scalar(l2);
                store.value_mut(id)[(r, c)] = orig;
                let numeric = (f1 - f2) / (2.0 * h);
                let a = analytic[id_index(id, store)][(r, c)];
                let denom = a.abs().max(numeric.abs()).max(1.0);
                assert!(
                    (a - numeric).abs() / denom < tol,
                    "param {} [{r},{c}]: analytic {a} vs numeric {numeric}",
                    store.name(id)
                );
            }
        }
    }
}

fn id_index(id: ParamId, store: &ParamStore) -> usize {
    store.ids().position(|x| x == id).unwrap()
}

#[test]
fn gradcheck_linear_relu_mse() {
    let mut r = rng(1);
    let mut store = ParamStore::new();
    let w1 = store.add("w1", rand_mat(&mut r, 4, 6));
    let b1 = store.add("b1", rand_mat(&mut r, 1, 6));
    let w2 = store.add("w2", rand_mat(&mut r, 6, 3));
    let x = rand_mat(&mut r, 5, 4);
    let target = rand_mat(&mut r, 5, 3);
    gradcheck(
        &mut store,
        |t, s| {
            let xn = t.value(x.clone());
            let w1n = t.param(s, w1);
            let b1n = t.param(s, b1);
            let h = t.matmul(xn, w1n);
            let h = t.add_row(h, b1n);
            let h = t.relu(h);
            let w2n = t.param(s, w2);
            let y = t.matmul(h, w2n);
            t.mse_const(y, target.clone())
        },
        1e-5,
    );
}

#[test]
fn gradcheck_concat_slice_scale_sub() {
    let mut r = rng(2);
    let mut store = ParamStore::new();
    let a = store.add("a", rand_mat(&mut r, 3, 4));
    let b = store.add("b", rand_mat(&mut r, 3, 2));
    let mask = rand_mat(&mut r, 3, 6);
    gradcheck(
        &mut store,
        |t, s| {
            let an = t.param(s, a);
            let bn = t.param(s, b);
            let cat = t.concat_cols(&[an, bn]);
            let masked = t.mul_mask(cat, mask.clone());
            let sl = t.slice_cols(masked, 1, 4);
            let sc = t.scale(sl, 1.7);
            let diff = t.sub(sc, an);
            let sq = t.mul_mask(diff, Array2::from_elem((3, 4), 1.0));
            let sum = t.add(sq, diff);
            t.mean_all(sum)
        },
        1e-5,
    );
}

#[test]
fn gradcheck_repeat_group_max() {
    let mut r = rng(3);
    let mut store = ParamStore::new();
    let row = store.add("row", rand_mat(&mut r, 1, 5));
    let pts = store.add("pts", rand_mat(&mut r, 6, 5));
    gradcheck(
        &mut store,
        |t, s| {
            let rown = t.param(s, row);
            let tiled = t.repeat_rows(rown, 6);
            let ptsn = t.param(s, pts);
            let sum = t.add(tiled, ptsn);
            let pooled = t.max_cols(sum);
            let back = t.repeat_rows(pooled, 6);
            let mixed = t.add(back, ptsn);
            let gm = t.group_mean(mixed, 3);
            t.mean_all(gm)
        },
        1e-5,
    );
}

#[test]
fn gradcheck_conv_stack() {
    let mut r = rng(4);
    let mut store = ParamStore::new();
    let spec = Im2ColSpec { in_h: 5, in_w: 4, in_c: 2, kh: 3, kw: 3, stride: 2, pad: 1 };
    let conv = Conv2d::new(&mut store, &mut r, "conv", spec, 3);
    let x = rand_mat(&mut r, 2, 2 * 5 * 4);
    let t_cols = conv.out_cols();
    let target = rand_mat(&mut r, 2, t_cols);
    gradcheck(
        &mut store,
        |t, s| {
            let xn = t.value(x.clone());
            let y = conv.apply(t, s, xn);
            let y = t.relu(y);
            t.mse_const(y, target.clone())
        },
        1e-5,
    );
}

#[test]
fn gradcheck_softmax_ce_and_soft_embed() {
    let mut r = rng(5);
    let mut store = ParamStore::new();
    let w = store.add("w", rand_mat(&mut r, 4, 7));
    let x = rand_mat(&mut r, 3, 4);
    let codebook = rand_mat(&mut r, 7, 5);
    let targets = vec![2usize, 0, 6];
    let pose_target = rand_mat(&mut r, 3, 5);
    gradcheck(
        &mut store,
        |t, s| {
            let xn = t.value(x.clone());
            let wn = t.param(s, w);
            let logits = t.matmul(xn, wn);
            let ce = t.softmax_cross_entropy(logits, &targets);
            let probs = t.softmax(logits);
            let soft = t.matmul_const(probs, codebook.clone());
            let seq = t.mse_const(soft, pose_target.clone());
            let seq = t.scale(seq, 0.5);
            t.add(ce, seq)
        },
        1e-5,
    );
}

#[test]
fn gradcheck_straight_through_passes_gradient_unchanged() {
    let mut r = rng(6);
    let mut store = ParamStore::new();
    let w = store.add("w", rand_mat(&mut r, 3, 4));
    let replacement = rand_mat(&mut r, 2, 4);
    let x = rand_mat(&mut r, 2, 3);

    // Analytic gradient of mean(replacement ⊙ mask) w.r.t. w must equal the
    // gradient as if the replacement were w's own output (passthrough).
    store.zero_grads();
    let mut t = Tape::new();
    let xn = t.value(x.clone());
    let wn = t.param(&store, w);
    let y = t.matmul(xn, wn);
    let st = t.straight_through(y, replacement.clone());
    let loss = t.mean_all(st);
    t.backward(loss, &mut store);

    // d mean(st) / d y = 1/8 at every element; chain through matmul by hand.
    let g_y = Array2::from_elem((2, 4), 1.0 / 8.0);
    let expected = x.t().dot(&g_y);
    let got = store.grad(w);
    for (e, g) in expected.iter().zip(got.iter()) {
        assert!((e - g).abs() < 1e-12, "straight-through grad mismatch: {e} vs {g}");
    }
    // Forward value is the replacement, not the matmul result.
    assert_eq!(t.val(st), &replacement);
}

#[test]
fn adamw_converges_on_quadratic() {
    let mut store = ParamStore::new();
    let p = store.add("p", array![[5.0, -3.0], [2.0, 8.0]]);
    let target = array![[1.0, 1.0], [1.0, 1.0]];
    let mut opt = AdamW::new(&store, 0.0);
    for i in 0..3000 {
        store.zero_grads();
        let mut t = Tape::new();
        let pn = t.param(&store, p);
        let loss = t.mse_const(pn, target.clone());
        t.backward(loss, &mut store);
        opt.step(&mut store, cosine_lr(0.02, i, 3000));
    }
    for &v in store.value(p).iter() {
        assert!((v - 1.0).abs() < 1e-3, "AdamW failed to reach minimum: {v}");
    }
}

#[test]
fn weight_decay_shrinks_unused_parameter() {
    let mut store = ParamStore::new();
    let p = store.add("p", array![[4.0]]);
    let mut opt = AdamW::new(&store, 0.1);
    for _ in 0..100 {
        store.zero_grads();
        opt.step(&mut store, 0.1);
    }
    let v = store.value(p)[(0, 0)];
    assert!(v < 4.0 && v > 0.0, "decay should shrink towards zero: {v}");
}

#[test]
fn cosine_schedule_endpoints() {
    assert!((cosine_lr(1e-4, 0, 200) - 1e-4).abs() < 1e-18);
    let mid = cosine_lr(1e-4, 100, 200);
    assert!((mid - 5e-5).abs() < 1e-12);
    assert!(cosine_lr(1e-4, 200, 200).abs() < 1e-18);
    assert!(cosine_lr(1e-4, 150, 200) < mid);
}

#[test]
fn max_cols_is_permutation_invariant() {
    let mut r = rng(7);
    let pts = rand_mat(&mut r, 40, 8);
    let mut shuffled = pts.clone();
    // Reverse rows: any permutation must give bit-identical column maxima.
    for i in 0..40 {
        shuffled.row_mut(i).assign(&pts.row(39 - i));
    }
    let mut t = Tape::new();
    let a = t.value(pts);
    let b = t.value(shuffled);
    let ma = t.max_cols(a);
    let mb = t.max_cols(b);
    assert_eq!(t.val(ma), t.val(mb));
}

#[test]
fn training_is_bit_reproducible() {
    let run = || {
        let mut r = rng(42);
        let mut store = ParamStore::new();
        let lin = Linear::new(&mut store, &mut r, "l", 6, 2);
        let x = rand_mat(&mut r, 8, 6);
        let y = rand_mat(&mut r, 8, 2);
        let mut opt = AdamW::new(&store, 1e-5);
        for _ in 0..50 {
            store.zero_grads();
            let mut t = Tape::new();
            let xn = t.value(x.clone());
            let out = lin.apply(&mut t, &store, xn);
            let loss = t.mse_const(out, y.clone());
            t.backward(loss, &mut store);
            opt.step(&mut store, 1e-3);
        }
        (store.value(lin.w).clone(), store.value(lin.b).clone())
    };
    let (w1, b1) = run();
    let (w2, b2) = run();
    assert_eq!(w1, w2);
    assert_eq!(b1, b2);
}

/// Not a correctness test: prints matmul throughput so model sizes can be
/// chosen against the available compute. Run with --ignored to see numbers.
#[test]
#[ignore]
fn matmul_throughput_probe() {
    let mut r = rng(9);
    for &(n, k, m) in &[(32usize, 5940usize, 768usize), (480, 2240, 128), (32, 768, 512), (5000, 64, 128)] {
        let a = rand_mat(&mut r, n, k);
        let b = rand_mat(&mut r, k, m);
        let start = std::time::Instant::now();
        let mut reps = 0u32;
        let mut sink = 0.0;
        while start.elapsed().as_secs_f64() < 1.0 {
            let c = a.dot(&b);
            sink += c[(0, 0)];
            reps += 1;
        }
        let secs = start.elapsed().as_secs_f64() / reps as f64;
        let gflops = 2.0 * (n * k * m) as f64 / secs / 1e9;
        println!("matmul {n}x{k}x{m}: {:.1} ms/op, {gflops:.2} GFLOP/s (sink {sink:.3e})", secs * 1e3);
    }
}
