//! Layer builders over the autodiff tape.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::graph::{Im2ColSpec, NodeId, ParamId, ParamStore, Tape};

/// He-normal init: N(0, 2/fan_in), the usual choice ahead of ReLU.
pub fn he_normal(rng: &mut ChaCha8Rng, rows: usize, cols: usize, fan_in: usize) -> Array2<f64> {
    let std = (2.0 / fan_in as f64).sqrt();
    let mut w = Array2::zeros((rows, cols));
    for v in w.iter_mut() {
        *v = std * normal_sample(rng);
    }
    w
}

/// Standard normal via Box-Muller; two uniforms per sample keeps the draw
/// count deterministic regardless of rejection behaviour.
fn normal_sample(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Fully-connected layer: `y = x W + b`.
#[derive(Debug, Clone, Copy)]
pub struct Linear {
    pub w: ParamId,
    pub b: ParamId,
}

impl Linear {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        fan_in: usize,
        fan_out: usize,
    ) -> Self {
        let w = store.add(&format!("{name}.w"), he_normal(rng, fan_in, fan_out, fan_in));
        let b = store.add(&format!("{name}.b"), Array2::zeros((1, fan_out)));
        Linear { w, b }
    }

    pub fn apply(&self, t: &mut Tape, store: &ParamStore, x: NodeId) -> NodeId {
        let w = t.param(store, self.w);
        let b = t.param(store, self.b);
        let y = t.matmul(x, w);
        t.add_row(y, b)
    }

    /// Applies the layer with weights baked in as constants: gradients flow
    /// to the input but not to the parameters.
    pub fn apply_frozen(&self, t: &mut Tape, store: &ParamStore, x: NodeId) -> NodeId {
        let y = t.matmul_const(x, store.value(self.w).clone());
        t.add_row_const(y, store.value(self.b).clone())
    }
}

/// Convolution expressed as im2col + matmul. Input rows are flat images in
/// channel-major order (`c*h*w` columns); output rows keep the same layout
/// with `out_c * out_h * out_w` columns.
#[derive(Debug, Clone, Copy)]
pub struct Conv2d {
    pub spec: Im2ColSpec,
    pub out_c: usize,
    pub w: ParamId,
    pub b: ParamId,
}

impl Conv2d {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut ChaCha8Rng,
        name: &str,
        spec: Im2ColSpec,
        out_c: usize,
    ) -> Self {
        let patch = spec.in_c * spec.kh * spec.kw;
        let w = store.add(&format!("{name}.w"), he_normal(rng, patch, out_c, patch));
        let b = store.add(&format!("{name}.b"), Array2::zeros((1, out_c)));
        Conv2d { spec, out_c, w, b }
    }

    pub fn out_cols(&self) -> usize {
        self.out_c * self.spec.out_h() * self.spec.out_w()
    }

    pub fn apply(&self, t: &mut Tape, store: &ParamStore, x: NodeId) -> NodeId {
        let w = t.param(store, self.w);
        let b = t.param(store, self.b);
        let patches = t.im2col(x, self.spec);
        let y = t.matmul(patches, w);
        let y = t.add_row(y, b);
        t.spatial_to_channels(y, self.spec.out_h() * self.spec.out_w())
    }
}
