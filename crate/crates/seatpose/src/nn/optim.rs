//! AdamW with decoupled weight decay, plus the cosine learning-rate schedule.

use ndarray::Array2;

use super::graph::ParamStore;

/// AdamW keeps per-parameter first/second moment estimates; weight decay is
/// applied directly to the weights rather than through the gradient.
pub struct AdamW {
    beta1: f64,
    beta2: f64,
    eps: f64,
    weight_decay: f64,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: u64,
}

impl AdamW {
    pub fn new(store: &ParamStore, weight_decay: f64) -> Self {
        let m = store.ids().map(|id| Array2::zeros(store.value(id).raw_dim())).collect();
        let v = store.ids().map(|id| Array2::zeros(store.value(id).raw_dim())).collect();
        AdamW { beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay, m, v, t: 0 }
    }

    pub fn step(&mut self, store: &mut ParamStore, lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let (b1, b2, eps, wd) = (self.beta1, self.beta2, self.eps, self.weight_decay);
        let (m, v) = (&mut self.m, &mut self.v);
        store.for_each_mut(|i, value, grad| {
            let mi = &mut m[i];
            let vi = &mut v[i];
            for ((p, &g), (mm, vv)) in value
                .iter_mut()
                .zip(grad.iter())
                .zip(mi.iter_mut().zip(vi.iter_mut()))
            {
                *mm = b1 * *mm + (1.0 - b1) * g;
                *vv = b2 * *vv + (1.0 - b2) * g * g;
                let m_hat = *mm / bc1;
                let v_hat = *vv / bc2;
                *p -= lr * (m_hat / (v_hat.sqrt() + eps) + wd * *p);
            }
        });
    }
}

/// Cosine decay from `base` to zero over `max_epochs`.
pub fn cosine_lr(base: f64, epoch: usize, max_epochs: usize) -> f64 {
    assert!(max_epochs > 0);
    let frac = (epoch as f64 / max_epochs as f64).min(1.0);
    base * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos())
}
