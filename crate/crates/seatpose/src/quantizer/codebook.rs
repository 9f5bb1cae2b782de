//! Token codebook with exponential-moving-average updates.
//!
//! Entries are never trained by gradient descent; each batch's latents move
//! the running cluster statistics and entries are recomputed as
//! `ema_embed_sum / max(ema_cluster_size, EPS)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Floor for cluster sizes in the entry recompute, protecting dead codes
/// against division by zero.
pub const CLUSTER_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    entries: Array2<f64>,
    ema_cluster_size: Array1<f64>,
    ema_embed_sum: Array2<f64>,
    pub alpha: f64,
}

impl Codebook {
    /// Starts with the given entries and accumulator state consistent with
    /// them (unit cluster sizes).
    pub fn new(entries: Array2<f64>, alpha: f64) -> Result<Codebook> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Dimension {
                context: "Codebook::new",
                expected: "at least one entry and one column".to_string(),
                got: format!("{}x{}", entries.nrows(), entries.ncols()),
            });
        }
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::Range { field: "alpha", value: alpha, min: 0.0, max: 1.0 });
        }
        Ok(Codebook {
            ema_cluster_size: Array1::ones(entries.nrows()),
            ema_embed_sum: entries.clone(),
            entries,
            alpha,
        })
    }

    /// Number of entries (the paper's C).
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn width(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> ArrayView1<'_, f64> {
        self.entries.row(index)
    }

    pub fn cluster_sizes(&self) -> &Array1<f64> {
        &self.ema_cluster_size
    }

    pub fn ema_embed_sum(&self) -> &Array2<f64> {
        &self.ema_embed_sum
    }

    /// Rebuilds a codebook from checkpointed state, re-deriving nothing.
    pub fn restore(
        entries: Array2<f64>,
        ema_cluster_size: Array1<f64>,
        ema_embed_sum: Array2<f64>,
        alpha: f64,
    ) -> Result<Codebook> {
        let mut cb = Codebook::new(entries, alpha)?;
        if ema_cluster_size.len() != cb.size() || ema_embed_sum.dim() != cb.entries.dim() {
            return Err(Error::Dimension {
                context: "Codebook::restore",
                expected: format!("{} sizes and {:?} sums", cb.size(), cb.entries.dim()),
                got: format!("{} sizes and {:?} sums", ema_cluster_size.len(), ema_embed_sum.dim()),
            });
        }
        cb.ema_cluster_size = ema_cluster_size;
        cb.ema_embed_sum = ema_embed_sum;
        Ok(cb)
    }

    /// Nearest entry by Euclidean distance; ties go to the lowest index.
    pub fn quantize(&self, latent: ArrayView1<f64>) -> (usize, Array1<f64>) {
        assert_eq!(latent.len(), self.width(), "latent width mismatch");
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, e) in self.entries.rows().into_iter().enumerate() {
            let mut d = 0.0;
            for (a, b) in latent.iter().zip(e.iter()) {
                let t = a - b;
                d += t * t;
            }
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        (best, self.entries.row(best).to_owned())
    }

    /// Quantizes each row; returns indices and the stacked entries.
    pub fn quantize_rows(&self, latents: ArrayView2<f64>) -> (Vec<usize>, Array2<f64>) {
        let mut indices = Vec::with_capacity(latents.nrows());
        let mut q = Array2::zeros((latents.nrows(), self.width()));
        for (r, latent) in latents.rows().into_iter().enumerate() {
            let (i, e) = self.quantize(latent);
            indices.push(i);
            q.row_mut(r).assign(&e);
        }
        (indices, q)
    }

    /// Folds one batch of assigned latents into the running statistics. An
    /// empty batch is a no-op; entries missing from the batch keep their
    /// value while their counts decay.
    pub fn ema_update(&mut self, latents: ArrayView2<f64>, indices: &[usize]) {
        assert_eq!(latents.nrows(), indices.len(), "one index per latent");
        if indices.is_empty() {
            return;
        }
        let mut counts = Array1::<f64>::zeros(self.size());
        let mut sums = Array2::<f64>::zeros((self.size(), self.width()));
        for (latent, &i) in latents.rows().into_iter().zip(indices) {
            counts[i] += 1.0;
            let mut row = sums.row_mut(i);
            row += &latent;
        }
        let a = self.alpha;
        self.ema_cluster_size.zip_mut_with(&counts, |s, c| *s = a * *s + (1.0 - a) * c);
        self.ema_embed_sum.zip_mut_with(&sums, |s, c| *s = a * *s + (1.0 - a) * c);
        for i in 0..self.size() {
            let n = self.ema_cluster_size[i].max(CLUSTER_EPS);
            let mut e = self.entries.row_mut(i);
            e.assign(&self.ema_embed_sum.row(i));
            e.mapv_inplace(|v| v / n);
        }
    }

    /// Fraction of entries hit at least once by `indices`.
    pub fn usage(&self, indices: &[usize]) -> f64 {
        let mut hit = vec![false; self.size()];
        for &i in indices {
            hit[i] = true;
        }
        hit.iter().filter(|&&h| h).count() as f64 / self.size() as f64
    }

    /// Replaces entries with k-means++ seeds drawn from `latents` and resets
    /// the accumulators around them. When there are fewer latents than
    /// entries, the leftover entries reuse latents cyclically with a small
    /// jitter so no two start identical.
    pub fn seed_from_latents(&mut self, latents: ArrayView2<f64>, rng: &mut ChaCha8Rng) {
        let n = latents.nrows();
        if n == 0 {
            return;
        }
        let c = self.size();
        let picks = kmeans_pp_indices(latents, c.min(n), rng);
        for (row, &p) in picks.iter().enumerate() {
            self.entries.row_mut(row).assign(&latents.row(p));
        }
        if n < c {
            let scale = 1e-3;
            for row in n..c {
                let src = latents.row(row % n);
                for (d, v) in self.entries.row_mut(row).iter_mut().enumerate() {
                    *v = src[d] + scale * (rng.random::<f64>() - 0.5);
                }
            }
        }
        self.ema_cluster_size.fill(1.0);
        self.ema_embed_sum.assign(&self.entries);
    }
}

/// A run of tokens with their embeddings; for hard-quantized sequences each
/// embedding row is the codebook entry at the matching index.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub indices: Vec<usize>,
    pub embeddings: Array2<f64>,
}

impl TokenSequence {
    pub fn from_indices(codebook: &Codebook, indices: Vec<usize>) -> Result<TokenSequence> {
        let mut embeddings = Array2::zeros((indices.len(), codebook.width()));
        for (r, &i) in indices.iter().enumerate() {
            if i >= codebook.size() {
                return Err(Error::Range {
                    field: "token index",
                    value: i as f64,
                    min: 0.0,
                    max: (codebook.size() - 1) as f64,
                });
            }
            embeddings.row_mut(r).assign(&codebook.entry(i));
        }
        Ok(TokenSequence { indices, embeddings })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// k-means++ seeding: the first pick is uniform, each later pick is drawn
/// with probability proportional to its squared distance from the nearest
/// already-chosen seed.
fn kmeans_pp_indices(latents: ArrayView2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = latents.nrows();
    let mut picks = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    picks.push(first);
    let mut min_d2: Vec<f64> = (0..n).map(|i| sq_dist(latents.row(i), latents.row(first))).collect();
    while picks.len() < k {
        let total: f64 = min_d2.iter().sum();
        let next = if total <= 0.0 {
            // All remaining points coincide with a seed; fall back to uniform.
            rng.random_range(0..n)
        } else {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in min_d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        picks.push(next);
        for (i, d) in min_d2.iter_mut().enumerate() {
            let nd = sq_dist(latents.row(i), latents.row(next));
            if nd < *d {
                *d = nd;
            }
        }
    }
    picks
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let mut d = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let t = x - y;
        d += t * t;
    }
    d
}
