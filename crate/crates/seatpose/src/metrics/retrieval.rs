//! Retrieval precision over paired latent embeddings.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// R-Precision outcome. `pool_shrunk` flags sets smaller than the requested
/// pool, where the protocol degrades to ranking within the whole set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RPrecision {
    pub value: f64,
    pub pool_size: usize,
    pub pool_shrunk: bool,
}

/// For each generated row, ranks its paired real row among `pool` candidates
/// (the true match plus `pool`−1 random others) by Euclidean distance; the
/// score is the fraction ranked in the top `k`. Candidate draws come from
/// the seed only, so results are reproducible.
pub fn r_precision(
    generated: &Array2<f64>,
    real: &Array2<f64>,
    pool: usize,
    k: usize,
    seed: u64,
) -> Result<RPrecision> {
    if generated.dim() != real.dim() {
        return Err(Error::Dimension {
            context: "r_precision",
            expected: format!("{:?}", real.dim()),
            got: format!("{:?}", generated.dim()),
        });
    }
    let n = generated.nrows();
    if n < k.max(1) {
        return Err(Error::TooShort { context: "r_precision", needed: k.max(1), got: n });
    }
    let pool_shrunk = pool > n;
    let pool_size = pool.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let dist2 = |a: usize, b: usize| -> f64 {
        let ra = generated.row(a);
        let rb = real.row(b);
        ra.iter().zip(rb.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
    };

    let mut hits = 0usize;
    for i in 0..n {
        let true_d = dist2(i, i);
        // pool−1 distinct distractors drawn from the other real rows;
        // indices at or above i shift by one to skip the true match.
        let mut better = 0usize;
        for idx in sample(&mut rng, n - 1, pool_size - 1).iter() {
            let cand = if idx >= i { idx + 1 } else { idx };
            if dist2(i, cand) < true_d {
                better += 1;
            }
        }
        if better + 1 <= k {
            hits += 1;
        }
    }
    Ok(RPrecision { value: hits as f64 / n as f64, pool_size, pool_shrunk })
}
