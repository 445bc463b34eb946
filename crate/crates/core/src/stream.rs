//! Deterministic, splittable random streams.
//!
//! Every stochastic routine takes a [`RandomStream`]. Streams are ChaCha12
//! generators whose seed is derived from a 64-bit *lineage* value; a child
//! stream's lineage hashes (parent lineage, child index), so splits can nest
//! (suite -> case -> estimator -> chunk) and never alias for distinct paths.
//!
//! Monte-Carlo reductions use [`MC_CHUNKS`] fixed sub-streams combined in
//! index order with pairwise summation, so enabling the `parallel` feature
//! changes wall-clock time but not a single output bit.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Number of independent sub-streams a Monte-Carlo run is sliced into,
/// regardless of thread count.
pub const MC_CHUNKS: usize = 64;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(parent: u64, child: u64) -> u64 {
    splitmix64(parent ^ splitmix64(child.wrapping_add(0xA5A5_A5A5_5A5A_5A5A)))
}

/// A seeded random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    lineage: u64,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        let lineage = splitmix64(seed);
        RandomStream {
            lineage,
            rng: ChaCha12Rng::seed_from_u64(lineage),
        }
    }

    /// Child stream `index`; independent of the parent and of siblings, and
    /// unaffected by how much the parent has already been consumed.
    pub fn split(&self, index: u64) -> Self {
        let lineage = mix(self.lineage, index);
        RandomStream {
            lineage,
            rng: ChaCha12Rng::seed_from_u64(lineage),
        }
    }

    /// Standard normal draw.
    pub fn gauss(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform on `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform angle in `[-pi, pi)`.
    pub fn angle(&mut self) -> f64 {
        self.range(-std::f64::consts::PI, std::f64::consts::PI)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

/// Sum with pairwise (cascade) association: deterministic and far more
/// accurate than left-to-right for long Monte-Carlo accumulations.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Split `n` draws across [`MC_CHUNKS`] sub-streams of `stream` and map each
/// chunk with `f(chunk_stream, chunk_len)`; results come back in chunk order.
/// Runs on rayon when the `parallel` feature is enabled, serial otherwise —
/// the output is identical either way.
pub fn map_chunks<T, F>(stream: &RandomStream, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomStream, usize) -> T + Sync,
{
    let chunks = MC_CHUNKS.min(n.max(1));
    let base = n / chunks;
    let extra = n % chunks;
    let sizes: Vec<usize> = (0..chunks)
        .map(|i| base + usize::from(i < extra))
        .collect();

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        sizes
            .par_iter()
            .enumerate()
            .map(|(i, &len)| {
                let mut sub = stream.split(i as u64);
                f(&mut sub, len)
            })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sizes
            .iter()
            .enumerate()
            .map(|(i, &len)| {
                let mut sub = stream.split(i as u64);
                f(&mut sub, len)
            })
            .collect()
    }
}

/// Monte-Carlo mean and standard error of `f` over `n` draws, chunked as in
/// [`map_chunks`].
pub fn mc_mean<F>(stream: &RandomStream, n: usize, f: F) -> (f64, f64)
where
    F: Fn(&mut RandomStream) -> f64 + Sync,
{
    let partials = map_chunks(stream, n, |sub, len| {
        let mut sum = Vec::with_capacity(len);
        let mut sum_sq = Vec::with_capacity(len);
        for _ in 0..len {
            let v = f(sub);
            sum.push(v);
            sum_sq.push(v * v);
        }
        (pairwise_sum(&sum), pairwise_sum(&sum_sq))
    });
    let total: Vec<f64> = partials.iter().map(|p| p.0).collect();
    let total_sq: Vec<f64> = partials.iter().map(|p| p.1).collect();
    let s = pairwise_sum(&total);
    let s2 = pairwise_sum(&total_sq);
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0);
    (mean, (var / nf).sqrt())
}
