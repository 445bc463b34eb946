//! Differential-entropy estimation and related sample functionals.
//!
//! The primary estimator is the classic k-nearest-neighbour construction
//! (`psi(n) - psi(k) + ln c_d + (d/n) sum_i ln eps_i`, with `eps_i` the
//! distance to the k-th neighbour and `c_d` the unit-ball volume), in one and
//! two dimensions. A histogram estimator is kept as an independent
//! cross-check. Standard errors come from 32 half-sample subsamples drawn
//! *without* replacement — a with-replacement bootstrap would collapse k-NN
//! distances to zero through duplicated points.
//!
//! All values are in nats.

use crate::stream::RandomStream;
use crate::vec2::{Sym2, Vec2};
use crate::{quad, Error, Result};

/// Default neighbour order for the k-NN estimator.
pub const DEFAULT_K: usize = 4;
/// Number of half-sample subsamples behind every reported standard error.
const SUBSAMPLES: usize = 32;
/// Internal seed for the subsample pattern: estimates must be a pure function
/// of the input samples.
const SUBSAMPLE_SEED: u64 = 0x00D1_CE00;
/// Minimum sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 1000;
/// Estimates are rejected when more than this fraction of points sit at zero
/// k-NN distance (mass of exact duplicates).
const MAX_ZERO_FRAC: f64 = 0.01;

const LN_2PI_E: f64 = 2.8378770664093453;

/// How an [`EntropyEstimate`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMethod {
    ClosedForm,
    Knn,
    Histogram,
}

/// A differential-entropy value with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    /// Nats. `-inf` marks a degenerate (atomic) sample component inside
    /// [`polar_stats`]; estimator entry points reject such inputs instead.
    pub value: f64,
    /// Zero for closed forms.
    pub std_error: f64,
    pub n_samples: usize,
    pub method: EstimatorMethod,
}

impl EntropyEstimate {
    pub fn closed_form(value: f64) -> Self {
        EntropyEstimate { value, std_error: 0.0, n_samples: 0, method: EstimatorMethod::ClosedForm }
    }
}

/// `h(N(mu, var)) = (1/2) ln(2 pi e var)`.
pub fn gaussian_entropy_1d(var: f64) -> Result<f64> {
    if !var.is_finite() || var <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "var",
            message: format!("variance must be finite and > 0, got {var}"),
        });
    }
    Ok(0.5 * (LN_2PI_E + var.ln()))
}

/// `h(N(mu, cov)) = ln(2 pi e) + (1/2) ln det cov` for a planar Gaussian.
pub fn gaussian_entropy_2d(cov: Sym2) -> Result<f64> {
    if !cov.is_positive_definite() {
        return Err(Error::InvalidParameter {
            name: "cov",
            message: format!("covariance must be positive definite, got {cov:?}"),
        });
    }
    Ok(LN_2PI_E + 0.5 * cov.det().ln())
}

/// Digamma at a positive integer: `psi(m) = -gamma + H_{m-1}`, switching to
/// the asymptotic series for large m.
pub fn digamma_int(m: usize) -> f64 {
    const EULER: f64 = 0.5772156649015329;
    assert!(m >= 1);
    if m <= 64 {
        let mut h = 0.0;
        for j in 1..m {
            h += 1.0 / j as f64;
        }
        h - EULER
    } else {
        let x = m as f64;
        let inv2 = 1.0 / (x * x);
        x.ln() - 0.5 / x - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0))
    }
}

// ---------------------------------------------------------------------------
// k-NN distances
// ---------------------------------------------------------------------------

/// k-th nearest-neighbour distance for every point of a sorted 1-D sample
/// (self excluded), by expanding a window around each point.
fn knn_dists_sorted(sorted: &[f64], k: usize) -> Vec<f64> {
    let n = sorted.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (mut lo, mut hi) = (i, i);
        let mut dist = 0.0;
        for _ in 0..k {
            let left = lo.checked_sub(1).map(|j| sorted[i] - sorted[j]);
            let right = (hi + 1 < n).then(|| sorted[hi + 1] - sorted[i]);
            match (left, right) {
                (Some(l), Some(r)) if l <= r => {
                    lo -= 1;
                    dist = l;
                }
                (Some(_), Some(r)) => {
                    hi += 1;
                    dist = r;
                }
                (Some(l), None) => {
                    lo -= 1;
                    dist = l;
                }
                (None, Some(r)) => {
                    hi += 1;
                    dist = r;
                }
                (None, None) => unreachable!("k < n is checked upstream"),
            }
        }
        out.push(dist);
    }
    out
}

/// Compact kd-tree over planar points for k-NN queries.
struct KdTree {
    // Node i splits on dim (depth parity); layout is a balanced BST stored
    // as (point, left subtree size) per in-order... simpler: explicit nodes.
    nodes: Vec<KdNode>,
    root: i32,
}

struct KdNode {
    pt: [f64; 2],
    left: i32,
    right: i32,
}

impl KdTree {
    fn build(pts: &[Vec2]) -> KdTree {
        let mut idx: Vec<[f64; 2]> = pts.iter().map(|p| [p.c1, p.c2]).collect();
        let mut nodes = Vec::with_capacity(pts.len());
        let root = Self::build_rec(&mut idx[..], 0, &mut nodes);
        KdTree { nodes, root }
    }

    fn build_rec(slice: &mut [[f64; 2]], depth: usize, nodes: &mut Vec<KdNode>) -> i32 {
        if slice.is_empty() {
            return -1;
        }
        let dim = depth % 2;
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |a, b| a[dim].total_cmp(&b[dim]));
        let pt = slice[mid];
        let (lo, rest) = slice.split_at_mut(mid);
        let hi = &mut rest[1..];
        let left = Self::build_rec(lo, depth + 1, nodes);
        let right = Self::build_rec(hi, depth + 1, nodes);
        nodes.push(KdNode { pt, left, right });
        (nodes.len() - 1) as i32
    }

    /// Distance to the k-th nearest neighbour of `q`, where `q` is itself in
    /// the tree (the zero-distance self match is skipped by asking for k+1
    /// and it being the closest).
    fn kth_dist(&self, q: [f64; 2], k: usize) -> f64 {
        // Max-"heap" over the k+1 best squared distances; k is tiny, linear
        // scans beat a real heap.
        let mut best = vec![f64::INFINITY; k + 1];
        self.query(self.root, 0, q, &mut best);
        best.iter().cloned().fold(0.0f64, f64::max).sqrt()
    }

    fn query(&self, node: i32, depth: usize, q: [f64; 2], best: &mut [f64]) {
        if node < 0 {
            return;
        }
        let n = &self.nodes[node as usize];
        let d2 = (n.pt[0] - q[0]).powi(2) + (n.pt[1] - q[1]).powi(2);
        // Replace the current worst if this point is closer.
        let (wi, &wv) = best
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        if d2 < wv {
            best[wi] = d2;
        }
        let dim = depth % 2;
        let gap = q[dim] - n.pt[dim];
        let (near, far) = if gap <= 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        self.query(near, depth + 1, q, best);
        let worst = best.iter().cloned().fold(0.0f64, f64::max);
        if gap * gap < worst {
            self.query(far, depth + 1, q, best);
        }
    }
}

// ---------------------------------------------------------------------------
// Core k-NN estimator
// ---------------------------------------------------------------------------

/// (estimate, fraction of zero-distance points). Zero-distance points are
/// dropped from the log-distance mean.
fn knn_core_1d(values: &mut [f64], k: usize) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let dists = knn_dists_sorted(values, k);
    knn_assemble(&dists, values.len(), k, 1, std::f64::consts::LN_2)
}

fn knn_core_2d(pts: &[Vec2], k: usize) -> (f64, f64) {
    let tree = KdTree::build(pts);
    let dists: Vec<f64> = pts.iter().map(|p| tree.kth_dist([p.c1, p.c2], k)).collect();
    knn_assemble(&dists, pts.len(), k, 2, std::f64::consts::PI.ln())
}

fn knn_assemble(dists: &[f64], n: usize, k: usize, dim: usize, ln_ball: f64) -> (f64, f64) {
    let mut log_sum = 0.0;
    let mut used = 0usize;
    for &d in dists {
        if d > 0.0 {
            log_sum += d.ln();
            used += 1;
        }
    }
    let zero_frac = (n - used) as f64 / n as f64;
    if used == 0 {
        return (f64::NEG_INFINITY, zero_frac);
    }
    let value = digamma_int(n) - digamma_int(k) + ln_ball + dim as f64 * log_sum / used as f64;
    (value, zero_frac)
}

fn check_knn_args(n: usize, k: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples { n, min: MIN_SAMPLES });
    }
    if k == 0 || k > 32 || k + 1 >= n {
        return Err(Error::InvalidParameter {
            name: "k",
            message: format!("neighbour order must be in 1..=32 and < n, got {k}"),
        });
    }
    Ok(())
}

/// Half-sample subsampling standard error around a point estimator `f` over
/// index subsets. `se = std(replicates) * sqrt(m/n)` with `m = n/2`.
fn subsample_se<F: Fn(&[usize]) -> f64>(n: usize, f: F) -> f64 {
    let m = n / 2;
    let mut stream = RandomStream::new(SUBSAMPLE_SEED ^ (n as u64).rotate_left(17));
    let mut pool: Vec<usize> = (0..n).collect();
    let mut reps = Vec::with_capacity(SUBSAMPLES);
    for _ in 0..SUBSAMPLES {
        // Partial Fisher-Yates: the first m entries become the subsample.
        for i in 0..m {
            let j = i + stream.index(n - i);
            pool.swap(i, j);
        }
        reps.push(f(&pool[..m]));
    }
    let mean = reps.iter().sum::<f64>() / SUBSAMPLES as f64;
    let var = reps.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (SUBSAMPLES - 1) as f64;
    (var * m as f64 / n as f64).sqrt()
}

/// k-NN differential-entropy estimate for scalar samples.
pub fn knn_entropy_1d(samples: &[f64], k: usize) -> Result<EntropyEstimate> {
    check_knn_args(samples.len(), k)?;
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "samples",
            message: "samples must be finite".into(),
        });
    }
    let mut buf = samples.to_vec();
    let (value, zero_frac) = knn_core_1d(&mut buf, k);
    if zero_frac > MAX_ZERO_FRAC || !value.is_finite() {
        return Err(Error::DegenerateSamples {
            reason: format!("{:.1}% of points have zero k-NN distance", zero_frac * 100.0),
        });
    }
    let std_error = subsample_se(samples.len(), |idx| {
        let mut sub: Vec<f64> = idx.iter().map(|&i| samples[i]).collect();
        knn_core_1d(&mut sub, k).0
    });
    Ok(EntropyEstimate { value, std_error, n_samples: samples.len(), method: EstimatorMethod::Knn })
}

/// k-NN differential-entropy estimate for planar samples.
pub fn knn_entropy_2d(samples: &[Vec2], k: usize) -> Result<EntropyEstimate> {
    check_knn_args(samples.len(), k)?;
    let (value, zero_frac) = knn_core_2d(samples, k);
    if zero_frac > MAX_ZERO_FRAC || !value.is_finite() {
        return Err(Error::DegenerateSamples {
            reason: format!("{:.1}% of points have zero k-NN distance", zero_frac * 100.0),
        });
    }
    let std_error = subsample_se(samples.len(), |idx| {
        let sub: Vec<Vec2> = idx.iter().map(|&i| samples[i]).collect();
        knn_core_2d(&sub, k).0
    });
    Ok(EntropyEstimate { value, std_error, n_samples: samples.len(), method: EstimatorMethod::Knn })
}

/// Histogram (plug-in) estimator with sqrt-rule bin count: an independent
/// cross-check for the k-NN estimator, biased but differently so.
pub fn histogram_entropy(samples: &[f64]) -> Result<EntropyEstimate> {
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples { n, min: MIN_SAMPLES });
    }
    let core = |vals: &[f64]| -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in vals {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi <= lo {
            return f64::NEG_INFINITY;
        }
        let bins = (vals.len() as f64).sqrt().ceil() as usize;
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in vals {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let m = vals.len() as f64;
        let mut h = 0.0;
        for &c in &counts {
            if c > 0 {
                let p = c as f64 / m;
                h -= p * p.ln();
            }
        }
        h + width.ln()
    };
    let value = core(samples);
    if !value.is_finite() {
        return Err(Error::DegenerateSamples { reason: "zero sample spread".into() });
    }
    let std_error = subsample_se(n, |idx| {
        let sub: Vec<f64> = idx.iter().map(|&i| samples[i]).collect();
        core(&sub)
    });
    Ok(EntropyEstimate { value, std_error, n_samples: n, method: EstimatorMethod::Histogram })
}

// ---------------------------------------------------------------------------
// Log-plus moments and polar decomposition
// ---------------------------------------------------------------------------

/// Sample truncated-log moments of non-negative magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPlusMoments {
    /// Mean of `max(0, ln v)`.
    pub log_plus: f64,
    /// Mean of `max(0, ln 1/v)`; `+inf` when any sample is exactly zero.
    pub log_plus_inv: f64,
    pub se_log_plus: f64,
    pub se_log_plus_inv: f64,
    /// Number of exactly-zero samples (they make `log_plus_inv` infinite).
    pub zero_count: usize,
}

/// Truncated-log moments `E[log+ v]`, `E[log+ 1/v]` of non-negative samples.
pub fn log_plus_moments(samples: &[f64]) -> Result<LogPlusMoments> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples { n: 0, min: 1 });
    }
    if samples.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(Error::InvalidParameter {
            name: "samples",
            message: "magnitudes must be finite and >= 0".into(),
        });
    }
    let zero_count = samples.iter().filter(|&&v| v == 0.0).count();
    let n = samples.len() as f64;
    let mean_se = |f: &dyn Fn(f64) -> f64| {
        let (mut s, mut s2) = (0.0, 0.0);
        for &v in samples {
            let x = f(v);
            s += x;
            s2 += x * x;
        }
        let mean = s / n;
        let var = (s2 / n - mean * mean).max(0.0);
        (mean, (var / n).sqrt())
    };
    let (log_plus, se_log_plus) = mean_se(&|v: f64| if v > 1.0 { v.ln() } else { 0.0 });
    let (log_plus_inv, se_log_plus_inv) = if zero_count > 0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        mean_se(&|v: f64| if v < 1.0 { -v.ln() } else { 0.0 })
    };
    Ok(LogPlusMoments { log_plus, log_plus_inv, se_log_plus, se_log_plus_inv, zero_count })
}

/// Entropies of a planar sample and of its polar coordinates, plus the
/// decomposition gap `h(theta) - [h(w) - h(r) - E ln r]`.
///
/// The gap is the defect in `h(w) = h(r) + E[ln r] + h(theta)` which holds
/// with equality iff radius and angle are independent; dependence only
/// lowers the right side, so up to estimator noise the gap is `>= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarEntropyReport {
    pub h_w: EntropyEstimate,
    pub h_r: EntropyEstimate,
    pub h_theta: EntropyEstimate,
    /// Sample mean of `ln r` and its standard error.
    pub e_log_r: f64,
    pub se_log_r: f64,
    /// `NaN` when a component is degenerate (e.g. exact-ring samples have
    /// constant radius and `h_r = -inf`).
    pub lemma3_gap: f64,
    /// Standard error attached to the gap.
    pub se_gap: f64,
}

/// Polar entropy decomposition of planar samples. Errors if any sample sits
/// exactly at the origin; degenerate radius/angle components are reported as
/// `-inf` rather than failing, so exact-ring inputs still yield `h_theta`.
pub fn polar_stats(samples: &[Vec2], k: usize) -> Result<PolarEntropyReport> {
    check_knn_args(samples.len(), k)?;
    if samples.iter().any(|w| w.norm() == 0.0) {
        return Err(Error::OriginSample);
    }
    let radii: Vec<f64> = samples.iter().map(|w| w.norm()).collect();
    let angles: Vec<f64> = samples.iter().map(|w| w.angle()).collect();

    let or_degenerate = |r: Result<EntropyEstimate>, n: usize| -> Result<EntropyEstimate> {
        match r {
            Err(Error::DegenerateSamples { .. }) => Ok(EntropyEstimate {
                value: f64::NEG_INFINITY,
                std_error: 0.0,
                n_samples: n,
                method: EstimatorMethod::Knn,
            }),
            other => other,
        }
    };
    let n = samples.len();
    let h_w = or_degenerate(knn_entropy_2d(samples, k), n)?;
    let h_r = or_degenerate(knn_entropy_1d(&radii, k), n)?;
    let h_theta = or_degenerate(knn_entropy_1d(&angles, k), n)?;

    let nf = n as f64;
    let mean = radii.iter().map(|r| r.ln()).sum::<f64>() / nf;
    let var = radii.iter().map(|r| (r.ln() - mean).powi(2)).sum::<f64>() / nf;
    let se_log_r = (var / nf).sqrt();

    let finite = h_w.value.is_finite() && h_r.value.is_finite() && h_theta.value.is_finite();
    let (gap, se_gap) = if finite {
        let se = (h_theta.std_error.powi(2)
            + h_w.std_error.powi(2)
            + h_r.std_error.powi(2)
            + se_log_r.powi(2))
        .sqrt();
        (h_theta.value - (h_w.value - h_r.value - mean), se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(PolarEntropyReport {
        h_w,
        h_r,
        h_theta,
        e_log_r: mean,
        se_log_r,
        lemma3_gap: gap,
        se_gap,
    })
}

// ---------------------------------------------------------------------------
// Exact mixture entropy (quadrature)
// ---------------------------------------------------------------------------

/// Differential entropy of a finite Gaussian mixture `sum w_i N(mu_i, v_i)`
/// by adaptive quadrature; deterministic to ~1e-9 nats.
pub fn mixture_entropy(components: &[(f64, f64, f64)]) -> Result<f64> {
    if components.is_empty() {
        return Err(Error::InvalidParameter { name: "components", message: "empty mixture".into() });
    }
    let wsum: f64 = components.iter().map(|c| c.0).sum();
    let bad = |x: f64| !x.is_finite() || x <= 0.0;
    if components.iter().any(|&(w, m, v)| bad(w) || !m.is_finite() || bad(v))
        || (wsum - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidParameter {
            name: "components",
            message: "weights must be positive and sum to 1; variances positive".into(),
        });
    }
    let density = |y: f64| -> f64 {
        components
            .iter()
            .map(|&(w, m, v)| {
                let z = y - m;
                w * (-0.5 * z * z / v).exp() / (2.0 * std::f64::consts::PI * v).sqrt()
            })
            .sum()
    };
    let mut pts: Vec<f64> = Vec::new();
    let lo = components.iter().map(|&(_, m, v)| m - 10.0 * v.sqrt()).fold(f64::INFINITY, f64::min);
    let hi = components
        .iter()
        .map(|&(_, m, v)| m + 10.0 * v.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    pts.push(lo);
    for &(_, m, _) in components {
        if m > lo && m < hi {
            pts.push(m);
        }
    }
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let q = quad::integrate_split(
        |y| {
            let f = density(y);
            if f > 1e-300 {
                -f * f.ln()
            } else {
                0.0
            }
        },
        &pts,
        quad::DEFAULT_TOL,
    )?;
    Ok(q.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_samples(n: usize, mean: f64, sd: f64, seed: u64) -> Vec<f64> {
        let mut s = RandomStream::new(seed);
        (0..n).map(|_| mean + sd * s.gauss()).collect()
    }

    #[test]
    fn digamma_values() {
        assert!((digamma_int(1) + 0.5772156649015329).abs() < 1e-12);
        assert!((digamma_int(4) - 1.2561176684318005).abs() < 1e-12);
        assert!((digamma_int(100) - 4.600161852738087).abs() < 1e-10);
        // Continuity across the loop/asymptotic switch.
        assert!((digamma_int(64) - (digamma_int(65) - 1.0 / 64.0)).abs() < 1e-12);
    }

    #[test]
    fn knn_matches_gaussian_closed_form() {
        let samples = gauss_samples(100_000, 0.3, 1.0, 21);
        let est = knn_entropy_1d(&samples, DEFAULT_K).unwrap();
        let truth = gaussian_entropy_1d(1.0).unwrap();
        assert!((est.value - truth).abs() < 0.02, "{} vs {truth}", est.value);
        assert!(est.std_error > 0.0 && est.std_error < 0.02);
    }

    #[test]
    fn knn_matches_uniform_closed_form() {
        let mut s = RandomStream::new(22);
        let samples: Vec<f64> = (0..100_000).map(|_| s.angle()).collect();
        let est = knn_entropy_1d(&samples, DEFAULT_K).unwrap();
        let truth = (2.0 * std::f64::consts::PI).ln();
        assert!((est.value - truth).abs() < 0.02, "{} vs {truth}", est.value);
    }

    #[test]
    fn knn_2d_matches_gaussian_closed_form() {
        let mut s = RandomStream::new(23);
        let samples: Vec<Vec2> = (0..100_000).map(|_| Vec2::new(s.gauss(), s.gauss())).collect();
        let est = knn_entropy_2d(&samples, DEFAULT_K).unwrap();
        let truth = gaussian_entropy_2d(Sym2::isotropic(1.0)).unwrap();
        assert!((est.value - truth).abs() < 0.03, "{} vs {truth}", est.value);
    }

    #[test]
    fn affine_rescaling_shifts_entropy_exactly() {
        // The k-NN estimator is exactly equivariant: scaling samples by `a`
        // adds ln|a| to the estimate (distances scale, psi terms cancel).
        let samples = gauss_samples(20_000, -1.0, 0.7, 24);
        let scaled: Vec<f64> = samples.iter().map(|v| 3.5 * v + 11.0).collect();
        let h0 = knn_entropy_1d(&samples, DEFAULT_K).unwrap();
        let h1 = knn_entropy_1d(&scaled, DEFAULT_K).unwrap();
        assert!((h1.value - h0.value - 3.5f64.ln()).abs() < 1e-9);
        let hist0 = histogram_entropy(&samples).unwrap();
        let hist1 = histogram_entropy(&scaled).unwrap();
        assert!((hist1.value - hist0.value - 3.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn histogram_and_knn_agree_on_mixture() {
        let mut s = RandomStream::new(25);
        let samples: Vec<f64> = (0..80_000)
            .map(|_| if s.uniform() < 0.3 { -2.0 + 0.5 * s.gauss() } else { 1.0 + 1.5 * s.gauss() })
            .collect();
        let knn = knn_entropy_1d(&samples, DEFAULT_K).unwrap();
        let hist = histogram_entropy(&samples).unwrap();
        let exact = mixture_entropy(&[(0.3, -2.0, 0.25), (0.7, 1.0, 2.25)]).unwrap();
        assert!((knn.value - exact).abs() < 0.03, "knn {} vs exact {exact}", knn.value);
        assert!((hist.value - exact).abs() < 0.05, "hist {} vs exact {exact}", hist.value);
    }

    #[test]
    fn mixture_entropy_degenerates_to_gaussian() {
        let h = mixture_entropy(&[(1.0, 0.5, 2.0)]).unwrap();
        assert!((h - gaussian_entropy_1d(2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn gaussian_is_entropy_maximal_at_fixed_variance() {
        let mut seed = 2600;
        for case in 0..20 {
            seed += 1;
            let mut s = RandomStream::new(seed);
            let samples: Vec<f64> = match case % 4 {
                0 => (0..20_000).map(|_| s.range(-2.0, 2.0)).collect(),
                1 => (0..20_000).map(|_| s.range(0.0, 1.0) + s.range(0.0, 1.0)).collect(),
                2 => (0..20_000)
                    .map(|_| if s.uniform() < 0.5 { -1.5 + 0.4 * s.gauss() } else { 1.5 + 0.4 * s.gauss() })
                    .collect(),
                _ => (0..20_000).map(|_| -(1.0 - s.uniform()).ln()).collect(),
            };
            let est = knn_entropy_1d(&samples, DEFAULT_K).unwrap();
            let n = samples.len() as f64;
            let mean = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let cap = gaussian_entropy_1d(var).unwrap();
            assert!(
                est.value <= cap + 3.0 * est.std_error,
                "case {case}: {} > {cap} + 3 se",
                est.value
            );
        }
    }

    #[test]
    fn log_plus_moments_of_uniform_angles() {
        let mut s = RandomStream::new(27);
        let mags: Vec<f64> = (0..200_000).map(|_| s.angle().abs()).collect();
        let m = log_plus_moments(&mags).unwrap();
        // E[log+ 1/|theta|] = 1/pi; E[log+ |theta|] = (pi ln pi - pi + 1)/pi.
        let pi = std::f64::consts::PI;
        let want_inv = 1.0 / pi;
        let want = (pi * pi.ln() - pi + 1.0) / pi;
        assert!((m.log_plus_inv - want_inv).abs() < 3.0 * m.se_log_plus_inv + 1e-3);
        assert!((m.log_plus - want).abs() < 3.0 * m.se_log_plus + 1e-3);
        assert_eq!(m.zero_count, 0);
    }

    #[test]
    fn log_plus_flags_zero_samples() {
        let m = log_plus_moments(&[0.5, 0.0, 2.0]).unwrap();
        assert_eq!(m.zero_count, 1);
        assert!(m.log_plus_inv.is_infinite());
        assert!(log_plus_moments(&[0.5, -1.0]).is_err());
    }

    #[test]
    fn duplicate_mass_is_rejected() {
        let mut samples = gauss_samples(5000, 0.0, 1.0, 28);
        for v in samples.iter_mut().take(500) {
            *v = 1.0;
        }
        assert!(matches!(
            knn_entropy_1d(&samples, DEFAULT_K),
            Err(Error::DegenerateSamples { .. })
        ));
    }

    #[test]
    fn too_few_samples_rejected() {
        let samples = gauss_samples(100, 0.0, 1.0, 29);
        assert!(matches!(
            knn_entropy_1d(&samples, DEFAULT_K),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn polar_stats_on_isotropic_gaussian() {
        // For a standard planar Gaussian: h(r) + E[ln r] = 1 - (ln 2)/2 +
        // gamma/2 + (ln 2 - gamma)/2 = 1 exactly, and the polar gap is ~0
        // because radius and angle are independent.
        let mut s = RandomStream::new(30);
        let samples: Vec<Vec2> = (0..100_000).map(|_| Vec2::new(s.gauss(), s.gauss())).collect();
        let rep = polar_stats(&samples, DEFAULT_K).unwrap();
        assert!((rep.h_r.value + rep.e_log_r - 1.0).abs() < 0.02);
        assert!(
            (rep.h_theta.value - (2.0 * std::f64::consts::PI).ln()).abs() < 0.02,
            "{}",
            rep.h_theta.value
        );
        assert!(rep.lemma3_gap.abs() < 4.0 * rep.se_gap + 0.02);
        assert!(rep.lemma3_gap >= -3.0 * rep.se_gap - 0.01);
    }

    #[test]
    fn polar_stats_on_exact_ring() {
        // Constant radius: h_r degenerates to -inf, the gap is undefined,
        // but the angle entropy must still come out as ln(2 pi).
        let mut s = RandomStream::new(31);
        let samples: Vec<Vec2> = (0..20_000).map(|_| Vec2::from_polar(1.0, s.angle())).collect();
        let rep = polar_stats(&samples, DEFAULT_K).unwrap();
        assert_eq!(rep.h_r.value, f64::NEG_INFINITY);
        assert!(rep.lemma3_gap.is_nan());
        assert!((rep.h_theta.value - (2.0 * std::f64::consts::PI).ln()).abs() < 0.02);
        assert!(rep.e_log_r.abs() < 1e-12);
    }

    #[test]
    fn polar_stats_rejects_origin() {
        let mut samples = vec![Vec2::new(0.0, 0.0)];
        let mut s = RandomStream::new(32);
        samples.extend((0..2000).map(|_| Vec2::new(s.gauss(), s.gauss())));
        assert!(matches!(polar_stats(&samples, DEFAULT_K), Err(Error::OriginSample)));
    }

    #[test]
    fn anisotropic_gaussian_has_positive_polar_gap() {
        // Radius and angle of a squashed Gaussian are strongly dependent, so
        // the decomposition gap must be clearly positive.
        let mut s = RandomStream::new(33);
        let samples: Vec<Vec2> = (0..60_000).map(|_| Vec2::new(3.0 * s.gauss(), 0.2 * s.gauss())).collect();
        let rep = polar_stats(&samples, DEFAULT_K).unwrap();
        assert!(rep.lemma3_gap > 0.2, "gap {}", rep.lemma3_gap);
    }
}
