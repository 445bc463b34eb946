//! The assembled sum-rate ceiling, its derived constants, SNR sweeps with
//! pre-log extraction, and the power-allocation gap probe.
//!
//! The headline object is [`sum_rate_upper_bound`]: for a pair of fading
//! models it evaluates, term by term,
//!
//! ```text
//! R_y + R_z < (1/3) ln(1 + E||a||^2 snr) + (1/3) ln(1 + E||h||^2 snr)
//!           + (4/3) gamma'
//!           - 3 h(a_err | a_est, h_est) - 3 h(h_err | a_est, h_est)
//!           + (1/3) E[log+ ||a||]    + (1/3) E[log+ ||h||]
//!           + (2/3) E[log+ 1/||a||]  + (2/3) E[log+ 1/||h||]
//!           + 3 ln E[||a||^2]        + 3 ln E[||h||^2]
//! ```
//!
//! Only the first two terms grow with the power budget, each with slope
//! `1/3` against `ln(1 + snr)`, so the ceiling pins the sum-rate pre-log at
//! `2/3` whenever the remaining terms are finite — which they are exactly
//! when the fading estimation errors have finite differential entropy.
//! [`bound_sweep`] recovers that slope numerically by least squares over an
//! SNR grid.
//!
//! The constant `gamma` is where the angle-entropy machinery of
//! [`crate::maxent`] enters: chaining the directional-entropy floors
//! (verified case by case in [`crate::inequality`]) leaves behind
//!
//! ```text
//! gamma = ln(pi/2) + 3 M(1/2) + (9/2) ln(2 pi) - (1/4) ln(2 pi e),
//! ```
//!
//! and `gamma' = gamma + 1/e + (10/4) ln(2 pi e)` further absorbs the
//! state-aware power-allocation slack — at most `1/e` nats, probed
//! numerically by [`max_allocation_gap`] — together with a Gaussian cap on
//! the fading-magnitude entropy.

use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use crate::channel::{model_moments, ChannelConfig, FadingModel, MomentSet};
use crate::{maxent, quad, Error, Result};

/// `ln(2 pi e)`, the Gaussian-entropy constant used throughout.
const LN_2PI_E: f64 = 2.837_877_066_409_345_3;

/// The universal constants of the sum-rate ceiling, all in nats.
///
/// Nothing about a particular channel enters these: they are fixed once by
/// the angle-entropy family and then shared by every bound evaluation and
/// every inequality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// Threshold moment `M(1/2)` from [`maxent::m_of_delta`]: past it the
    /// angle-entropy cap obeys `-h_max(g) >= (2/3) g`, so a truncated-log
    /// moment can always be traded for `-(3/2)` times an angle entropy.
    pub m_half: f64,
    /// Constant left behind when the three directional-entropy floors are
    /// chained: `gamma = ln(pi/2) + 3 M(1/2) + (9/2) ln(2 pi) - (1/4) ln(2 pi e)`.
    pub gamma: f64,
    /// Enlargement of `gamma` used by the assembled ceiling:
    /// `gamma' = gamma + 1/e + (10/4) ln(2 pi e)`. The `1/e` covers the
    /// worst-case power-allocation gap (see [`max_allocation_gap`]); the
    /// `ln(2 pi e)` multiples cover Gaussian caps on output and
    /// fading-magnitude entropies.
    pub gamma_prime: f64,
}

/// Computes the derived constants once and caches them for the process
/// lifetime, so repeated calls are cheap and bit-identical.
pub fn derive_constants() -> DerivedConstants {
    static CELL: OnceLock<DerivedConstants> = OnceLock::new();
    *CELL.get_or_init(|| {
        let m_half =
            maxent::m_of_delta(0.5).expect("delta = 1/2 is inside the threshold-solver domain");
        let gamma = (PI / 2.0).ln() + 3.0 * m_half + 4.5 * (2.0 * PI).ln() - 0.25 * LN_2PI_E;
        let gamma_prime = gamma + 1.0 / E + 2.5 * LN_2PI_E;
        DerivedConstants { m_half, gamma, gamma_prime }
    })
}

/// One evaluation of the sum-rate ceiling at a fixed SNR.
///
/// `total = term_log_a + term_log_h + term_constants` holds exactly as
/// written (the accounting test re-sums the eleven raw terms independently),
/// and `term_constants` does not depend on the SNR, only on the model pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Power budget over noise variance, dimensionless.
    pub snr: f64,
    /// `(1/3) ln(1 + E[||a||^2] snr)`, nats.
    pub term_log_a: f64,
    /// `(1/3) ln(1 + E[||h||^2] snr)`, nats.
    pub term_log_h: f64,
    /// Every SNR-independent additive term, collected: the `gamma'` block,
    /// the error-entropy penalties, the four truncated-log moments and the
    /// two `3 ln E[||.||^2]` terms. Nats.
    pub term_constants: f64,
    /// The ceiling itself, nats per channel use.
    pub total: f64,
    /// `total / ln(1 + snr)`: the quantity whose high-SNR limit is the
    /// pre-log.
    pub ratio: f64,
}

/// Evaluates the sum-rate ceiling for `config`, computing the moment
/// functionals of both fading models by quadrature.
pub fn sum_rate_upper_bound(config: &ChannelConfig) -> Result<BoundReport> {
    let ma = model_moments(&config.model_a)?;
    let mh = model_moments(&config.model_h)?;
    Ok(sum_rate_upper_bound_from_moments(config, &ma, &mh))
}

/// Ceiling evaluation with caller-supplied moment functionals.
///
/// Sweeps reuse one moment set across a whole grid, and Monte-Carlo moment
/// sets can be slotted in to cross-check the quadrature route.
pub fn sum_rate_upper_bound_from_moments(
    config: &ChannelConfig,
    ma: &MomentSet,
    mh: &MomentSet,
) -> BoundReport {
    let snr = config.snr();
    let c = derive_constants();
    let term_log_a = (ma.second_moment * snr).ln_1p() / 3.0;
    let term_log_h = (mh.second_moment * snr).ln_1p() / 3.0;
    let term_constants = 4.0 / 3.0 * c.gamma_prime
        - 3.0 * (ma.err_cond_entropy + mh.err_cond_entropy)
        + (ma.log_plus_norm + mh.log_plus_norm) / 3.0
        + 2.0 * (ma.log_plus_inv_norm + mh.log_plus_inv_norm) / 3.0
        + 3.0 * (ma.second_moment.ln() + mh.second_moment.ln());
    let total = term_log_a + term_log_h + term_constants;
    BoundReport { snr, term_log_a, term_log_h, term_constants, total, ratio: total / snr.ln_1p() }
}

/// A labelled rate-versus-SNR curve, the common currency of sweeps,
/// simulations and CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    /// Strictly increasing, strictly positive SNR grid (dimensionless).
    pub snr_grid: Vec<f64>,
    /// One value per grid point, nats per channel use.
    pub values: Vec<f64>,
    /// What the values are; used for CSV headers and plot legends.
    pub label: String,
}

impl RateCurve {
    /// Builds a curve, enforcing a finite, strictly increasing, strictly
    /// positive grid and matching lengths.
    pub fn new(label: impl Into<String>, snr_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if snr_grid.len() != values.len() {
            return Err(Error::InvalidParameter {
                name: "values",
                message: format!(
                    "curve needs one value per grid point, got {} values for {} points",
                    values.len(),
                    snr_grid.len()
                ),
            });
        }
        validate_snr_grid(&snr_grid)?;
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "values",
                message: format!("curve values must be finite, got {bad}"),
            });
        }
        Ok(RateCurve { snr_grid, values, label: label.into() })
    }

    /// The grid in decibels, `10 log10(snr)` — the plotting convention.
    pub fn snr_db(&self) -> Vec<f64> {
        self.snr_grid.iter().map(|s| 10.0 * s.log10()).collect()
    }

    /// Number of decades spanned by the grid.
    pub fn decades(&self) -> f64 {
        (self.snr_grid[self.snr_grid.len() - 1] / self.snr_grid[0]).log10()
    }
}

fn validate_snr_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "snr_grid",
            message: "grid must not be empty".to_string(),
        });
    }
    if let Some(bad) = grid.iter().find(|s| !s.is_finite() || **s <= 0.0) {
        return Err(Error::InvalidParameter {
            name: "snr_grid",
            message: format!("grid entries must be finite and > 0, got {bad}"),
        });
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter {
            name: "snr_grid",
            message: "grid must be strictly increasing".to_string(),
        });
    }
    Ok(())
}

/// Least-squares pre-log extracted from the top half of a rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrelogFit {
    /// Fitted slope of value against `ln(1 + snr)`.
    pub slope: f64,
    /// Fitted intercept, nats.
    pub intercept: f64,
    /// Largest absolute deviation of the fitted line over the fitted points.
    pub residual: f64,
}

/// Fits the pre-log of a curve: ordinary least squares of value against
/// `ln(1 + snr)` over the top half of the grid. The bottom half still feels
/// the additive constants; the top half is where the slope has settled.
///
/// Needs at least 4 points spanning at least 3 decades of SNR.
pub fn prelog_fit(curve: &RateCurve) -> Result<PrelogFit> {
    const MIN_POINTS: usize = 4;
    const MIN_DECADES: f64 = 3.0;
    if curve.snr_grid.len() < MIN_POINTS {
        return Err(Error::TooFewSamples { n: curve.snr_grid.len(), min: MIN_POINTS });
    }
    let decades = curve.decades();
    if decades < MIN_DECADES - 1e-9 {
        return Err(Error::InsufficientSpan { decades, min_decades: MIN_DECADES });
    }
    let start = curve.snr_grid.len() / 2;
    let xs: Vec<f64> = curve.snr_grid[start..].iter().map(|s| s.ln_1p()).collect();
    let ys = &curve.values[start..];
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0_f64, f64::max);
    Ok(PrelogFit { slope, intercept, residual })
}

/// A full SNR sweep of the ceiling.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Ceiling totals per grid point.
    pub totals: RateCurve,
    /// `total / ln(1 + snr)` per grid point.
    pub ratios: Vec<f64>,
    /// Least-squares pre-log over the top half of the grid.
    pub prelog: PrelogFit,
}

/// Sweeps the sum-rate ceiling across `snr_grid` and fits its pre-log.
///
/// The grid must span at least four decades: on a narrower window the
/// additive constants still bend the curve and a fitted slope would not
/// certify anything. Moment functionals are computed once and shared by all
/// grid points; points are evaluated in parallel when the `parallel` feature
/// is enabled (the result is identical either way — each point is a pure
/// function of its SNR).
pub fn bound_sweep(config: &ChannelConfig, snr_grid: &[f64]) -> Result<SweepReport> {
    const MIN_DECADES: f64 = 4.0;
    validate_snr_grid(snr_grid)?;
    if snr_grid.len() < 4 {
        return Err(Error::TooFewSamples { n: snr_grid.len(), min: 4 });
    }
    let decades = (snr_grid[snr_grid.len() - 1] / snr_grid[0]).log10();
    if decades < MIN_DECADES - 1e-9 {
        return Err(Error::InsufficientSpan { decades, min_decades: MIN_DECADES });
    }

    let ma = model_moments(&config.model_a)?;
    let mh = model_moments(&config.model_h)?;
    let at = |snr: f64| {
        let point = ChannelConfig { power: snr * config.noise_var, ..*config };
        sum_rate_upper_bound_from_moments(&point, &ma, &mh)
    };
    #[cfg(feature = "parallel")]
    let reports: Vec<BoundReport> = {
        use rayon::prelude::*;
        snr_grid.par_iter().map(|&snr| at(snr)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let reports: Vec<BoundReport> = snr_grid.iter().map(|&snr| at(snr)).collect();

    let totals = RateCurve::new(
        "sum-rate ceiling",
        snr_grid.to_vec(),
        reports.iter().map(|r| r.total).collect(),
    )?;
    let ratios = reports.iter().map(|r| r.ratio).collect();
    let prelog = prelog_fit(&totals)?;
    Ok(SweepReport { totals, ratios, prelog })
}

/// Checks a discrete scale law: finite atom values, nonnegative finite
/// weights summing to one.
fn validate_atoms(s_atoms: &[(f64, f64)]) -> Result<()> {
    if s_atoms.is_empty() {
        return Err(Error::InvalidParameter {
            name: "s_atoms",
            message: "scale law needs at least one atom".to_string(),
        });
    }
    for &(s, p) in s_atoms {
        if !s.is_finite() {
            return Err(Error::InvalidParameter {
                name: "s_atoms",
                message: format!("atom value must be finite, got {s}"),
            });
        }
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidParameter {
                name: "s_atoms",
                message: format!("atom weight must be finite and >= 0, got {p}"),
            });
        }
    }
    let mass: f64 = s_atoms.iter().map(|&(_, p)| p).sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "s_atoms",
            message: format!("atom weights must sum to 1, got {mass}"),
        });
    }
    Ok(())
}

fn validate_budget_and_noise(power_budget: f64, sigma2: f64) -> Result<()> {
    if !power_budget.is_finite() || power_budget <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "power_budget",
            message: format!("budget must be finite and > 0, got {power_budget}"),
        });
    }
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "sigma2",
            message: format!("noise variance must be finite and > 0, got {sigma2}"),
        });
    }
    Ok(())
}

/// Gap (nats) between a state-aware power allocation and the state-blind
/// budget line:
///
/// ```text
/// delta = (1/2) E[ln(2 pi e (S^2 P(S) + sigma^2))]
///       - (1/2) ln(2 pi e (E[S^2] budget + sigma^2))
/// ```
///
/// over a discrete scale law `S` given as `(value, weight)` atoms, with
/// `P(S) >= 0` and `E[P(S)] <= budget`. For the constant allocation
/// `P = budget` the gap is `<= 0` by Jensen; over all feasible allocations
/// it never exceeds `1/e` nats — the slack folded into `gamma'` — and
/// [`max_allocation_gap`] probes that worst case numerically.
pub fn allocation_gap(
    s_atoms: &[(f64, f64)],
    allocation: &[f64],
    power_budget: f64,
    sigma2: f64,
) -> Result<f64> {
    validate_atoms(s_atoms)?;
    validate_budget_and_noise(power_budget, sigma2)?;
    if allocation.len() != s_atoms.len() {
        return Err(Error::InvalidParameter {
            name: "allocation",
            message: format!(
                "allocation needs one entry per atom, got {} for {} atoms",
                allocation.len(),
                s_atoms.len()
            ),
        });
    }
    if let Some(bad) = allocation.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidParameter {
            name: "allocation",
            message: format!("allocated power must be finite and >= 0, got {bad}"),
        });
    }
    let spent: f64 = s_atoms.iter().zip(allocation).map(|(&(_, p), &alloc)| p * alloc).sum();
    if spent > power_budget * (1.0 + 1e-12) {
        return Err(Error::BudgetExceeded { spent, budget: power_budget });
    }
    let lhs: f64 = s_atoms
        .iter()
        .zip(allocation)
        .map(|(&(s, p), &alloc)| p * (LN_2PI_E + (s * s * alloc + sigma2).ln()))
        .sum::<f64>()
        * 0.5;
    let second_moment: f64 = s_atoms.iter().map(|&(s, p)| p * s * s).sum();
    let rhs = 0.5 * (LN_2PI_E + (second_moment * power_budget + sigma2).ln());
    Ok(lhs - rhs)
}

/// Projects `candidate` onto the feasible set `{P >= 0, E[P(S)] = budget}`
/// (Euclidean projection): `P_i = max(0, q_i - tau p_i)` with the multiplier
/// `tau` found by bisection on the spent power, which is continuous and
/// nonincreasing in `tau`.
fn project_allocation(candidate: &[f64], probs: &[f64], budget: f64) -> Vec<f64> {
    let spent =
        |tau: f64| -> f64 { candidate.iter().zip(probs).map(|(&q, &p)| p * (q - tau * p).max(0.0)).sum() };
    // tau_lo: at the unclipped multiplier the clipped spend can only be
    // larger, so it is >= budget there. tau_hi: large enough to zero out
    // every positive-weight coordinate.
    let sum_pq: f64 = candidate.iter().zip(probs).map(|(&q, &p)| p * q).sum();
    let sum_pp: f64 = probs.iter().map(|&p| p * p).sum();
    let mut lo = (sum_pq - budget) / sum_pp;
    let mut hi = candidate
        .iter()
        .zip(probs)
        .filter(|&(_, &p)| p > 0.0)
        .map(|(&q, &p)| q / p)
        .fold(0.0_f64, f64::max)
        .max(lo);
    if spent(lo) <= budget {
        // Already feasible without clipping (tau <= tau_lo suffices).
        hi = lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spent(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let tau = hi;
    let mut alloc: Vec<f64> =
        candidate.iter().zip(probs).map(|(&q, &p)| (q - tau * p).max(0.0)).collect();
    // Wash out the last bit of bisection slack so the result is feasible to
    // machine precision.
    let spent_now: f64 = alloc.iter().zip(probs).map(|(&a, &p)| p * a).sum();
    if spent_now > budget {
        let scale = budget / spent_now;
        for a in &mut alloc {
            *a *= scale;
        }
    }
    alloc
}

/// Projected-gradient probe for the worst-case allocation gap: maximizes
/// [`allocation_gap`] over nonnegative allocations spending the whole
/// budget, returning the maximal gap and its allocation.
///
/// The objective `P -> (1/2) sum_i p_i ln(s_i^2 P_i + sigma^2)` is concave
/// and the feasible set is a slice of a weighted simplex, so projected
/// gradient ascent with backtracking converges to the global maximum; the
/// iteration stops once an accepted step moves no coordinate by more than
/// `1e-8` (relative to the budget scale).
pub fn max_allocation_gap(
    s_atoms: &[(f64, f64)],
    power_budget: f64,
    sigma2: f64,
) -> Result<(f64, Vec<f64>)> {
    validate_atoms(s_atoms)?;
    validate_budget_and_noise(power_budget, sigma2)?;
    const MAX_ITERS: usize = 10_000;
    const STEP_TOL: f64 = 1e-8;

    // Ascend in budget shares u_i = p_i P_i rather than powers: atoms with
    // minuscule probability (deep tail atoms of discretized norm laws) make
    // the power-space gradient components collapse to the same minuscule
    // scale, while in share space every component of the gradient
    // s^2 / (s^2 u / p + sigma^2) starts at the O(1) value s^2 / sigma^2 and
    // the feasible set is the plain simplex {u >= 0, sum u <= budget}.
    // Zero-probability atoms drop out (their power is irrelevant; report 0).
    let active: Vec<(f64, f64)> = s_atoms.iter().copied().filter(|&(_, p)| p > 0.0).collect();
    let objective = |shares: &[f64]| -> f64 {
        active
            .iter()
            .zip(shares)
            .map(|(&(s, p), &u)| p * (s * s * u / p + sigma2).ln())
            .sum::<f64>()
            * 0.5
    };
    let gradient = |shares: &[f64]| -> Vec<f64> {
        active
            .iter()
            .zip(shares)
            .map(|(&(s, p), &u)| 0.5 * s * s / (s * s * u / p + sigma2))
            .collect()
    };

    let ones = vec![1.0; active.len()];
    // Start from the flat power allocation P = budget, i.e. u = p * budget.
    let mut shares: Vec<f64> = active.iter().map(|&(_, p)| p * power_budget).collect();
    let mut value = objective(&shares);
    // Scale-aware initial step; backtracking halves it per rejection and the
    // next iteration starts from twice the last accepted size.
    let mut step = power_budget;
    let mut converged = false;
    let mut stalled = 0usize;
    for _ in 0..MAX_ITERS {
        let grad = gradient(&shares);
        let mut accepted = false;
        while step * grad.iter().fold(0.0_f64, |m, g| m.max(*g)) > 1e-18 * power_budget {
            let candidate: Vec<f64> =
                shares.iter().zip(&grad).map(|(&u, &g)| u + step * g).collect();
            let projected = project_allocation(&candidate, &ones, power_budget);
            let new_value = objective(&projected);
            if new_value >= value {
                let moved = shares
                    .iter()
                    .zip(&projected)
                    .map(|(&a, &b)| (a - b).abs())
                    .fold(0.0_f64, f64::max);
                // A concave objective that stops improving is at its
                // optimum even if the iterate keeps sliding along a facet
                // of the budget simplex.
                if new_value - value <= 1e-13 * (1.0 + value.abs()) {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                shares = projected;
                value = new_value;
                accepted = true;
                if moved <= STEP_TOL * power_budget.max(1.0) || stalled >= 4 {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if converged || !accepted {
            converged = true;
            break;
        }
        step *= 2.0;
    }
    if !converged {
        return Err(Error::SolverFailed { what: "projected-gradient allocation probe" });
    }
    let mut alloc = Vec::with_capacity(s_atoms.len());
    let mut shares_iter = shares.iter();
    for &(_, p) in s_atoms {
        if p > 0.0 {
            alloc.push(shares_iter.next().unwrap() / p);
        } else {
            alloc.push(0.0);
        }
    }
    let delta = allocation_gap(s_atoms, &alloc, power_budget, sigma2)?;
    Ok((delta, alloc))
}

/// Midpoint-rule discretization of a fading-magnitude law into `n_atoms`
/// weighted atoms, for feeding continuous laws to the allocation probe.
///
/// Atoms are distributed over the density's support segments proportionally
/// to segment mass, so a narrow ring spike receives almost all of them;
/// weights are renormalized to sum to one exactly.
pub fn discretize_norm_law(model: &FadingModel, n_atoms: usize) -> Result<Vec<(f64, f64)>> {
    if n_atoms < 2 {
        return Err(Error::InvalidParameter {
            name: "n_atoms",
            message: format!("need at least 2 atoms, got {n_atoms}"),
        });
    }
    let support = model.norm_support();
    let mut segments: Vec<(f64, f64, f64)> = Vec::new(); // (lo, hi, mass)
    for pair in support.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let mass = quad::integrate(|r| model.norm_density(r), lo, hi, 1e-9)?.value;
        segments.push((lo, hi, mass.max(0.0)));
    }
    let total_mass: f64 = segments.iter().map(|&(_, _, m)| m).sum();

    // Integer atom counts proportional to mass, with leftovers going to the
    // heaviest segments first.
    let mut counts: Vec<usize> =
        segments.iter().map(|&(_, _, m)| (n_atoms as f64 * m / total_mass) as usize).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&i, &j| segments[j].2.partial_cmp(&segments[i].2).unwrap());
    let mut cursor = 0;
    while assigned < n_atoms {
        counts[order[cursor % order.len()]] += 1;
        assigned += 1;
        cursor += 1;
    }

    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(n_atoms);
    for (&(lo, hi, _), &count) in segments.iter().zip(&counts) {
        if count == 0 {
            continue;
        }
        let width = (hi - lo) / count as f64;
        for j in 0..count {
            let r = lo + (j as f64 + 0.5) * width;
            atoms.push((r, model.norm_density(r) * width));
        }
    }
    let mass: f64 = atoms.iter().map(|&(_, w)| w).sum();
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::DegenerateSamples {
            reason: "discretized magnitude law carries no mass".to_string(),
        });
    }
    for atom in &mut atoms {
        atom.1 /= mass;
    }
    Ok(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::RandomStream;

    fn canonical_gaussian() -> ChannelConfig {
        let a = FadingModel::gaussian_iid(1.0, 0.1).unwrap();
        let h = FadingModel::gaussian_iid(1.0, 0.1).unwrap();
        ChannelConfig::new(a, h, 1.0, 1.0).unwrap()
    }

    fn canonical_ring() -> ChannelConfig {
        let a = FadingModel::ring_phase(1.0, 0.1).unwrap();
        let h = FadingModel::ring_phase(1.0, 0.1).unwrap();
        ChannelConfig::new(a, h, 1.0, 1.0).unwrap()
    }

    /// Independent water-filling solution for the allocation probe's
    /// objective: `P_i = max(0, nu - sigma2 / s_i^2)` with the water level
    /// `nu` found by bisection on the budget constraint. Used as an oracle
    /// for the projected-gradient route.
    fn water_filling(s_atoms: &[(f64, f64)], budget: f64, sigma2: f64) -> Vec<f64> {
        let spent = |nu: f64| -> f64 {
            s_atoms
                .iter()
                .map(|&(s, p)| if s != 0.0 { p * (nu - sigma2 / (s * s)).max(0.0) } else { 0.0 })
                .sum()
        };
        let mass_pos: f64 = s_atoms.iter().filter(|&&(s, _)| s != 0.0).map(|&(_, p)| p).sum();
        assert!(mass_pos > 0.0, "water-filling oracle needs a nonzero scale atom");
        let ceil: f64 = s_atoms
            .iter()
            .filter(|&&(s, _)| s != 0.0)
            .map(|&(s, _)| sigma2 / (s * s))
            .fold(0.0_f64, f64::max);
        let mut lo = 0.0;
        let mut hi = ceil + budget / mass_pos + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spent(mid) < budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let nu = 0.5 * (lo + hi);
        s_atoms
            .iter()
            .map(|&(s, _)| if s != 0.0 { (nu - sigma2 / (s * s)).max(0.0) } else { 0.0 })
            .collect()
    }

    #[test]
    fn constants_compose_and_cache() {
        let c = derive_constants();
        // The primed constant sits exactly 1/e + (10/4) ln(2 pi e) above the
        // base one.
        let lift = 1.0 / E + 2.5 * LN_2PI_E;
        assert!((c.gamma_prime - c.gamma - lift).abs() < 1e-12);
        assert!((lift - 7.462_572_107_194_8).abs() < 1e-9);
        // The threshold moment is the one the angle-entropy solver reports.
        let m = maxent::m_of_delta(0.5).unwrap();
        assert_eq!(c.m_half, m);
        // Pinned values (threshold solver tolerance is 1e-6).
        assert!((c.m_half - 13.254_817).abs() < 1e-5, "m_half = {}", c.m_half);
        assert!((c.gamma - 47.777_011).abs() < 1e-5, "gamma = {}", c.gamma);
        // Moment-free floor: m_half > 0 forces gamma above the rest of its
        // composition.
        let floor = (PI / 2.0).ln() + 4.5 * (2.0 * PI).ln() - 0.25 * LN_2PI_E;
        assert!(c.gamma > floor);
        // Cached: bit-identical on repeated calls.
        let again = derive_constants();
        assert_eq!(c, again);
    }

    #[test]
    fn error_entropy_contribution_matches_closed_form() {
        // Both links Gaussian with eps = 0.1: each error-entropy term is
        // ln(2 pi e * 0.01), so the pair contributes -6 ln(2 pi e * 0.01)
        // ~ +10.6038 nats to the constants block.
        let config = canonical_gaussian();
        let ma = model_moments(&config.model_a).unwrap();
        let mh = model_moments(&config.model_h).unwrap();
        let contribution = -3.0 * (ma.err_cond_entropy + mh.err_cond_entropy);
        assert!((contribution - 10.603_758_717_472_47).abs() < 1e-9, "got {contribution}");
    }

    #[test]
    fn accounting_identity_holds_and_constants_ignore_snr() {
        for config in [canonical_gaussian(), canonical_ring()] {
            let ma = model_moments(&config.model_a).unwrap();
            let mh = model_moments(&config.model_h).unwrap();
            let c = derive_constants();
            let lo = sum_rate_upper_bound_from_moments(&config.with_snr_db(20.0), &ma, &mh);
            let hi = sum_rate_upper_bound_from_moments(&config.with_snr_db(90.0), &ma, &mh);
            assert_eq!(lo.term_constants, hi.term_constants);
            for report in [lo, hi] {
                // Re-sum the eleven raw terms in display order.
                let resummed = report.term_log_a
                    + report.term_log_h
                    + 4.0 / 3.0 * c.gamma_prime
                    - 3.0 * ma.err_cond_entropy
                    - 3.0 * mh.err_cond_entropy
                    + ma.log_plus_norm / 3.0
                    + mh.log_plus_norm / 3.0
                    + 2.0 * ma.log_plus_inv_norm / 3.0
                    + 2.0 * mh.log_plus_inv_norm / 3.0
                    + 3.0 * ma.second_moment.ln()
                    + 3.0 * mh.second_moment.ln();
                assert!((report.total - resummed).abs() < 1e-12);
                assert!(
                    (report.total - report.term_log_a - report.term_log_h - report.term_constants)
                        .abs()
                        < 1e-12
                );
            }
        }
    }

    #[test]
    fn ratio_deviates_from_two_thirds_by_the_constants() {
        // The ceiling's ratio to ln(1 + snr) exceeds 2/3 at any finite SNR
        // by exactly the additive terms divided by ln(1 + snr): the
        // constants block plus the (1/3) ln E[||.||^2] residue of each log
        // term. At 120 dB the +1 inside the logs contributes < 1e-12.
        let config = canonical_gaussian();
        let at = |snr_db: f64| sum_rate_upper_bound(&config.with_snr_db(snr_db)).unwrap();
        let r120 = at(120.0);
        let ma = model_moments(&config.model_a).unwrap();
        let predicted_excess =
            (r120.term_constants + 2.0 / 3.0 * ma.second_moment.ln()) / r120.snr.ln_1p();
        assert!(
            ((r120.ratio - 2.0 / 3.0) - predicted_excess).abs() < 1e-9,
            "ratio = {}, predicted excess = {predicted_excess}",
            r120.ratio
        );
        // Increments of the ceiling converge to (2/3) ln(snr2/snr1): by
        // 100 dB the +1 inside the logs is invisible at 1e-6.
        let r100 = at(100.0);
        let increment = r120.total - r100.total;
        let expected = 2.0 / 3.0 * (1e12_f64 / 1e10_f64).ln();
        assert!((increment - expected).abs() < 1e-6, "increment = {increment}");
    }

    #[test]
    fn sweep_fits_the_two_thirds_prelog() {
        let grid: Vec<f64> = (0..=12).map(|i| 10f64.powf(6.0 + 0.5 * i as f64)).collect();
        for config in [canonical_gaussian(), canonical_ring()] {
            let sweep = bound_sweep(&config, &grid).unwrap();
            assert!(
                (sweep.prelog.slope - 2.0 / 3.0).abs() < 1e-3,
                "slope = {} for {:?}",
                sweep.prelog.slope,
                config.model_a
            );
            assert!(sweep.ratios.iter().all(|r| r.is_finite()));
            assert_eq!(sweep.totals.values.len(), grid.len());
        }
    }

    #[test]
    fn sweep_rejects_narrow_grids() {
        let config = canonical_gaussian();
        let narrow: Vec<f64> = (0..=8).map(|i| 10f64.powf(6.0 + 0.125 * i as f64)).collect();
        match bound_sweep(&config, &narrow) {
            Err(Error::InsufficientSpan { decades, min_decades }) => {
                assert!((decades - 1.0).abs() < 1e-9);
                assert_eq!(min_decades, 4.0);
            }
            other => panic!("expected InsufficientSpan, got {other:?}"),
        }
    }

    #[test]
    fn prelog_fit_recovers_affine_curves() {
        let grid: Vec<f64> = (0..=10).map(|i| 10f64.powf(2.0 + 0.4 * i as f64)).collect();
        let identity =
            RateCurve::new("identity", grid.clone(), grid.iter().map(|s| s.ln_1p()).collect())
                .unwrap();
        let fit = prelog_fit(&identity).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);

        let affine = RateCurve::new(
            "affine",
            grid.clone(),
            grid.iter().map(|s| 2.0 / 3.0 * s.ln_1p() + 7.0).collect(),
        )
        .unwrap();
        let fit = prelog_fit(&affine).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() < 1e-12);
        assert!((fit.intercept - 7.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn constant_allocation_gap_is_nonpositive() {
        // Jensen: ln is concave, so averaging inside beats averaging outside
        // for the flat allocation P = budget.
        let stream = RandomStream::new(0x0B0B);
        for trial in 0..25 {
            let mut sub = stream.split(trial);
            let n = 2 + sub.index(7);
            let mut atoms: Vec<(f64, f64)> =
                (0..n).map(|_| (0.2 + 2.8 * sub.uniform(), sub.uniform() + 0.05)).collect();
            let mass: f64 = atoms.iter().map(|&(_, p)| p).sum();
            for atom in &mut atoms {
                atom.1 /= mass;
            }
            let budget = 10f64.powf(4.0 * sub.uniform() - 1.0);
            let sigma2 = 0.25 + 2.0 * sub.uniform();
            let flat = vec![budget; atoms.len()];
            let delta = allocation_gap(&atoms, &flat, budget, sigma2).unwrap();
            assert!(delta <= 1e-12, "trial {trial}: flat-allocation gap {delta} > 0");
        }
    }

    #[test]
    fn allocation_gap_rejects_overspending() {
        let atoms = [(1.0, 0.5), (2.0, 0.5)];
        let alloc = [3.0, 3.0];
        match allocation_gap(&atoms, &alloc, 2.0, 1.0) {
            Err(Error::BudgetExceeded { spent, budget }) => {
                assert!((spent - 3.0).abs() < 1e-12);
                assert!((budget - 2.0).abs() < 1e-12);
            }
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn allocation_probe_matches_water_filling_on_two_atoms() {
        // Two equiprobable scales {0.5, 1.5}, unit noise, budget 100. Both
        // water levels are active, so the oracle is fully analytic:
        // nu = budget + (4 + 4/9)/2, P_i = nu - sigma2/s_i^2.
        let atoms = [(0.5, 0.5), (1.5, 0.5)];
        let (budget, sigma2) = (100.0, 1.0);
        let (delta, alloc) = max_allocation_gap(&atoms, budget, sigma2).unwrap();

        let nu = budget + 0.5 * (4.0 + 4.0 / 9.0);
        let exact = [nu - 4.0, nu - 4.0 / 9.0];
        let exact_delta = allocation_gap(&atoms, &exact, budget, sigma2).unwrap();
        assert!((delta - exact_delta).abs() < 1e-6, "probe {delta} vs oracle {exact_delta}");
        assert!((alloc[0] - exact[0]).abs() < 1e-3, "alloc {alloc:?} vs {exact:?}");
        assert!((alloc[1] - exact[1]).abs() < 1e-3);
        // Even the best allocation barely moves the gap here; it stays
        // negative and, in particular, under the universal 1/e cap.
        assert!((delta + 0.2484).abs() < 1e-3, "delta = {delta}");
        assert!(delta <= 1.0 / E + 1e-6);
    }

    #[test]
    fn allocation_probe_matches_water_filling_on_random_laws() {
        let stream = RandomStream::new(0xA110C);
        for trial in 0..10 {
            let mut sub = stream.split(trial);
            let n = 2 + sub.index(6);
            let mut atoms: Vec<(f64, f64)> =
                (0..n).map(|_| (0.1 + 2.9 * sub.uniform(), sub.uniform() + 0.05)).collect();
            let mass: f64 = atoms.iter().map(|&(_, p)| p).sum();
            for atom in &mut atoms {
                atom.1 /= mass;
            }
            let budget = 10f64.powf(3.0 * sub.uniform());
            let sigma2 = 0.25 + 2.0 * sub.uniform();

            let (delta, _) = max_allocation_gap(&atoms, budget, sigma2).unwrap();
            let oracle_alloc = water_filling(&atoms, budget, sigma2);
            let oracle_delta = allocation_gap(&atoms, &oracle_alloc, budget, sigma2).unwrap();
            assert!(
                (delta - oracle_delta).abs() < 1e-6,
                "trial {trial}: probe {delta} vs water-filling {oracle_delta}"
            );
            assert!(delta <= 1.0 / E + 1e-6, "trial {trial}: delta {delta} above cap");
        }
    }

    #[test]
    fn discretized_norm_law_keeps_mass_and_second_moment() {
        for config in [canonical_gaussian(), canonical_ring()] {
            let model = config.model_a;
            let atoms = discretize_norm_law(&model, 64).unwrap();
            assert_eq!(atoms.len(), 64);
            let mass: f64 = atoms.iter().map(|&(_, w)| w).sum();
            assert!((mass - 1.0).abs() < 1e-12);
            let m2: f64 = atoms.iter().map(|&(r, w)| w * r * r).sum();
            let exact = model.second_moment();
            assert!(
                (m2 - exact).abs() / exact < 5e-3,
                "second moment {m2} vs {exact} for {model:?}"
            );
        }
    }

    mod projection_properties {
        use super::*;
        use proptest::prelude::*;

        /// Positive weights summing to one alongside an unconstrained
        /// candidate vector of the same length.
        fn weighted_candidates() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
            (1usize..8).prop_flat_map(|n| {
                (
                    proptest::collection::vec(-50.0..50.0f64, n),
                    proptest::collection::vec(0.05..1.0f64, n),
                )
                    .prop_map(|(candidate, raw)| {
                        let total: f64 = raw.iter().sum();
                        (candidate, raw.iter().map(|w| w / total).collect())
                    })
            })
        }

        proptest! {
            /// The projection lands on the feasible set: nonnegative powers
            /// spending the budget (to bisection tolerance, never over).
            #[test]
            fn projection_is_feasible(
                (candidate, probs) in weighted_candidates(),
                budget in 0.1..100.0f64,
            ) {
                let alloc = project_allocation(&candidate, &probs, budget);
                prop_assert_eq!(alloc.len(), candidate.len());
                for &a in &alloc {
                    prop_assert!(a >= 0.0 && a.is_finite());
                }
                let spent: f64 = alloc.iter().zip(&probs).map(|(&a, &p)| p * a).sum();
                prop_assert!(spent <= budget * (1.0 + 1e-12));
                prop_assert!((spent - budget).abs() <= budget * 1e-6);
            }

            /// Projecting a projected point moves nothing: the output is
            /// already on the feasible set.
            #[test]
            fn projection_is_idempotent(
                (candidate, probs) in weighted_candidates(),
                budget in 0.1..100.0f64,
            ) {
                let once = project_allocation(&candidate, &probs, budget);
                let twice = project_allocation(&once, &probs, budget);
                for (&a, &b) in once.iter().zip(&twice) {
                    prop_assert!((a - b).abs() <= 1e-6 * (1.0 + budget));
                }
            }
        }
    }
}
