//! Pinned-seed randomized case suites for the inequality checks.
//!
//! Each generator is a pure function of `(seed, n_cases)`: the cases — and
//! therefore every suite verdict — are reproducible byte-for-byte, which is
//! what makes "all randomized cases pass" a stable assertion rather than a
//! flaky one. Every suite mixes exactly-evaluable cases (closed-form mode,
//! gaps checked against a `-1e-9` slack) with Monte-Carlo cases (gaps
//! checked against `-3` combined standard errors).
//!
//! The corresponding `run_*` helpers evaluate a whole suite, one stream
//! split per case, in parallel when the `parallel` feature is on — results
//! are identical either way because each case owns its split.

use crate::inequality::{
    cross_fading_check, directional_floor_check, scale_mixture_check, CrossFadingCase,
    DirectionalCase, GapReport, Mode, PairLaw, ScaleMixtureCase, StateSwitch,
};
use crate::laws::{AngleLaw, PlaneLaw, ScalarLaw};
use crate::stream::RandomStream;
use crate::vec2::Sym2;
use crate::{bound, channel, maxent, quad, Result};

/// Monte-Carlo samples per estimated entropy in scale-mixture cases.
const SCALE_SUITE_N_MC: usize = 4_000;
/// Angle draws per Monte-Carlo directional case.
const DIRECTION_SUITE_N_MC: usize = 4_000;
/// Fading draws per Monte-Carlo cross-fading case.
const FADING_SUITE_N_DRAWS: usize = 400;

fn normalized_weights(stream: &mut RandomStream, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.2 + stream.uniform()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Random scale atoms `(value, weight)` with values in `[0.2, 3]`.
fn scale_atoms(stream: &mut RandomStream, n: usize) -> Vec<(f64, f64)> {
    let weights = normalized_weights(stream, n);
    weights.into_iter().map(|w| (0.2 + 2.8 * stream.uniform(), w)).collect()
}

fn random_scalar_mixture(stream: &mut RandomStream) -> ScalarLaw {
    let n = 2 + stream.index(2);
    let weights = normalized_weights(stream, n);
    ScalarLaw::Mixture(
        weights
            .into_iter()
            .map(|w| (w, stream.range(-2.0, 2.0), 0.2 + 1.3 * stream.uniform()))
            .collect(),
    )
}

/// Scale-mixture cases: random inputs, random 3-atom scale laws. Every
/// fifth case is an exactly evaluable Gaussian subcase in closed-form mode;
/// the rest run Monte Carlo on Gaussian-mixture inputs.
pub fn scale_suite(seed: u64, n_cases: usize) -> Vec<ScaleMixtureCase> {
    let root = RandomStream::new(seed);
    (0..n_cases)
        .map(|i| {
            let mut sub = root.split(i as u64);
            let closed = i % 5 == 0;
            let x = if closed {
                ScalarLaw::Gaussian { mean: stream_mean(&mut sub), var: 0.3 + 2.2 * sub.uniform() }
            } else {
                random_scalar_mixture(&mut sub)
            };
            ScaleMixtureCase {
                x,
                noise_var: 0.3 + 1.7 * sub.uniform(),
                s_atoms: scale_atoms(&mut sub, 3),
                t_atoms: scale_atoms(&mut sub, 3),
                mode: if closed { Mode::ClosedForm } else { Mode::MonteCarlo },
                n_mc: SCALE_SUITE_N_MC,
            }
        })
        .collect()
}

fn stream_mean(stream: &mut RandomStream) -> f64 {
    stream.range(-1.0, 1.0)
}

/// A random positive-definite covariance with correlation in `[-0.85, 0.85]`.
fn random_covariance(stream: &mut RandomStream) -> Sym2 {
    let a11 = 0.3 + 2.2 * stream.uniform();
    let a22 = 0.3 + 2.2 * stream.uniform();
    let r = stream.range(-0.85, 0.85);
    Sym2::new(a11, r * (a11 * a22).sqrt(), a22)
}

/// A random wrapped-Gaussian mixture angle law with component spreads in
/// `[lo, hi]`.
fn random_wrapped_mixture(stream: &mut RandomStream, lo: f64, hi: f64) -> AngleLaw {
    let n = 1 + stream.index(2);
    let weights = normalized_weights(stream, n);
    AngleLaw::WrappedMixture(
        weights
            .into_iter()
            .map(|w| (w, stream.angle(), stream.range(lo, hi)))
            .collect(),
    )
}

/// Directional cases: correlated Gaussian pairs with angle laws cycling
/// through uniform, wrapped mixtures and point masses. Two of every three
/// cases are exact (quadrature averages); the third samples the angle.
pub fn direction_suite(seed: u64, n_cases: usize) -> Vec<DirectionalCase> {
    let root = RandomStream::new(seed);
    (0..n_cases)
        .map(|i| {
            let mut sub = root.split(i as u64);
            let theta_law = match i % 3 {
                0 => AngleLaw::Uniform,
                1 => random_wrapped_mixture(&mut sub, 0.2, 1.5),
                _ => AngleLaw::PointMass(sub.angle()),
            };
            DirectionalCase {
                pair: PairLaw::Gaussian(random_covariance(&mut sub)),
                noise_var: 0.3 + 1.2 * sub.uniform(),
                theta_law,
                mode: if i % 3 == 1 && i % 2 == 1 { Mode::MonteCarlo } else { Mode::ClosedForm },
                n_mc: DIRECTION_SUITE_N_MC,
            }
        })
        .collect()
}

fn random_rotation_invariant_law(stream: &mut RandomStream) -> PlaneLaw {
    match stream.index(3) {
        0 => PlaneLaw::RingNoise {
            radius: 0.6 + stream.uniform(),
            eps: 0.05 + 0.25 * stream.uniform(),
        },
        1 => PlaneLaw::isotropic_gaussian(0.4 + 1.1 * stream.uniform()),
        _ => {
            let weights = normalized_weights(stream, 2);
            PlaneLaw::IsoMixture(
                weights.into_iter().map(|w| (w, 0.2 + 1.8 * stream.uniform())).collect(),
            )
        }
    }
}

/// Cross-fading cases: rotation-invariant fading laws (ring, isotropic
/// Gaussian, isotropic mixtures) against isotropic inputs; every third case
/// adds an input-modulating state, every fifth runs fully closed-form.
pub fn fading_suite(seed: u64, n_cases: usize) -> Vec<CrossFadingCase> {
    let root = RandomStream::new(seed);
    (0..n_cases)
        .map(|i| {
            let mut sub = root.split(i as u64);
            let x = if sub.uniform() < 0.5 {
                PlaneLaw::isotropic_gaussian(0.5 + 1.5 * sub.uniform())
            } else {
                let weights = normalized_weights(&mut sub, 2);
                PlaneLaw::IsoMixture(
                    weights.into_iter().map(|w| (w, 0.3 + 1.7 * sub.uniform())).collect(),
                )
            };
            let state = (i % 3 == 2).then(|| StateSwitch {
                atoms: vec![
                    (0.5 + 0.4 * sub.uniform(), 0.5),
                    (1.1 + 0.5 * sub.uniform(), 0.5),
                ],
            });
            CrossFadingCase {
                law_a: random_rotation_invariant_law(&mut sub),
                law_h: random_rotation_invariant_law(&mut sub),
                x,
                noise_var: 0.5 + sub.uniform(),
                state,
                mode: if i % 5 == 0 { Mode::ClosedForm } else { Mode::MonteCarlo },
                n_draws: FADING_SUITE_N_DRAWS,
            }
        })
        .collect()
}

/// One allocation-cap instance: a discrete magnitude law, a power budget
/// and a noise floor.
#[derive(Debug, Clone)]
pub struct AllocationInstance {
    /// `(value, probability)` atoms of the magnitude law.
    pub atoms: Vec<(f64, f64)>,
    pub budget: f64,
    pub noise_var: f64,
}

/// Allocation instances: random small discrete laws over magnitudes in
/// `[0.2, 2.5]` with log-uniform budgets, plus (every tenth case) 64-atom
/// discretizations of the canonical fading-norm laws.
pub fn allocation_suite(seed: u64, n_cases: usize) -> Result<Vec<AllocationInstance>> {
    let root = RandomStream::new(seed);
    (0..n_cases)
        .map(|i| {
            let mut sub = root.split(i as u64);
            let budget = 10f64.powf(sub.range(0.0, 4.0));
            let noise_var = 0.5 + 1.5 * sub.uniform();
            let atoms = if i % 10 == 9 {
                let eps = 0.05 + 0.15 * sub.uniform();
                let model = if sub.uniform() < 0.5 {
                    channel::FadingModel::gaussian_iid(0.6 + 0.8 * sub.uniform(), eps)?
                } else {
                    channel::FadingModel::ring_phase(0.6 + 0.8 * sub.uniform(), eps)?
                };
                bound::discretize_norm_law(&model, 64)?
            } else {
                let n = 2 + sub.index(5);
                let weights = normalized_weights(&mut sub, n);
                weights.into_iter().map(|w| (0.2 + 2.3 * sub.uniform(), w)).collect()
            };
            Ok(AllocationInstance { atoms, budget, noise_var })
        })
        .collect()
}

/// Exact truncated-log moment `E[log+ 1/|Theta|]` of a continuous angle
/// law, by quadrature split at the density's kinks, with the logarithmic
/// singularity at zero handled by a singularity-tolerant rule.
pub fn angle_log_plus_inv(law: &AngleLaw) -> Result<f64> {
    match law {
        AngleLaw::PointMass(t) => Ok((1.0 / t.abs()).ln().max(0.0)),
        AngleLaw::Power { alpha } => Ok(maxent::constraint_for_alpha(*alpha)),
        _ => {
            // Density breakpoints (jumps or kinks) inside (-1, 1): the
            // interval and triangle laws are only piecewise smooth, which
            // would stall the quadrature if integrated across.
            let mut cuts = vec![-1.0, 0.0, 1.0];
            match law {
                AngleLaw::UniformInterval { center, half_width } => {
                    cuts.push(center - half_width);
                    cuts.push(center + half_width);
                }
                AngleLaw::Triangular { center, half_width } => {
                    cuts.push(*center);
                    cuts.push(center - half_width);
                    cuts.push(center + half_width);
                }
                _ => {}
            }
            cuts.retain(|&c| (-1.0..=1.0).contains(&c));
            cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
            cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-13);

            let f = |t: f64| -law.density(t) * t.abs().ln();
            let mut total = 0.0;
            for pair in cuts.windows(2) {
                let (lo, hi) = (pair[0], pair[1]);
                // Only the pieces touching zero see the singularity.
                total += if lo == 0.0 || hi == 0.0 {
                    quad::integrate_singular(f, lo, hi, 1e-9)?.value
                } else {
                    quad::integrate(f, lo, hi, 1e-9)?.value
                };
            }
            Ok(total)
        }
    }
}

/// Randomized densities on `[-pi, pi)` for extremality checks: wrapped
/// Gaussian mixtures, uniform sub-intervals, triangles, and members of the
/// extremal family itself. Laws too diffuse to sit safely above the
/// truncated-log-moment infimum `1/pi` (margin `0.02`) are re-drawn, so the
/// entropy ceiling at the measured moment is always well-defined.
pub fn density_suite(seed: u64, n_cases: usize) -> Result<Vec<AngleLaw>> {
    let root = RandomStream::new(seed);
    let mut out = Vec::with_capacity(n_cases);
    for i in 0..n_cases {
        let mut sub = root.split(i as u64);
        let law = loop {
            let candidate = match i % 4 {
                0 => random_wrapped_mixture(&mut sub, 0.2, 1.2),
                1 => AngleLaw::UniformInterval {
                    center: sub.range(-1.0, 1.0),
                    half_width: sub.range(0.3, 1.0),
                },
                2 => AngleLaw::Triangular {
                    center: sub.range(-1.0, 1.0),
                    half_width: sub.range(0.3, 1.0),
                },
                _ => AngleLaw::Power { alpha: [0.2, 0.35, 0.5][sub.index(3)] },
            };
            if angle_log_plus_inv(&candidate)? >= maxent::GAMMA_INFIMUM + 0.02 {
                break candidate;
            }
        };
        out.push(law);
    }
    Ok(out)
}

fn run_cases<C, R, F>(cases: &[C], stream: &RandomStream, check: F) -> Result<Vec<R>>
where
    C: Sync,
    R: Send,
    F: Fn(&C, &mut RandomStream) -> Result<R> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cases
            .par_iter()
            .enumerate()
            .map(|(i, case)| check(case, &mut stream.split(i as u64)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cases
            .iter()
            .enumerate()
            .map(|(i, case)| check(case, &mut stream.split(i as u64)))
            .collect()
    }
}

/// Evaluates every scale-mixture case, one stream split per case.
pub fn run_scale_suite(
    cases: &[ScaleMixtureCase],
    stream: &RandomStream,
) -> Result<Vec<GapReport>> {
    run_cases(cases, stream, scale_mixture_check)
}

/// Evaluates every directional case; three reports (one per floor) per case.
pub fn run_direction_suite(
    cases: &[DirectionalCase],
    stream: &RandomStream,
) -> Result<Vec<[GapReport; 3]>> {
    run_cases(cases, stream, directional_floor_check)
}

/// Evaluates every cross-fading case; four reports (one per floor variant)
/// per case.
pub fn run_fading_suite(
    cases: &[CrossFadingCase],
    stream: &RandomStream,
) -> Result<Vec<[GapReport; 4]>> {
    run_cases(cases, stream, cross_fading_check)
}

/// Evaluates every allocation instance: numerically maximizes the
/// allocation gap and reports it against the `1/e` cap.
pub fn run_allocation_suite(instances: &[AllocationInstance]) -> Result<Vec<GapReport>> {
    const CAP: f64 = 1.0 / std::f64::consts::E;
    instances
        .iter()
        .map(|inst| {
            let (delta, _) = bound::max_allocation_gap(&inst.atoms, inst.budget, inst.noise_var)?;
            // Report the inequality cap >= delta: gap = cap - delta must be
            // nonnegative (exact evaluation, closed-form slack applies).
            let gap = CAP - delta;
            Ok(GapReport {
                label: "allocation-cap",
                lhs: CAP,
                rhs: delta,
                gap,
                combined_se: 0.0,
                pass: gap >= -1e-9,
            })
        })
        .collect()
}
