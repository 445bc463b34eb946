//! Numerical laboratory for a two-antenna fading broadcast channel where the
//! transmitter only has a noisy estimate of the fading.
//!
//! The object of study is the scalar channel pair
//!
//! ```text
//!     Y = a'x + N_y        (user y, fading vector a)
//!     Z = h'x + N_z        (user z, fading vector h)
//! ```
//!
//! with `x` a two-dimensional real input under an average-power budget, and
//! fading vectors that decompose as `a = â + ã`: the transmitter sees the
//! estimate `â` while the residual error `ã` has finite differential entropy.
//! In that regime the sum capacity grows like `(2/3) ln(1 + snr)` instead of
//! the full-cooperation `ln(1 + snr)`: imperfect side information costs a
//! third of the pre-log.
//!
//! The crate makes every ingredient of that statement executable:
//!
//! * [`maxent`] — the maximum-entropy family for angle variables under a
//!   truncated-log-moment constraint, with closed forms, the large-constraint
//!   asymptote, and the derived constants `M(1/2)`, `gamma`, `gamma'`.
//! * [`entropy`] — k-nearest-neighbour and histogram differential-entropy
//!   estimators with subsampled standard errors, log-plus moments, and polar
//!   decompositions of planar samples.
//! * [`inequality`] — numerical checks of the entropy inequalities behind the
//!   converse: scale-mixture bounds, directional-entropy bounds with angle
//!   laws, conditional versions with a state variable, and the closed-form
//!   rotation/sine identities they rely on.
//! * [`bound`] — the assembled sum-rate upper bound, its SNR sweeps, the
//!   derived constants, and the single-user power-allocation gap probe.
//! * [`sim`] — Monte-Carlo baselines: zero-forcing with estimated or true
//!   fading, a single-user scheme, and full transmitter cooperation.
//! * [`channel`] — fading models (isotropic Gaussian and ring-plus-noise),
//!   draws, moments, and the receive equation.
//! * [`config`] — a small flat `key = value` run-configuration format shared
//!   by the command-line tools.
//!
//! Everything is deterministic under a seed: random work flows through
//! [`stream::RandomStream`], a splittable ChaCha stream, and Monte-Carlo
//! reductions use a fixed chunk layout so results are identical whether run
//! serially or with the `parallel` feature enabled.
//!
//! All entropies and rates are in nats; logarithms are natural unless a name
//! says otherwise.

pub mod bound;
pub mod channel;
pub mod config;
pub mod entropy;
pub mod inequality;
pub mod laws;
pub mod maxent;
pub mod quad;
pub mod sim;
pub mod stream;
pub mod suites;
pub mod vec2;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A constructor or operation received an out-of-domain parameter.
    #[error("invalid `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// The angle-entropy family only covers truncated-log moments at or above
    /// `1/pi`; smaller targets are unreachable.
    #[error("log-moment target {gamma} below the family infimum {infimum}")]
    GammaBelowInfimum { gamma: f64, infimum: f64 },

    /// An iterative solver (bisection, golden section, gradient ascent)
    /// failed to reach its tolerance.
    #[error("{what} did not converge")]
    SolverFailed { what: &'static str },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {estimated_error} over [{a}, {b}]")]
    QuadratureNonConvergence { a: f64, b: f64, estimated_error: f64 },

    /// An estimator received fewer samples than it can work with.
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },

    /// Samples are too degenerate for a k-NN entropy estimate (mass of exact
    /// duplicates, or zero spread).
    #[error("degenerate samples: {reason}")]
    DegenerateSamples { reason: String },

    /// A polar decomposition hit a sample exactly at the origin.
    #[error("sample at the origin has no polar decomposition")]
    OriginSample,

    /// Zero-forcing geometry breaks down when the two estimated fading
    /// directions are (numerically) collinear.
    #[error("estimated fading directions are collinear (|sin| = {sine:.3e})")]
    NearCollinear { sine: f64 },

    /// Too many Monte-Carlo draws were skipped for the estimate to be
    /// trustworthy.
    #[error("skipped {skipped} of {n} draws ({} %): fading geometry too degenerate", *skipped as f64 / *n as f64 * 100.0)]
    GeometryBreakdown { skipped: usize, n: usize },

    /// A power allocation spends more than its budget.
    #[error("allocation spends {spent} > budget {budget}")]
    BudgetExceeded { spent: f64, budget: f64 },

    /// An SNR sweep grid must span at least four decades to fit a pre-log.
    #[error("sweep grid spans {decades:.2} decades, need at least {min_decades}")]
    InsufficientSpan { decades: f64, min_decades: f64 },

    /// Run-configuration file errors (unknown key, bad value, missing key).
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use bound::{BoundReport, DerivedConstants, PrelogFit, RateCurve, SweepReport};
pub use channel::{ChannelConfig, FadingDraw, FadingModel, MomentSet};
pub use entropy::{EntropyEstimate, PolarEntropyReport};
pub use inequality::{CrossFadingCase, DirectionalCase, GapReport, Mode, PairLaw, ScaleMixtureCase, StateSwitch};
pub use maxent::MaxentSolution;
pub use sim::{Scheme, SchemeTag, SimResult};
pub use stream::RandomStream;
pub use suites::AllocationInstance;
pub use vec2::Vec2;
