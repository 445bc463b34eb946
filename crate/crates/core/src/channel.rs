//! Fading models, channel configuration, draws, and moment functionals.
//!
//! A fading vector decomposes as `a = â + ã`: the estimate `â` is what the
//! transmitter will ever learn, the error `ã` is isotropic Gaussian with
//! per-component standard deviation `eps > 0`. The strict positivity is
//! load-bearing: it keeps the conditional error entropy `h(ã | â)` finite,
//! which is exactly the regime where the sum-rate pre-log collapses to 2/3.

use crate::quad;
use crate::stream::RandomStream;
use crate::vec2::Vec2;
use crate::{Error, Result};

/// Joint law of (estimate, error) for one user's fading vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    /// `â` has i.i.d. `N(0, s^2)` components (s = 0 means a known-zero
    /// estimate), error i.i.d. `N(0, eps^2)`.
    GaussianIid { s: f64, eps: f64 },
    /// `â` is uniform on the ring of radius `rho`, error i.i.d. `N(0, eps^2)`.
    RingPhase { rho: f64, eps: f64 },
}

impl FadingModel {
    pub fn gaussian_iid(s: f64, eps: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidParameter {
                name: "s",
                message: format!("estimate scale must be finite and >= 0, got {s}"),
            });
        }
        check_eps(eps)?;
        Ok(FadingModel::GaussianIid { s, eps })
    }

    pub fn ring_phase(rho: f64, eps: f64) -> Result<Self> {
        if !rho.is_finite() || rho < 0.0 {
            return Err(Error::InvalidParameter {
                name: "rho",
                message: format!("ring radius must be finite and >= 0, got {rho}"),
            });
        }
        check_eps(eps)?;
        Ok(FadingModel::RingPhase { rho, eps })
    }

    pub fn eps(&self) -> f64 {
        match *self {
            FadingModel::GaussianIid { eps, .. } | FadingModel::RingPhase { eps, .. } => eps,
        }
    }

    /// `E[||a||^2]` of the composite vector, in closed form.
    pub fn second_moment(&self) -> f64 {
        match *self {
            FadingModel::GaussianIid { s, eps } => 2.0 * (s * s + eps * eps),
            FadingModel::RingPhase { rho, eps } => rho * rho + 2.0 * eps * eps,
        }
    }

    /// `h(ã | â)` in nats: the error is Gaussian and independent of the
    /// estimate, so this is `ln(2 pi e eps^2)` exactly.
    pub fn err_cond_entropy(&self) -> f64 {
        (2.0 * std::f64::consts::PI * std::f64::consts::E * self.eps() * self.eps()).ln()
    }

    /// Density of `||a||` (Rayleigh for the Gaussian family, Rice for the
    /// ring family). Zero for `r < 0`.
    pub fn norm_density(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match *self {
            FadingModel::GaussianIid { s, eps } => {
                let v = s * s + eps * eps;
                r / v * (-0.5 * r * r / v).exp()
            }
            FadingModel::RingPhase { rho, eps } => {
                let v = eps * eps;
                let z = r - rho;
                r / v * (-0.5 * z * z / v).exp() * bessel_i0_scaled(r * rho / v)
            }
        }
    }

    /// Splits `[0, r_max]` so adaptive quadrature sees the density's spike.
    pub(crate) fn norm_support(&self) -> Vec<f64> {
        match *self {
            FadingModel::GaussianIid { s, eps } => {
                let sd = (s * s + eps * eps).sqrt();
                vec![0.0, 9.5 * sd]
            }
            FadingModel::RingPhase { rho, eps } => {
                let hi = rho + 12.0 * eps;
                let mut pts = vec![0.0, (rho - 12.0 * eps).max(0.0), (rho + 12.0 * eps).min(hi), hi];
                pts.dedup_by(|a, b| (*a - *b).abs() < 1e-300);
                pts
            }
        }
    }

    /// One draw of (estimate, error).
    pub fn realize(&self, stream: &mut RandomStream) -> FadingDraw {
        match *self {
            FadingModel::GaussianIid { s, eps } => {
                let hat = Vec2::new(s * stream.gauss(), s * stream.gauss());
                let err = Vec2::new(eps * stream.gauss(), eps * stream.gauss());
                FadingDraw { hat, err }
            }
            FadingModel::RingPhase { rho, eps } => {
                let hat = Vec2::from_polar(rho, stream.angle());
                let err = Vec2::new(eps * stream.gauss(), eps * stream.gauss());
                FadingDraw { hat, err }
            }
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "eps",
            message: format!(
                "error scale must be finite and > 0 so the error entropy stays finite, got {eps}"
            ),
        });
    }
    Ok(())
}

/// One draw of (estimate, error) for a single user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    pub hat: Vec2,
    pub err: Vec2,
}

impl FadingDraw {
    /// The composite fading vector seen by the receiver.
    pub fn realized(&self) -> Vec2 {
        self.hat + self.err
    }
}

/// Fading laws for both users plus the physical-layer scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub model_a: FadingModel,
    pub model_h: FadingModel,
    /// Receiver noise variance `sigma^2`.
    pub noise_var: f64,
    /// Average input power budget.
    pub power: f64,
}

impl ChannelConfig {
    pub fn new(model_a: FadingModel, model_h: FadingModel, noise_var: f64, power: f64) -> Result<Self> {
        if !noise_var.is_finite() || noise_var <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "noise_var",
                message: format!("noise variance must be finite and > 0, got {noise_var}"),
            });
        }
        if !power.is_finite() || power <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "power",
                message: format!("power budget must be finite and > 0, got {power}"),
            });
        }
        Ok(ChannelConfig { model_a, model_h, noise_var, power })
    }

    /// `power / noise_var`.
    pub fn snr(&self) -> f64 {
        self.power / self.noise_var
    }

    /// Same channel with the power budget set so that `snr = 10^(db/10)`.
    pub fn with_snr_db(&self, db: f64) -> ChannelConfig {
        ChannelConfig { power: self.noise_var * 10f64.powf(db / 10.0), ..*self }
    }
}

/// Scalar functionals of a fading model used by the sum-rate bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    /// `E[||a||^2]`.
    pub second_moment: f64,
    /// `E[max(0, ln ||a||)]`.
    pub log_plus_norm: f64,
    /// `E[max(0, ln 1/||a||)]`.
    pub log_plus_inv_norm: f64,
    /// `h(ã | â)` in nats.
    pub err_cond_entropy: f64,
}

/// Monte-Carlo counterpart of [`model_moments`] with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMomentSet {
    pub moments: MomentSet,
    pub se_second_moment: f64,
    pub se_log_plus_norm: f64,
    pub se_log_plus_inv_norm: f64,
}

/// Deterministic moment functionals by quadrature against the norm density
/// (Rayleigh or Rice).
pub fn model_moments(model: &FadingModel) -> Result<MomentSet> {
    let support = model.norm_support();
    let r_max = *support.last().unwrap();

    // E[log+ ||a||]: integrate ln(r) f(r) over [1, r_max].
    let log_plus_norm = if r_max <= 1.0 {
        0.0
    } else {
        let mut pts: Vec<f64> = support.iter().copied().filter(|&p| p > 1.0 && p < r_max).collect();
        pts.insert(0, 1.0);
        pts.push(r_max);
        quad::integrate_split(|r| r.ln() * model.norm_density(r), &pts, quad::DEFAULT_TOL)?.value
    };

    // E[log+ 1/||a||]: integrate -ln(r) f(r) over (0, min(1, r_max)). The
    // integrand vanishes at 0 (r ln r -> 0) so plain adaptive quadrature with
    // split points is enough.
    let hi = r_max.min(1.0);
    let mut pts: Vec<f64> = support.iter().copied().filter(|&p| p > 0.0 && p < hi).collect();
    pts.insert(0, 0.0);
    pts.push(hi);
    let log_plus_inv_norm =
        quad::integrate_split(|r| -(r.ln()) * model.norm_density(r), &pts, quad::DEFAULT_TOL)?.value;

    Ok(MomentSet {
        second_moment: model.second_moment(),
        log_plus_norm,
        log_plus_inv_norm,
        err_cond_entropy: model.err_cond_entropy(),
    })
}

/// Monte-Carlo cross-check of [`model_moments`]. `n_mc >= 10_000` so the
/// standard errors mean something.
pub fn model_moments_mc(model: &FadingModel, stream: &RandomStream, n_mc: usize) -> Result<McMomentSet> {
    if n_mc < 10_000 {
        return Err(Error::TooFewSamples { n: n_mc, min: 10_000 });
    }
    let stats = crate::stream::map_chunks(stream, n_mc, |sub, len| {
        let mut acc = [0.0f64; 6]; // sum, sumsq for each of: r^2, log+, log+inv
        for _ in 0..len {
            let r = model.realize(sub).realized().norm();
            let vals = [r * r, r.ln().max(0.0), (-(r.ln())).max(0.0)];
            for (j, v) in vals.iter().enumerate() {
                acc[2 * j] += v;
                acc[2 * j + 1] += v * v;
            }
        }
        acc
    });
    let mut tot = [0.0f64; 6];
    for a in &stats {
        for j in 0..6 {
            tot[j] += a[j];
        }
    }
    let nf = n_mc as f64;
    let mean_se = |j: usize| {
        let mean = tot[2 * j] / nf;
        let var = (tot[2 * j + 1] / nf - mean * mean).max(0.0);
        (mean, (var / nf).sqrt())
    };
    let (m2, se2) = mean_se(0);
    let (lp, se_lp) = mean_se(1);
    let (lpi, se_lpi) = mean_se(2);
    Ok(McMomentSet {
        moments: MomentSet {
            second_moment: m2,
            log_plus_norm: lp,
            log_plus_inv_norm: lpi,
            err_cond_entropy: model.err_cond_entropy(),
        },
        se_second_moment: se2,
        se_log_plus_norm: se_lp,
        se_log_plus_inv_norm: se_lpi,
    })
}

/// Scalar receive equation `fading' x + noise`, noise `N(0, noise_std^2)`.
pub fn receive(x: Vec2, fading: Vec2, noise_std: f64, stream: &mut RandomStream) -> f64 {
    assert!(noise_std > 0.0, "noise_std must be > 0");
    fading.dot(x) + noise_std * stream.gauss()
}

/// `exp(-x) I_0(x)` for `x >= 0`: power series below 30, asymptotic series
/// above. Uniformly ~1e-13 accurate, no overflow for any finite `x`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x <= 30.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / ((k * k) as f64);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=12u32 {
            let odd = (2 * k - 1) as f64;
            term *= odd * odd / (8.0 * k as f64 * x);
            sum += term;
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}
