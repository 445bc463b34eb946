//! Distribution descriptors for the inequality laboratory and its test
//! suites: scalar input laws, angle laws, and planar laws.
//!
//! Descriptors are *symbolic*: they can sample themselves through a
//! [`RandomStream`], and where the mathematics allows it they expose exact
//! densities, entropies, and trigonometric moments so that checks can run in
//! closed form against the same objects that Monte-Carlo paths sample from.

use crate::channel::FadingModel;
use crate::entropy::gaussian_entropy_2d;
use crate::maxent;
use crate::quad;
use crate::stream::RandomStream;
use crate::vec2::{Sym2, Vec2};
use crate::{Error, Result};

use std::f64::consts::PI;

/// Wrap to `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

// ---------------------------------------------------------------------------
// Scalar laws
// ---------------------------------------------------------------------------

/// Law of a real scalar input: a Gaussian or a finite Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarLaw {
    Gaussian { mean: f64, var: f64 },
    /// `(weight, mean, var)` components; weights sum to 1.
    Mixture(Vec<(f64, f64, f64)>),
}

impl ScalarLaw {
    pub fn components(&self) -> Vec<(f64, f64, f64)> {
        match self {
            ScalarLaw::Gaussian { mean, var } => vec![(1.0, *mean, *var)],
            ScalarLaw::Mixture(c) => c.clone(),
        }
    }

    /// Components of `s X + U` with `U ~ N(0, noise_var)` independent.
    pub fn scaled_noisy_components(&self, s: f64, noise_var: f64) -> Vec<(f64, f64, f64)> {
        self.components()
            .into_iter()
            .map(|(w, m, v)| (w, s * m, s * s * v + noise_var))
            .collect()
    }

    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match self {
            ScalarLaw::Gaussian { mean, var } => mean + var.sqrt() * stream.gauss(),
            ScalarLaw::Mixture(comps) => {
                let mut u = stream.uniform();
                let mut pick = comps.last().unwrap();
                for c in comps {
                    if u <= c.0 {
                        pick = c;
                        break;
                    }
                    u -= c.0;
                }
                pick.1 + pick.2.sqrt() * stream.gauss()
            }
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, ScalarLaw::Gaussian { .. })
    }
}

// ---------------------------------------------------------------------------
// Angle laws
// ---------------------------------------------------------------------------

/// Law of an angle variable on `[-pi, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleLaw {
    Uniform,
    PointMass(f64),
    /// `(weight, mu, sigma)` wrapped-Gaussian components.
    WrappedMixture(Vec<(f64, f64, f64)>),
    /// Uniform on `[center - half_width, center + half_width]` (kept inside
    /// the principal interval by construction).
    UniformInterval { center: f64, half_width: f64 },
    /// Symmetric triangle on the same support.
    Triangular { center: f64, half_width: f64 },
    /// The extremal family under a truncated-log-moment constraint:
    /// `c/|t|^alpha` for `|t| <= 1`, constant `c` out to `pi`.
    Power { alpha: f64 },
}

impl AngleLaw {
    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match self {
            AngleLaw::Uniform => stream.angle(),
            AngleLaw::PointMass(t) => *t,
            AngleLaw::WrappedMixture(comps) => {
                let mut u = stream.uniform();
                let mut choice = comps.last().unwrap();
                for c in comps {
                    if u <= c.0 {
                        choice = c;
                        break;
                    }
                    u -= c.0;
                }
                wrap_angle(choice.1 + choice.2 * stream.gauss())
            }
            AngleLaw::UniformInterval { center, half_width } => {
                stream.range(center - half_width, center + half_width)
            }
            AngleLaw::Triangular { center, half_width } => {
                center + half_width * (stream.uniform() - stream.uniform())
            }
            AngleLaw::Power { alpha } => {
                // Inverse CDF on the magnitude, sign by fair coin. Mass below
                // magnitude 1 is 2cu with u = 1/(1-alpha); CDF there is
                // c u t^(1-alpha) per side.
                let c = maxent::family_constant(*alpha);
                let u = 1.0 / (1.0 - alpha);
                let below = 2.0 * c * u;
                let p = stream.uniform();
                let mag = if p < below {
                    (p / below).powf(u)
                } else {
                    1.0 + (p - below) / (2.0 * c)
                };
                if stream.uniform() < 0.5 {
                    -mag
                } else {
                    mag
                }
            }
        }
    }

    /// True when a density on `[-pi, pi)` exists.
    pub fn is_continuous(&self) -> bool {
        !matches!(self, AngleLaw::PointMass(_))
    }

    /// Density at `t` (in the principal interval). Panics on [`AngleLaw::PointMass`].
    pub fn density(&self, t: f64) -> f64 {
        match self {
            AngleLaw::Uniform => 1.0 / (2.0 * PI),
            AngleLaw::PointMass(_) => panic!("point mass has no density"),
            AngleLaw::WrappedMixture(comps) => comps
                .iter()
                .map(|&(w, mu, sigma)| {
                    let terms = (6.0 * sigma / (2.0 * PI)).ceil() as i64 + 2;
                    let mut f = 0.0;
                    for k in -terms..=terms {
                        let z = (t - mu + 2.0 * PI * k as f64) / sigma;
                        f += (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt());
                    }
                    w * f
                })
                .sum(),
            AngleLaw::UniformInterval { center, half_width } => {
                if (t - center).abs() <= *half_width {
                    1.0 / (2.0 * half_width)
                } else {
                    0.0
                }
            }
            AngleLaw::Triangular { center, half_width } => {
                let z = (t - center).abs();
                if z <= *half_width {
                    (1.0 - z / half_width) / half_width
                } else {
                    0.0
                }
            }
            AngleLaw::Power { alpha } => {
                let c = maxent::family_constant(*alpha);
                let mag = t.abs();
                if mag <= 1.0 {
                    c / mag.powf(*alpha)
                } else if mag <= PI {
                    c
                } else {
                    0.0
                }
            }
        }
    }

    /// Differential entropy in nats (`-inf` for a point mass).
    pub fn entropy(&self) -> Result<f64> {
        match self {
            AngleLaw::Uniform => Ok((2.0 * PI).ln()),
            AngleLaw::PointMass(_) => Ok(f64::NEG_INFINITY),
            AngleLaw::WrappedMixture(_) => {
                let q = quad::integrate(
                    |t| {
                        let f = self.density(t);
                        if f > 1e-300 {
                            -f * f.ln()
                        } else {
                            0.0
                        }
                    },
                    -PI,
                    PI,
                    quad::DEFAULT_TOL,
                )?;
                Ok(q.value)
            }
            AngleLaw::UniformInterval { half_width, .. } => Ok((2.0 * half_width).ln()),
            AngleLaw::Triangular { half_width, .. } => Ok(0.5 + half_width.ln()),
            AngleLaw::Power { alpha } => Ok(maxent::entropy_for_alpha(*alpha)),
        }
    }

    /// `(E[cos 2m theta], E[sin 2m theta])` when available in closed form.
    fn fourier2m(&self, m: u32) -> Option<(f64, f64)> {
        let mf = 2.0 * m as f64;
        match self {
            AngleLaw::Uniform => Some((0.0, 0.0)),
            AngleLaw::PointMass(t) => Some(((mf * t).cos(), (mf * t).sin())),
            AngleLaw::WrappedMixture(comps) => {
                let (mut re, mut im) = (0.0, 0.0);
                for &(w, mu, sigma) in comps {
                    let damp = (-0.5 * mf * mf * sigma * sigma).exp();
                    re += w * damp * (mf * mu).cos();
                    im += w * damp * (mf * mu).sin();
                }
                Some((re, im))
            }
            AngleLaw::UniformInterval { center, half_width } => {
                let x = mf * half_width;
                let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
                Some((sinc * (mf * center).cos(), sinc * (mf * center).sin()))
            }
            AngleLaw::Triangular { center, half_width } => {
                let x = 0.5 * mf * half_width;
                let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
                let s2 = sinc * sinc;
                Some((s2 * (mf * center).cos(), s2 * (mf * center).sin()))
            }
            AngleLaw::Power { .. } => None,
        }
    }

    /// `inf_phi E[ln |sin(theta - phi)|]`, the worst-case log-sine moment.
    ///
    /// Uses the Fourier expansion `ln|sin x| = -ln 2 - sum_m cos(2 m x)/m`:
    /// the infimum is `-ln 2 - sup_phi sum_m (a_m cos 2m phi + b_m sin 2m phi)/m`
    /// with `(a_m, b_m)` the law's trigonometric moments. Atomic laws give
    /// `-inf` (place `phi` on an atom). Supported for the uniform, point-mass
    /// and wrapped-mixture laws — the ones admissible in directional-entropy
    /// checks; laws with slowly decaying moments are rejected.
    pub fn min_log_sine_integral(&self) -> Result<f64> {
        match self {
            AngleLaw::Uniform => Ok(-std::f64::consts::LN_2),
            AngleLaw::PointMass(_) => Ok(f64::NEG_INFINITY),
            AngleLaw::WrappedMixture(comps) => {
                if comps.iter().any(|c| c.2 < 0.02) {
                    return Err(Error::InvalidParameter {
                        name: "theta_law",
                        message: "wrapped component too concentrated (sigma < 0.02) for the sine moment series".into(),
                    });
                }
                // Series coefficients decay like exp(-2 m^2 sigma_min^2).
                let mut coeffs = Vec::new();
                for m in 1..=4000u32 {
                    let (a, b) = self.fourier2m(m).unwrap();
                    let scale = a.hypot(b) / m as f64;
                    coeffs.push((a / m as f64, b / m as f64));
                    if scale < 1e-14 && m > 8 {
                        break;
                    }
                }
                let s = |phi: f64| -> f64 {
                    coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, &(a, b))| {
                            let arg = 2.0 * (i as f64 + 1.0) * phi;
                            a * arg.cos() + b * arg.sin()
                        })
                        .sum()
                };
                // sup over phi in [-pi/2, pi/2) (period pi): coarse grid plus
                // golden-section refinement.
                let grid = 512;
                let mut best_phi = 0.0;
                let mut best = f64::NEG_INFINITY;
                for i in 0..grid {
                    let phi = -PI / 2.0 + PI * i as f64 / grid as f64;
                    let v = s(phi);
                    if v > best {
                        best = v;
                        best_phi = phi;
                    }
                }
                let (mut lo, mut hi) = (best_phi - PI / grid as f64, best_phi + PI / grid as f64);
                let gr = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..80 {
                    let m1 = hi - gr * (hi - lo);
                    let m2 = lo + gr * (hi - lo);
                    if s(m1) < s(m2) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                let sup = s(0.5 * (lo + hi)).max(best);
                Ok(-std::f64::consts::LN_2 - sup)
            }
            _ => Err(Error::InvalidParameter {
                name: "theta_law",
                message: "log-sine moment is only implemented for uniform, point-mass and wrapped-mixture laws".into(),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Planar laws
// ---------------------------------------------------------------------------

/// Law of a random vector in the plane.
#[derive(Debug, Clone, PartialEq)]
pub enum PlaneLaw {
    Gaussian { mean: Vec2, cov: Sym2 },
    /// Uniform phase on a ring of the given radius plus isotropic Gaussian
    /// noise: the composite law of ring-phase fading.
    RingNoise { radius: f64, eps: f64 },
    /// Zero-mean isotropic Gaussian mixture: `(weight, per-component var)`.
    IsoMixture(Vec<(f64, f64)>),
}

impl PlaneLaw {
    pub fn isotropic_gaussian(var: f64) -> PlaneLaw {
        PlaneLaw::Gaussian { mean: Vec2::ZERO, cov: Sym2::isotropic(var) }
    }

    /// Composite law `â + ã` of a fading model.
    pub fn from_model(model: &FadingModel) -> PlaneLaw {
        match *model {
            FadingModel::GaussianIid { s, eps } => Self::isotropic_gaussian(s * s + eps * eps),
            FadingModel::RingPhase { rho, eps } => PlaneLaw::RingNoise { radius: rho, eps },
        }
    }

    pub fn sample(&self, stream: &mut RandomStream) -> Vec2 {
        match self {
            PlaneLaw::Gaussian { mean, cov } => {
                let [l11, l21, l22] = cov.cholesky().expect("covariance must be positive definite");
                let (g1, g2) = (stream.gauss(), stream.gauss());
                Vec2::new(mean.c1 + l11 * g1, mean.c2 + l21 * g1 + l22 * g2)
            }
            PlaneLaw::RingNoise { radius, eps } => {
                let hat = Vec2::from_polar(*radius, stream.angle());
                hat + Vec2::new(eps * stream.gauss(), eps * stream.gauss())
            }
            PlaneLaw::IsoMixture(comps) => {
                let mut u = stream.uniform();
                let mut v = comps.last().unwrap().1;
                for &(w, var) in comps {
                    if u <= w {
                        v = var;
                        break;
                    }
                    u -= w;
                }
                let sd = v.sqrt();
                Vec2::new(sd * stream.gauss(), sd * stream.gauss())
            }
        }
    }

    /// Exact differential entropy where available (Gaussian only).
    pub fn entropy_exact(&self) -> Option<f64> {
        match self {
            PlaneLaw::Gaussian { cov, .. } => gaussian_entropy_2d(*cov).ok(),
            _ => None,
        }
    }

    /// `E[||X||^2]`.
    pub fn second_moment(&self) -> f64 {
        match self {
            PlaneLaw::Gaussian { mean, cov } => cov.trace() + mean.norm_sq(),
            PlaneLaw::RingNoise { radius, eps } => radius * radius + 2.0 * eps * eps,
            PlaneLaw::IsoMixture(comps) => comps.iter().map(|&(w, v)| w * 2.0 * v).sum(),
        }
    }

    /// Whether the law is invariant under rotations (so its angle is uniform
    /// and independent of its radius).
    pub fn is_rotation_invariant(&self) -> bool {
        match self {
            PlaneLaw::Gaussian { mean, cov } => {
                mean.norm() == 0.0 && cov.a12 == 0.0 && cov.a11 == cov.a22
            }
            PlaneLaw::RingNoise { .. } => true,
            PlaneLaw::IsoMixture(_) => true,
        }
    }

    /// Density of the radius `||X||` on `r > 0`, available for the
    /// rotation-invariant laws (Rayleigh for an isotropic Gaussian, a
    /// Rice density for the noisy ring, a Rayleigh mixture otherwise).
    /// `None` for anisotropic or shifted Gaussians and for mixtures with a
    /// zero-variance component (whose radius has an atom).
    pub fn radius_density(&self, r: f64) -> Option<f64> {
        if !self.is_rotation_invariant() {
            return None;
        }
        if r <= 0.0 {
            return Some(0.0);
        }
        match self {
            PlaneLaw::Gaussian { cov, .. } => {
                let v = cov.a11;
                Some(r / v * (-0.5 * r * r / v).exp())
            }
            PlaneLaw::RingNoise { radius, eps } => {
                let v = eps * eps;
                let z = r - radius;
                Some(r / v * (-0.5 * z * z / v).exp() * crate::channel::bessel_i0_scaled(r * radius / v))
            }
            PlaneLaw::IsoMixture(comps) => {
                if comps.iter().any(|&(_, v)| v <= 0.0) {
                    return None;
                }
                Some(comps.iter().map(|&(w, v)| w * r / v * (-0.5 * r * r / v).exp()).sum())
            }
        }
    }

    /// Quadrature split points `[0, ..., r_max]` covering the radius law's
    /// support, paired with [`Self::radius_density`].
    pub fn radius_support(&self) -> Option<Vec<f64>> {
        self.radius_density(1.0)?;
        match self {
            PlaneLaw::Gaussian { cov, .. } => Some(vec![0.0, 9.5 * cov.a11.sqrt()]),
            PlaneLaw::RingNoise { radius, eps } => {
                let hi = radius + 12.0 * eps;
                let mut pts =
                    vec![0.0, (radius - 12.0 * eps).max(0.0), (radius + 12.0 * eps).min(hi), hi];
                pts.dedup_by(|a, b| (*a - *b).abs() < 1e-300);
                Some(pts)
            }
            PlaneLaw::IsoMixture(comps) => {
                let vmax = comps.iter().map(|&(_, v)| v).fold(0.0_f64, f64::max);
                Some(vec![0.0, 9.5 * vmax.sqrt()])
            }
        }
    }

    /// Law of the projection `u' X` as Gaussian-mixture components, when that
    /// projection is itself a finite Gaussian mixture.
    pub fn projection_components(&self, u: Vec2) -> Option<Vec<(f64, f64, f64)>> {
        match self {
            PlaneLaw::Gaussian { mean, cov } => {
                Some(vec![(1.0, u.dot(*mean), cov.quad_form(u).max(0.0))])
            }
            PlaneLaw::IsoMixture(comps) => {
                let n2 = u.norm_sq();
                Some(comps.iter().map(|&(w, v)| (w, 0.0, n2 * v)).collect())
            }
            PlaneLaw::RingNoise { .. } => None,
        }
    }
}
