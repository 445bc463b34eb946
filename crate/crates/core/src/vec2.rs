//! Two-dimensional real vectors (fading realizations, inputs, precoders).

use std::ops::{Add, Mul, Neg, Sub};

/// A point in the plane. Components are always finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub c1: f64,
    pub c2: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { c1: 0.0, c2: 0.0 };

    /// Panics if either component is not finite; every sampling and algebra
    /// path in the crate preserves finiteness, so a violation is a bug at the
    /// call site.
    pub fn new(c1: f64, c2: f64) -> Self {
        assert!(
            c1.is_finite() && c2.is_finite(),
            "Vec2 components must be finite, got ({c1}, {c2})"
        );
        Vec2 { c1, c2 }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Vec2::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.c1 * other.c1 + self.c2 * other.c2
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.c1.hypot(self.c2)
    }

    /// Angle in `[-pi, pi]`, measured from the first axis.
    pub fn angle(self) -> f64 {
        self.c2.atan2(self.c1)
    }

    /// Counter-clockwise rotation by a quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.c2, self.c1)
    }

    /// 2-D cross product `self.c1 * other.c2 - self.c2 * other.c1`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.c1 * other.c2 - self.c2 * other.c1
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(k * self.c1, k * self.c2)
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn unit(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.c1 + rhs.c1, self.c2 + rhs.c2)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.c1 - rhs.c1, self.c2 - rhs.c2)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.c1, -self.c2)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        self.scale(k)
    }
}

/// Symmetric 2x2 matrix (covariances).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        Sym2 { a11, a12, a22 }
    }

    pub fn isotropic(v: f64) -> Self {
        Sym2::new(v, 0.0, v)
    }

    pub fn det(self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a12
    }

    pub fn trace(self) -> f64 {
        self.a11 + self.a22
    }

    pub fn is_positive_definite(self) -> bool {
        self.a11 > 0.0 && self.det() > 0.0
    }

    pub fn add_isotropic(self, v: f64) -> Sym2 {
        Sym2::new(self.a11 + v, self.a12, self.a22 + v)
    }

    /// Largest eigenvalue.
    pub fn lambda_max(self) -> f64 {
        let mean = 0.5 * self.trace();
        let half_gap = 0.5 * (self.a11 - self.a22);
        mean + half_gap.hypot(self.a12)
    }

    /// Quadratic form `u' A u`.
    pub fn quad_form(self, u: Vec2) -> f64 {
        self.a11 * u.c1 * u.c1 + 2.0 * self.a12 * u.c1 * u.c2 + self.a22 * u.c2 * u.c2
    }

    /// Bilinear form `u' A v`.
    pub fn bilinear(self, u: Vec2, v: Vec2) -> f64 {
        self.a11 * u.c1 * v.c1 + self.a12 * (u.c1 * v.c2 + u.c2 * v.c1) + self.a22 * u.c2 * v.c2
    }

    /// Cholesky factor `L` (lower triangular, `L L' = A`); `None` if not
    /// positive definite.
    pub fn cholesky(self) -> Option<[f64; 3]> {
        if !self.is_positive_definite() {
            return None;
        }
        let l11 = self.a11.sqrt();
        let l21 = self.a12 / l11;
        let l22 = (self.a22 - l21 * l21).sqrt();
        Some([l11, l21, l22])
    }
}
