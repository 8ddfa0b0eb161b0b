//! Arithmetic in the three dimensional Heisenberg group and the action of its
//! volume preserving automorphisms `SL(2,R) ⋉ R²`.
//!
//! The group law is the polarized one,
//!
//! ```text
//! (r, s, t) + (r', s', t') = (r + r', s + s', t + t' + r s' - s r')
//! ```
//!
//! so the center is the `t` axis and the commutator of two points is twice
//! the standard symplectic form of their flat parts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|det g - 1|` for matrices that are meant to lie in `SL(2,R)`.
pub const DET_TOLERANCE: f64 = 1e-9;

/// A real 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    /// Builds the matrix whose columns are `e1` and `e2`.
    pub fn from_columns(e1: [f64; 2], e2: [f64; 2]) -> Self {
        Mat2::new(e1[0], e2[0], e1[1], e2[1])
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn columns(&self) -> [[f64; 2]; 2] {
        [[self.a, self.c], [self.b, self.d]]
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_finite() && (self.det() - 1.0).abs() <= DET_TOLERANCE
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }
}

/// The inverse transpose `g* = (g⁻¹)ᵗ` of a unimodular matrix.
///
/// For `det g = 1` this is `[[d, -c], [-b, a]]`; the determinant is divided
/// out so that matrices within [`DET_TOLERANCE`] of `SL(2,R)` stay consistent.
pub fn g_star(g: &Mat2) -> Result<Mat2> {
    let det = g.det();
    if !g.is_finite() || (det - 1.0).abs() > DET_TOLERANCE {
        return Err(Error::Invariant(format!(
            "g_star expects det(g) = 1, got {det:e}"
        )));
    }
    Ok(Mat2::new(g.d / det, -g.c / det, -g.b / det, g.a / det))
}

/// A point of `H(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl HPoint {
    pub const ZERO: HPoint = HPoint::new(0.0, 0.0, 0.0);

    pub const fn new(r: f64, s: f64, t: f64) -> Self {
        HPoint { r, s, t }
    }

    pub fn flat(&self) -> [f64; 2] {
        [self.r, self.s]
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.s.is_finite() && self.t.is_finite()
    }

    pub fn max_abs_diff(&self, other: &HPoint) -> f64 {
        (self.r - other.r)
            .abs()
            .max((self.s - other.s).abs())
            .max((self.t - other.t).abs())
    }
}

impl From<HIntPoint> for HPoint {
    fn from(p: HIntPoint) -> Self {
        HPoint::new(p.m1 as f64, p.m2 as f64, p.k as f64)
    }
}

/// A point of the integer Heisenberg group `H(Z)`.
///
/// Products of two coordinates must fit in an `i64`, so keep `|coords| < 2³⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HIntPoint {
    pub m1: i64,
    pub m2: i64,
    pub k: i64,
}

impl HIntPoint {
    pub const ZERO: HIntPoint = HIntPoint::new(0, 0, 0);

    pub const fn new(m1: i64, m2: i64, k: i64) -> Self {
        HIntPoint { m1, m2, k }
    }

    pub fn flat(&self) -> [i64; 2] {
        [self.m1, self.m2]
    }
}

pub fn h_add(p: HPoint, q: HPoint) -> HPoint {
    HPoint::new(p.r + q.r, p.s + q.s, p.t + q.t + p.r * q.s - p.s * q.r)
}

pub fn h_neg(p: HPoint) -> HPoint {
    HPoint::new(-p.r, -p.s, -p.t)
}

/// Exact group law on `H(Z)`.
pub fn h_add_int(p: HIntPoint, q: HIntPoint) -> HIntPoint {
    HIntPoint::new(p.m1 + q.m1, p.m2 + q.m2, p.k + q.k + p.m1 * q.m2 - p.m2 * q.m1)
}

pub fn h_neg_int(p: HIntPoint) -> HIntPoint {
    HIntPoint::new(-p.m1, -p.m2, -p.k)
}

/// `gcd(|a|, |b|)` with `gcd(0, 0) = 0`.
pub fn gcd(a: i64, b: i64) -> u64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A point is primitive when its flat part is a primitive vector of `Z²`.
/// Central points `(0, 0, k)` are never primitive.
pub fn is_primitive(p: HIntPoint) -> bool {
    gcd(p.m1, p.m2) == 1
}

/// An element `(g, v)` of `Aut⁺₁(H(R)) ≅ SL(2,R) ⋉ R²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutElement {
    g: Mat2,
    v: [f64; 2],
}

impl AutElement {
    pub const IDENTITY: AutElement = AutElement {
        g: Mat2::IDENTITY,
        v: [0.0, 0.0],
    };

    pub fn new(g: Mat2, v: [f64; 2]) -> Result<Self> {
        if !g.is_unimodular() {
            return Err(Error::Domain(format!(
                "automorphism matrix must have det 1, got {:e}",
                g.det()
            )));
        }
        if !(v[0].is_finite() && v[1].is_finite()) {
            return Err(Error::Domain("automorphism translation must be finite".into()));
        }
        Ok(AutElement { g, v })
    }

    pub fn g(&self) -> Mat2 {
        self.g
    }

    pub fn v(&self) -> [f64; 2] {
        self.v
    }

    /// The 3×3 matrix by which `self` acts on column vectors `(r, s, t)`,
    /// as rows.
    pub fn matrix3(&self) -> [[f64; 3]; 3] {
        let gs = self.g_star();
        let w = [
            self.v[0] * gs.a + self.v[1] * gs.c,
            self.v[0] * gs.b + self.v[1] * gs.d,
        ];
        [[gs.a, gs.b, 0.0], [gs.c, gs.d, 0.0], [-w[0], -w[1], 1.0]]
    }

    fn g_star(&self) -> Mat2 {
        // `new` checked the determinant.
        g_star(&self.g).expect("unimodular by construction")
    }
}

/// Applies `(g, v)` to a point: the flat part goes to `g*·(r, s)` and the
/// height to `t - vᵗ·g*·(r, s)`.
pub fn aut_act(a: &AutElement, p: HPoint) -> HPoint {
    let flat = a.g_star().apply(p.flat());
    let shear = a.v[0] * flat[0] + a.v[1] * flat[1];
    HPoint::new(flat[0], flat[1], p.t - shear)
}

/// `(g_a, v_a) ∘ (g_b, v_b) = (g_a g_b, g_a v_b + v_a)`.
pub fn aut_compose(a: &AutElement, b: &AutElement) -> AutElement {
    let gv = a.g.apply(b.v);
    AutElement {
        g: a.g.mul(&b.g),
        v: [gv[0] + a.v[0], gv[1] + a.v[1]],
    }
}
