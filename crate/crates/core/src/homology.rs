//! The lattice H₁(L′) ≅ ℤ², frames and the torus gluing matrix.
//!
//! Basis: `μ = (1, 0)` is the plane winding around the origin of ℝ²
//! (counterclockwise), `λ = (0, 1)` is the fiber circle oriented by
//! increasing θ. The kernel generator of H₁(L′) → H₁(L) is pinned to `μ`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A class `m·μ + w·λ` in H₁(L′).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeClass {
    pub m: i64,
    pub w: i64,
}

impl LatticeClass {
    pub const MU: LatticeClass = LatticeClass { m: 1, w: 0 };
    pub const LAMBDA: LatticeClass = LatticeClass { m: 0, w: 1 };

    pub const fn new(m: i64, w: i64) -> Self {
        LatticeClass { m, w }
    }

    /// `self.m * other.w - self.w * other.m`.
    pub fn det(self, other: LatticeClass) -> i64 {
        self.m * other.w - self.w * other.m
    }

    pub fn is_primitive(self) -> bool {
        self.m.gcd(&self.w) == 1
    }
}

impl fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.w)
    }
}

impl Add for LatticeClass {
    type Output = LatticeClass;
    fn add(self, o: LatticeClass) -> LatticeClass {
        LatticeClass::new(self.m + o.m, self.w + o.w)
    }
}

impl Sub for LatticeClass {
    type Output = LatticeClass;
    fn sub(self, o: LatticeClass) -> LatticeClass {
        LatticeClass::new(self.m - o.m, self.w - o.w)
    }
}

impl Neg for LatticeClass {
    type Output = LatticeClass;
    fn neg(self) -> LatticeClass {
        LatticeClass::new(-self.m, -self.w)
    }
}

impl Mul<LatticeClass> for i64 {
    type Output = LatticeClass;
    fn mul(self, c: LatticeClass) -> LatticeClass {
        LatticeClass::new(self * c.m, self * c.w)
    }
}

/// A normalized frame `p·μ + λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrameInt(pub i64);

impl FrameInt {
    pub fn class(self) -> LatticeClass {
        LatticeClass::new(self.0, 1)
    }
}

impl fmt::Display for FrameInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Integer 2×2 matrix `[[a, b], [c, d]]` of determinant +1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl UnimodularMatrix {
    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, x: LatticeClass) -> LatticeClass {
        LatticeClass::new(self.a * x.m + self.b * x.w, self.c * x.m + self.d * x.w)
    }

    pub fn inverse(&self) -> UnimodularMatrix {
        UnimodularMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn rows(&self) -> [[i64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

fn check_generator(v: LatticeClass) -> Result<()> {
    if v.is_primitive() {
        Ok(())
    } else {
        Err(Error::InvalidKernelGenerator(v.m, v.w))
    }
}

fn require_frame(f: LatticeClass, v: LatticeClass) -> Result<()> {
    if is_frame(f, v)? {
        Ok(())
    } else {
        Err(Error::NotAFrame { f1: f.m, f2: f.w, v1: v.m, v2: v.w, det: f.m * v.w - f.w * v.m })
    }
}

/// `|f₁v₂ − f₂v₁| = 1`.
pub fn is_frame(f: LatticeClass, v: LatticeClass) -> Result<bool> {
    check_generator(v)?;
    Ok((f.m * v.w - f.w * v.m).abs() == 1)
}

/// Reduces a frame class to the integer `p` with `±f = p·μ + λ`.
///
/// The kernel generator must be `±μ`; the artifact pins its orientation.
pub fn normalize_frame(f: LatticeClass, v: LatticeClass) -> Result<FrameInt> {
    require_frame(f, v)?;
    if v.w != 0 || v.m.abs() != 1 {
        return Err(Error::InvalidArgument(format!(
            "kernel generator must be ±(1, 0) in the canonical basis, got {v}"
        )));
    }
    // |det| = 1 with v = ±μ forces f.w = ±1.
    Ok(FrameInt(f.m * f.w))
}

/// `k = p′ − p`, so that `f′ = f + k·v` up to sign.
pub fn frame_difference(f: FrameInt, f_prime: FrameInt) -> i64 {
    f_prime.0 - f.0
}

/// The orientation preserving map with `A·v = f` and `A·f = −v`.
pub fn gluing_matrix(f: LatticeClass, v: LatticeClass) -> Result<UnimodularMatrix> {
    require_frame(f, v)?;
    // A·[v f] = [f −v]  ⇒  A = [f −v]·[v f]⁻¹, and det[v f] = ±1.
    let det = v.m * f.w - f.m * v.w;
    let inv = [[f.w * det, -f.m * det], [-v.w * det, v.m * det]];
    let lhs = [[f.m, -v.m], [f.w, -v.w]];
    let mul = |r: usize, c: usize| lhs[r][0] * inv[0][c] + lhs[r][1] * inv[1][c];
    let a = UnimodularMatrix { a: mul(0, 0), b: mul(0, 1), c: mul(1, 0), d: mul(1, 1) };
    debug_assert_eq!(a.det(), 1);
    Ok(a)
}
