//! Frame-indexed compactification `S³ = L ⊔_g (ℝ² × S¹)`.
//!
//! Only the collar transition map and its action on end classes are
//! realized; no triangulation of S³ is built.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::homology::{gluing_matrix, LatticeClass, UnimodularMatrix};
use crate::rational::Q;

/// A point `(r, (s, t))` of the overlap ℝ × T², angles in turns and reduced to `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollarPoint {
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub r: Q,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub s: Q,
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub t: Q,
}

fn frac(x: &Q) -> Q {
    x - x.floor()
}

impl CollarPoint {
    pub fn new(r: Q, s: Q, t: Q) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::InvalidArgument("collar coordinate r must be nonzero".into()));
        }
        Ok(CollarPoint { r, s: frac(&s), t: frac(&t) })
    }
}

fn act(a: &UnimodularMatrix, p: &CollarPoint, r: Q) -> CollarPoint {
    let s = Q::from_integer(a.a.into()) * &p.s + Q::from_integer(a.b.into()) * &p.t;
    let t = Q::from_integer(a.c.into()) * &p.s + Q::from_integer(a.d.into()) * &p.t;
    CollarPoint { r, s: frac(&s), t: frac(&t) }
}

/// `(r, (s, t)) ↦ (−r, A_f·(s, t))`.
pub fn apply_transition(p: &CollarPoint, f: LatticeClass, v: LatticeClass) -> Result<CollarPoint> {
    let a = gluing_matrix(f, v)?;
    Ok(act(&a, p, -p.r.clone()))
}

/// Inverse of [`apply_transition`].
pub fn inverse_transition(p: &CollarPoint, f: LatticeClass, v: LatticeClass) -> Result<CollarPoint> {
    let a = gluing_matrix(f, v)?.inverse();
    Ok(act(&a, p, -p.r.clone()))
}

/// Class of a transported end curve in the glued torus's coordinates.
pub fn image_class(c: LatticeClass, f: LatticeClass, v: LatticeClass) -> Result<LatticeClass> {
    Ok(gluing_matrix(f, v)?.apply(c))
}

/// True iff `c` dies in the complement of the glued core, i.e. `c ∈ ℤ·f`.
pub fn caps_off(c: LatticeClass, f: LatticeClass, v: LatticeClass) -> Result<bool> {
    // A·f = −v, so A·c is a multiple of the glued kernel generator v iff c ∥ f.
    let image = image_class(c, f, v)?;
    Ok(image.det(v) == 0)
}
