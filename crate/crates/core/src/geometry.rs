//! Exact predicates on rational points: distances, planar crossings,
//! segment/triangle incidence and rational rotations.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::rational::{q, to_f64, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vec3 {
    pub x: Q,
    pub y: Q,
    pub z: Q,
}

impl Vec3 {
    pub fn new(x: Q, y: Q, z: Q) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(Q::zero(), Q::zero(), Q::zero())
    }

    pub fn dot(&self, o: &Vec3) -> Q {
        &self.x * &o.x + &self.y * &o.y + &self.z * &o.z
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        Vec3::new(
            &self.y * &o.z - &self.z * &o.y,
            &self.z * &o.x - &self.x * &o.z,
            &self.x * &o.y - &self.y * &o.x,
        )
    }

    pub fn norm2(&self) -> Q {
        self.dot(self)
    }

    pub fn scale(&self, s: &Q) -> Vec3 {
        Vec3::new(&self.x * s, &self.y * s, &self.z * s)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }

    /// `self + t·(other − self)`.
    pub fn lerp(&self, other: &Vec3, t: &Q) -> Vec3 {
        self + &(other - self).scale(t)
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [to_f64(&self.x), to_f64(&self.y), to_f64(&self.z)]
    }
}

impl<'a> Add<&'a Vec3> for &'a Vec3 {
    type Output = Vec3;
    fn add(self, o: &Vec3) -> Vec3 {
        Vec3::new(&self.x + &o.x, &self.y + &o.y, &self.z + &o.z)
    }
}

impl<'a> Sub<&'a Vec3> for &'a Vec3 {
    type Output = Vec3;
    fn sub(self, o: &Vec3) -> Vec3 {
        Vec3::new(&self.x - &o.x, &self.y - &o.y, &self.z - &o.z)
    }
}

impl Neg for &Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-&self.x, -&self.y, -&self.z)
    }
}

impl Mul<&Vec3> for &Q {
    type Output = Vec3;
    fn mul(self, v: &Vec3) -> Vec3 {
        v.scale(self)
    }
}

pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> Q {
    a.dot(&b.cross(c))
}

fn clamp01(t: Q) -> Q {
    if t.is_negative() {
        Q::zero()
    } else if t > Q::one() {
        Q::one()
    } else {
        t
    }
}

/// Squared distance from `p` to the segment `a b`.
pub fn point_segment_dist2(p: &Vec3, a: &Vec3, b: &Vec3) -> Q {
    let v = b - a;
    let c = v.norm2();
    if c.is_zero() {
        return (p - a).norm2();
    }
    let t = clamp01((p - a).dot(&v) / c);
    (p - &a.lerp(b, &t)).norm2()
}

/// Exact squared distance between segments `p0 p1` and `q0 q1`.
pub fn segment_segment_dist2(p0: &Vec3, p1: &Vec3, q0: &Vec3, q1: &Vec3) -> Q {
    let u = p1 - p0;
    let v = q1 - q0;
    let d = p0 - q0;
    let a = u.norm2();
    let b = u.dot(&v);
    let c = v.norm2();
    let den = &a * &c - &b * &b;
    let mut best: Option<Q> = None;
    let mut consider = |x: Q| {
        if best.as_ref().is_none_or(|b| &x < b) {
            best = Some(x);
        }
    };
    if den.is_positive() {
        let ud = u.dot(&d);
        let vd = v.dot(&d);
        let s = (&b * &vd - &c * &ud) / &den;
        let t = (&a * &vd - &b * &ud) / &den;
        if !s.is_negative() && s <= Q::one() && !t.is_negative() && t <= Q::one() {
            let w = &(&d + &u.scale(&s)) - &v.scale(&t);
            consider(w.norm2());
        }
    }
    consider(point_segment_dist2(p0, q0, q1));
    consider(point_segment_dist2(p1, q0, q1));
    consider(point_segment_dist2(q0, p0, p1));
    consider(point_segment_dist2(q1, p0, p1));
    best.expect("at least one candidate")
}

/// Outcome of a segment against a closed triangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TriangleHit {
    Miss,
    /// Transverse interior hit, with the sign of `det(b − a, c − a, q − p)`.
    Hit(i32),
    /// Touches an edge, a vertex, or lies in the triangle's plane.
    Degenerate,
}

pub fn segment_triangle(p: &Vec3, qp: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> TriangleHit {
    let e1 = b - a;
    let e2 = c - a;
    let d = qp - p;
    let normal = e1.cross(&e2);
    if normal.is_zero() {
        return TriangleHit::Miss;
    }
    let sp = normal.dot(&(p - a));
    let sq = normal.dot(&(qp - a));
    if (sp.is_positive() && sq.is_positive()) || (sp.is_negative() && sq.is_negative()) {
        return TriangleHit::Miss;
    }
    if sp.is_zero() && sq.is_zero() {
        // Coplanar: any contact is degenerate.
        return if coplanar_contact(p, qp, a, b, c, &normal) { TriangleHit::Degenerate } else { TriangleHit::Miss };
    }
    // Edge-side tests of the line through p, q against the triangle.
    let s1 = det3(&(a - p), &(b - p), &d);
    let s2 = det3(&(b - p), &(c - p), &d);
    let s3 = det3(&(c - p), &(a - p), &d);
    let pos = s1.is_positive() && s2.is_positive() && s3.is_positive();
    let neg = s1.is_negative() && s2.is_negative() && s3.is_negative();
    let outside = (s1.is_positive() || s2.is_positive() || s3.is_positive())
        && (s1.is_negative() || s2.is_negative() || s3.is_negative());
    if outside {
        return TriangleHit::Miss;
    }
    if sp.is_zero() || sq.is_zero() || !(pos || neg) {
        return TriangleHit::Degenerate;
    }
    let orient = det3(&e1, &e2, &d);
    TriangleHit::Hit(if orient.is_positive() { 1 } else { -1 })
}

fn coplanar_contact(p: &Vec3, qp: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3, normal: &Vec3) -> bool {
    // Drop the dominant normal coordinate and test in 2D.
    let nx = to_f64(&normal.x).abs();
    let ny = to_f64(&normal.y).abs();
    let nz = to_f64(&normal.z).abs();
    let proj = |v: &Vec3| -> P2 {
        if nx >= ny && nx >= nz {
            P2::new(v.y.clone(), v.z.clone())
        } else if ny >= nz {
            P2::new(v.z.clone(), v.x.clone())
        } else {
            P2::new(v.x.clone(), v.y.clone())
        }
    };
    let (p, qp, a, b, c) = (proj(p), proj(qp), proj(a), proj(b), proj(c));
    if point_in_triangle(&p, &a, &b, &c) || point_in_triangle(&qp, &a, &b, &c) {
        return true;
    }
    [(&a, &b), (&b, &c), (&c, &a)]
        .iter()
        .any(|(x, y)| !matches!(planar_crossing(&p, &qp, x, y), PlanarCrossing::None))
}

fn point_in_triangle(p: &P2, a: &P2, b: &P2, c: &P2) -> bool {
    let o1 = orient2(a, b, p);
    let o2 = orient2(b, c, p);
    let o3 = orient2(c, a, p);
    let has_neg = o1.is_negative() || o2.is_negative() || o3.is_negative();
    let has_pos = o1.is_positive() || o2.is_positive() || o3.is_positive();
    !(has_neg && has_pos)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct P2 {
    pub u: Q,
    pub v: Q,
}

impl P2 {
    pub fn new(u: Q, v: Q) -> Self {
        P2 { u, v }
    }

    pub fn sub(&self, o: &P2) -> P2 {
        P2::new(&self.u - &o.u, &self.v - &o.v)
    }

    pub fn cross(&self, o: &P2) -> Q {
        &self.u * &o.v - &self.v * &o.u
    }

    pub fn dot(&self, o: &P2) -> Q {
        &self.u * &o.u + &self.v * &o.v
    }
}

pub fn orient2(a: &P2, b: &P2, c: &P2) -> Q {
    b.sub(a).cross(&c.sub(a))
}

/// Intersection of two planar segments `a0 a1` and `b0 b1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanarCrossing {
    None,
    /// Proper crossing at parameters `s` on the first and `t` on the second;
    /// `sign` is the sign of `(a1 − a0) × (b1 − b0)`.
    Proper { s: Q, t: Q, sign: i32 },
    /// Endpoint contact or collinear overlap.
    Degenerate,
}

pub fn planar_crossing(a0: &P2, a1: &P2, b0: &P2, b1: &P2) -> PlanarCrossing {
    let r = a1.sub(a0);
    let s = b1.sub(b0);
    let w = b0.sub(a0);
    let den = r.cross(&s);
    if den.is_zero() {
        if !r.cross(&w).is_zero() || !s.cross(&a0.sub(b0)).is_zero() {
            return PlanarCrossing::None;
        }
        return if collinear_overlap(a0, a1, b0, b1) { PlanarCrossing::Degenerate } else { PlanarCrossing::None };
    }
    let lam = w.cross(&s) / &den;
    let mu = w.cross(&r) / &den;
    let zero = Q::zero();
    let one = Q::one();
    if lam < zero || lam > one || mu < zero || mu > one {
        return PlanarCrossing::None;
    }
    if lam == zero || lam == one || mu == zero || mu == one {
        return PlanarCrossing::Degenerate;
    }
    PlanarCrossing::Proper { s: lam, t: mu, sign: if den.is_positive() { 1 } else { -1 } }
}

fn collinear_overlap(a0: &P2, a1: &P2, b0: &P2, b1: &P2) -> bool {
    let key = |p: &P2| (p.u.clone(), p.v.clone());
    let (amin, amax) = if key(a0) <= key(a1) { (key(a0), key(a1)) } else { (key(a1), key(a0)) };
    let (bmin, bmax) = if key(b0) <= key(b1) { (key(b0), key(b1)) } else { (key(b1), key(b0)) };
    amin <= bmax && bmin <= amax
}

/// Signed winding number of a closed planar polygon around the origin.
/// The polygon must avoid the origin.
pub fn winding_around_origin(points: &[P2]) -> i64 {
    let zero = Q::zero();
    let origin = P2::new(Q::zero(), Q::zero());
    let mut wn = 0;
    for i in 0..points.len() {
        let p = &points[i];
        let qn = &points[(i + 1) % points.len()];
        if p.v <= zero {
            if qn.v > zero && orient2(p, qn, &origin).is_positive() {
                wn += 1;
            }
        } else if qn.v <= zero && orient2(p, qn, &origin).is_negative() {
            wn -= 1;
        }
    }
    wn
}

/// Rational rotation of the plane by the Pythagorean angle of `(m, n)`.
#[derive(Clone, Debug)]
pub struct PlaneRotation {
    pub cos: Q,
    pub sin: Q,
}

impl PlaneRotation {
    pub fn identity() -> Self {
        PlaneRotation { cos: Q::one(), sin: Q::zero() }
    }

    pub fn pythagorean(m: i64, n: i64) -> Self {
        let h = q(m * m + n * n);
        PlaneRotation { cos: q(m * m - n * n) / &h, sin: q(2 * m * n) / h }
    }

    pub fn apply(&self, x: &Q, y: &Q) -> (Q, Q) {
        (&self.cos * x - &self.sin * y, &self.sin * x + &self.cos * y)
    }
}

/// Rational rotation of space from an integer quaternion.
#[derive(Clone, Debug)]
pub struct SpaceRotation {
    rows: [[Q; 3]; 3],
}

impl SpaceRotation {
    pub fn from_quaternion(a: i64, b: i64, c: i64, d: i64) -> Self {
        let n = q(a * a + b * b + c * c + d * d);
        let e = |x: i64| q(x) / &n;
        SpaceRotation {
            rows: [
                [e(a * a + b * b - c * c - d * d), e(2 * (b * c - a * d)), e(2 * (b * d + a * c))],
                [e(2 * (b * c + a * d)), e(a * a - b * b + c * c - d * d), e(2 * (c * d - a * b))],
                [e(2 * (b * d - a * c)), e(2 * (c * d + a * b)), e(a * a - b * b - c * c + d * d)],
            ],
        }
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let r = |i: usize| &self.rows[i][0] * &v.x + &self.rows[i][1] * &v.y + &self.rows[i][2] * &v.z;
        Vec3::new(r(0), r(1), r(2))
    }
}

/// Float bounding box used to skip exact tests that cannot succeed.
#[derive(Clone, Copy, Debug)]
pub struct Bbox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Bbox {
    pub fn of(points: &[&Vec3]) -> Bbox {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            let f = p.to_f64();
            for k in 0..3 {
                lo[k] = lo[k].min(f[k]);
                hi[k] = hi[k].max(f[k]);
            }
        }
        // Absorb conversion error.
        for k in 0..3 {
            let pad = 1e-9 * (1.0 + lo[k].abs().max(hi[k].abs()));
            lo[k] -= pad;
            hi[k] += pad;
        }
        Bbox { lo, hi }
    }

    pub fn overlaps(&self, o: &Bbox) -> bool {
        (0..3).all(|k| self.lo[k] <= o.hi[k] && o.lo[k] <= self.hi[k])
    }

    pub fn shifted_z(&self, dz: f64) -> Bbox {
        let mut b = *self;
        b.lo[2] += dz;
        b.hi[2] += dz;
        b
    }
}
