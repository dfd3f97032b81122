//! Framed knots in ℝ³ and the frames of their conormal Lagrangians.
//!
//! In the end lattice of the conormal `(μ, λ)`, `μ` is the normal circle
//! (the kernel generator) and `λ` the Seifert longitude. A knot framing `k`
//! gives the class `k·μ + λ`.

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::curve::{emit_curves, parse_curves, PLCurve};
use crate::error::{Error, Result};
use crate::geometry::{planar_crossing, point_segment_dist2, segment_segment_dist2, PlanarCrossing, SpaceRotation, Vec3, P2};
use crate::homology::{is_frame, normalize_frame, FrameInt, LatticeClass};
use crate::rational::{fmt_q, q, qr, Q};
use crate::rng::{derive_seed, seeded_rng, MAX_ATTEMPTS};

/// Offset between knot framings and frames of `L_K`.
pub const FRAME_OFFSET: i64 = 0;

/// A closed PL loop in ℝ³; the closing vertex repeats the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Knot {
    vertices: Vec<Vec3>,
}

impl Knot {
    /// Accepts the vertex list with or without the repeated closing vertex.
    pub fn new(mut vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::OpenCurve("a knot needs at least three distinct vertices".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(Error::InvalidArgument(format!("vertices {i} and {} coincide", (i + 1) % n)));
            }
        }
        vertices.push(vertices[0].clone());
        let k = Knot { vertices };
        if k.self_margin_sq().is_zero() {
            return Err(Error::NotDisjoint("knot is not embedded".into()));
        }
        Ok(k)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn num_segments(&self) -> usize {
        self.vertices.len() - 1
    }

    fn segment(&self, i: usize) -> (&Vec3, &Vec3) {
        (&self.vertices[i], &self.vertices[i + 1])
    }

    pub fn reversed(&self) -> Knot {
        Knot { vertices: self.vertices.iter().rev().cloned().collect() }
    }

    pub fn map(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Knot> {
        Knot::new(self.vertices.iter().map(f).collect())
    }

    /// Splits segment `i` at parameter `t ∈ (0, 1)`.
    pub fn subdivide(&self, i: usize, t: &Q) -> Knot {
        let (a, b) = self.segment(i);
        let mut v = self.vertices.clone();
        v.insert(i + 1, a.lerp(b, t));
        Knot { vertices: v }
    }

    /// Drops vertices in the middle of straight runs.
    pub fn simplified(&self) -> Knot {
        let n = self.num_segments();
        let keep: Vec<Vec3> = (0..n)
            .filter(|&i| {
                let prev = &self.vertices[(i + n - 1) % n];
                let (a, b) = self.segment(i);
                let (d0, d1) = (a - prev, b - a);
                !(d0.cross(&d1).is_zero() && d0.dot(&d1).is_positive())
            })
            .map(|i| self.vertices[i].clone())
            .collect();
        let mut vertices = keep;
        vertices.push(vertices[0].clone());
        Knot { vertices }
    }

    /// Squared distance between non-adjacent segments of the simplified polygon.
    pub fn self_margin_sq(&self) -> Q {
        let k = self.simplified();
        k.raw_margin_sq()
    }

    fn raw_margin_sq(&self) -> Q {
        let n = self.num_segments();
        let mut best: Option<Q> = None;
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a0, a1) = self.segment(i);
                let (b0, b1) = self.segment(j);
                let d = segment_segment_dist2(a0, a1, b0, b1);
                if best.as_ref().is_none_or(|x| &d < x) {
                    best = Some(d);
                }
            }
        }
        // A triangle has no non-adjacent pair; use its shortest edge instead.
        best.unwrap_or_else(|| (0..n).map(|i| { let (a, b) = self.segment(i); (b - a).norm2() }).min().unwrap())
    }

    fn as_curve(&self) -> PLCurve {
        PLCurve::new(self.vertices.clone()).expect("closed polygon")
    }
}

pub fn knot_distance_sq(k1: &Knot, k2: &Knot) -> Q {
    let mut best: Option<Q> = None;
    for i in 0..k1.num_segments() {
        for j in 0..k2.num_segments() {
            let (a0, a1) = k1.segment(i);
            let (b0, b1) = k2.segment(j);
            let d = segment_segment_dist2(a0, a1, b0, b1);
            if best.as_ref().is_none_or(|x| &d < x) {
                best = Some(d);
            }
        }
    }
    best.expect("knots have segments")
}

/// Linking number in ℝ³: signed crossings where `k1` passes over `k2` in a
/// rationally rotated projection.
pub fn link_r3(k1: &Knot, k2: &Knot, seed: u64) -> Result<i64> {
    if !knot_distance_sq(k1, k2).is_positive() {
        return Err(Error::NotDisjoint("knots intersect".into()));
    }
    let mut trail = Vec::with_capacity(MAX_ATTEMPTS);
    for attempt in 0..MAX_ATTEMPTS {
        let s = derive_seed(seed, attempt as u64);
        trail.push(s);
        let mut rng = seeded_rng(s);
        let mut c = || rng.gen_range(-9i64..=9);
        let rot = SpaceRotation::from_quaternion(c() | 1, c(), c(), c());
        if let Some(v) = projected_crossings(k1, k2, &rot) {
            return Ok(v);
        }
    }
    Err(Error::Degenerate { msg: "no generic knot projection found".into(), seeds: trail })
}

fn projected_crossings(k1: &Knot, k2: &Knot, rot: &SpaceRotation) -> Option<i64> {
    let proj = |k: &Knot| -> Vec<(P2, Q)> {
        k.vertices
            .iter()
            .map(|v| {
                let r = rot.apply(v);
                (P2::new(r.x, r.y), r.z)
            })
            .collect()
    };
    let (p1, p2) = (proj(k1), proj(k2));
    let mut total = 0;
    for a in p1.windows(2) {
        for b in p2.windows(2) {
            match planar_crossing(&a[0].0, &a[1].0, &b[0].0, &b[1].0) {
                PlanarCrossing::None => {}
                PlanarCrossing::Degenerate => return None,
                PlanarCrossing::Proper { s, t, sign } => {
                    let h1 = &a[0].1 + (&a[1].1 - &a[0].1) * &s;
                    let h2 = &b[0].1 + (&b[1].1 - &b[0].1) * &t;
                    if h1 > h2 {
                        total += sign as i64;
                    }
                }
            }
        }
    }
    Some(total)
}

/// Every vertex of `other` lies within `margin / 2` of `k`.
fn in_tube(k: &Knot, other: &Knot) -> bool {
    let limit = k.self_margin_sq() / q(4);
    other.vertices.iter().all(|p| (0..k.num_segments()).any(|i| {
        let (a, b) = k.segment(i);
        point_segment_dist2(p, a, b) < limit
    }))
}

/// Framing of `k` given by the pushoff `k2`.
pub fn framing_from_pushoff(k: &Knot, k2: &Knot, seed: u64) -> Result<i64> {
    if !in_tube(k, k2) {
        return Err(Error::InvalidArgument("pushoff leaves the tubular neighborhood of the knot".into()));
    }
    link_r3(k, k2, seed)
}

/// Perpendicular to `d` and `w`, scaled to sup-norm one.
fn side(d: &Vec3, w: &Vec3) -> Vec3 {
    let s = d.cross(w);
    let m = [&s.x, &s.y, &s.z].into_iter().map(|x| x.abs()).max().expect("three coordinates");
    s.scale(&(q(1) / m))
}

/// Pushoff `k + ε·w` with `turns` extra full twists inserted along segment 0.
fn twisted_pushoff(k: &Knot, w: &Vec3, eps: &Q, turns: i64) -> Result<Knot> {
    let (a, b) = k.segment(0);
    let d = b - a;
    let u = w.scale(eps);
    let v = side(&d, w).scale(eps);
    let n = turns.unsigned_abs() as i64;
    let mut pts = vec![a + &u];
    // Each turn walks u → ±v → −u → ∓v → u over its own slice of segment 0.
    let slices = 4 * n + 2;
    let ring = [u.clone(), if turns > 0 { v.clone() } else { -&v }, -&u, if turns > 0 { -&v } else { v.clone() }];
    for j in 1..slices {
        let base = a.lerp(b, &qr(j, slices));
        let off = if j > 4 * n { &u } else { &ring[(j % 4) as usize] };
        pts.push(&base + off);
    }
    for p in &k.vertices[1..k.num_segments()] {
        pts.push(p + &u);
    }
    Knot::new(pts)
}

fn default_directions() -> Vec<Vec3> {
    let v = |x: i64, y: i64, z: i64| Vec3::new(q(x), q(y), q(z));
    vec![v(0, 0, 1), v(1, 0, 0), v(0, 1, 0), v(1, 2, 3), v(-3, 1, 2), v(2, -3, 1), v(1, 1, -2)]
}

/// Largest power of two with `(ε·4)² · 3 < margin²`.
pub fn default_epsilon(k: &Knot) -> Q {
    let m2 = k.self_margin_sq();
    let mut eps = q(1);
    while &eps * &eps * q(48) >= m2 {
        eps /= q(2);
    }
    eps
}

/// A pushoff with framing `turns`: a constant-direction pushoff corrected by
/// full twists, verified against the crossing count.
pub fn pushoff(k: &Knot, turns: i64, eps: Option<Q>, seed: u64) -> Result<Knot> {
    let eps = eps.unwrap_or_else(|| default_epsilon(k));
    if !eps.is_positive() || &eps * &eps * q(48) >= k.self_margin_sq() {
        return Err(Error::InvalidArgument(format!("pushoff distance {} exceeds the embedding margin", fmt_q(&eps))));
    }
    for w in default_directions() {
        // Directions along a segment make the straight pushoff meet the knot.
        if (0..k.num_segments()).any(|i| { let (a, b) = k.segment(i); (b - a).cross(&w).is_zero() }) {
            continue;
        }
        let straight = twisted_pushoff(k, &w, &eps, 0)?;
        let Ok(base) = framing_from_pushoff(k, &straight, seed) else { continue };
        let out = twisted_pushoff(k, &w, &eps, turns - base)?;
        if framing_from_pushoff(k, &out, seed).ok() == Some(turns) {
            return Ok(out);
        }
    }
    Err(Error::Degenerate { msg: "could not build a pushoff with the requested framing".into(), seeds: vec![seed] })
}

pub fn knot_frame_to_l_frame(k: i64) -> FrameInt {
    FrameInt(k + FRAME_OFFSET)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Framing {
    Integer(i64),
    Pushoff(Knot),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramedKnot {
    pub knot: Knot,
    pub framing: Framing,
    pub component_id: Option<String>,
}

impl FramedKnot {
    pub fn framing_integer(&self, seed: u64) -> Result<i64> {
        match &self.framing {
            Framing::Integer(k) => Ok(*k),
            Framing::Pushoff(p) => framing_from_pushoff(&self.knot, p, seed),
        }
    }
}

/// Knot file: curve blocks in `x y z` columns with an optional `framing: k`
/// line; a second block is an explicit pushoff. Without either the framing is 0.
pub fn parse_knot(text: &str) -> Result<FramedKnot> {
    let mut framing = None;
    let mut body = String::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim().strip_prefix("framing:") {
            let k = rest.trim().parse::<i64>().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad framing {:?}", rest.trim()) })?;
            framing = Some(k);
            body.push('\n');
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let curves = parse_curves(&body)?;
    let to_knot = |c: &PLCurve| -> Result<Knot> {
        if c.winding() != 0 {
            return Err(Error::OpenCurve("knot must close up in ℝ³".into()));
        }
        Knot::new(c.vertices().to_vec())
    };
    let (knot, pushoff) = match curves.as_slice() {
        [k] => (to_knot(k)?, None),
        [k, p] => (to_knot(k)?, Some(to_knot(p)?)),
        _ => return Err(Error::Parse { line: 0, msg: format!("expected one or two curve blocks, found {}", curves.len()) }),
    };
    let component_id = curves[0].label.clone();
    let framing = match (framing, pushoff) {
        (Some(_), Some(_)) => return Err(Error::Parse { line: 0, msg: "give either a framing line or a pushoff, not both".into() }),
        (Some(k), None) => Framing::Integer(k),
        (None, Some(p)) => Framing::Pushoff(p),
        (None, None) => Framing::Integer(0),
    };
    Ok(FramedKnot { knot, framing, component_id })
}

pub fn emit_knot(k: &Knot) -> String {
    emit_curves(&[k.as_curve()])
}

/// Covector field `η` along a framed knot with `⟨η, γ̇⟩ = ⟨η, f⟩ = 0`.
#[derive(Clone, Debug)]
pub struct ConormalCycle {
    pub base: Knot,
    /// One covector per vertex, orthogonal to the outgoing edge and to `f`.
    pub covector: Vec<Vec3>,
    /// Class of the graph of `η` in the end lattice `(μ, λ)`.
    pub class: LatticeClass,
}

/// `η = γ̇ × f` per vertex. The graph winds around the normal circle as often
/// as `f` does relative to the Seifert framing.
pub fn eta_cycle(k: &Knot, f: &[Vec3], seed: u64) -> Result<ConormalCycle> {
    let n = k.num_segments();
    if f.len() != n {
        return Err(Error::InvalidArgument(format!("{} frame vectors for {n} vertices", f.len())));
    }
    let mut covector = Vec::with_capacity(n);
    for (i, fi) in f.iter().enumerate() {
        let (a, b) = k.segment(i);
        let eta = (b - a).cross(fi);
        if eta.is_zero() {
            return Err(Error::InvalidArgument(format!("frame vector at vertex {i} is tangent to the knot")));
        }
        covector.push(eta);
    }
    let pushed = frame_pushoff(k, f)?;
    let framing = framing_from_pushoff(k, &pushed, seed)?;
    let class = LatticeClass::new(framing, 1);
    debug_assert!(is_frame(class, LatticeClass::MU)?);
    debug_assert_eq!(normalize_frame(class, LatticeClass::MU)?, knot_frame_to_l_frame(framing));
    Ok(ConormalCycle { base: k.clone(), covector, class })
}

/// `k + ε·f` with the largest power-of-two `ε` that stays in the tube.
fn frame_pushoff(k: &Knot, f: &[Vec3]) -> Result<Knot> {
    let scale = f.iter().map(|v| v.norm2()).max().expect("nonempty");
    let m2 = k.self_margin_sq();
    let mut eps = q(1);
    while &eps * &eps * &scale * q(16) >= m2 {
        eps /= q(2);
    }
    for _ in 0..MAX_ATTEMPTS {
        let pts: Vec<Vec3> = k.vertices[..k.num_segments()].iter().zip(f).map(|(p, v)| p + &v.scale(&eps)).collect();
        if let Ok(c) = Knot::new(pts) {
            if knot_distance_sq(k, &c).is_positive() {
                return Ok(c);
            }
        }
        eps /= q(2);
    }
    Err(Error::InvalidArgument("frame field does not give a disjoint pushoff".into()))
}
