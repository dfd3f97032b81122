//! Closed piecewise-linear curves in L = ℝ² × S¹.
//!
//! A curve is stored in the lift ℝ² × ℝ: the fiber coordinate `θ̃` has period 1
//! and the closing vertex repeats the first one shifted by the winding number.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point_segment_dist2, segment_segment_dist2, winding_around_origin, Vec3, P2};
use crate::homology::LatticeClass;
use crate::rational::{ceil_i64, floor_i64, fmt_q, parse_q, q, qr, Q};

/// A closed PL loop; `z` of each vertex is the lifted fiber coordinate θ̃.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLCurve {
    vertices: Vec<Vec3>,
    winding: i64,
    pub label: Option<String>,
}

impl PLCurve {
    /// Builds a curve from its vertex list, closing vertex included.
    pub fn new(vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::OpenCurve("a closed curve needs at least two vertices".into()));
        }
        for (i, pair) in vertices.windows(2).enumerate() {
            if pair[0] == pair[1] {
                return Err(Error::InvalidArgument(format!("vertices {i} and {} coincide", i + 1)));
            }
        }
        let first = &vertices[0];
        let last = &vertices[vertices.len() - 1];
        if first.x != last.x || first.y != last.y {
            return Err(Error::OpenCurve("last vertex does not lie over the first".into()));
        }
        let shift = &last.z - &first.z;
        if !shift.is_integer() {
            return Err(Error::OpenCurve(format!("fiber displacement {} is not an integer", fmt_q(&shift))));
        }
        let winding = floor_i64(&shift);
        Ok(PLCurve { vertices, winding, label: None })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Vertex list including the closing vertex.
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn num_segments(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn segment(&self, i: usize) -> (&Vec3, &Vec3) {
        (&self.vertices[i], &self.vertices[i + 1])
    }

    pub fn segments(&self) -> impl Iterator<Item = (&Vec3, &Vec3)> {
        self.vertices.windows(2).map(|w| (&w[0], &w[1]))
    }

    /// Image of the class in H₁(L) ≅ ℤ.
    pub fn winding(&self) -> i64 {
        self.winding
    }

    /// Largest squared plane radius over the vertices (and hence the curve).
    pub fn max_plane_radius2(&self) -> Q {
        self.vertices.iter().map(|v| &v.x * &v.x + &v.y * &v.y).max().unwrap_or_else(Q::zero)
    }

    /// Largest `|x|` or `|y|` coordinate.
    pub fn max_plane_coord(&self) -> Q {
        self.vertices.iter().flat_map(|v| [v.x.abs(), v.y.abs()]).max().unwrap_or_else(Q::zero)
    }

    pub fn theta_range(&self) -> (Q, Q) {
        let lo = self.vertices.iter().map(|v| v.z.clone()).min().unwrap();
        let hi = self.vertices.iter().map(|v| v.z.clone()).max().unwrap();
        (lo, hi)
    }

    pub fn translated(&self, d: &Vec3) -> PLCurve {
        PLCurve {
            vertices: self.vertices.iter().map(|v| v + d).collect(),
            winding: self.winding,
            label: self.label.clone(),
        }
    }

    /// Same curve with reversed orientation.
    pub fn reversed(&self) -> PLCurve {
        let mut vertices: Vec<Vec3> = self.vertices.iter().rev().cloned().collect();
        // Re-anchor so the first vertex keeps its lift.
        let shift = Vec3::new(Q::zero(), Q::zero(), -q(self.winding));
        for v in vertices.iter_mut() {
            *v = &*v + &shift;
        }
        PLCurve { vertices, winding: -self.winding, label: self.label.clone() }
    }

    /// Inserts a vertex at parameter `t ∈ (0,1)` of segment `i`.
    pub fn subdivide(&self, i: usize, t: &Q) -> PLCurve {
        assert!(t.is_positive() && t < &Q::one(), "subdivision parameter must be interior");
        let (a, b) = self.segment(i);
        let mid = a.lerp(b, t);
        let mut vertices = self.vertices.clone();
        vertices.insert(i + 1, mid);
        PLCurve { vertices, winding: self.winding, label: self.label.clone() }
    }

    /// Concatenation at a shared base point: `other` must start where `self` starts.
    pub fn concat(&self, other: &PLCurve) -> Result<PLCurve> {
        let a0 = &self.vertices[0];
        let b0 = &other.vertices[0];
        if a0.x != b0.x || a0.y != b0.y {
            return Err(Error::InvalidArgument("curves do not share a base point".into()));
        }
        let end = &self.vertices[self.vertices.len() - 1];
        let shift = end - b0;
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().skip(1).map(|v| v + &shift));
        PLCurve::new(vertices)
    }
}

/// Winding number of a curve; the error case cannot arise for a constructed curve.
pub fn winding(c: &PLCurve) -> i64 {
    c.winding()
}

/// End class `(m, w)` of a curve lying in the collar `{ r > R }`.
pub fn end_class(c: &PLCurve, radius: &Q) -> Result<LatticeClass> {
    let r2 = radius * radius;
    let origin = Vec3::zero();
    for (i, (a, b)) in c.segments().enumerate() {
        let a2 = Vec3::new(a.x.clone(), a.y.clone(), Q::zero());
        let b2 = Vec3::new(b.x.clone(), b.y.clone(), Q::zero());
        if point_segment_dist2(&origin, &a2, &b2) <= r2 {
            return Err(Error::NotInCollar(format!("segment {i} reaches plane radius ≤ {}", fmt_q(radius))));
        }
    }
    let pts: Vec<P2> = c.vertices()[..c.num_segments()].iter().map(|v| P2::new(v.x.clone(), v.y.clone())).collect();
    Ok(LatticeClass::new(winding_around_origin(&pts), c.winding()))
}

/// Exact disjointness verdict for two curves in L.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneralPositionReport {
    pub disjoint: bool,
    /// Squared distance in the lift metric, folded over the fiber period.
    #[serde(serialize_with = "crate::rational::serialize_q")]
    pub min_distance_sq: Q,
    /// Segment index pairs `(i, j)` at distance zero.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

/// Fiber shifts `k` worth testing between two segments with the given θ̃ ranges.
pub(crate) fn shift_range(a: (&Q, &Q), b: (&Q, &Q), slack: i64) -> std::ops::RangeInclusive<i64> {
    let (alo, ahi) = if a.0 <= a.1 { (a.0, a.1) } else { (a.1, a.0) };
    let (blo, bhi) = if b.0 <= b.1 { (b.0, b.1) } else { (b.1, b.0) };
    // a ∩ (b + k) ≠ ∅  ⇔  alo − bhi ≤ k ≤ ahi − blo
    (ceil_i64(&(alo - bhi)) - slack)..=(floor_i64(&(ahi - blo)) + slack)
}

fn shift_z(v: &Vec3, k: i64) -> Vec3 {
    Vec3::new(v.x.clone(), v.y.clone(), &v.z + q(k))
}

pub fn check_general_position(c1: &PLCurve, c2: &PLCurve) -> GeneralPositionReport {
    let mut best: Option<Q> = None;
    let mut degenerate = Vec::new();
    for (i, (a0, a1)) in c1.segments().enumerate() {
        for (j, (b0, b1)) in c2.segments().enumerate() {
            let mut touched = false;
            for k in shift_range((&a0.z, &a1.z), (&b0.z, &b1.z), 1) {
                let d = segment_segment_dist2(a0, a1, &shift_z(b0, k), &shift_z(b1, k));
                if d.is_zero() {
                    touched = true;
                }
                if best.as_ref().is_none_or(|b| &d < b) {
                    best = Some(d);
                }
            }
            if touched {
                degenerate.push((i, j));
            }
        }
    }
    let min_distance_sq = best.unwrap_or_else(Q::zero);
    GeneralPositionReport { disjoint: min_distance_sq.is_positive(), min_distance_sq, degenerate_pairs: degenerate }
}

/// Squared distance between non-adjacent pieces of one curve in L, if any exist.
pub fn self_margin_sq(c: &PLCurve) -> Option<Q> {
    let n = c.num_segments() as i64;
    let w = c.winding();
    // Segment (i, k) is segment i shifted by k; (n−1, k) is followed by (0, k + w).
    let next = |i: i64, k: i64| if i + 1 < n { (i + 1, k) } else { (0, k + w) };
    let prev = |i: i64, k: i64| if i > 0 { (i - 1, k) } else { (n - 1, k - w) };
    let mut best: Option<Q> = None;
    for i in 0..n {
        let (a0, a1) = c.segment(i as usize);
        for j in 0..n {
            let (b0, b1) = c.segment(j as usize);
            for k in shift_range((&a0.z, &a1.z), (&b0.z, &b1.z), 1) {
                if (j, k) == (i, 0) || (j, k) == next(i, 0) || (j, k) == prev(i, 0) {
                    continue;
                }
                let d = segment_segment_dist2(a0, a1, &shift_z(b0, k), &shift_z(b1, k));
                if best.as_ref().is_none_or(|b| &d < b) {
                    best = Some(d);
                }
            }
        }
    }
    best
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses a multi-curve file: one `x y θ̃` vertex per line, blank lines between curves.
pub fn parse_curves(text: &str) -> Result<Vec<PLCurve>> {
    let mut curves = Vec::new();
    let mut block: Vec<Vec3> = Vec::new();
    let mut label: Option<String> = None;
    let mut block_line = 0;
    let mut flush = |block: &mut Vec<Vec3>, label: &mut Option<String>, line: usize| -> Result<()> {
        if block.is_empty() {
            return Ok(());
        }
        let mut c = PLCurve::new(std::mem::take(block)).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        c.label = label.take();
        curves.push(c);
        Ok(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        // A blank line separates curves; a comment-only line does not.
        if raw.trim().is_empty() {
            flush(&mut block, &mut label, block_line)?;
            continue;
        }
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("label:") {
            if !block.is_empty() {
                return Err(Error::Parse { line: lineno, msg: "label must precede the vertices".into() });
            }
            label = Some(rest.trim().to_string());
            continue;
        }
        if block.is_empty() {
            block_line = lineno;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(Error::Parse { line: lineno, msg: format!("expected 3 tokens, found {}", tokens.len()) });
        }
        let mut coords = Vec::with_capacity(3);
        for t in tokens {
            coords.push(parse_q(t).ok_or_else(|| Error::Parse { line: lineno, msg: format!("not a rational: {t:?}") })?);
        }
        let z = coords.pop().unwrap();
        let y = coords.pop().unwrap();
        let x = coords.pop().unwrap();
        block.push(Vec3::new(x, y, z));
    }
    flush(&mut block, &mut label, block_line)?;
    Ok(curves)
}

/// Parses a file holding exactly one curve.
pub fn parse_curve(text: &str) -> Result<PLCurve> {
    let mut cs = parse_curves(text)?;
    match cs.len() {
        1 => Ok(cs.pop().unwrap()),
        n => Err(Error::Parse { line: 0, msg: format!("expected one curve, found {n}") }),
    }
}

pub fn emit_curve(c: &PLCurve) -> String {
    let mut out = String::new();
    if let Some(l) = &c.label {
        let _ = writeln!(out, "label: {l}");
    }
    for v in c.vertices() {
        let _ = writeln!(out, "{} {} {}", fmt_q(&v.x), fmt_q(&v.y), fmt_q(&v.z));
    }
    out
}

pub fn emit_curves(cs: &[PLCurve]) -> String {
    cs.iter().map(emit_curve).collect::<Vec<_>>().join("\n")
}

/// Seeded random curve of winding `w` with `segments` edges and plane
/// coordinates in `[−half_width, half_width]`.
pub fn random_curve(rng: &mut impl rand::Rng, w: i64, segments: usize, half_width: i64) -> PLCurve {
    let n = segments.max(2) as i64;
    let coord = |rng: &mut dyn rand::RngCore| qr(rand::Rng::gen_range(rng, -97 * half_width..=97 * half_width), 97);
    let mut vertices = Vec::with_capacity(segments + 1);
    for i in 0..n {
        let jitter = qr(rng.gen_range(0..89), 89 * 2 * n);
        let z = if w == 0 { qr(rng.gen_range(0..211), 211) } else { qr(i * w, n) + jitter };
        vertices.push(Vec3::new(coord(rng), coord(rng), z));
    }
    let first = vertices[0].clone();
    vertices.push(Vec3::new(first.x, first.y, first.z + q(w)));
    PLCurve::new(vertices).unwrap_or_else(|_| random_curve(rng, w, segments, half_width))
}

/// A disjoint pair from [`random_curve`].
pub fn random_pair(rng: &mut impl rand::Rng, w1: i64, w2: i64, segments: usize, half_width: i64) -> (PLCurve, PLCurve) {
    loop {
        let a = random_curve(rng, w1, segments, half_width);
        let b = random_curve(rng, w2, segments, half_width);
        if check_general_position(&a, &b).disjoint {
            return (a, b);
        }
    }
}
