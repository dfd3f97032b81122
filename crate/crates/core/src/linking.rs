//! Frame-dependent linking numbers of disjoint loops in L.
//!
//! Two independent routes:
//!
//! * **embedding**: L sits in ℝ³ as the standard unknotted open solid torus,
//!   `(x, y, θ) ↦ ((R + x)·cos 2πθ, (R + x)·sin 2πθ, y)` after shrinking the
//!   plane factor. Projecting along the height axis gives a diagram on the
//!   annulus with coordinates `(x, θ)`; the linking number is the signed
//!   count of crossings where the first curve passes over the second. This is
//!   the frame `p = 0` value; other frames add `p·w₁·w₂`.
//! * **chain**: the second curve is joined to `w₂` copies of a reference curve
//!   of class `p·μ + λ` drawn on the square torus `max(|x|, |y|) = T₂` by a
//!   straight-line homotopy, triangulated into flat cells; the answer is the
//!   signed number of times the first curve meets that 2-chain. The homotopy
//!   of the first curve out to the torus at `T₁ < T₂` never meets the second
//!   reference curve, so it contributes nothing.
//!
//! Both routes work in exact rational arithmetic and reseed their generic
//! choices (diagram rotation, chain perturbation) on degenerate contacts.

use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{check_general_position, self_margin_sq, shift_range, PLCurve};
use crate::error::{Error, Result};
use crate::geometry::{planar_crossing, segment_triangle, Bbox, PlanarCrossing, PlaneRotation, TriangleHit, Vec3, P2};
use crate::homology::FrameInt;
use crate::rational::{q, qr, to_f64, Q};
use crate::rng::{derive_seed, seeded_rng, MAX_ATTEMPTS};

/// Which algorithm produced a linking number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Chain,
    Embedding,
    /// Runs both and fails on disagreement.
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkResult {
    pub value: i64,
    pub frame: FrameInt,
    pub method: Method,
    pub windings: (i64, i64),
}

/// Knobs shared by the linking routines.
#[derive(Clone, Debug)]
pub struct LinkOptions {
    pub seed: u64,
    /// Reference torus half-widths `(T₁, T₂)`; chosen from the curves when absent.
    pub radii: Option<(Q, Q)>,
}

impl Default for LinkOptions {
    fn default() -> Self {
        LinkOptions { seed: crate::rng::DEFAULT_SEED, radii: None }
    }
}

impl LinkOptions {
    pub fn with_seed(seed: u64) -> Self {
        LinkOptions { seed, radii: None }
    }
}

fn require_disjoint(c1: &PLCurve, c2: &PLCurve) -> Result<()> {
    let report = check_general_position(c1, c2);
    if report.disjoint {
        Ok(())
    } else {
        Err(Error::NotDisjoint(format!("segment pairs {:?} touch", report.degenerate_pairs)))
    }
}

fn shifted(v: &Vec3, k: i64) -> Vec3 {
    Vec3::new(v.x.clone(), v.y.clone(), &v.z + q(k))
}

struct DiagramSegment {
    a: P2,
    b: P2,
    ha: Q,
    hb: Q,
    box2: [f64; 4],
}

fn diagram(c: &PLCurve, rot: &PlaneRotation) -> Vec<DiagramSegment> {
    let proj: Vec<(P2, Q)> = c
        .vertices()
        .iter()
        .map(|v| {
            let (x, y) = rot.apply(&v.x, &v.y);
            (P2::new(x, v.z.clone()), y)
        })
        .collect();
    proj.windows(2)
        .map(|w| {
            let (a, ha) = w[0].clone();
            let (b, hb) = w[1].clone();
            let (au, av, bu, bv) = (to_f64(&a.u), to_f64(&a.v), to_f64(&b.u), to_f64(&b.v));
            let pad = 1e-9 * (1.0 + au.abs().max(bu.abs()).max(av.abs()).max(bv.abs()));
            let box2 = [au.min(bu) - pad, au.max(bu) + pad, av.min(bv) - pad, av.max(bv) + pad];
            DiagramSegment { a, b, ha, hb, box2 }
        })
        .collect()
}

enum Count {
    Value(i64),
    Degenerate,
}

fn count_crossings(d1: &[DiagramSegment], d2: &[DiagramSegment]) -> Result<Count> {
    let mut total = 0i64;
    for s1 in d1 {
        for s2 in d2 {
            for k in shift_range((&s2.a.v, &s2.b.v), (&s1.a.v, &s1.b.v), 0) {
                // s2 is shifted by −k so that s1 and s2 − k overlap in θ̃.
                let kf = k as f64;
                let b = &s2.box2;
                if s1.box2[1] < b[0] || b[1] < s1.box2[0] || s1.box2[3] < b[2] - kf || b[3] - kf < s1.box2[2] {
                    continue;
                }
                let kq = q(k);
                let b0 = P2::new(s2.a.u.clone(), &s2.a.v - &kq);
                let b1 = P2::new(s2.b.u.clone(), &s2.b.v - &kq);
                match planar_crossing(&s1.a, &s1.b, &b0, &b1) {
                    PlanarCrossing::None => {}
                    PlanarCrossing::Degenerate => return Ok(Count::Degenerate),
                    PlanarCrossing::Proper { s, t, sign } => {
                        let h1 = &s1.ha + &(&s1.hb - &s1.ha) * &s;
                        let h2 = &s2.ha + &(&s2.hb - &s2.ha) * &t;
                        if h1 == h2 {
                            return Err(Error::NotDisjoint("curves meet over a diagram crossing".into()));
                        }
                        if h1 > h2 {
                            total += sign as i64;
                        }
                    }
                }
            }
        }
    }
    Ok(Count::Value(total))
}

/// Frame-0 linking number through the standard solid-torus embedding.
pub fn link_embedded(c1: &PLCurve, c2: &PLCurve, seed: u64) -> Result<i64> {
    require_disjoint(c1, c2)?;
    link_embedded_unchecked(c1, c2, seed)
}

fn link_embedded_unchecked(c1: &PLCurve, c2: &PLCurve, seed: u64) -> Result<i64> {
    let mut trail = Vec::with_capacity(MAX_ATTEMPTS);
    for attempt in 0..MAX_ATTEMPTS {
        let s = derive_seed(seed, attempt as u64);
        trail.push(s);
        let mut rng = seeded_rng(s);
        let m: i64 = rng.gen_range(2..64);
        let n: i64 = rng.gen_range(1..m);
        let rot = PlaneRotation::pythagorean(m, n);
        if let Count::Value(v) = count_crossings(&diagram(c1, &rot), &diagram(c2, &rot))? {
            return Ok(v);
        }
    }
    Err(Error::Degenerate { msg: "no generic diagram projection found".into(), seeds: trail })
}

/// Default reference half-widths: both squares strictly outside the curves.
pub fn default_radii(c1: &PLCurve, c2: &PLCurve) -> (Q, Q) {
    let m = c1.max_plane_coord().max(c2.max_plane_coord());
    let t1 = q(2) * &m + q(1);
    let t2 = &t1 + q(1);
    (t1, t2)
}

fn check_radii(c1: &PLCurve, c2: &PLCurve, t1: &Q, t2: &Q) -> Result<()> {
    let r2 = c1.max_plane_radius2().max(c2.max_plane_radius2());
    if !t1.is_positive() || (t1 * t1) <= r2 || t2 <= t1 {
        return Err(Error::InvalidArgument("reference radii must satisfy T₂ > T₁ > max plane radius".into()));
    }
    Ok(())
}

/// Point of the square `max(|x|,|y|) = t` at perimeter parameter `u` (turns, counterclockwise).
fn square_point(t: &Q, u: &Q) -> (Q, Q) {
    let corners = [(1, 1), (-1, 1), (-1, -1), (1, -1)];
    let four_u = u * q(4);
    let j = crate::rational::floor_i64(&four_u);
    let frac = &four_u - q(j);
    let (x0, y0) = corners[j.rem_euclid(4) as usize];
    let (x1, y1) = corners[(j + 1).rem_euclid(4) as usize];
    let x = q(x0) + (q(x1 - x0)) * &frac;
    let y = q(y0) + (q(y1 - y0)) * &frac;
    (x * t, y * t)
}

struct Cell {
    tri: [Vec3; 3],
    bbox: Bbox,
}

/// Triangulated straight-line homotopy from `c` to `w` copies of the frame-`p` reference curve.
fn homotopy_chain(c: &PLCurve, p: i64, t: &Q, phase: &Q, rng: &mut impl Rng) -> Vec<Cell> {
    let n = c.num_segments() as i64;
    let w = c.winding();
    let theta0 = c.vertices()[0].z.clone();
    let turns = p * w;
    let mut breaks: Vec<Q> = (0..=n).map(|i| qr(i, n)).collect();
    if turns != 0 {
        // 4(phase + turns·s) ∈ ℤ
        let start = phase * q(4);
        let end = &start + q(4 * turns);
        let (lo, hi) = if start <= end { (start.clone(), end) } else { (end, start.clone()) };
        let first = crate::rational::ceil_i64(&lo);
        let last = crate::rational::floor_i64(&hi);
        for j in first..=last {
            let s = (q(j) - &start) / q(4 * turns);
            if s.is_positive() && s < q(1) {
                breaks.push(s);
            }
        }
    }
    breaks.sort();
    breaks.dedup();

    let on_curve = |s: &Q| -> Vec3 {
        let scaled = s * q(n);
        let i = crate::rational::floor_i64(&scaled).min(n - 1).max(0);
        let local = &scaled - q(i);
        let (a, b) = c.segment(i as usize);
        a.lerp(b, &local)
    };
    let on_reference = |s: &Q| -> Vec3 {
        let (x, y) = square_point(t, &(phase + q(turns) * s));
        Vec3::new(x, y, &theta0 + q(w) * s)
    };

    let scale = t / q(16);
    let jitter = |rng: &mut dyn rand::RngCore| -> Q {
        let k: i64 = rng.gen_range(-1000..=1000);
        qr(k, 1009) * &scale
    };
    let mut cells = Vec::new();
    for pair in breaks.windows(2) {
        let (a0, a1) = (on_curve(&pair[0]), on_curve(&pair[1]));
        let (b0, b1) = (on_reference(&pair[0]), on_reference(&pair[1]));
        let mut center = (&(&a0 + &a1) + &(&b0 + &b1)).scale(&qr(1, 4));
        center.x += jitter(rng);
        center.y += jitter(rng);
        center.z += jitter(rng) / q(8);
        // Boundary loop a0 → a1 → b1 → b0 → a0.
        for (u, v) in [(&a0, &a1), (&a1, &b1), (&b1, &b0), (&b0, &a0)] {
            if u == v {
                continue;
            }
            let tri = [u.clone(), v.clone(), center.clone()];
            let bbox = Bbox::of(&[&tri[0], &tri[1], &tri[2]]);
            cells.push(Cell { tri, bbox });
        }
    }
    cells
}

fn intersect_chain(c1: &PLCurve, cells: &[Cell]) -> Option<i64> {
    let mut total = 0i64;
    for (p0, p1) in c1.segments() {
        let sb = Bbox::of(&[p0, p1]);
        for cell in cells {
            let (zlo, zhi) = (cell.bbox.lo[2], cell.bbox.hi[2]);
            let kmin = (sb.lo[2] - zhi).ceil() as i64 - 1;
            let kmax = (sb.hi[2] - zlo).floor() as i64 + 1;
            for k in kmin..=kmax {
                if !sb.overlaps(&cell.bbox.shifted_z(k as f64)) {
                    continue;
                }
                let [a, b, c] = &cell.tri;
                match segment_triangle(p0, p1, &shifted(a, k), &shifted(b, k), &shifted(c, k)) {
                    TriangleHit::Miss => {}
                    TriangleHit::Hit(s) => total += s as i64,
                    TriangleHit::Degenerate => return None,
                }
            }
        }
    }
    Some(total)
}

/// Frame-`p` linking number from the bounding-chain construction.
pub fn link_chain(c1: &PLCurve, c2: &PLCurve, p: FrameInt, opts: &LinkOptions) -> Result<i64> {
    require_disjoint(c1, c2)?;
    link_chain_unchecked(c1, c2, p, opts)
}

fn link_chain_unchecked(c1: &PLCurve, c2: &PLCurve, p: FrameInt, opts: &LinkOptions) -> Result<i64> {
    let (t1, t2) = opts.radii.clone().unwrap_or_else(|| default_radii(c1, c2));
    check_radii(c1, c2, &t1, &t2)?;
    let mut trail = Vec::with_capacity(MAX_ATTEMPTS);
    for attempt in 0..MAX_ATTEMPTS {
        let s = derive_seed(opts.seed ^ 0xc4a1_0000, attempt as u64);
        trail.push(s);
        let mut rng = seeded_rng(s);
        let phase = qr(rng.gen_range(0..997), 997);
        let cells = homotopy_chain(c2, p.0, &t2, &phase, &mut rng);
        if let Some(count) = intersect_chain(c1, &cells) {
            // ∂(chain) = c₂ − reference; orientation (x, θ, y) agrees with the embedding.
            return Ok(-count);
        }
    }
    Err(Error::Degenerate { msg: "no transverse bounding chain found".into(), seeds: trail })
}

/// Linking number in frame `p` by the requested method.
pub fn link(c1: &PLCurve, c2: &PLCurve, p: FrameInt, method: Method, opts: &LinkOptions) -> Result<LinkResult> {
    require_disjoint(c1, c2)?;
    let (w1, w2) = (c1.winding(), c2.winding());
    let value = match method {
        Method::Embedding => link_embedded_unchecked(c1, c2, opts.seed)? + p.0 * w1 * w2,
        Method::Chain => link_chain_unchecked(c1, c2, p, opts)?,
        Method::Both => {
            let embedding = link_embedded_unchecked(c1, c2, opts.seed)? + p.0 * w1 * w2;
            let chain = link_chain_unchecked(c1, c2, p, opts)?;
            if chain != embedding {
                return Err(Error::MethodDisagreement { chain, embedding });
            }
            chain
        }
    };
    Ok(LinkResult { value, frame: p, method, windings: (w1, w2) })
}

/// Default pushoff distance: a power of two at most half the self-margin of `c`.
pub fn default_pushoff_epsilon(c: &PLCurve) -> Q {
    let mut eps = q(1);
    if let Some(m2) = self_margin_sq(c) {
        let limit = m2 / q(4);
        while &eps * &eps > limit {
            eps /= q(2);
        }
    }
    eps
}

/// Copy of `c` displaced by `(ε, 0)` in the plane factor.
pub fn pushoff(c: &PLCurve, eps: &Q) -> PLCurve {
    c.translated(&Vec3::new(eps.clone(), Q::zero(), Q::zero()))
}

/// Framed self-linking: `link(c, pushoff_ε(c), p)`.
pub fn self_link(c: &PLCurve, p: FrameInt, eps: Option<Q>, method: Method, opts: &LinkOptions) -> Result<i64> {
    let mut eps = eps.unwrap_or_else(|| default_pushoff_epsilon(c));
    let mut trail = Vec::new();
    for _ in 0..MAX_ATTEMPTS {
        let other = pushoff(c, &eps);
        if check_general_position(c, &other).disjoint {
            return Ok(link(c, &other, p, method, opts)?.value);
        }
        trail.push(0);
        eps /= q(2);
    }
    Err(Error::Degenerate { msg: "pushoff never separated from the curve".into(), seeds: trail })
}

/// All pairwise values, diagonal from [`self_link`]; rows are computed in parallel.
pub fn link_matrix(curves: &[PLCurve], p: FrameInt, method: Method, opts: &LinkOptions) -> Result<Vec<Vec<i64>>> {
    (0..curves.len())
        .into_par_iter()
        .map(|i| {
            (0..curves.len())
                .map(|j| {
                    let o = LinkOptions { seed: derive_seed(opts.seed, (i * curves.len() + j) as u64), radii: opts.radii.clone() };
                    if i == j {
                        self_link(&curves[i], p, None, method, &o)
                    } else {
                        link(&curves[i], &curves[j], p, method, &o).map(|r| r.value)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}
