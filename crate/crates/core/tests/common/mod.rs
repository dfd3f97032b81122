//! Shared fixtures for the integration tests: a floating-point Gauss linking
//! oracle and the scripted finger move that switches one crossing.
#![allow(dead_code)]

use framelink::curve::{check_general_position, random_curve, PLCurve};
use framelink::geometry::{point_segment_dist2, Vec3};
use framelink::rational::{q, qr, to_f64, Q};
use num_traits::{Signed, Zero};
use rand::Rng;

pub type P3 = [f64; 3];

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: P3, b: P3) -> P3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn unit(a: P3) -> P3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Exact Gauss integral of two closed polygons (Klenin–Langowski solid angles).
pub fn gauss_polygons(a: &[P3], b: &[P3]) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        let (p1, p2) = (a[i], a[(i + 1) % a.len()]);
        for j in 0..b.len() {
            let (p3, p4) = (b[j], b[(j + 1) % b.len()]);
            let (r13, r14, r23, r24) = (sub(p3, p1), sub(p4, p1), sub(p3, p2), sub(p4, p2));
            let n = [unit(cross(r13, r14)), unit(cross(r14, r24)), unit(cross(r24, r23)), unit(cross(r23, r13))];
            let omega: f64 = (0..4).map(|k| dot(n[k], n[(k + 1) % 4]).clamp(-1.0, 1.0).asin()).sum();
            let s = dot(cross(sub(p4, p3), sub(p2, p1)), r13).signum();
            total += omega * s;
        }
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Midpoint-rule Gauss double integral, used to pin down the solid-angle sign.
pub fn gauss_midpoint(a: &[P3], b: &[P3], per_edge: usize) -> f64 {
    let pts = |c: &[P3]| -> Vec<(P3, P3)> {
        let mut out = vec![];
        for i in 0..c.len() {
            let (u, v) = (c[i], c[(i + 1) % c.len()]);
            let d = sub(v, u);
            for k in 0..per_edge {
                let t = (k as f64 + 0.5) / per_edge as f64;
                let step = [d[0] / per_edge as f64, d[1] / per_edge as f64, d[2] / per_edge as f64];
                out.push(([u[0] + t * d[0], u[1] + t * d[1], u[2] + t * d[2]], step));
            }
        }
        out
    };
    let (pa, pb) = (pts(a), pts(b));
    let mut total = 0.0;
    for (x, dx) in &pa {
        for (y, dy) in &pb {
            let r = sub(*x, *y);
            let n = dot(r, r).sqrt();
            total += dot(r, cross(*dx, *dy)) / (n * n * n);
        }
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Image of a curve under `(x, y, θ) ↦ ((R + x)·cos 2πθ, (R + x)·sin 2πθ, y)`,
/// every segment cut into straight chords of length about `h`.
pub fn embed(c: &PLCurve, radius: f64, h: f64) -> Vec<P3> {
    let mut out = vec![];
    for (a, b) in c.segments() {
        let (a, b) = (a.to_f64(), b.to_f64());
        let reach = radius + a[0].abs().max(b[0].abs());
        let len = 2.0 * std::f64::consts::PI * reach * (b[2] - a[2]).abs() + ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let pieces = ((len / h).ceil() as usize).max(4);
        for k in 0..pieces {
            let t = k as f64 / pieces as f64;
            let (x, y, th) = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2]));
            let ang = 2.0 * std::f64::consts::PI * th;
            out.push([(radius + x) * ang.cos(), (radius + x) * ang.sin(), y]);
        }
    }
    out
}

/// Gauss linking number of the embedded pair, rounded; `None` when the sum is
/// not within 0.1 of an integer.
pub fn gauss_link(c1: &PLCurve, c2: &PLCurve) -> Option<i64> {
    gauss_link_fine(c1, c2, 0.5)
}

/// As [`gauss_link`] with chord length `h`; the chord sag `h²/8R` has to stay
/// below the smallest gap between the curves.
pub fn gauss_link_fine(c1: &PLCurve, c2: &PLCurve, h: f64) -> Option<i64> {
    let m = c1.max_plane_coord().max(c2.max_plane_coord());
    let radius = 2.0 * to_f64(&m) + 3.0;
    let v = gauss_polygons(&embed(c1, radius, h), &embed(c2, radius, h));
    let r = v.round();
    ((v - r).abs() < 0.1).then_some(r as i64)
}

pub fn fiber(x: i64, y: i64) -> PLCurve {
    PLCurve::new(vec![Vec3::new(q(x), q(y), q(0)), Vec3::new(q(x), q(y), q(1))]).unwrap()
}

/// Determinant in the oriented coordinates `(x, θ, y)` of L.
pub fn oriented_det(a: &Vec3, b: &Vec3, c: &Vec3) -> Q {
    let r = |v: &Vec3| [v.x.clone(), v.z.clone(), v.y.clone()];
    let (a, b, c) = (r(a), r(b), r(c));
    &a[0] * (&b[1] * &c[2] - &b[2] * &c[1]) - &a[1] * (&b[0] * &c[2] - &b[2] * &c[0]) + &a[2] * (&b[0] * &c[1] - &b[1] * &c[0])
}

/// `c1` with a finger reaching `c2` on either side of one of its segments.
pub struct Finger {
    pub before: PLCurve,
    pub after: PLCurve,
    pub c2: PLCurve,
    /// Sign the crossing change must have: `det(tip, c2 tangent, motion)`.
    pub expected: i64,
    /// Distance of the finger tip from `c2` at its closest.
    pub gap: f64,
}

/// Builds a random finger move; `None` when the random pick is unusable.
pub fn random_finger(rng: &mut impl Rng) -> Option<Finger> {
    let w1 = rng.gen_range(-2..=2);
    let w2 = rng.gen_range(-2..=2);
    let c1 = random_curve(rng, w1, 5, 2);
    let c2 = random_curve(rng, w2, 5, 2);
    let j = rng.gen_range(0..c2.num_segments());
    let (a, b) = c2.segment(j);
    let p = a.lerp(b, &qr(1, 2));
    let t2 = b - a;
    // Distance from the target point to every other piece of c2 in the lift.
    let mut room: Option<Q> = None;
    for (i, (u, v)) in c2.segments().enumerate() {
        for k in -2i64..=2 {
            if i == j && k == 0 {
                continue;
            }
            let s = Vec3::new(q(0), q(0), q(k));
            let d = point_segment_dist2(&p, &(u + &s), &(v + &s));
            if room.as_ref().is_none_or(|r| &d < r) {
                room = Some(d);
            }
        }
    }
    let room = room.unwrap();
    let dir = |rng: &mut dyn rand::RngCore| Vec3::new(qr(rng.gen_range(-9..=9), 7), qr(rng.gen_range(-9..=9), 7), qr(rng.gen_range(-9..=9), 7));
    let tip = dir(rng);
    let m = dir(rng);
    let det = oriented_det(&tip, &t2, &m);
    if det.is_zero() {
        return None;
    }
    // Scale so the swept parallelogram stays well inside the free ball around p.
    let size = [&tip, &m].iter().map(|v| v.norm2()).max().unwrap();
    let mut s = q(1);
    while &s * &s * &size * q(64) >= room {
        s /= q(2);
    }
    let far = m.scale(&q(1));
    let build = |side: &Q| -> Option<PLCurve> {
        let i = 0;
        let mut vs: Vec<Vec3> = c1.vertices()[..=i].to_vec();
        let a0 = &(&p - &tip.scale(&s)) + &far;
        let a = &(&p - &tip.scale(&s)) + &m.scale(&(side * &s));
        let b = &(&p + &tip.scale(&s)) + &m.scale(&(side * &s));
        let b0 = &(&p + &tip.scale(&s)) + &far;
        let base = c1.vertices()[i].clone();
        vs.extend([a0, a, b, b0, base]);
        vs.extend(c1.vertices()[i + 1..].iter().cloned());
        let c = PLCurve::new(vs).ok()?;
        check_general_position(&c, &c2).disjoint.then_some(c)
    };
    let before = build(&q(1))?;
    let after = build(&q(-1))?;
    // Tip moves along −m from `before` to `after`.
    let expected = -(if det.is_positive() { 1 } else { -1 });
    let gap = to_f64(&(&s * &s * m.norm2())).sqrt();
    Some(Finger { before, after, c2, expected, gap })
}

/// Writes the CLI fixtures into `dir`.
pub fn write_fixtures(dir: &std::path::Path) {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(17);
    let (a, b) = framelink::curve::random_pair(&mut rng, 2, -1, 6, 2);
    let files: [(&str, String); 5] = [
        ("fibers.txt", "label: a\n0 0 0\n0 0 1\n\nlabel: b\n1 0 0\n1 0 1\n".into()),
        ("pair.txt", framelink::curve::emit_curves(&[a, b])),
        (
            "scene.json",
            r#"{"bounds": {"genus": 0, "boundaries": 1, "max_edges": 0}, "frame": 0,
  "graphs": [{"graph": {"vertices": [{"id": 0, "area_zero": false}]},
              "cells": [{"vertex_labels": {"0": 2}, "coefficient": "5/2"}]}]}"#
                .into(),
        ),
        ("knot.txt", "framing: 2\n0 0 0\n4 0 0\n4 3 0\n0 3 1\n0 0 0\n".into()),
        ("plain_knot.txt", "0 0 0\n4 0 0\n4 3 0\n0 3 1\n0 0 0\n".into()),
    ];
    for (name, text) in files {
        std::fs::write(dir.join(name), text).unwrap();
    }
}

/// Every subcommand once, in both output formats where it matters.
pub fn cli_suite(dir: &std::path::Path) -> Vec<Vec<String>> {
    let f = |name: &str| dir.join(name).display().to_string();
    vec![
        vec!["link".into(), f("fibers.txt"), "--frame".into(), "3".into()],
        vec!["link".into(), f("pair.txt"), "--frame".into(), "-2".into(), "--method".into(), "chain".into()],
        vec!["--format".into(), "json".into(), "link".into(), f("pair.txt"), "--frame".into(), "1".into()],
        vec!["frame".into(), "check".into(), "3,1".into(), "1,0".into()],
        vec!["glue".into(), "matrix".into(), "-7,1".into(), "1,0".into()],
        vec!["--format".into(), "json".into(), "glue".into(), "class".into(), "0,1".into(), "4,1".into(), "1,0".into()],
        vec!["graphs".into(), "enumerate".into(), "--genus".into(), "0".into(), "--boundaries".into(), "2".into(), "--max-edges".into(), "2".into()],
        vec!["chains".into(), "check".into(), f("scene.json")],
        vec!["--format".into(), "json".into(), "chains".into(), "reduce".into(), f("scene.json"), "--frame".into(), "2".into()],
        vec!["chains".into(), "invariants".into(), f("scene.json")],
        vec!["knot".into(), "frame".into(), f("knot.txt")],
        vec!["knot".into(), "pushoff".into(), f("plain_knot.txt"), "-k".into(), "-2".into()],
    ]
}
