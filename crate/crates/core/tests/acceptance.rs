//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use framelink::chains::{boundary_system, build_unlinked, canonical_cell, check_system, extract_invariants, generalized_linking_darts, vertex_windings, Bounds, CellKey, ChainSystem, GraphChain, ModelTerm};
use framelink::compactification::caps_off;
use framelink::curve::{random_pair, PLCurve};
use framelink::geometry::Vec3;
use framelink::graph::enumerate;
use framelink::homology::{gluing_matrix, is_frame};
use framelink::knot::{framing_from_pushoff, knot_frame_to_l_frame, pushoff, Knot};
use framelink::linking::{link_chain, link_embedded, LinkOptions};
use framelink::rational::{q, qr, Q};
use framelink::{DecoratedGraph, FrameInt, LatticeClass, TData};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn pairs(seed: u64, count: usize, winding: i64) -> Vec<(PLCurve, PLCurve)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let (w1, w2) = (r.gen_range(-winding..=winding), r.gen_range(-winding..=winding));
            let segments = r.gen_range(3..7);
            random_pair(&mut r, w1, w2, segments, 2)
        })
        .collect()
}

fn frame_change_law() -> Outcome {
    let start = Instant::now();
    let ps = pairs(1001, 200, 3);
    let opts = LinkOptions::with_seed(7);
    let failures: Vec<String> = ps
        .par_iter()
        .enumerate()
        .filter_map(|(i, (a, b))| {
            let values: Vec<i64> = match (-2..=2).map(|p| link_chain(a, b, FrameInt(p), &opts)).collect() {
                Ok(v) => v,
                Err(e) => return Some(format!("pair {i}: {e}")),
            };
            let ww = a.winding() * b.winding();
            for p in -2..=2i64 {
                for pp in -2..=2i64 {
                    let diff = values[(pp + 2) as usize] - values[(p + 2) as usize];
                    if diff != (pp - p) * ww {
                        return Some(format!("pair {i}: link_{pp} - link_{p} = {diff}, expected {}", (pp - p) * ww));
                    }
                }
            }
            None
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    ensure(failures.is_empty(), || failures.join("; "))?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("200 pairs, 25 frame pairs each, {secs:.1} s"))
}

fn dual_algorithm_agreement() -> Outcome {
    let ps = pairs(2002, 120, 3);
    let opts = LinkOptions::with_seed(11);
    let bad: Vec<String> = ps
        .par_iter()
        .enumerate()
        .filter_map(|(i, (a, b))| {
            let c = link_chain(a, b, FrameInt(0), &opts);
            let e = link_embedded(a, b, 13);
            match (c, e) {
                (Ok(c), Ok(e)) if c == e => None,
                (c, e) => Some(format!("pair {i}: chain {c:?}, embedding {e:?}")),
            }
        })
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok("120 pairs".into())
}

fn reference_independence() -> Outcome {
    let ps = pairs(3003, 60, 3);
    let bad: Vec<String> = ps
        .par_iter()
        .enumerate()
        .filter_map(|(i, (a, b))| {
            let mut r = rng(3003 + i as u64);
            // Plane coordinates stay in [−2, 2], so T₁ > 2√2 clears both curves.
            let choices: Vec<(Q, Q)> = (0..6)
                .map(|_| {
                    let t1 = q(3) + qr(r.gen_range(0..400), 97);
                    let t2 = &t1 + qr(r.gen_range(1..400), 89);
                    (t1, t2)
                })
                .collect();
            let p = FrameInt(r.gen_range(-2..=2));
            let values: Vec<_> = choices
                .iter()
                .map(|t| link_chain(a, b, p, &LinkOptions { seed: 5, radii: Some(t.clone()) }).map_err(|e| e.to_string()))
                .collect();
            let distinct: std::collections::BTreeSet<_> = values.iter().collect();
            (distinct.len() != 1 || values[0].is_err()).then(|| format!("pair {i}: {values:?}"))
        })
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok("60 pairs, 6 reference pairs each".into())
}

fn crossing_jump() -> Outcome {
    let mut r = rng(4004);
    let mut fingers = vec![];
    while fingers.len() < 50 {
        if let Some(f) = common::random_finger(&mut r) {
            fingers.push(f);
        }
    }
    let opts = LinkOptions::with_seed(3);
    let bad: Vec<String> = fingers
        .par_iter()
        .enumerate()
        .filter_map(|(i, f)| {
            for p in [-1, 0, 2] {
                let jump = link_chain(&f.after, &f.c2, FrameInt(p), &opts).and_then(|a| Ok(a - link_chain(&f.before, &f.c2, FrameInt(p), &opts)?));
                match jump {
                    Ok(j) if j == f.expected => {}
                    other => return Some(format!("case {i}, frame {p}: {other:?}, expected {}", f.expected)),
                }
            }
            let emb = link_embedded(&f.after, &f.c2, 1).and_then(|a| Ok(a - link_embedded(&f.before, &f.c2, 1)?));
            (emb.as_ref().ok() != Some(&f.expected)).then(|| format!("case {i}, embedding: {emb:?}"))
        })
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    let signs = fingers.iter().filter(|f| f.expected > 0).count();
    Ok(format!("50 cases, {signs} positive, {} negative", 50 - signs))
}

fn compactification_algebra() -> Outcome {
    let mut checked = 0;
    for p in -10..=10i64 {
        let base = FrameInt(p).class();
        for (f, v) in [(base, LatticeClass::new(1, 0)), (base, LatticeClass::new(-1, 0)), (LatticeClass::new(-base.m, -base.w), LatticeClass::new(1, 0))] {
            ensure(is_frame(f, v).map_err(|e| e.to_string())?, || format!("({f:?}, {v:?}) not a frame"))?;
            let a = gluing_matrix(f, v).map_err(|e| e.to_string())?;
            ensure(a.det() == 1, || format!("p = {p}: det {}", a.det()))?;
            let neg = |c: LatticeClass| LatticeClass::new(-c.m, -c.w);
            let (af, av) = (a.apply(f), a.apply(v));
            ensure((af == v || af == neg(v)) && (av == f || av == neg(f)), || format!("p = {p}: A·f = {af:?}, A·v = {av:?}"))?;
            ensure(caps_off(f, f, v).map_err(|e| e.to_string())?, || format!("p = {p}: f does not cap off"))?;
            ensure(!caps_off(v, f, v).map_err(|e| e.to_string())?, || format!("p = {p}: v caps off"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} frames"))
}

fn random_tdata(r: &mut ChaCha8Rng, g: &DecoratedGraph) -> TData {
    TData((0..g.num_darts()).map(|_| qr(r.gen_range(-100_000..100_000), r.gen_range(1..100))).collect())
}

fn random_term(r: &mut ChaCha8Rng, g: &DecoratedGraph) -> ModelTerm {
    ModelTerm {
        labels: (0..g.num_darts()).map(|_| r.gen_range(-2..3)).collect(),
        isolated: (0..g.isolated_vertices().len()).map(|_| r.gen_range(-3..4)).collect(),
        coefficient: qr(r.gen_range(-9..10), r.gen_range(1..5)),
    }
}

fn model_system(b: Bounds, graphs: &[DecoratedGraph], terms_seed: u64, t_seed: u64) -> framelink::Result<ChainSystem> {
    let (mut tr, mut cr) = (rng(t_seed), rng(terms_seed));
    let mut tdata = BTreeMap::new();
    let mut coefficients = vec![];
    for g in graphs.iter().filter(|g| g.is_unlinked()) {
        tdata.insert(g.clone(), random_tdata(&mut tr, g));
        coefficients.push((g.clone(), (0..2).map(|_| random_term(&mut cr, g)).collect()));
    }
    build_unlinked(b, &tdata, FrameInt(0), &coefficients)
}

fn chain_identity() -> Outcome {
    let mut systems = 0;
    let mut graphs_checked = 0;
    for genus in 0..=2 {
        for h in 1..=3 {
            let b = Bounds { genus, boundaries: h, max_edges: 4 };
            let graphs = enumerate(genus, h, 4).map_err(|e| e.to_string())?;
            let s = model_system(b, &graphs, 60 + h as u64, 70 + genus as u64).map_err(|e| e.to_string())?;
            let report = check_system(&s);
            ensure(report.violations.is_empty(), || format!("{b:?}: {} violations", report.violations.len()))?;
            systems += 1;
            graphs_checked += report.graphs_checked;
        }
    }
    // Corruption 1: a model cell on a graph whose edge meets a zero-area vertex.
    let b = Bounds { genus: 0, boundaries: 2, max_edges: 2 };
    let graphs = enumerate(0, 2, 2).map_err(|e| e.to_string())?;
    let mut s = model_system(b, &graphs, 1, 2).map_err(|e| e.to_string())?;
    let mut r = rng(66);
    let linked: Vec<&DecoratedGraph> = graphs.iter().filter(|g| !g.is_unlinked()).collect();
    let mut detected_linked = false;
    for g in &linked {
        let t = random_tdata(&mut r, g).canonical(g).map_err(|e| e.to_string())?;
        let term = random_term(&mut r, g);
        let key = CellKey { windings: vertex_windings(g, &term.labels, &term.isolated).map_err(|e| e.to_string())?, labels: term.labels, offsets: t };
        if let Some((h, k, sign)) = canonical_cell(g, &key).map_err(|e| e.to_string())? {
            s.graphs.entry(h).or_default().model.insert(k, q(sign as i64));
            detected_linked = !check_system(&s).is_ok();
            break;
        }
    }
    ensure(detected_linked, || "a stray cell on a linked graph went unnoticed".into())?;
    // Corruption 2: one coefficient of an exact system D(V) scaled by 2.
    let mut detected_scaled = 0;
    for g in &linked {
        let t = random_tdata(&mut r, g).canonical(g).map_err(|e| e.to_string())?;
        let term = random_term(&mut r, g);
        let key = CellKey { windings: vertex_windings(g, &term.labels, &term.isolated).map_err(|e| e.to_string())?, labels: term.labels, offsets: t };
        let Some((h, k, sign)) = canonical_cell(g, &key).map_err(|e| e.to_string())? else { continue };
        let v = ChainSystem { bounds: b, frame: FrameInt(0), graphs: BTreeMap::from([(h, GraphChain { model: BTreeMap::from([(k, q(sign as i64))]), loops: vec![] })]) };
        let w = boundary_system(&v).map_err(|e| e.to_string())?;
        ensure(check_system(&w).is_ok(), || "an exact system failed the identity".into())?;
        for (g1, c) in &w.graphs {
            for key in c.model.keys() {
                let mut bad = w.clone();
                let x = bad.graphs.get_mut(g1).unwrap().model.get_mut(key).unwrap();
                if x.is_zero() {
                    continue;
                }
                *x *= q(2);
                // A cell with zero total boundary is itself a cycle; scaling it is no error.
                let alone = ChainSystem { bounds: b, frame: FrameInt(0), graphs: BTreeMap::from([(g1.clone(), GraphChain { model: BTreeMap::from([(key.clone(), q(1))]), loops: vec![] })]) };
                if g1.num_edges() == 0 || boundary_system(&alone).map(|s| s.graphs.is_empty()).unwrap_or(true) {
                    continue;
                }
                ensure(!check_system(&bad).is_ok(), || format!("corrupted coefficient on {g1:?} not detected"))?;
                detected_scaled += 1;
            }
        }
    }
    ensure(detected_scaled > 0, || "no corruptible coefficient found".into())?;
    Ok(format!("{systems} bounds, {graphs_checked} graph checks, {detected_scaled} corruptions detected"))
}

fn fiber(x: i64, y: i64) -> PLCurve {
    PLCurve::new(vec![Vec3::new(q(x), q(y), q(0)), Vec3::new(q(x), q(y), q(1))]).unwrap()
}

fn ring_around(x: i64, y: i64) -> PLCurve {
    let pts = [(-1, -1), (1, -1), (1, 1), (-1, 1), (-1, -1)];
    PLCurve::new(pts.iter().map(|&(a, b)| Vec3::new(q(x + a), q(y + b), qr(1, 2))).collect()).unwrap()
}

/// Model cells on unlinked graphs plus loop cells on a sample of all graphs.
fn scene(b: Bounds, seed: u64, t_seed: u64) -> framelink::Result<ChainSystem> {
    let graphs = enumerate(b.genus, b.boundaries, b.max_edges)?;
    let mut s = model_system(b, &graphs, seed, t_seed)?;
    let (mut r, mut tr) = (rng(seed ^ 0x5eed), rng(t_seed ^ 0x5eed));
    for (i, g) in graphs.iter().enumerate().filter(|(i, g)| g.num_edges() > 0 && i % 3 == 0) {
        let loops: Vec<PLCurve> = (0..g.num_darts())
            .map(|d| if r.gen_bool(0.5) { fiber(4 * d as i64, i as i64 % 3) } else { ring_around(4 * d as i64, 0) })
            .collect();
        let isolated: Vec<i64> = (0..g.isolated_vertices().len()).map(|_| r.gen_range(-2..3)).collect();
        s.add_loops(g, loops, &isolated, qr(r.gen_range(1..7), r.gen_range(1..4)), &random_tdata(&mut tr, g))?;
    }
    Ok(s)
}

fn tdata_invariance() -> Outcome {
    let opts = LinkOptions::with_seed(9);
    let mut scenes = 0;
    for b in [Bounds { genus: 0, boundaries: 1, max_edges: 2 }, Bounds { genus: 1, boundaries: 2, max_edges: 2 }, Bounds { genus: 0, boundaries: 2, max_edges: 3 }] {
        for frame in [0, 1, -2] {
            let reference = extract_invariants(&scene(b, 7, 100).map_err(|e| e.to_string())?, FrameInt(frame), &opts).map_err(|e| e.to_string())?;
            ensure(!reference.is_empty(), || format!("{b:?}: empty invariants"))?;
            for t_seed in 101..111 {
                let got = extract_invariants(&scene(b, 7, t_seed).map_err(|e| e.to_string())?, FrameInt(frame), &opts).map_err(|e| e.to_string())?;
                ensure(got == reference, || format!("{b:?}, frame {frame}, t-data seed {t_seed}: invariants differ"))?;
            }
            scenes += 1;
        }
    }
    Ok(format!("{scenes} scenes, 11 t-data choices each"))
}

fn orbit_frame_vanishing() -> Outcome {
    let opts = LinkOptions::with_seed(4);
    let mut graphs = vec![];
    for h in 1..=3 {
        graphs.extend(enumerate(0, h, 3).map_err(|e| e.to_string())?.into_iter().filter(|g| g.num_edges() > 0));
    }
    let bad: Vec<String> = graphs
        .par_iter()
        .enumerate()
        .filter_map(|(i, g)| {
            let mut r = rng(800 + i as u64);
            let loops: Vec<PLCurve> = (0..g.num_darts()).map(|d| fiber(3 * d as i64 + 1, r.gen_range(-3..4))).collect();
            for p in -2..=2i64 {
                let expected = Q::from_integer(p.pow(g.num_edges() as u32).into()) / q(g.aut_order() as i64);
                match generalized_linking_darts(g, &loops, FrameInt(p), &opts) {
                    Ok(v) if v == expected => {}
                    other => return Some(format!("graph {i}, frame {p}: {other:?}, expected {expected}")),
                }
            }
            None
        })
        .collect();
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok(format!("{} graphs with edges, frames -2..2", graphs.len()))
}

fn round_unknot(r: i64) -> Knot {
    let pts = [(5, 0), (4, 3), (3, 4), (0, 5), (-3, 4), (-4, 3), (-5, 0), (-4, -3), (-3, -4), (0, -5), (3, -4), (4, -3)];
    Knot::new(pts.iter().map(|&(x, y)| Vec3::new(qr(r * x, 5), qr(r * y, 5), q(0))).collect()).unwrap()
}

/// Integer samples of `(sin t + 2 sin 2t, cos t − 2 cos 2t, −sin 3t)`, scaled by 10.
fn trefoil() -> Knot {
    let pts = [
        (0, -10, 0), (16, -6, -9), (26, 4, -9), (26, 15, 0), (17, 21, 9), (3, 17, 9),
        (-9, 5, 0), (-13, -11, -9), (-9, -25, -9), (0, -30, 0), (9, -25, 9), (13, -11, 9),
        (9, 5, 0), (-3, 17, -9), (-17, 21, -9), (-26, 15, 0), (-26, 4, 9), (-16, -6, 9),
    ];
    Knot::new(pts.iter().map(|&(x, y, z)| Vec3::new(q(x), q(y), q(z))).collect()).unwrap()
}

fn knot_round_trip() -> Outcome {
    let mirror = trefoil().map(|v| Vec3::new(v.x.clone(), v.y.clone(), -v.z.clone())).map_err(|e| e.to_string())?;
    let corpus = [("round unknot", round_unknot(10)), ("trefoil", trefoil()), ("mirror trefoil", mirror)];
    for (name, k) in &corpus {
        for turns in -2..=2 {
            let p = pushoff(k, turns, None, 21).map_err(|e| format!("{name}: {e}"))?;
            let got = framing_from_pushoff(k, &p, 22).map_err(|e| format!("{name}: {e}"))?;
            ensure(got == turns, || format!("{name}: pushoff with {turns} turns read back as {got}"))?;
        }
    }
    for a in -5..=5i64 {
        for b in -5..=5i64 {
            let d = knot_frame_to_l_frame(b).0 - knot_frame_to_l_frame(a).0;
            ensure(d == b - a, || format!("framings {a}, {b} map to frames differing by {d}"))?;
        }
    }
    Ok("3 knots, 5 framings each".into())
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::write_fixtures(dir.path());
    let exe = env!("CARGO_BIN_EXE_framelink");
    let suite = common::cli_suite(dir.path());
    let run_all = || -> Result<Vec<u8>, String> {
        let mut out = vec![];
        for args in &suite {
            let o = std::process::Command::new(exe).args(args).env("FRAMELINK_SEED", "2024").output().map_err(|e| e.to_string())?;
            ensure(o.status.success(), || format!("{args:?} exited with {:?}", o.status.code()))?;
            out.extend(format!("{:?}\n", o.status.code()).bytes());
            out.extend(o.stdout);
            out.extend(o.stderr);
        }
        Ok(out)
    };
    let (a, b) = (run_all()?, run_all()?);
    ensure(a == b, || "outputs differ between runs".into())?;
    Ok(format!("{} commands, {} bytes", suite.len(), a.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("frame-change law", frame_change_law),
        ("chain and embedding methods agree", dual_algorithm_agreement),
        ("reference curves do not matter", reference_independence),
        ("crossing changes jump by the sign", crossing_jump),
        ("gluing algebra", compactification_algebra),
        ("chain system identity", chain_identity),
        ("t-data invariance", tdata_invariance),
        ("orbit frame on fibers", orbit_frame_vanishing),
        ("knot framing round trip", knot_round_trip),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
