//! Symbolic systems of chains over the covering spaces `L̃_G`.
//!
//! A model cell on `G` is the unlinked product cycle: a torus family at every
//! positive-area vertex and a diagonal family at every zero-area vertex, with
//! offsets from t-data and a π₁ label on every boundary arc. A loop cell
//! replaces the factors by explicit PL loops, one per half-edge.
//!
//! Orientation is a wedge of the edges in the order of
//! [`DecoratedGraph::edges`]; the diagonal boundary along edge number `k`
//! carries `(−1)^k` and relabeling multiplies by the sign of the induced edge
//! permutation, so applying two diagonal boundaries in either order cancels.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curve::{check_general_position, emit_curve, parse_curve, PLCurve};
use crate::error::{Error, Result};
use crate::graph::{contract_tdata_edge, edge_permutation_sign, Contraction, DecoratedGraph, GraphJson, Labeling, TData, VertexOrigin};
use crate::homology::FrameInt;
use crate::linking::{link, self_link, LinkOptions, Method};
use crate::rational::{fmt_q, parse_q, q, Q};
use crate::rng::derive_seed;

/// Element of π₁(L) ≅ ℤ, or of a path torsor, as a lifted fiber displacement.
pub type Pi1Label = i64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub genus: u32,
    pub boundaries: usize,
    pub max_edges: usize,
}

impl Bounds {
    pub fn contains(&self, g: &DecoratedGraph) -> bool {
        g.genus() == self.genus && g.boundary_count() == self.boundaries && g.num_edges() <= self.max_edges
    }
}

/// Identity of a model cell: arc labels per half-edge, winding per vertex,
/// and offsets in canonical representative form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub labels: Vec<Pi1Label>,
    pub windings: Vec<Pi1Label>,
    pub offsets: TData,
}

/// Formal rational combination of model cells on one graph.
pub type Chain = BTreeMap<CellKey, Q>;

#[derive(Clone, Debug)]
pub struct LoopCell {
    pub labels: Vec<Pi1Label>,
    pub windings: Vec<Pi1Label>,
    pub offsets: TData,
    /// One loop per half-edge.
    pub loops: Vec<PLCurve>,
    pub coefficient: Q,
}

#[derive(Clone, Debug, Default)]
pub struct GraphChain {
    pub model: Chain,
    pub loops: Vec<LoopCell>,
}

/// `G ↦ W_G` over canonical graphs.
#[derive(Clone, Debug)]
pub struct ChainSystem {
    pub bounds: Bounds,
    pub frame: FrameInt,
    pub graphs: BTreeMap<DecoratedGraph, GraphChain>,
}

/// One entry of a model 0-chain or a labeled cell handed to [`build_unlinked`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelTerm {
    /// Per half-edge.
    pub labels: Vec<Pi1Label>,
    /// Per isolated vertex, in vertex order.
    pub isolated: Vec<Pi1Label>,
    pub coefficient: Q,
}

fn sign_q(s: i32) -> Q {
    q(s as i64)
}

/// Windings per vertex from arc labels and the labels of isolated vertices.
pub fn vertex_windings(g: &DecoratedGraph, labels: &[Pi1Label], isolated: &[Pi1Label]) -> Result<Vec<Pi1Label>> {
    let iso = g.isolated_vertices();
    if labels.len() != g.num_darts() || isolated.len() != iso.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} arc labels and {} isolated labels, got {} and {}",
            g.num_darts(),
            iso.len(),
            labels.len(),
            isolated.len()
        )));
    }
    let mut w = vec![0; g.num_vertices()];
    for (d, &l) in labels.iter().enumerate() {
        w[g.vertex_of(d)] += l;
    }
    for (&v, &l) in iso.iter().zip(isolated) {
        w[v] = l;
    }
    Ok(w)
}

// Isolated vertices of a canonical graph sit at the end, sorted by flag; their
// windings are only defined up to permutation within each flag.
fn sort_isolated(g: &DecoratedGraph, windings: &mut [Pi1Label]) {
    let iso = g.isolated_vertices();
    for flag in [false, true] {
        let idx: Vec<usize> = iso.iter().copied().filter(|&v| g.area_zero(v) == flag).collect();
        let mut vals: Vec<Pi1Label> = idx.iter().map(|&v| windings[v]).collect();
        vals.sort_unstable();
        for (&v, x) in idx.iter().zip(vals) {
            windings[v] = x;
        }
    }
}

fn relabel_vec<T: Clone>(v: &[T], map: &[usize]) -> Vec<T> {
    let mut out = v.to_vec();
    for (x, val) in v.iter().enumerate() {
        out[map[x]] = val.clone();
    }
    out
}

fn relabel_key(canonical: &DecoratedGraph, key: &CellKey, l: &Labeling) -> Result<CellKey> {
    let mut windings = relabel_vec(&key.windings, &l.vertex_map);
    sort_isolated(canonical, &mut windings);
    Ok(CellKey {
        labels: relabel_vec(&key.labels, &l.dart_map),
        windings,
        offsets: key.offsets.relabel(l).canonical(canonical)?,
    })
}

/// Moves a model cell to the canonical form of its graph. Returns `None` when
/// an orientation-reversing automorphism fixes the cell, which makes it zero.
pub fn canonical_cell(g: &DecoratedGraph, key: &CellKey) -> Result<Option<(DecoratedGraph, CellKey, i32)>> {
    let canon = g.canonical();
    let mut best: Option<(CellKey, i32)> = None;
    let mut cancels = false;
    for l in &canon.labelings {
        let k = relabel_key(&canon.graph, key, l)?;
        let s = edge_permutation_sign(g, &l.dart_map);
        match &best {
            Some((b, bs)) if k == *b => cancels |= s != *bs,
            Some((b, _)) if k > *b => {}
            _ => {
                best = Some((k, s));
                cancels = false;
            }
        }
    }
    let (key, sign) = best.expect("at least one labeling");
    Ok((!cancels).then_some((canon.graph, key, sign)))
}

fn canonical_loop_cell(g: &DecoratedGraph, cell: LoopCell) -> Result<(DecoratedGraph, LoopCell)> {
    let canon = g.canonical();
    let l = &canon.labelings[0];
    let mut windings = relabel_vec(&cell.windings, &l.vertex_map);
    sort_isolated(&canon.graph, &mut windings);
    let out = LoopCell {
        labels: relabel_vec(&cell.labels, &l.dart_map),
        windings,
        offsets: cell.offsets.relabel(l).canonical(&canon.graph)?,
        loops: relabel_vec(&cell.loops, &l.dart_map),
        coefficient: cell.coefficient,
    };
    Ok((canon.graph, out))
}

fn transported_labels(c: &Contraction, labels: &[Pi1Label], windings: &[Pi1Label]) -> (Vec<Pi1Label>, Vec<Pi1Label>) {
    let new_labels: Vec<Pi1Label> = c.dart_paths.iter().map(|p| p.iter().map(|&x| labels[x]).sum()).collect();
    let mut new_windings = vec![0; c.graph.num_vertices()];
    for (d, &l) in new_labels.iter().enumerate() {
        new_windings[c.graph.vertex_of(d)] += l;
    }
    for (v, origin) in c.vertex_origin.iter().enumerate() {
        match origin {
            VertexOrigin::Cycle => {}
            VertexOrigin::Isolated(old) => new_windings[v] = windings[*old],
            VertexOrigin::Absorbed(path) => new_windings[v] = path.iter().map(|&x| labels[x]).sum(),
        }
    }
    (new_labels, new_windings)
}

/// Offsets along a contraction: the compatibility rule when the edge touches a
/// zero-area vertex, plain restriction otherwise.
pub fn transport_offsets(g: &DecoratedGraph, d: usize, t: &TData) -> Result<(Contraction, TData)> {
    let touches_zero = g.area_zero(g.vertex_of(d)) || g.area_zero(g.vertex_of(g.pair(d)));
    if touches_zero {
        return contract_tdata_edge(g, d, t);
    }
    let c = g.contract_dart(d)?;
    let out = TData(c.dart_origin.iter().map(|&x| t.0[x].clone()).collect()).canonical(&c.graph)?;
    Ok((c, out))
}

/// Result of intersecting one model cell with the lifted diagonal of edge `e`.
#[allow(clippy::large_enum_variant)]
enum Meet {
    Empty,
    Cell(DecoratedGraph, CellKey, Q, bool),
}

fn edge_sign(e: usize) -> Q {
    if e.is_multiple_of(2) {
        Q::one()
    } else {
        -Q::one()
    }
}

fn meet_model(g: &DecoratedGraph, key: &CellKey, e: usize) -> std::result::Result<Meet, String> {
    let (a, b) = g.edges()[e];
    let (va, vb) = (g.vertex_of(a), g.vertex_of(b));
    let t = &key.offsets.0;
    if va == vb || (!g.area_zero(va) && !g.area_zero(vb)) {
        // Both evaluation points are pinned at their own offsets.
        return if t[a] == t[b] {
            Err(format!("equal offsets {} at both ends", fmt_q(&t[a])))
        } else {
            Ok(Meet::Empty)
        };
    }
    let (c, offsets) = transport_offsets(g, a, &key.offsets).map_err(|x| x.to_string())?;
    let (labels, windings) = transported_labels(&c, &key.labels, &key.windings);
    let moved = CellKey { labels, windings, offsets };
    match canonical_cell(&c.graph, &moved).map_err(|x| x.to_string())? {
        None => Ok(Meet::Empty),
        Some((h, k, s)) => Ok(Meet::Cell(h, k, edge_sign(e) * sign_q(s), c.valence_one)),
    }
}

fn meet_loops(g: &DecoratedGraph, cell: &LoopCell, e: usize) -> std::result::Result<(), String> {
    let (a, b) = g.edges()[e];
    if cell.loops[a] == cell.loops[b] {
        return Ok(());
    }
    let report = check_general_position(&cell.loops[a], &cell.loops[b]);
    if report.disjoint {
        Ok(())
    } else {
        Err("loops at the two ends intersect".into())
    }
}

/// `∂_e W` as a chain on `G/e` in canonical form; the boolean reports a
/// valence-one end, where labels concatenate three factors.
pub fn diagonal_boundary(g: &DecoratedGraph, w: &Chain, e: usize) -> Result<(DecoratedGraph, Chain, bool)> {
    if e >= g.num_edges() {
        return Err(Error::InvalidArgument(format!("edge {e} does not exist")));
    }
    let mut out = Chain::new();
    let mut target = None;
    let mut valence_one = false;
    for (i, (key, coef)) in w.iter().enumerate() {
        match meet_model(g, key, e) {
            Err(msg) => return Err(Error::NonTransverse { cell: i, edge: e, msg }),
            Ok(Meet::Empty) => {}
            Ok(Meet::Cell(h, k, s, v1)) => {
                valence_one |= v1;
                target.get_or_insert(h);
                add(&mut out, k, s * coef);
            }
        }
    }
    let target = match target {
        Some(t) => t,
        None => g.contract(e)?.graph.canonical_form(),
    };
    Ok((target, out, valence_one))
}

fn add(chain: &mut Chain, key: CellKey, c: Q) {
    if c.is_zero() {
        return;
    }
    let entry = chain.entry(key.clone()).or_insert_with(Q::zero);
    *entry += c;
    if entry.is_zero() {
        chain.remove(&key);
    }
}

#[derive(Clone, Debug, Default)]
pub struct BoundaryImage {
    pub chains: BTreeMap<DecoratedGraph, Chain>,
    pub non_transverse: Vec<String>,
    pub valence_one: usize,
}

/// `Σ_{(G′, e′)} ∂_{e′} W_{G′}`, collected by target graph.
pub fn total_boundary(s: &ChainSystem) -> BoundaryImage {
    let entries: Vec<(&DecoratedGraph, &GraphChain)> = s.graphs.iter().collect();
    let parts: Vec<BoundaryImage> = entries
        .par_iter()
        .enumerate()
        .map(|(gi, (g, w))| {
            let mut img = BoundaryImage::default();
            for e in 0..g.num_edges() {
                for (i, (key, coef)) in w.model.iter().enumerate() {
                    match meet_model(g, key, e) {
                        Err(msg) => img.non_transverse.push(format!("graph {gi}, model cell {i}, edge {e}: {msg}")),
                        Ok(Meet::Empty) => {}
                        Ok(Meet::Cell(h, k, sg, v1)) => {
                            img.valence_one += v1 as usize;
                            add(img.chains.entry(h).or_default(), k, sg * coef);
                        }
                    }
                }
                for (i, cell) in w.loops.iter().enumerate() {
                    if let Err(msg) = meet_loops(g, cell, e) {
                        img.non_transverse.push(format!("graph {gi}, loop cell {i}, edge {e}: {msg}"));
                    }
                }
            }
            img
        })
        .collect();
    let mut out = BoundaryImage::default();
    for p in parts {
        out.non_transverse.extend(p.non_transverse);
        out.valence_one += p.valence_one;
        for (h, chain) in p.chains {
            let dst = out.chains.entry(h).or_default();
            for (k, c) in chain {
                add(dst, k, c);
            }
        }
    }
    out.chains.retain(|_, c| !c.is_empty());
    out
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub graph: DecoratedGraph,
    /// `Σ ∂_{e′} W_{G′} − ∂W_G`.
    pub discrepancy: Chain,
}

#[derive(Clone, Debug)]
pub struct SystemReport {
    pub graphs_checked: usize,
    pub violations: Vec<Violation>,
    pub non_transverse: Vec<String>,
    pub valence_one_contractions: usize,
}

impl SystemReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.non_transverse.is_empty()
    }
}

/// Checks `∂W_G = Σ_{G′/e′ ≅ G} ∂_{e′} W_{G′}` at every graph; model and loop
/// cells are cycles, so the right-hand side has to vanish.
pub fn check_system(s: &ChainSystem) -> SystemReport {
    let img = total_boundary(s);
    let targets: BTreeSet<&DecoratedGraph> = s.graphs.keys().chain(img.chains.keys()).collect();
    SystemReport {
        graphs_checked: targets.len(),
        violations: img.chains.into_iter().map(|(graph, discrepancy)| Violation { graph, discrepancy }).collect(),
        non_transverse: img.non_transverse,
        valence_one_contractions: img.valence_one,
    }
}

/// The system `Σ ∂_{e′} W_{G′}` itself; its own boundary vanishes.
pub fn boundary_system(s: &ChainSystem) -> Result<ChainSystem> {
    let img = total_boundary(s);
    if let Some(msg) = img.non_transverse.first() {
        return Err(Error::NonTransverse { cell: 0, edge: 0, msg: msg.clone() });
    }
    Ok(ChainSystem {
        bounds: s.bounds,
        frame: s.frame,
        graphs: img.chains.into_iter().map(|(g, model)| (g, GraphChain { model, loops: vec![] })).collect(),
    })
}

/// Offsets are generic when no edge pins both ends at the same offset.
pub fn check_generic(g: &DecoratedGraph, t: &TData) -> Result<()> {
    for (e, (a, b)) in g.edges().into_iter().enumerate() {
        let (va, vb) = (g.vertex_of(a), g.vertex_of(b));
        if (va == vb || (!g.area_zero(va) && !g.area_zero(vb))) && t.0[a] == t.0[b] {
            return Err(Error::InvalidTData(format!("edge {e} has equal offsets {} at both ends", fmt_q(&t.0[a]))));
        }
    }
    Ok(())
}

/// The model system `W_G = Σ c · W_G^unlinked` over the given graphs.
///
/// Graphs must lie in `bounds` and be unlinked: an edge touching a zero-area
/// vertex meets its diagonal, so its model cell is not a cycle of the system.
pub fn build_unlinked(
    bounds: Bounds,
    tdata: &BTreeMap<DecoratedGraph, TData>,
    frame: FrameInt,
    coefficients: &[(DecoratedGraph, Vec<ModelTerm>)],
) -> Result<ChainSystem> {
    let mut graphs: BTreeMap<DecoratedGraph, GraphChain> = BTreeMap::new();
    for (g, terms) in coefficients {
        if !bounds.contains(g) {
            return Err(Error::Bounds(format!(
                "graph with genus {}, {} boundaries and {} edges is outside the bounds",
                g.genus(),
                g.boundary_count(),
                g.num_edges()
            )));
        }
        if !g.is_unlinked() {
            return Err(Error::InvalidArgument("model cell meets a diagonal: an edge touches a zero-area vertex".into()));
        }
        let t = tdata.get(g).cloned().unwrap_or_else(|| TData::zeros(g));
        check_generic(g, &t)?;
        let offsets = t.canonical(g)?;
        for term in terms {
            let key = CellKey {
                labels: term.labels.clone(),
                windings: vertex_windings(g, &term.labels, &term.isolated)?,
                offsets: offsets.clone(),
            };
            if let Some((h, k, s)) = canonical_cell(g, &key)? {
                add(&mut graphs.entry(h).or_default().model, k, sign_q(s) * &term.coefficient);
            }
        }
    }
    graphs.retain(|_, w| !w.model.is_empty());
    Ok(ChainSystem { bounds, frame, graphs })
}

/// Boundary points of a zero-area diagonal family at parameter `t`: the
/// half-edge `eᵢ` sits at radius `t + t_{eᵢ} − t_{e₁}` over the torus point `p`.
pub fn diagonal_family_points(offsets: &[Q], t: &Q, p: &(Q, Q)) -> Vec<(Q, Q, Q)> {
    let Some(first) = offsets.first() else { return vec![] };
    offsets.iter().map(|x| (t + x - first, p.0.clone(), p.1.clone())).collect()
}

/// Frame-dependent linking of the two loops at the ends of edge `(a, b)`;
/// identical loops use the self-linking pushoff.
fn edge_link(loops: &[PLCurve], a: usize, b: usize, frame: FrameInt, opts: &LinkOptions) -> Result<i64> {
    if loops[a] == loops[b] {
        self_link(&loops[a], frame, None, Method::Embedding, opts)
    } else {
        Ok(link(&loops[a], &loops[b], frame, Method::Embedding, opts)?.value)
    }
}

/// `∏_{e ∈ E(G)} link(γ_{e₀}, γ_{e₁}) / |Aut(G)|`; loops are listed per vertex
/// in cyclic order.
pub fn generalized_linking(g: &DecoratedGraph, loops: &[Vec<PLCurve>], frame: FrameInt, opts: &LinkOptions) -> Result<Q> {
    generalized_linking_darts(g, &loops_by_vertex(g, loops)?, frame, opts)
}

/// [`generalized_linking`] with one loop per half-edge.
pub fn generalized_linking_darts(g: &DecoratedGraph, loops: &[PLCurve], frame: FrameInt, opts: &LinkOptions) -> Result<Q> {
    if loops.len() != g.num_darts() {
        return Err(Error::InvalidArgument(format!("{} loops for {} half-edges", loops.len(), g.num_darts())));
    }
    let mut value = Q::one();
    for (e, (a, b)) in g.edges().into_iter().enumerate() {
        let o = LinkOptions { seed: derive_seed(opts.seed, e as u64), radii: opts.radii.clone() };
        value *= q(edge_link(loops, a, b, frame, &o)?);
    }
    Ok(value / q(g.aut_order() as i64))
}

/// Per-half-edge loops from per-vertex lists in cyclic order.
pub fn loops_by_vertex(g: &DecoratedGraph, per_vertex: &[Vec<PLCurve>]) -> Result<Vec<PLCurve>> {
    if per_vertex.len() != g.num_vertices() {
        return Err(Error::InvalidArgument("one loop list per vertex is required".into()));
    }
    let mut out: Vec<Option<PLCurve>> = vec![None; g.num_darts()];
    for (v, list) in per_vertex.iter().enumerate() {
        let darts = g.darts_of(v);
        if darts.len() != list.len() {
            return Err(Error::InvalidArgument(format!("vertex {v} has {} half-edges but {} loops", darts.len(), list.len())));
        }
        for (d, c) in darts.into_iter().zip(list) {
            out[d] = Some(c.clone());
        }
    }
    Ok(out.into_iter().map(|c| c.expect("every dart has a vertex")).collect())
}

/// Index of an invariant `F_{g, n₁, …, n_h}` together with its area data.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct InvariantKey {
    pub genus: u32,
    pub boundaries: usize,
    pub windings: Vec<Pi1Label>,
    pub zero_area: Vec<bool>,
    pub class: Option<String>,
}

impl InvariantKey {
    fn of(g: &DecoratedGraph, windings: &[Pi1Label]) -> Self {
        let mut w = windings.to_vec();
        sort_isolated(g, &mut w);
        InvariantKey {
            genus: g.genus(),
            boundaries: g.num_vertices(),
            windings: w,
            zero_area: (0..g.num_vertices()).map(|v| g.area_zero(v)).collect(),
            class: g.class().map(str::to_owned),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub frame: FrameInt,
    /// Multipliers of `W_G^unlinked` on graphs with edges.
    pub multipliers: BTreeMap<DecoratedGraph, Chain>,
    /// Coefficients of the edgeless 0-chains.
    pub invariants: BTreeMap<InvariantKey, Q>,
}

impl NormalForm {
    pub fn to_system(&self, bounds: Bounds) -> ChainSystem {
        let mut graphs: BTreeMap<DecoratedGraph, GraphChain> = self
            .multipliers
            .iter()
            .map(|(g, c)| (g.clone(), GraphChain { model: c.clone(), loops: vec![] }))
            .collect();
        for (k, c) in &self.invariants {
            let g = DecoratedGraph::edgeless(k.genus, &k.zero_area).with_class(k.class.clone());
            let key = CellKey { labels: vec![], windings: k.windings.clone(), offsets: TData(vec![]) };
            add(&mut graphs.entry(g).or_default().model, key, c.clone());
        }
        ChainSystem { bounds, frame: self.frame, graphs }
    }
}

struct LevelOutput {
    graph: DecoratedGraph,
    multipliers: Chain,
    pushes: Vec<(DecoratedGraph, LoopCell)>,
}

fn reduce_graph(
    gi: usize,
    g: &DecoratedGraph,
    model: Option<&GraphChain>,
    loops: &[LoopCell],
    frame: FrameInt,
    opts: &LinkOptions,
) -> Result<LevelOutput> {
    let mut multipliers = Chain::new();
    if let Some(w) = model {
        for (i, (k, c)) in w.model.iter().enumerate() {
            if !g.is_unlinked() {
                return Err(Error::Obstruction {
                    cell: i,
                    msg: "model cell on a graph whose unlinked cycle meets a diagonal".into(),
                });
            }
            add(&mut multipliers, k.clone(), c.clone());
        }
    }
    let edges = g.edges();
    let mut pushes = vec![];
    for (i, cell) in loops.iter().enumerate() {
        // A loop cell is homologous to the model cell with its labels; the
        // bounding chain meets each diagonal in the edge's linking number.
        // On graphs that are not unlinked the model multiplier must vanish.
        if g.is_unlinked() {
            let key = CellKey { labels: cell.labels.clone(), windings: cell.windings.clone(), offsets: cell.offsets.clone() };
            if let Some((_, k, s)) = canonical_cell(g, &key)? {
                add(&mut multipliers, k, sign_q(s) * &cell.coefficient);
            }
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            let seed = derive_seed(opts.seed, ((gi as u64) << 24) ^ ((i as u64) << 8) ^ e as u64);
            let o = LinkOptions { seed, radii: opts.radii.clone() };
            let lk = edge_link(&cell.loops, a, b, frame, &o)?;
            let coefficient = &cell.coefficient * q(lk) / q(edges.len() as i64);
            if coefficient.is_zero() {
                continue;
            }
            let (c, offsets) = transport_offsets(g, a, &cell.offsets)?;
            let (labels, windings) = transported_labels(&c, &cell.labels, &cell.windings);
            let moved = LoopCell {
                labels,
                windings,
                offsets,
                loops: c.dart_origin.iter().map(|&x| cell.loops[x].clone()).collect(),
                coefficient,
            };
            pushes.push(canonical_loop_cell(&c.graph, moved)?);
        }
    }
    Ok(LevelOutput { graph: g.clone(), multipliers, pushes })
}

/// Normalizes every `W_G` to multiples of `W_G^unlinked`, from the largest
/// edge count down, and returns the edgeless 0-chains.
pub fn reduce(s: &ChainSystem, frame: FrameInt, opts: &LinkOptions) -> Result<NormalForm> {
    let report = check_system(s);
    if let Some(msg) = report.non_transverse.first() {
        return Err(Error::NonTransverse { cell: 0, edge: 0, msg: msg.clone() });
    }
    if !report.violations.is_empty() {
        return Err(Error::SystemViolations(report.violations.len()));
    }
    let mut pending: BTreeMap<DecoratedGraph, Vec<LoopCell>> = BTreeMap::new();
    for (g, w) in &s.graphs {
        let aut = q(g.aut_order() as i64);
        for cell in &w.loops {
            let mut c = cell.clone();
            c.coefficient = &c.coefficient / &aut;
            pending.entry(g.clone()).or_default().push(c);
        }
    }
    let top = s.graphs.keys().map(|g| g.num_edges()).max().unwrap_or(0);
    let mut multipliers = BTreeMap::new();
    for level in (1..=top).rev() {
        let graphs: Vec<&DecoratedGraph> = s
            .graphs
            .keys()
            .chain(pending.keys())
            .filter(|g| g.num_edges() == level)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let outputs: Vec<LevelOutput> = graphs
            .par_iter()
            .enumerate()
            .map(|(gi, &g)| {
                let loops = pending.get(g).map(Vec::as_slice).unwrap_or(&[]);
                reduce_graph(gi, g, s.graphs.get(g), loops, frame, opts)
            })
            .collect::<Result<_>>()?;
        for out in outputs {
            pending.remove(&out.graph);
            if !out.multipliers.is_empty() {
                multipliers.insert(out.graph, out.multipliers);
            }
            for (h, cell) in out.pushes {
                pending.entry(h).or_default().push(cell);
            }
        }
    }
    let mut invariants: BTreeMap<InvariantKey, Q> = BTreeMap::new();
    let mut put = |k: InvariantKey, c: Q| {
        let e = invariants.entry(k.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            invariants.remove(&k);
        }
    };
    for (g, w) in s.graphs.iter().filter(|(g, _)| g.num_edges() == 0) {
        for (k, c) in &w.model {
            put(InvariantKey::of(g, &k.windings), c.clone());
        }
    }
    for (g, cells) in pending.iter().filter(|(g, _)| g.num_edges() == 0) {
        for cell in cells {
            put(InvariantKey::of(g, &cell.windings), cell.coefficient.clone());
        }
    }
    Ok(NormalForm { frame, multipliers, invariants })
}

/// Reads the coefficients `F^f_{g, n₁, …, n_h}` off the reduced system.
///
/// Windings of boundaries with equal area flags are sorted, since the
/// automorphisms of the edgeless graph permute them. With several components
/// of `L`, boundaries of winding zero cannot be attributed to a component;
/// keys are reported per component as given and are not merged.
pub fn extract_invariants(s: &ChainSystem, frame: FrameInt, opts: &LinkOptions) -> Result<BTreeMap<InvariantKey, Q>> {
    Ok(reduce(s, frame, opts)?.invariants)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoopSource {
    File { file: String },
    Text { text: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellJson {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default)]
    pub labels: BTreeMap<String, Pi1Label>,
    #[serde(default)]
    pub vertex_labels: BTreeMap<String, Pi1Label>,
    #[serde(default = "default_sign")]
    pub sign: i32,
    #[serde(default = "default_coefficient")]
    pub coefficient: Value,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub loops: BTreeMap<String, LoopSource>,
}

fn default_kind() -> String {
    "model".into()
}

fn default_sign() -> i32 {
    1
}

fn default_coefficient() -> Value {
    json!("1")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneGraph {
    pub graph: GraphJson,
    #[serde(default)]
    pub tdata: BTreeMap<String, Value>,
    #[serde(default)]
    pub cells: Vec<CellJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scene {
    pub bounds: Bounds,
    #[serde(default)]
    pub frame: i64,
    pub graphs: Vec<SceneGraph>,
}

fn value_q(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s),
        Value::Number(n) => parse_q(&n.to_string()),
        _ => None,
    }
    .ok_or_else(|| Error::InvalidArgument(format!("expected a rational, got {v}")))
}

fn id_index(ids: &[u64], key: &str, what: &str) -> Result<usize> {
    let id: u64 = key.parse().map_err(|_| Error::InvalidArgument(format!("bad {what} id {key:?}")))?;
    ids.iter().position(|&x| x == id).ok_or_else(|| Error::InvalidArgument(format!("unknown {what} id {id}")))
}

impl Scene {
    pub fn parse(text: &str) -> Result<Scene> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the system; loop files are resolved against `base`.
    pub fn to_system(&self, base: &Path) -> Result<ChainSystem> {
        let mut graphs: BTreeMap<DecoratedGraph, GraphChain> = BTreeMap::new();
        for sg in &self.graphs {
            let (g, vids, dids) = DecoratedGraph::from_json(&sg.graph)?;
            if !self.bounds.contains(&g) {
                return Err(Error::Bounds(format!(
                    "graph with genus {}, {} boundaries and {} edges is outside the bounds",
                    g.genus(),
                    g.boundary_count(),
                    g.num_edges()
                )));
            }
            let mut t = TData::zeros(&g);
            for (k, v) in &sg.tdata {
                t.0[id_index(&dids, k, "half-edge")?] = value_q(v)?;
            }
            let iso = g.isolated_vertices();
            for cell in &sg.cells {
                let mut labels = vec![0; g.num_darts()];
                for (k, &n) in &cell.labels {
                    labels[id_index(&dids, k, "half-edge")?] = n;
                }
                let mut isolated = vec![0; iso.len()];
                for (k, &n) in &cell.vertex_labels {
                    let v = id_index(&vids, k, "vertex")?;
                    let pos = iso.iter().position(|&x| x == v).ok_or_else(|| {
                        Error::InvalidArgument(format!("vertex {k} carries half-edges; its winding comes from arc labels"))
                    })?;
                    isolated[pos] = n;
                }
                if cell.sign != 1 && cell.sign != -1 {
                    return Err(Error::InvalidArgument(format!("cell sign must be ±1, got {}", cell.sign)));
                }
                let coefficient = sign_q(cell.sign) * value_q(&cell.coefficient)?;
                let windings = vertex_windings(&g, &labels, &isolated)?;
                match cell.kind.as_str() {
                    "model" => {
                        let key = CellKey { labels, windings, offsets: t.canonical(&g)? };
                        if let Some((h, k, s)) = canonical_cell(&g, &key)? {
                            add(&mut graphs.entry(h).or_default().model, k, sign_q(s) * coefficient);
                        }
                    }
                    "loops" => {
                        let mut loops: Vec<Option<PLCurve>> = vec![None; g.num_darts()];
                        for (k, src) in &cell.loops {
                            let curve = match src {
                                LoopSource::File { file } => parse_curve(&std::fs::read_to_string(base.join(file))?)?,
                                LoopSource::Text { text } => parse_curve(text)?,
                            };
                            loops[id_index(&dids, k, "half-edge")?] = Some(curve);
                        }
                        let loops = loops
                            .into_iter()
                            .enumerate()
                            .map(|(d, c)| c.ok_or_else(|| Error::InvalidArgument(format!("half-edge {} has no loop", dids[d]))))
                            .collect::<Result<Vec<_>>>()?;
                        let cell = LoopCell { labels, windings, offsets: t.canonical(&g)?, loops, coefficient };
                        push_loop_cell(&mut graphs, &g, cell)?;
                    }
                    other => return Err(Error::InvalidArgument(format!("unknown cell kind {other:?}"))),
                }
            }
        }
        Ok(ChainSystem { bounds: self.bounds, frame: FrameInt(self.frame), graphs })
    }
}

fn push_loop_cell(graphs: &mut BTreeMap<DecoratedGraph, GraphChain>, g: &DecoratedGraph, cell: LoopCell) -> Result<()> {
    if cell.loops.len() != g.num_darts() || cell.labels.len() != g.num_darts() {
        return Err(Error::InvalidArgument(format!("{} loops for {} half-edges", cell.loops.len(), g.num_darts())));
    }
    let (h, c) = canonical_loop_cell(g, cell)?;
    graphs.entry(h).or_default().loops.push(c);
    Ok(())
}

impl ChainSystem {
    pub fn empty(bounds: Bounds, frame: FrameInt) -> Self {
        ChainSystem { bounds, frame, graphs: BTreeMap::new() }
    }

    /// Adds `coefficient` times the cell traced by `loops`, one per half-edge;
    /// arc labels are the loop windings.
    pub fn add_loops(&mut self, g: &DecoratedGraph, loops: Vec<PLCurve>, isolated: &[Pi1Label], coefficient: Q, t: &TData) -> Result<()> {
        if !self.bounds.contains(g) {
            return Err(Error::Bounds(format!(
                "graph with genus {}, {} boundaries and {} edges is outside the bounds",
                g.genus(),
                g.boundary_count(),
                g.num_edges()
            )));
        }
        let labels: Vec<Pi1Label> = loops.iter().map(|c| c.winding()).collect();
        let windings = vertex_windings(g, &labels, isolated)?;
        let cell = LoopCell { labels, windings, offsets: t.canonical(g)?, loops, coefficient };
        push_loop_cell(&mut self.graphs, g, cell)
    }

    /// Scene form with loops inlined; graphs and cells in canonical order.
    pub fn to_scene(&self) -> Scene {
        let mut graphs = vec![];
        for (g, w) in &self.graphs {
            let iso = g.isolated_vertices();
            let cell = |kind: &str, labels: &[Pi1Label], windings: &[Pi1Label], c: &Q| CellJson {
                kind: kind.into(),
                labels: labels.iter().enumerate().map(|(d, &n)| (d.to_string(), n)).collect(),
                vertex_labels: iso.iter().map(|&v| (v.to_string(), windings[v])).collect(),
                sign: 1,
                coefficient: json!(fmt_q(c)),
                loops: BTreeMap::new(),
            };
            let mut by_offsets: BTreeMap<&TData, Vec<CellJson>> = BTreeMap::new();
            for (k, c) in &w.model {
                by_offsets.entry(&k.offsets).or_default().push(cell("model", &k.labels, &k.windings, c));
            }
            for lc in &w.loops {
                let mut j = cell("loops", &lc.labels, &lc.windings, &lc.coefficient);
                j.loops = lc.loops.iter().enumerate().map(|(d, c)| (d.to_string(), LoopSource::Text { text: emit_curve(c) })).collect();
                by_offsets.entry(&lc.offsets).or_default().push(j);
            }
            for (t, cells) in by_offsets {
                graphs.push(SceneGraph {
                    graph: g.to_json(),
                    tdata: t.0.iter().enumerate().map(|(d, x)| (d.to_string(), json!(fmt_q(x)))).collect(),
                    cells,
                });
            }
        }
        Scene { bounds: self.bounds, frame: self.frame.0, graphs }
    }
}

pub fn chain_json(c: &Chain) -> Value {
    Value::Array(
        c.iter()
            .map(|(k, v)| {
                json!({
                    "labels": k.labels,
                    "windings": k.windings,
                    "offsets": k.offsets.0.iter().map(fmt_q).collect::<Vec<_>>(),
                    "coefficient": fmt_q(v),
                })
            })
            .collect(),
    )
}

pub fn report_json(r: &SystemReport) -> Value {
    json!({
        "graphs_checked": r.graphs_checked,
        "ok": r.is_ok(),
        "non_transverse": r.non_transverse,
        "valence_one_contractions": r.valence_one_contractions,
        "violations": r.violations.iter().map(|v| json!({
            "graph": v.graph.to_json(),
            "discrepancy": chain_json(&v.discrepancy),
        })).collect::<Vec<_>>(),
    })
}

pub fn invariants_json(inv: &BTreeMap<InvariantKey, Q>) -> Value {
    Value::Array(
        inv.iter()
            .map(|(k, v)| {
                json!({
                    "genus": k.genus,
                    "boundaries": k.boundaries,
                    "windings": k.windings,
                    "zero_area": k.zero_area,
                    "class": k.class,
                    "value": fmt_q(v),
                })
            })
            .collect(),
    )
}

pub fn normal_form_json(n: &NormalForm) -> Value {
    json!({
        "frame": n.frame.0,
        "multipliers": n.multipliers.iter().map(|(g, c)| json!({
            "graph": g.to_json(),
            "cells": chain_json(c),
        })).collect::<Vec<_>>(),
        "invariants": invariants_json(&n.invariants),
    })
}
