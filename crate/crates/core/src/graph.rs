//! Decorated graphs as ribbon structures on half-edges ("darts").
//!
//! A vertex is a boundary circle of a multi-curve; the cyclic order of its
//! darts is the order of the boundary marked points. Every dart also owns
//! the boundary arc from its marked point to the next one, and the arc carries
//! the area flag of the component it came from. Vertex flags are derived from
//! arcs, which keeps contraction independent of the order of edges.
//!
//! Genus and the homology class key are attached to the whole graph and are
//! invariant under contraction.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedGraph {
    genus: u32,
    class: Option<String>,
    // Authoritative only for isolated vertices; otherwise the conjunction of arc flags.
    vertex_zero: Vec<bool>,
    dart_vertex: Vec<usize>,
    next: Vec<usize>,
    pair: Vec<usize>,
    arc_zero: Vec<bool>,
}

/// Where a vertex of `G/e` comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexOrigin {
    /// Carries the darts listed in its cyclic order.
    Cycle,
    /// An isolated vertex of `G`, kept as is.
    Isolated(usize),
    /// A new isolated vertex whose whole boundary is the concatenation of these old arcs.
    Absorbed(Vec<usize>),
}

/// Result of contracting one edge, with the bookkeeping needed to transport
/// per-dart data.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub graph: DecoratedGraph,
    /// New dart → old dart with the same marked point.
    pub dart_origin: Vec<usize>,
    /// New dart → old arcs whose concatenation is its arc.
    pub dart_paths: Vec<Vec<usize>>,
    pub vertex_origin: Vec<VertexOrigin>,
    /// The contracted edge, as the dart with the smaller id and its partner.
    pub edge: (usize, usize),
    /// Old vertices at the two ends.
    pub ends: (usize, usize),
    /// One of the ends had valence one.
    pub valence_one: bool,
}

/// A canonical numbering of a graph, stored as old dart → canonical dart and
/// old vertex → canonical vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    pub dart_map: Vec<usize>,
    pub vertex_map: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Canonical {
    pub graph: DecoratedGraph,
    /// All labelings producing `graph`; they differ by automorphisms of darts.
    pub labelings: Vec<Labeling>,
}

type Code = Vec<(bool, usize, usize)>;

impl DecoratedGraph {
    pub fn edgeless(genus: u32, zero_area: &[bool]) -> Self {
        DecoratedGraph {
            genus,
            class: None,
            vertex_zero: zero_area.to_vec(),
            dart_vertex: vec![],
            next: vec![],
            pair: vec![],
            arc_zero: vec![],
        }
    }

    /// Builds a graph from raw tables, validating every structural invariant.
    pub fn from_parts(
        genus: u32,
        class: Option<String>,
        vertex_zero: Vec<bool>,
        dart_vertex: Vec<usize>,
        next: Vec<usize>,
        pair: Vec<usize>,
        arc_zero: Option<Vec<bool>>,
    ) -> Result<Self> {
        let n = dart_vertex.len();
        let bad = |m: String| Err(Error::InvalidGraph(m));
        if next.len() != n || pair.len() != n {
            return bad("dart tables have different lengths".into());
        }
        if arc_zero.as_ref().is_some_and(|a| a.len() != n) {
            return bad("arc table has the wrong length".into());
        }
        for d in 0..n {
            if dart_vertex[d] >= vertex_zero.len() {
                return bad(format!("half-edge {d} points to a missing vertex"));
            }
            if next[d] >= n || pair[d] >= n {
                return bad(format!("half-edge {d} references a missing half-edge"));
            }
            if pair[d] == d || pair[pair[d]] != d {
                return bad(format!("pairing is not a fixed-point-free involution at {d}"));
            }
            if dart_vertex[next[d]] != dart_vertex[d] {
                return bad(format!("cyclic successor of half-edge {d} lies at another vertex"));
            }
        }
        let mut seen = vec![false; n];
        let mut covered = vec![false; vertex_zero.len()];
        for d in 0..n {
            if seen[d] {
                continue;
            }
            let v = dart_vertex[d];
            if covered[v] {
                return bad(format!("half-edges of vertex {v} do not form a single cycle"));
            }
            covered[v] = true;
            let mut x = d;
            loop {
                if seen[x] {
                    return bad(format!("cyclic order at vertex {v} is not a permutation"));
                }
                seen[x] = true;
                x = next[x];
                if x == d {
                    break;
                }
            }
        }
        let arc_zero = arc_zero.unwrap_or_else(|| dart_vertex.iter().map(|&v| vertex_zero[v]).collect());
        let g = DecoratedGraph { genus, class, vertex_zero, dart_vertex, next, pair, arc_zero };
        for v in 0..g.vertex_zero.len() {
            let darts = g.darts_of(v);
            if !darts.is_empty() && g.vertex_zero[v] != darts.iter().all(|&d| g.arc_zero[d]) {
                return bad(format!("area flag of vertex {v} disagrees with its arcs"));
            }
        }
        Ok(g)
    }

    pub fn with_genus(mut self, genus: u32) -> Self {
        self.genus = genus;
        self
    }

    pub fn with_class(mut self, class: Option<String>) -> Self {
        self.class = class;
        self
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn class(&self) -> Option<&str> {
        self.class.as_deref()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_zero.len()
    }

    pub fn num_darts(&self) -> usize {
        self.next.len()
    }

    pub fn num_edges(&self) -> usize {
        self.next.len() / 2
    }

    pub fn vertex_of(&self, d: usize) -> usize {
        self.dart_vertex[d]
    }

    pub fn next(&self, d: usize) -> usize {
        self.next[d]
    }

    pub fn pair(&self, d: usize) -> usize {
        self.pair[d]
    }

    pub fn arc_zero(&self, d: usize) -> bool {
        self.arc_zero[d]
    }

    pub fn area_zero(&self, v: usize) -> bool {
        self.vertex_zero[v]
    }

    /// Edges as `(d, pair(d))` with `d < pair(d)`, sorted by `d`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.num_darts()).filter(|&d| d < self.pair[d]).map(|d| (d, self.pair[d])).collect()
    }

    /// Darts of `v` in cyclic order, starting from the smallest.
    pub fn darts_of(&self, v: usize) -> Vec<usize> {
        let Some(start) = (0..self.num_darts()).find(|&d| self.dart_vertex[d] == v) else {
            return vec![];
        };
        let mut out = vec![start];
        let mut x = self.next[start];
        while x != start {
            out.push(x);
            x = self.next[x];
        }
        out
    }

    pub fn valence(&self, v: usize) -> usize {
        self.dart_vertex.iter().filter(|&&w| w == v).count()
    }

    pub fn isolated_vertices(&self) -> Vec<usize> {
        let mut has = vec![false; self.num_vertices()];
        for &v in &self.dart_vertex {
            has[v] = true;
        }
        (0..self.num_vertices()).filter(|&v| !has[v]).collect()
    }

    /// Orbits of `next ∘ pair`: the boundary cycles left after contracting every edge.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let n = self.num_darts();
        let mut seen = vec![false; n];
        let mut out = vec![];
        for d in 0..n {
            if seen[d] {
                continue;
            }
            let mut face = vec![];
            let mut x = d;
            while !seen[x] {
                seen[x] = true;
                face.push(x);
                x = self.next[self.pair[x]];
            }
            out.push(face);
        }
        out
    }

    /// Number of boundary components of the fully contracted graph.
    pub fn boundary_count(&self) -> usize {
        self.faces().len() + self.isolated_vertices().len()
    }

    /// True iff no non-loop edge touches a zero-area vertex.
    pub fn is_unlinked(&self) -> bool {
        self.edges().iter().all(|&(a, b)| {
            let (va, vb) = (self.dart_vertex[a], self.dart_vertex[b]);
            va == vb || (!self.vertex_zero[va] && !self.vertex_zero[vb])
        })
    }

    /// Index of the edge containing dart `d` in the order of [`Self::edges`].
    pub fn edge_index(&self, d: usize) -> usize {
        let m = d.min(self.pair[d]);
        (0..m).filter(|&x| x < self.pair[x]).count()
    }

    /// Contracts edge number `e` in the order of [`Self::edges`].
    pub fn contract(&self, e: usize) -> Result<Contraction> {
        let edges = self.edges();
        let &(a, _) = edges
            .get(e)
            .ok_or_else(|| Error::InvalidArgument(format!("edge {e} does not exist ({} edges)", edges.len())))?;
        self.contract_dart(a)
    }

    /// Contracts the edge containing dart `d`.
    ///
    /// The cyclic structure becomes `next ∘ (a b)` with `a`, `b` removed, so
    /// `(x, a, y)` and `(u, b, w)` merge into `(x, w, …, u, y, …)`, and a loop
    /// splits its vertex in two.
    pub fn contract_dart(&self, d: usize) -> Result<Contraction> {
        let n = self.num_darts();
        if d >= n {
            return Err(Error::InvalidArgument(format!("half-edge {d} does not exist")));
        }
        let (a, b) = (d.min(self.pair[d]), d.max(self.pair[d]));
        let (va, vb) = (self.dart_vertex[a], self.dart_vertex[b]);
        let mut next = self.next.clone();
        next[a] = self.next[b];
        next[b] = self.next[a];
        let mut paths: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
        paths.swap(a, b);
        let mut absorbed = vec![];
        for r in [a, b] {
            let p = (0..n).find(|&p| next[p] == r).expect("permutation");
            let tail = std::mem::take(&mut paths[r]);
            if p == r {
                absorbed.push(tail);
            } else {
                next[p] = next[r];
                paths[p].extend(tail);
            }
            next[r] = usize::MAX;
        }
        let survivors: Vec<usize> = (0..n).filter(|&x| x != a && x != b).collect();
        let mut new_id = vec![usize::MAX; n];
        for (i, &x) in survivors.iter().enumerate() {
            new_id[x] = i;
        }

        let mut vertex_origin = vec![];
        let mut vertex_zero = vec![];
        let mut vertex_id = vec![usize::MAX; self.num_vertices()];
        #[allow(clippy::needless_range_loop)]
        for v in 0..self.num_vertices() {
            if v == va || v == vb {
                continue;
            }
            vertex_id[v] = vertex_origin.len();
            vertex_zero.push(self.vertex_zero[v]);
            vertex_origin.push(if self.darts_of(v).is_empty() { VertexOrigin::Isolated(v) } else { VertexOrigin::Cycle });
        }
        let arc = |path: &[usize]| path.iter().all(|&x| self.arc_zero[x]);
        let mut dart_vertex = vec![usize::MAX; survivors.len()];
        for &x in &survivors {
            let v = self.dart_vertex[x];
            if v != va && v != vb {
                dart_vertex[new_id[x]] = vertex_id[v];
            }
        }
        for &x in &survivors {
            if dart_vertex[new_id[x]] != usize::MAX {
                continue;
            }
            let id = vertex_origin.len();
            let mut zero = true;
            let mut y = x;
            loop {
                dart_vertex[new_id[y]] = id;
                zero &= arc(&paths[y]);
                y = next[y];
                if y == x {
                    break;
                }
            }
            vertex_zero.push(zero);
            vertex_origin.push(VertexOrigin::Cycle);
        }
        for path in absorbed {
            vertex_zero.push(arc(&path));
            vertex_origin.push(VertexOrigin::Absorbed(path));
        }

        let graph = DecoratedGraph {
            genus: self.genus,
            class: self.class.clone(),
            vertex_zero,
            dart_vertex,
            next: survivors.iter().map(|&x| new_id[next[x]]).collect(),
            pair: survivors.iter().map(|&x| new_id[self.pair[x]]).collect(),
            arc_zero: survivors.iter().map(|&x| arc(&paths[x])).collect(),
        };
        Ok(Contraction {
            dart_paths: survivors.iter().map(|&x| paths[x].clone()).collect(),
            dart_origin: survivors,
            graph,
            vertex_origin,
            edge: (a, b),
            ends: (va, vb),
            valence_one: va != vb && (self.valence(va) == 1 || self.valence(vb) == 1),
        })
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_darts();
        let mut comp = vec![usize::MAX; n];
        let mut out = vec![];
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            let mut members = vec![];
            comp[s] = id;
            while let Some(x) = stack.pop() {
                members.push(x);
                for y in [self.next[x], self.pair[x]] {
                    if comp[y] == usize::MAX {
                        comp[y] = id;
                        stack.push(y);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    // Breadth-first numbering from `start`, exploring successor then partner.
    fn bfs(&self, start: usize) -> (Vec<usize>, Code) {
        let mut idx = HashMap::new();
        let mut order = vec![start];
        idx.insert(start, 0usize);
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            for y in [self.next[x], self.pair[x]] {
                if let std::collections::hash_map::Entry::Vacant(e) = idx.entry(y) {
                    e.insert(order.len());
                    order.push(y);
                }
            }
            i += 1;
        }
        let code = order.iter().map(|&x| (self.arc_zero[x], idx[&self.next[x]], idx[&self.pair[x]])).collect();
        (order, code)
    }

    // Per component: minimal code and the starts achieving it; sorted by code.
    fn component_codes(&self) -> Vec<(Code, Vec<Vec<usize>>)> {
        let mut out: Vec<(Code, Vec<Vec<usize>>)> = self
            .components()
            .into_iter()
            .map(|members| {
                let mut best: Option<Code> = None;
                let mut orders = vec![];
                for &s in &members {
                    let (order, code) = self.bfs(s);
                    match best.as_ref().map(|b| code.cmp(b)) {
                        None | Some(std::cmp::Ordering::Less) => {
                            best = Some(code);
                            orders = vec![order];
                        }
                        Some(std::cmp::Ordering::Equal) => orders.push(order),
                        Some(std::cmp::Ordering::Greater) => {}
                    }
                }
                (best.expect("nonempty component"), orders)
            })
            .collect();
        out.sort_by(|x, y| x.0.cmp(&y.0));
        out
    }

    fn sorted_isolated(&self) -> Vec<usize> {
        let mut iso = self.isolated_vertices();
        iso.sort_by_key(|&v| (self.vertex_zero[v], v));
        iso
    }

    fn apply_order(&self, order: &[usize]) -> (DecoratedGraph, Labeling) {
        let n = self.num_darts();
        let mut dart_map = vec![0; n];
        for (i, &x) in order.iter().enumerate() {
            dart_map[x] = i;
        }
        let mut vertex_map = vec![usize::MAX; self.num_vertices()];
        let mut count = 0;
        for &x in order {
            let v = self.dart_vertex[x];
            if vertex_map[v] == usize::MAX {
                vertex_map[v] = count;
                count += 1;
            }
        }
        for v in self.sorted_isolated() {
            vertex_map[v] = count;
            count += 1;
        }
        let labeling = Labeling { dart_map, vertex_map };
        (self.relabel(&labeling), labeling)
    }

    /// The graph with darts and vertices renumbered through `l`.
    pub fn relabel(&self, l: &Labeling) -> DecoratedGraph {
        let n = self.num_darts();
        let mut inv = vec![0; n];
        for x in 0..n {
            inv[l.dart_map[x]] = x;
        }
        let mut vertex_zero = vec![false; self.num_vertices()];
        for v in 0..self.num_vertices() {
            vertex_zero[l.vertex_map[v]] = self.vertex_zero[v];
        }
        DecoratedGraph {
            genus: self.genus,
            class: self.class.clone(),
            vertex_zero,
            dart_vertex: inv.iter().map(|&x| l.vertex_map[self.dart_vertex[x]]).collect(),
            next: inv.iter().map(|&x| l.dart_map[self.next[x]]).collect(),
            pair: inv.iter().map(|&x| l.dart_map[self.pair[x]]).collect(),
            arc_zero: inv.iter().map(|&x| self.arc_zero[x]).collect(),
        }
    }

    /// Canonical representative; two graphs are isomorphic iff these are equal.
    pub fn canonical_form(&self) -> DecoratedGraph {
        let order: Vec<usize> =
            self.component_codes().into_iter().flat_map(|(_, orders)| orders.into_iter().next().unwrap()).collect();
        self.apply_order(&order).0
    }

    /// Canonical representative together with every labeling that produces it.
    pub fn canonical(&self) -> Canonical {
        let codes = self.component_codes();
        // Group identical components; a labeling picks an arrangement of each group and a start per component.
        let mut partial: Vec<Vec<usize>> = vec![vec![]];
        let mut i = 0;
        while i < codes.len() {
            let mut j = i;
            while j < codes.len() && codes[j].0 == codes[i].0 {
                j += 1;
            }
            let group: Vec<&Vec<Vec<usize>>> = codes[i..j].iter().map(|c| &c.1).collect();
            let mut extended = vec![];
            for perm in permutations(group.len()) {
                let mut choices: Vec<Vec<usize>> = vec![vec![]];
                for &k in &perm {
                    choices = choices
                        .into_iter()
                        .flat_map(|prefix| {
                            group[k].iter().map(move |o| {
                                let mut p = prefix.clone();
                                p.extend(o);
                                p
                            })
                        })
                        .collect();
                }
                for prefix in &partial {
                    for c in &choices {
                        let mut p = prefix.clone();
                        p.extend(c);
                        extended.push(p);
                    }
                }
            }
            partial = extended;
            i = j;
        }
        let mut graph = None;
        let labelings = partial
            .iter()
            .map(|order| {
                let (g, l) = self.apply_order(order);
                debug_assert!(graph.as_ref().is_none_or(|h| *h == g));
                graph.get_or_insert(g);
                l
            })
            .collect();
        Canonical { graph: graph.unwrap_or_else(|| self.apply_order(&[]).0), labelings }
    }

    pub fn is_isomorphic(&self, other: &DecoratedGraph) -> bool {
        self.canonical_form() == other.canonical_form()
    }

    /// Order of the automorphism group, counting permutations of isolated
    /// vertices with equal flags.
    pub fn aut_order(&self) -> u64 {
        let codes = self.component_codes();
        let mut order: u64 = 1;
        let mut mult: BTreeMap<&Code, u64> = BTreeMap::new();
        for (code, starts) in &codes {
            order *= starts.len() as u64;
            *mult.entry(code).or_default() += 1;
        }
        for m in mult.values() {
            order *= factorial(*m);
        }
        let iso = self.isolated_vertices();
        let zeros = iso.iter().filter(|&&v| self.vertex_zero[v]).count() as u64;
        order * factorial(zeros) * factorial(iso.len() as u64 - zeros)
    }

    /// Adds an edge whose two half-edges are inserted after `after_a` and
    /// `after_b`, where an insertion point is a dart or an isolated vertex.
    /// The second point is interpreted after the first insertion, and
    /// `Slot::NewDart` refers to the first new half-edge.
    pub fn add_edge(&self, first: Slot, second: Slot) -> Result<DecoratedGraph> {
        let n = self.num_darts();
        let mut dart_vertex = self.dart_vertex.clone();
        let mut next = self.next.clone();
        let mut pair = self.pair.clone();
        let mut arc_zero = self.arc_zero.clone();
        let mut insert = |slot: Slot, id: usize| -> Result<()> {
            let (v, prev) = match slot {
                Slot::After(d) if d < id => (dart_vertex[d], Some(d)),
                Slot::NewDart if id == n + 1 => (dart_vertex[n], Some(n)),
                Slot::Vertex(v) if v < self.num_vertices() && !dart_vertex.contains(&v) => (v, None),
                _ => return Err(Error::InvalidArgument(format!("invalid insertion point {slot:?}"))),
            };
            dart_vertex.push(v);
            arc_zero.push(self.vertex_zero[v]);
            pair.push(usize::MAX);
            match prev {
                Some(p) => {
                    next.push(next[p]);
                    next[p] = id;
                }
                None => next.push(id),
            }
            Ok(())
        };
        insert(first, n)?;
        insert(second, n + 1)?;
        pair[n] = n + 1;
        pair[n + 1] = n;
        Ok(DecoratedGraph {
            genus: self.genus,
            class: self.class.clone(),
            vertex_zero: self.vertex_zero.clone(),
            dart_vertex,
            next,
            pair,
            arc_zero,
        })
    }

    /// All ways to insert one new edge.
    fn one_edge_extensions(&self) -> Vec<DecoratedGraph> {
        let n = self.num_darts();
        let iso = self.isolated_vertices();
        let firsts: Vec<Slot> = (0..n).map(Slot::After).chain(iso.iter().map(|&v| Slot::Vertex(v))).collect();
        let mut out = vec![];
        for &f in &firsts {
            let mut seconds: Vec<Slot> = (0..n).map(Slot::After).chain([Slot::NewDart]).collect();
            seconds.extend(iso.iter().filter(|&&v| f != Slot::Vertex(v)).map(|&v| Slot::Vertex(v)));
            for s in seconds {
                out.push(self.add_edge(f, s).expect("valid insertion"));
            }
        }
        out
    }
}

/// Insertion point for [`DecoratedGraph::add_edge`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    After(usize),
    Vertex(usize),
    NewDart,
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Sign of the permutation induced on edges when darts are renumbered by
/// `dart_map`; edges are ordered by their smaller dart.
pub fn edge_permutation_sign(g: &DecoratedGraph, dart_map: &[usize]) -> i32 {
    let images: Vec<usize> = g.edges().iter().map(|&(a, b)| dart_map[a].min(dart_map[b])).collect();
    let mut inversions = 0;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if images[i] > images[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Maximum number of half-edges accepted by [`enumerate`].
pub const MAX_HALF_EDGES: usize = 12;

/// All isomorphism classes of genus `g` with `h` boundary components after
/// full contraction and at most `max_edges` edges. Zero-area vertices carry at
/// least one half-edge, so the edgeless member is unique.
pub fn enumerate(g: u32, h: usize, max_edges: usize) -> Result<Vec<DecoratedGraph>> {
    if 2 * max_edges > MAX_HALF_EDGES {
        return Err(Error::Bounds(format!("{max_edges} edges exceed {MAX_HALF_EDGES} half-edges")));
    }
    if h == 0 || h > 6 {
        return Err(Error::Bounds(format!("boundary count {h} outside 1..=6")));
    }
    let mut level: BTreeMap<DecoratedGraph, ()> = BTreeMap::new();
    for v in 1..=h + max_edges {
        for zeros in 0..=v.min(2 * max_edges) {
            let flags: Vec<bool> = (0..v).map(|i| i >= v - zeros).collect();
            level.insert(DecoratedGraph::edgeless(g, &flags).canonical_form(), ());
        }
    }
    let mut out = vec![];
    for edges in 0..=max_edges {
        let remaining = max_edges - edges;
        out.extend(level.keys().filter(|gr| admissible(gr, h)).cloned());
        if remaining == 0 {
            break;
        }
        let found: Vec<DecoratedGraph> = level
            .keys()
            .collect::<Vec<_>>()
            .par_iter()
            .flat_map_iter(|gr| gr.one_edge_extensions())
            .filter(|gr| {
                let zero_isolated = gr.isolated_vertices().iter().filter(|&&v| gr.area_zero(v)).count();
                zero_isolated <= 2 * (remaining - 1) && gr.boundary_count().abs_diff(h) < remaining
            })
            .map(|gr| gr.canonical_form())
            .collect();
        level = found.into_iter().map(|gr| (gr, ())).collect();
    }
    out.sort_by(|x, y| x.num_edges().cmp(&y.num_edges()).then(x.cmp(y)));
    Ok(out)
}

fn admissible(g: &DecoratedGraph, h: usize) -> bool {
    g.boundary_count() == h && g.isolated_vertices().iter().all(|&v| !g.area_zero(v))
}

/// Offsets `t_e` per half-edge, in the numbering of a particular graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TData(pub Vec<Q>);

impl TData {
    pub fn zeros(g: &DecoratedGraph) -> Self {
        TData(vec![Q::from_integer(0.into()); g.num_darts()])
    }

    fn check(&self, g: &DecoratedGraph) -> Result<()> {
        if self.0.len() != g.num_darts() {
            return Err(Error::InvalidTData(format!(
                "{} offsets given for {} half-edges",
                self.0.len(),
                g.num_darts()
            )));
        }
        Ok(())
    }

    /// Representative with the smallest half-edge of every zero-area vertex at 0.
    pub fn canonical(&self, g: &DecoratedGraph) -> Result<TData> {
        self.check(g)?;
        let mut t = self.0.clone();
        for v in 0..g.num_vertices() {
            if !g.area_zero(v) {
                continue;
            }
            let darts = g.darts_of(v);
            if let Some(&first) = darts.iter().min() {
                let s = self.0[first].clone();
                for d in darts {
                    t[d] = &self.0[d] - &s;
                }
            }
        }
        Ok(TData(t))
    }

    /// Shifts every offset at vertex `v` by `s`; only meaningful at zero-area vertices.
    pub fn shifted(&self, g: &DecoratedGraph, v: usize, s: &Q) -> TData {
        let mut t = self.0.clone();
        for d in g.darts_of(v) {
            t[d] += s;
        }
        TData(t)
    }

    pub fn equivalent(&self, other: &TData, g: &DecoratedGraph) -> Result<bool> {
        Ok(self.canonical(g)? == other.canonical(g)?)
    }

    pub fn relabel(&self, l: &Labeling) -> TData {
        let mut t = self.0.clone();
        for (x, v) in self.0.iter().enumerate() {
            t[l.dart_map[x]] = v.clone();
        }
        TData(t)
    }
}

/// Transports offsets along the contraction of the edge through `e0`, where
/// `e0` is the half-edge at the far end of an oriented edge ending at the
/// zero-area vertex `v0` and `e1 = pair(e0)` starts at `v0`. Offsets at `v0`
/// move by `t_{e0} − t_{e1}`; the rest are unchanged. Returns the canonical
/// representative on `G/e0`.
pub fn contract_tdata(g: &DecoratedGraph, e0: usize, t: &TData) -> Result<(Contraction, TData)> {
    t.check(g)?;
    if e0 >= g.num_darts() {
        return Err(Error::InvalidArgument(format!("half-edge {e0} does not exist")));
    }
    let e1 = g.pair(e0);
    let v0 = g.vertex_of(e1);
    if !g.area_zero(v0) {
        return Err(Error::InvalidTData(format!(
            "half-edge {e0} does not point into a zero-area vertex (vertex {v0} has positive area)"
        )));
    }
    let c = g.contract_dart(e0)?;
    let shift = &t.0[e0] - &t.0[e1];
    let out = TData(
        c.dart_origin
            .iter()
            .map(|&x| if g.vertex_of(x) == v0 { &t.0[x] + &shift } else { t.0[x].clone() })
            .collect(),
    );
    let canon = out.canonical(&c.graph)?;
    Ok((c, canon))
}

/// [`contract_tdata`] with the orientation chosen automatically: the edge must
/// touch a zero-area vertex.
pub fn contract_tdata_edge(g: &DecoratedGraph, d: usize, t: &TData) -> Result<(Contraction, TData)> {
    if d >= g.num_darts() {
        return Err(Error::InvalidArgument(format!("half-edge {d} does not exist")));
    }
    if g.area_zero(g.vertex_of(g.pair(d))) {
        contract_tdata(g, d, t)
    } else {
        contract_tdata(g, g.pair(d), t)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VertexJson {
    pub id: u64,
    #[serde(default)]
    pub area_zero: bool,
    /// Accepted for compatibility; added to the graph genus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HalfEdgeJson {
    pub id: u64,
    pub vertex: u64,
    pub next_in_cycle: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arc_zero: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphJson {
    #[serde(default)]
    pub genus: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    pub vertices: Vec<VertexJson>,
    #[serde(default)]
    pub half_edges: Vec<HalfEdgeJson>,
    #[serde(default)]
    pub pairing: Vec<[u64; 2]>,
}

impl DecoratedGraph {
    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            genus: self.genus,
            class: self.class.clone(),
            vertices: (0..self.num_vertices())
                .map(|v| VertexJson { id: v as u64, area_zero: self.vertex_zero[v], genus: None })
                .collect(),
            half_edges: (0..self.num_darts())
                .map(|d| HalfEdgeJson {
                    id: d as u64,
                    vertex: self.dart_vertex[d] as u64,
                    next_in_cycle: self.next[d] as u64,
                    arc_zero: (self.arc_zero[d] != self.vertex_zero[self.dart_vertex[d]]).then_some(self.arc_zero[d]),
                })
                .collect(),
            pairing: self.edges().iter().map(|&(a, b)| [a as u64, b as u64]).collect(),
        }
    }

    /// Parses the JSON form; also returns the external half-edge ids in internal order.
    pub fn from_json(j: &GraphJson) -> Result<(DecoratedGraph, Vec<u64>, Vec<u64>)> {
        let bad = |m: String| Error::InvalidGraph(m);
        let mut vid = HashMap::new();
        for (i, v) in j.vertices.iter().enumerate() {
            if vid.insert(v.id, i).is_some() {
                return Err(bad(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut did = HashMap::new();
        for (i, h) in j.half_edges.iter().enumerate() {
            if did.insert(h.id, i).is_some() {
                return Err(bad(format!("duplicate half-edge id {}", h.id)));
            }
        }
        let look = |m: &HashMap<u64, usize>, id: u64, what: &str| {
            m.get(&id).copied().ok_or_else(|| bad(format!("unknown {what} id {id}")))
        };
        let n = j.half_edges.len();
        let mut pair = vec![usize::MAX; n];
        for &[a, b] in &j.pairing {
            let (a, b) = (look(&did, a, "half-edge")?, look(&did, b, "half-edge")?);
            if a == b || pair[a] != usize::MAX || pair[b] != usize::MAX {
                return Err(bad("pairing is not a perfect matching of half-edges".into()));
            }
            pair[a] = b;
            pair[b] = a;
        }
        if pair.contains(&usize::MAX) {
            return Err(bad("some half-edge is unpaired".into()));
        }
        let mut dart_vertex = vec![];
        let mut next = vec![];
        for h in &j.half_edges {
            dart_vertex.push(look(&vid, h.vertex, "vertex")?);
            next.push(look(&did, h.next_in_cycle, "half-edge")?);
        }
        let vertex_zero: Vec<bool> = j.vertices.iter().map(|v| v.area_zero).collect();
        let arc_zero = j
            .half_edges
            .iter()
            .zip(&dart_vertex)
            .map(|(h, &v)| h.arc_zero.unwrap_or(vertex_zero[v]))
            .collect();
        let genus = j.genus + j.vertices.iter().filter_map(|v| v.genus).sum::<u32>();
        let g = DecoratedGraph::from_parts(genus, j.class.clone(), vertex_zero, dart_vertex, next, pair, Some(arc_zero))?;
        Ok((g, j.vertices.iter().map(|v| v.id).collect(), j.half_edges.iter().map(|h| h.id).collect()))
    }
}
