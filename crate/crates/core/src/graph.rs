//! Stable graphs: half-edges with an involution, vertex genera and marked legs.
//!
//! Half-edge ids are dense `0..#H`, vertex ids dense `0..#V`. An edge is
//! identified by the smaller of its two half-edge ids.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};

/// Size guards for the brute-force parts of the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub max_cycles: usize,
    /// Cap on vertex orderings explored by the canonical-form search.
    pub max_orderings: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_vertices: 12,
            max_edges: 16,
            max_cycles: 100_000,
            max_orderings: 2_000_000,
        }
    }
}

impl Limits {
    pub fn check_graph(&self, graph: &StableGraph) -> Result<()> {
        if graph.num_vertices() > self.max_vertices {
            return Err(DrcError::guard("vertices", self.max_vertices, graph.num_vertices()));
        }
        if graph.num_edges() > self.max_edges {
            return Err(DrcError::guard("edges", self.max_edges, graph.num_edges()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON schema

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: i64,
    pub genus: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfEdgeSpec {
    pub id: i64,
    pub vertex: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegSpec {
    pub half_edge: i64,
    pub marking: i64,
}

/// Wire form of a stable graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<VertexSpec>,
    pub half_edges: Vec<HalfEdgeSpec>,
    pub pairing: Vec<[i64; 2]>,
    pub legs: Vec<LegSpec>,
}

// ---------------------------------------------------------------------------
// Issues and reports

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum GraphIssue {
    VertexIdsNotDense { ids: Vec<i64> },
    NegativeGenus { vertex: i64, genus: i64 },
    HalfEdgeIdsNotDense { ids: Vec<i64> },
    DanglingHalfEdge { half_edge: i64, vertex: i64 },
    UnknownHalfEdge { half_edge: i64 },
    UnpairedHalfEdge { half_edge: i64 },
    NonInvolutive { half_edge: i64 },
    MarkingsNotConsecutive { markings: Vec<i64> },
    Disconnected { components: usize },
    Unstable { vertex: usize, value: i64 },
}

impl fmt::Display for GraphIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphIssue::VertexIdsNotDense { ids } => write!(f, "vertex ids {ids:?} are not 0..#V"),
            GraphIssue::NegativeGenus { vertex, genus } => {
                write!(f, "vertex {vertex} has negative genus {genus}")
            }
            GraphIssue::HalfEdgeIdsNotDense { ids } => {
                write!(f, "half-edge ids {ids:?} are not 0..#H")
            }
            GraphIssue::DanglingHalfEdge { half_edge, vertex } => {
                write!(f, "half-edge {half_edge} attached to unknown vertex {vertex}")
            }
            GraphIssue::UnknownHalfEdge { half_edge } => {
                write!(f, "reference to unknown half-edge {half_edge}")
            }
            GraphIssue::UnpairedHalfEdge { half_edge } => {
                write!(f, "half-edge {half_edge} is neither paired nor a leg")
            }
            GraphIssue::NonInvolutive { half_edge } => {
                write!(f, "half-edge {half_edge} is paired inconsistently")
            }
            GraphIssue::MarkingsNotConsecutive { markings } => {
                write!(f, "leg markings {markings:?} are not 1..n")
            }
            GraphIssue::Disconnected { components } => {
                write!(f, "graph has {components} connected components")
            }
            GraphIssue::Unstable { vertex, value } => {
                write!(f, "vertex {vertex} is unstable (2g-2+n = {value})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<GraphIssue>,
    pub genus: Option<u32>,
    pub betti1: Option<usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

// ---------------------------------------------------------------------------
// The graph

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StableGraph {
    genera: Vec<u32>,
    vertex_of: Vec<usize>,
    pair: Vec<usize>,
    marking: Vec<Option<usize>>,
}

/// An edge `{h, h2}` with `h < h2`; its id is `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub h: usize,
    pub h2: usize,
}

impl Edge {
    pub fn id(&self) -> usize {
        self.h
    }
}

/// A non-leg half-edge read as the directed edge `end(h) -> end(i(h))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedEdge(pub usize);

impl DirectedEdge {
    pub fn source(&self, g: &StableGraph) -> usize {
        g.vertex_of(self.0)
    }

    pub fn target(&self, g: &StableGraph) -> usize {
        g.vertex_of(g.pair(self.0))
    }

    pub fn reversed(&self, g: &StableGraph) -> DirectedEdge {
        DirectedEdge(g.pair(self.0))
    }
}

/// Incremental constructor used by the enumerators and tests.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    genera: Vec<u32>,
    vertex_of: Vec<usize>,
    pair: Vec<usize>,
    marking: Vec<Option<usize>>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, genus: u32) -> usize {
        self.genera.push(genus);
        self.genera.len() - 1
    }

    pub fn leg(&mut self, v: usize, marking: usize) -> usize {
        let h = self.vertex_of.len();
        self.vertex_of.push(v);
        self.pair.push(h);
        self.marking.push(Some(marking));
        h
    }

    /// Adds an edge and returns `(half at u, half at v)`.
    pub fn edge(&mut self, u: usize, v: usize) -> (usize, usize) {
        let a = self.vertex_of.len();
        let b = a + 1;
        self.vertex_of.extend([u, v]);
        self.pair.extend([b, a]);
        self.marking.extend([None, None]);
        (a, b)
    }

    pub fn build(self) -> Result<StableGraph> {
        let spec = StableGraph {
            genera: self.genera,
            vertex_of: self.vertex_of,
            pair: self.pair,
            marking: self.marking,
        }
        .to_spec();
        StableGraph::from_spec(&spec)
    }
}

impl StableGraph {
    /// Structural parsing: rejects anything that is not a well-formed
    /// half-edge structure. Connectivity and stability are left to
    /// [`StableGraph::validate`].
    pub fn from_spec(spec: &GraphSpec) -> Result<StableGraph> {
        Self::try_from_spec(spec).map_err(|issues| {
            DrcError::input(
                issues
                    .iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            )
        })
    }

    fn try_from_spec(spec: &GraphSpec) -> std::result::Result<StableGraph, Vec<GraphIssue>> {
        let mut issues = Vec::new();
        let nv = spec.vertices.len();
        let nh = spec.half_edges.len();

        let mut vids: Vec<i64> = spec.vertices.iter().map(|v| v.id).collect();
        vids.sort_unstable();
        if vids.iter().enumerate().any(|(i, &id)| id != i as i64) {
            issues.push(GraphIssue::VertexIdsNotDense { ids: vids });
        }
        let mut genera = vec![0u32; nv];
        for v in &spec.vertices {
            if v.genus < 0 {
                issues.push(GraphIssue::NegativeGenus {
                    vertex: v.id,
                    genus: v.genus,
                });
            } else if (0..nv as i64).contains(&v.id) {
                genera[v.id as usize] = v.genus as u32;
            }
        }

        let mut hids: Vec<i64> = spec.half_edges.iter().map(|h| h.id).collect();
        hids.sort_unstable();
        if hids.iter().enumerate().any(|(i, &id)| id != i as i64) {
            issues.push(GraphIssue::HalfEdgeIdsNotDense { ids: hids });
        }
        let mut vertex_of = vec![usize::MAX; nh];
        for h in &spec.half_edges {
            if !(0..nv as i64).contains(&h.vertex) {
                issues.push(GraphIssue::DanglingHalfEdge {
                    half_edge: h.id,
                    vertex: h.vertex,
                });
            } else if (0..nh as i64).contains(&h.id) {
                vertex_of[h.id as usize] = h.vertex as usize;
            }
        }

        let in_range = |h: i64| (0..nh as i64).contains(&h);
        let mut pair: Vec<Option<usize>> = vec![None; nh];
        let mut bad: BTreeSet<i64> = BTreeSet::new();
        for &[a, b] in &spec.pairing {
            for x in [a, b] {
                if !in_range(x) {
                    issues.push(GraphIssue::UnknownHalfEdge { half_edge: x });
                }
            }
            if !in_range(a) || !in_range(b) {
                continue;
            }
            if a == b || pair[a as usize].is_some() || pair[b as usize].is_some() {
                bad.insert(a);
                bad.insert(b);
                continue;
            }
            pair[a as usize] = Some(b as usize);
            pair[b as usize] = Some(a as usize);
        }
        let mut marking = vec![None; nh];
        let mut marks = Vec::new();
        for leg in &spec.legs {
            if !in_range(leg.half_edge) {
                issues.push(GraphIssue::UnknownHalfEdge {
                    half_edge: leg.half_edge,
                });
                continue;
            }
            let h = leg.half_edge as usize;
            if pair[h].is_some() {
                bad.insert(leg.half_edge);
                continue;
            }
            pair[h] = Some(h);
            marking[h] = Some(leg.marking.max(0) as usize);
            marks.push(leg.marking);
        }
        issues.extend(bad.into_iter().map(|h| GraphIssue::NonInvolutive { half_edge: h }));
        for (h, p) in pair.iter().enumerate() {
            if p.is_none() {
                issues.push(GraphIssue::UnpairedHalfEdge { half_edge: h as i64 });
            }
        }
        marks.sort_unstable();
        if marks.iter().enumerate().any(|(i, &m)| m != i as i64 + 1) {
            issues.push(GraphIssue::MarkingsNotConsecutive { markings: marks });
        }

        if !issues.is_empty() {
            return Err(issues);
        }
        Ok(StableGraph {
            genera,
            vertex_of,
            pair: pair.into_iter().map(|p| p.unwrap()).collect(),
            marking,
        })
    }

    pub fn to_spec(&self) -> GraphSpec {
        let mut pairing = Vec::new();
        let mut legs = Vec::new();
        for h in 0..self.num_half_edges() {
            let p = self.pair[h];
            if p == h {
                legs.push(LegSpec {
                    half_edge: h as i64,
                    marking: self.marking[h].unwrap_or(0) as i64,
                });
            } else if h < p {
                pairing.push([h as i64, p as i64]);
            }
        }
        legs.sort_by_key(|l| l.marking);
        GraphSpec {
            vertices: self
                .genera
                .iter()
                .enumerate()
                .map(|(i, &g)| VertexSpec {
                    id: i as i64,
                    genus: g as i64,
                })
                .collect(),
            half_edges: self
                .vertex_of
                .iter()
                .enumerate()
                .map(|(h, &v)| HalfEdgeSpec {
                    id: h as i64,
                    vertex: v as i64,
                })
                .collect(),
            pairing,
            legs,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.genera.len()
    }

    pub fn num_half_edges(&self) -> usize {
        self.vertex_of.len()
    }

    pub fn num_edges(&self) -> usize {
        (0..self.num_half_edges()).filter(|&h| self.pair[h] > h).count()
    }

    pub fn num_legs(&self) -> usize {
        (0..self.num_half_edges()).filter(|&h| self.pair[h] == h).count()
    }

    pub fn genus_of(&self, v: usize) -> u32 {
        self.genera[v]
    }

    pub fn genera(&self) -> &[u32] {
        &self.genera
    }

    pub fn vertex_of(&self, h: usize) -> usize {
        self.vertex_of[h]
    }

    pub fn pair(&self, h: usize) -> usize {
        self.pair[h]
    }

    pub fn is_leg(&self, h: usize) -> bool {
        self.pair[h] == h
    }

    pub fn marking(&self, h: usize) -> Option<usize> {
        self.marking[h]
    }

    /// Legs as `(half-edge, marking)`, sorted by marking.
    pub fn legs(&self) -> Vec<(usize, usize)> {
        let mut legs: Vec<_> = (0..self.num_half_edges())
            .filter(|&h| self.is_leg(h))
            .map(|h| (h, self.marking[h].unwrap_or(0)))
            .collect();
        legs.sort_by_key(|&(_, m)| m);
        legs
    }

    pub fn leg_of_marking(&self, marking: usize) -> Option<usize> {
        (0..self.num_half_edges()).find(|&h| self.is_leg(h) && self.marking[h] == Some(marking))
    }

    pub fn edges(&self) -> Vec<Edge> {
        (0..self.num_half_edges())
            .filter(|&h| self.pair[h] > h)
            .map(|h| Edge { h, h2: self.pair[h] })
            .collect()
    }

    pub fn edge_of(&self, h: usize) -> Option<Edge> {
        let p = self.pair[h];
        (p != h).then(|| Edge {
            h: h.min(p),
            h2: h.max(p),
        })
    }

    pub fn half_edges_at(&self, v: usize) -> Vec<usize> {
        (0..self.num_half_edges())
            .filter(|&h| self.vertex_of[h] == v)
            .collect()
    }

    /// Non-leg half-edges at `v` (a self-loop counts twice).
    pub fn valence(&self, v: usize) -> usize {
        self.half_edges_at(v)
            .into_iter()
            .filter(|&h| !self.is_leg(h))
            .count()
    }

    pub fn legs_at(&self, v: usize) -> Vec<usize> {
        self.half_edges_at(v)
            .into_iter()
            .filter(|&h| self.is_leg(h))
            .collect()
    }

    /// `2g(v) - 2 + val(v)`, legs not counted.
    pub fn canonical_degree(&self, v: usize) -> i64 {
        2 * self.genera[v] as i64 - 2 + self.valence(v) as i64
    }

    /// `#E - #V + 1` for a connected graph.
    pub fn betti1(&self) -> usize {
        (self.num_edges() + self.components()) - self.num_vertices()
    }

    pub fn genus(&self) -> u32 {
        self.betti1() as u32 + self.genera.iter().sum::<u32>()
    }

    pub fn components(&self) -> usize {
        let n = self.num_vertices();
        let mut uf = UnionFind::new(n);
        for e in self.edges() {
            uf.union(self.vertex_of[e.h], self.vertex_of[e.h2]);
        }
        (0..n).filter(|&v| uf.find(v) == v).count()
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices() > 0 && self.components() == 1
    }

    pub fn has_self_loop(&self) -> bool {
        self.edges()
            .iter()
            .any(|e| self.vertex_of[e.h] == self.vertex_of[e.h2])
    }

    /// Connectivity and per-vertex stability, plus genus and `b1`.
    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let comps = self.components();
        if comps != 1 {
            issues.push(GraphIssue::Disconnected { components: comps });
        }
        for v in 0..self.num_vertices() {
            let value = 2 * self.genera[v] as i64 - 2 + self.half_edges_at(v).len() as i64;
            if value <= 0 {
                issues.push(GraphIssue::Unstable { vertex: v, value });
            }
        }
        ValidationReport {
            issues,
            genus: (comps == 1).then(|| self.genus()),
            betti1: (comps == 1).then(|| self.betti1()),
        }
    }

    /// Relabels vertices by `vperm[old] = new` and half-edges by `hperm[old] = new`.
    pub fn relabeled(&self, vperm: &[usize], hperm: &[usize]) -> StableGraph {
        let nh = self.num_half_edges();
        let mut genera = vec![0; self.num_vertices()];
        for (v, &g) in self.genera.iter().enumerate() {
            genera[vperm[v]] = g;
        }
        let mut vertex_of = vec![0; nh];
        let mut pair = vec![0; nh];
        let mut marking = vec![None; nh];
        for h in 0..nh {
            vertex_of[hperm[h]] = vperm[self.vertex_of[h]];
            pair[hperm[h]] = hperm[self.pair[h]];
            marking[hperm[h]] = self.marking[h];
        }
        StableGraph {
            genera,
            vertex_of,
            pair,
            marking,
        }
    }
}

/// Structural plus semantic validation of a wire graph.
pub fn validate_spec(spec: &GraphSpec) -> ValidationReport {
    match StableGraph::try_from_spec(spec) {
        Ok(g) => g.validate(),
        Err(issues) => ValidationReport {
            issues,
            genus: None,
            betti1: None,
        },
    }
}

// ---------------------------------------------------------------------------
// Leg weightings

/// Integer weights `m` on the markings `1..=n` and the differential order `k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LegWeighting {
    pub k: u32,
    pub m: Vec<i64>,
}

impl LegWeighting {
    pub fn new(k: u32, m: Vec<i64>) -> Self {
        LegWeighting { k, m }
    }

    /// Weight of marking `i` (1-based).
    pub fn weight(&self, marking: usize) -> i64 {
        self.m[marking - 1]
    }

    /// A marking that must sit on the central vertex of a simple star.
    pub fn is_bad(&self, marking: usize) -> bool {
        let w = self.weight(marking);
        w < 0 || w.rem_euclid(self.k.max(1) as i64) != 0 || (self.k == 0 && w != 0)
    }

    pub fn check(&self, graph: &StableGraph) -> Result<()> {
        if self.m.len() != graph.num_legs() {
            return Err(DrcError::input(format!(
                "weighting has {} entries but the graph has {} legs",
                self.m.len(),
                graph.num_legs()
            )));
        }
        let sum: i64 = self.m.iter().sum();
        let want = self.k as i64 * (2 * graph.genus() as i64 - 2);
        if sum != want {
            return Err(DrcError::input(format!(
                "leg weights sum to {sum}, expected k(2g-2) = {want} (discrepancy {})",
                sum - want
            )));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Spanning trees, cycles, homology

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Greedy union-find over edges in id order. Returns the tree's edge ids.
pub fn spanning_tree(graph: &StableGraph) -> Vec<usize> {
    let mut uf = UnionFind::new(graph.num_vertices());
    graph
        .edges()
        .into_iter()
        .filter(|e| uf.union(graph.vertex_of(e.h), graph.vertex_of(e.h2)))
        .map(|e| e.id())
        .collect()
}

/// A directed cycle, stored as its half-edge sequence rotated so that the
/// smallest half-edge id comes first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cycle {
    half_edges: Vec<usize>,
}

impl Cycle {
    /// Checks the closed-walk and no-repetition conditions and canonicalises.
    pub fn new(graph: &StableGraph, walk: Vec<usize>) -> Result<Cycle> {
        if walk.is_empty() {
            return Err(DrcError::input("empty cycle"));
        }
        let mut seen_v = BTreeSet::new();
        let mut seen_e = BTreeSet::new();
        for (i, &h) in walk.iter().enumerate() {
            if h >= graph.num_half_edges() || graph.is_leg(h) {
                return Err(DrcError::input(format!("{h} is not a directed edge")));
            }
            let next = walk[(i + 1) % walk.len()];
            if graph.vertex_of(graph.pair(h)) != graph.vertex_of(next) {
                return Err(DrcError::input("walk is not closed"));
            }
            if !seen_v.insert(graph.vertex_of(h)) || !seen_e.insert(h.min(graph.pair(h))) {
                return Err(DrcError::input("walk repeats a vertex or an edge"));
            }
        }
        Ok(Self::canonical(walk))
    }

    fn canonical(mut walk: Vec<usize>) -> Cycle {
        let pos = walk
            .iter()
            .enumerate()
            .min_by_key(|&(_, h)| *h)
            .map(|(i, _)| i)
            .unwrap_or(0);
        walk.rotate_left(pos);
        Cycle { half_edges: walk }
    }

    pub fn half_edges(&self) -> &[usize] {
        &self.half_edges
    }

    pub fn len(&self) -> usize {
        self.half_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half_edges.is_empty()
    }

    /// The same cycle walked backwards, `i(γ)`.
    pub fn inverse(&self, graph: &StableGraph) -> Cycle {
        let walk: Vec<usize> = self
            .half_edges
            .iter()
            .rev()
            .map(|&h| graph.pair(h))
            .collect();
        Self::canonical(walk)
    }

    /// Whether the directed edge `h` is traversed.
    pub fn traverses(&self, h: usize) -> bool {
        self.half_edges.contains(&h)
    }

    pub fn vertices(&self, graph: &StableGraph) -> Vec<usize> {
        self.half_edges.iter().map(|&h| graph.vertex_of(h)).collect()
    }

    /// Signed edge vector in `Z^E`: `+1` when an edge is walked from its
    /// smaller half-edge, `-1` otherwise.
    pub fn edge_vector(&self, graph: &StableGraph) -> BTreeMap<usize, i64> {
        self.half_edges
            .iter()
            .map(|&h| {
                let p = graph.pair(h);
                if h < p {
                    (h, 1)
                } else {
                    (p, -1)
                }
            })
            .collect()
    }
}

/// Fundamental cycles of `tree`, rooted at vertex 0.
pub fn cycle_basis(graph: &StableGraph, tree: &[usize]) -> Result<Vec<Cycle>> {
    cycle_basis_rooted(graph, tree, 0)
}

/// Fundamental cycles of `tree`. For each non-tree edge `{u, w}` with `u`
/// the endpoint nearer the root, the cycle walks the tree path `u ~> w` and
/// returns along the non-tree edge. On a star rooted at its centre this is
/// "out along the tree edge, back along the other edge".
pub fn cycle_basis_rooted(graph: &StableGraph, tree: &[usize], root: usize) -> Result<Vec<Cycle>> {
    let n = graph.num_vertices();
    let tree_set: BTreeSet<usize> = tree.iter().copied().collect();
    // down[v]: tree half-edge at parent(v) pointing to v.
    let mut down: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for h in graph.half_edges_at(u) {
            let Some(e) = graph.edge_of(h) else { continue };
            if !tree_set.contains(&e.id()) {
                continue;
            }
            let w = graph.vertex_of(graph.pair(h));
            if depth[w] == usize::MAX {
                depth[w] = depth[u] + 1;
                down[w] = Some(h);
                queue.push_back(w);
            }
        }
    }
    if depth.contains(&usize::MAX) || tree_set.len() + 1 != n {
        return Err(DrcError::input("edge set is not a spanning tree"));
    }

    let path = |from: usize, to: usize| -> Vec<usize> {
        // from ~> lca ~> to
        let (mut a, mut b) = (from, to);
        let mut up = Vec::new();
        let mut dn = Vec::new();
        while a != b {
            if depth[a] >= depth[b] {
                let h = down[a].unwrap();
                up.push(graph.pair(h));
                a = graph.vertex_of(h);
            } else {
                let h = down[b].unwrap();
                dn.push(h);
                b = graph.vertex_of(h);
            }
        }
        dn.reverse();
        up.extend(dn);
        up
    };

    let mut basis = Vec::new();
    for e in graph.edges() {
        if tree_set.contains(&e.id()) {
            continue;
        }
        let (x, y) = (graph.vertex_of(e.h), graph.vertex_of(e.h2));
        // u is nearer the root; ties go to the smaller half-edge's end.
        let (u_half, w_half) = if depth[y] < depth[x] { (e.h2, e.h) } else { (e.h, e.h2) };
        let u = graph.vertex_of(u_half);
        let w = graph.vertex_of(w_half);
        let mut walk = path(u, w);
        walk.push(w_half);
        basis.push(Cycle::new(graph, walk)?);
    }
    Ok(basis)
}

/// Every directed cycle of the graph, both orientations, sorted.
pub fn all_cycles(graph: &StableGraph, limits: &Limits) -> Result<Vec<Cycle>> {
    let mut out = Vec::new();
    let n = graph.num_vertices();
    let at: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            graph
                .half_edges_at(v)
                .into_iter()
                .filter(|&h| !graph.is_leg(h))
                .collect()
        })
        .collect();

    // Each directed cycle is found once, from its smallest vertex.
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        graph: &StableGraph,
        at: &[Vec<usize>],
        start: usize,
        v: usize,
        on_path: &mut Vec<bool>,
        walk: &mut Vec<usize>,
        out: &mut Vec<Cycle>,
        cap: usize,
    ) -> Result<()> {
        for &h in &at[v] {
            let w = graph.vertex_of(graph.pair(h));
            if w == start {
                // a 2-cycle must not reuse its first edge backwards
                if walk.len() == 1 && graph.pair(walk[0]) == h {
                    continue;
                }
                walk.push(h);
                out.push(Cycle::canonical(walk.clone()));
                walk.pop();
                if out.len() > cap {
                    return Err(DrcError::guard("cycles", cap, out.len()));
                }
            } else if w > start && !on_path[w] {
                on_path[w] = true;
                walk.push(h);
                dfs(graph, at, start, w, on_path, walk, out, cap)?;
                walk.pop();
                on_path[w] = false;
            }
        }
        Ok(())
    }

    for s in 0..n {
        let mut on_path = vec![false; n];
        on_path[s] = true;
        dfs(graph, &at, s, s, &mut on_path, &mut Vec::new(), &mut out, limits.max_cycles)?;
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Coordinates of `cycle` in the fundamental basis built from `tree`
/// (entries in `{-1, 0, 1}`), checked by recombination over `Z^E`.
pub fn basis_coordinates(
    graph: &StableGraph,
    tree: &[usize],
    basis: &[Cycle],
    cycle: &Cycle,
) -> Result<Vec<i64>> {
    let tree_set: BTreeSet<usize> = tree.iter().copied().collect();
    let target = cycle.edge_vector(graph);
    let mut coords = Vec::with_capacity(basis.len());
    let mut sum: BTreeMap<usize, i64> = BTreeMap::new();
    for b in basis {
        let bv = b.edge_vector(graph);
        let own = bv
            .iter()
            .find(|(e, _)| !tree_set.contains(e))
            .ok_or_else(|| DrcError::invariant("basis cycle without a non-tree edge"))?;
        let c = target.get(own.0).copied().unwrap_or(0) * own.1;
        coords.push(c);
        for (e, x) in bv {
            *sum.entry(e).or_default() += c * x;
        }
    }
    sum.retain(|_, x| *x != 0);
    if sum != target {
        return Err(DrcError::invariant("cycle is not spanned by the basis"));
    }
    Ok(coords)
}

// ---------------------------------------------------------------------------
// Simple stars

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarShape {
    pub center: usize,
    pub outlying: Vec<usize>,
}

/// Recognises a simple star: every marking that is negative or not
/// divisible by `k` sits on one vertex, every edge has exactly one end
/// there, and there are no self-loops. A lone vertex is a degenerate star.
pub fn is_simple_star(graph: &StableGraph, weighting: &LegWeighting) -> Option<StarShape> {
    let n = graph.num_vertices();
    if n == 0 || weighting.m.len() != graph.num_legs() {
        return None;
    }
    if graph.has_self_loop() {
        return None;
    }
    let bad_vertices: BTreeSet<usize> = graph
        .legs()
        .into_iter()
        .filter(|&(_, mk)| weighting.is_bad(mk))
        .map(|(h, _)| graph.vertex_of(h))
        .collect();
    if bad_vertices.len() > 1 {
        return None;
    }
    let candidates: Vec<usize> = match bad_vertices.first() {
        Some(&c) => vec![c],
        None => (0..n).collect(),
    };
    let edges = graph.edges();
    candidates.into_iter().find_map(|c| {
        let ok = edges.iter().all(|e| {
            (graph.vertex_of(e.h) == c) != (graph.vertex_of(e.h2) == c)
        });
        let outlying: Vec<usize> = (0..n).filter(|&v| v != c).collect();
        let touched = outlying.iter().all(|&v| graph.valence(v) > 0);
        (ok && touched).then_some(StarShape { center: c, outlying })
    })
}

/// Small reference graphs shared by tests, examples and the acceptance suite.
pub mod fixtures {
    use super::*;

    /// The three-vertex star of genus 4 with markings weighted (-2, 5, 3, 12).
    /// Returns the graph and the outlying half-edges of the edges in the order
    /// g1-edge, first g2-edge, second g2-edge.
    pub fn figure_one() -> (StableGraph, [usize; 3]) {
        let mut b = GraphBuilder::new();
        let c = b.vertex(0);
        let v1 = b.vertex(1);
        let v2 = b.vertex(2);
        b.leg(c, 1);
        b.leg(c, 2);
        b.leg(v2, 3);
        b.leg(c, 4);
        let (_, o1) = b.edge(c, v1);
        let (_, o2) = b.edge(c, v2);
        let (_, o3) = b.edge(c, v2);
        (b.build().unwrap(), [o1, o2, o3])
    }

    pub fn figure_one_weighting() -> LegWeighting {
        LegWeighting::new(3, vec![-2, 5, 3, 12])
    }

    /// Centre of genus `g0` carrying `legs` markings, joined by `edges`
    /// parallel edges to one vertex of genus `g1`.
    pub fn banana(g0: u32, g1: u32, edges: usize, legs: usize) -> StableGraph {
        let mut b = GraphBuilder::new();
        let c = b.vertex(g0);
        let v = b.vertex(g1);
        for i in 0..legs {
            b.leg(c, i + 1);
        }
        for _ in 0..edges {
            b.edge(c, v);
        }
        b.build().unwrap()
    }
}
