//! Twists on leg-weighted graphs, positive twists on simple stars and the
//! divided twist `I' = I/k`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};
use crate::graph::{all_cycles, is_simple_star, LegWeighting, Limits, StableGraph, StarShape};

/// An integer on every half-edge, legs included.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Twist {
    pub k: u32,
    pub values: Vec<i64>,
}

impl Twist {
    pub fn new(k: u32, values: Vec<i64>) -> Self {
        Twist { k, values }
    }

    pub fn get(&self, h: usize) -> i64 {
        self.values[h]
    }

    /// Wire form `{"half_edge_values": {"h": value}}`.
    pub fn to_spec(&self) -> TwistSpec {
        TwistSpec {
            half_edge_values: self
                .values
                .iter()
                .enumerate()
                .map(|(h, &v)| (h.to_string(), v))
                .collect(),
        }
    }

    pub fn from_spec(k: u32, spec: &TwistSpec, graph: &StableGraph) -> Result<Twist> {
        let n = graph.num_half_edges();
        let mut values = vec![None; n];
        for (key, &v) in &spec.half_edge_values {
            let h: usize = key
                .parse()
                .map_err(|_| DrcError::input(format!("twist key {key:?} is not a half-edge id")))?;
            if h >= n {
                return Err(DrcError::input(format!("twist names unknown half-edge {h}")));
            }
            values[h] = Some(v);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(h, v)| v.ok_or_else(|| DrcError::input(format!("twist misses half-edge {h}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Twist { k, values })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistSpec {
    pub half_edge_values: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum TwistIssue {
    WrongLength { expected: usize, found: usize },
    LegMismatch { half_edge: usize, marking: usize, weight: i64, value: i64 },
    Antisymmetry { half_edge: usize, other: usize, sum: i64 },
    VertexBalance { vertex: usize, sum: i64, expected: i64 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistReport {
    pub issues: Vec<TwistIssue>,
}

impl TwistReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks the leg, antisymmetry and vertex-balance conditions, listing every
/// failure.
pub fn validate_twist(graph: &StableGraph, weighting: &LegWeighting, twist: &Twist) -> TwistReport {
    let mut issues = Vec::new();
    if twist.values.len() != graph.num_half_edges() {
        issues.push(TwistIssue::WrongLength {
            expected: graph.num_half_edges(),
            found: twist.values.len(),
        });
        return TwistReport { issues };
    }
    for (h, marking) in graph.legs() {
        let w = weighting.m.get(marking - 1).copied().unwrap_or(0);
        if twist.get(h) != w {
            issues.push(TwistIssue::LegMismatch {
                half_edge: h,
                marking,
                weight: w,
                value: twist.get(h),
            });
        }
    }
    for e in graph.edges() {
        let sum = twist.get(e.h) + twist.get(e.h2);
        if sum != 0 {
            issues.push(TwistIssue::Antisymmetry {
                half_edge: e.h,
                other: e.h2,
                sum,
            });
        }
    }
    for v in 0..graph.num_vertices() {
        let sum: i64 = graph.half_edges_at(v).iter().map(|&h| twist.get(h)).sum();
        let expected = twist.k as i64 * graph.canonical_degree(v);
        if sum != expected {
            issues.push(TwistIssue::VertexBalance { vertex: v, sum, expected });
        }
    }
    TwistReport { issues }
}

/// A twist on a simple star with `I(e) > 0` and `k | I(e)` on every edge,
/// where `I(e)` is read at the outlying half-edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositiveTwist {
    pub star: StarShape,
    pub twist: Twist,
    /// Outlying half-edge of each edge, in edge-id order.
    pub outlying_halves: Vec<usize>,
}

impl PositiveTwist {
    /// Validates `twist` as a positive twist on the star `graph`.
    pub fn new(graph: &StableGraph, weighting: &LegWeighting, twist: Twist) -> Result<Self> {
        let star = is_simple_star(graph, weighting)
            .ok_or_else(|| DrcError::input("graph is not a simple star for this weighting"))?;
        let report = validate_twist(graph, weighting, &twist);
        if let Some(issue) = report.issues.first() {
            return Err(DrcError::input(format!("invalid twist: {issue:?}")));
        }
        let outlying_halves = outlying_halves(graph, &star);
        let pt = PositiveTwist {
            star,
            twist,
            outlying_halves,
        };
        let k = pt.twist.k as i64;
        for (i, v) in pt.edge_values().into_iter().enumerate() {
            if v <= 0 || v % k != 0 {
                return Err(DrcError::input(format!(
                    "edge {} has twist {v}, not a positive multiple of {k}",
                    pt.outlying_halves[i]
                )));
            }
        }
        Ok(pt)
    }

    pub fn k(&self) -> u32 {
        self.twist.k
    }

    /// `I(e)` per edge, in edge-id order.
    pub fn edge_values(&self) -> Vec<i64> {
        self.outlying_halves.iter().map(|&h| self.twist.get(h)).collect()
    }

    /// `I'(e) = I(e)/k` per edge, in edge-id order.
    pub fn divided(&self) -> Result<Vec<i64>> {
        divided_values(self.twist.k, &self.edge_values())
    }
}

fn outlying_halves(graph: &StableGraph, star: &StarShape) -> Vec<usize> {
    graph
        .edges()
        .into_iter()
        .map(|e| if graph.vertex_of(e.h) == star.center { e.h2 } else { e.h })
        .collect()
}

/// Divides every value by `k`; rejects non-divisible entries.
pub fn divided_values(k: u32, values: &[i64]) -> Result<Vec<i64>> {
    let k = k as i64;
    if k <= 0 {
        return Err(DrcError::input("k must be positive"));
    }
    values
        .iter()
        .map(|&v| {
            if v % k == 0 {
                Ok(v / k)
            } else {
                Err(DrcError::input(format!("twist value {v} is not divisible by k = {k}")))
            }
        })
        .collect()
}

/// Result of [`enumerate_positive_twists`]. `diagnostic` explains an empty
/// answer caused by a leg that forbids the star shape.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PositiveTwists {
    pub twists: Vec<PositiveTwist>,
    pub diagnostic: Option<String>,
}

/// Positive compositions of `total` into `parts` parts, lexicographic.
fn compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    fn rec(left: i64, parts: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if parts == 1 {
            if left >= 1 {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for x in 1..=(left - parts as i64 + 1) {
            cur.push(x);
            rec(left - x, parts - 1, cur, out);
            cur.pop();
        }
    }
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

/// All positive twists on a simple star, in lexicographic order of the
/// per-edge values taken outlying vertex by outlying vertex.
pub fn enumerate_positive_twists(
    graph: &StableGraph,
    weighting: &LegWeighting,
    limits: &Limits,
) -> Result<PositiveTwists> {
    weighting.check(graph)?;
    let star = is_simple_star(graph, weighting)
        .ok_or_else(|| DrcError::input("graph is not a simple star for this weighting"))?;
    let k = weighting.k as i64;
    for &v in &star.outlying {
        for h in graph.legs_at(v) {
            let mk = graph.marking(h).unwrap();
            if weighting.is_bad(mk) {
                return Ok(PositiveTwists {
                    twists: Vec::new(),
                    diagnostic: Some(format!(
                        "marking {mk} (weight {}) on outlying vertex {v} is negative or not divisible by k",
                        weighting.weight(mk)
                    )),
                });
            }
        }
    }

    let halves = outlying_halves(graph, &star);
    // Per outlying vertex: its edge positions and the admissible value lists.
    let mut per_vertex: Vec<(Vec<usize>, Vec<Vec<i64>>)> = Vec::new();
    for &v in &star.outlying {
        let pos: Vec<usize> = (0..halves.len())
            .filter(|&i| graph.vertex_of(halves[i]) == v)
            .collect();
        let legs: i64 = graph
            .legs_at(v)
            .iter()
            .map(|&h| weighting.weight(graph.marking(h).unwrap()))
            .sum();
        let target = k * graph.canonical_degree(v) - legs;
        if target % k != 0 {
            return Ok(PositiveTwists::default());
        }
        let comps: Vec<Vec<i64>> = compositions(target / k, pos.len())
            .into_iter()
            .map(|c| c.into_iter().map(|x| x * k).collect())
            .collect();
        if comps.is_empty() {
            return Ok(PositiveTwists::default());
        }
        per_vertex.push((pos, comps));
    }

    let total = per_vertex
        .iter()
        .try_fold(1usize, |acc, (_, c)| acc.checked_mul(c.len()))
        .unwrap_or(usize::MAX);
    if total > limits.max_orderings {
        return Err(DrcError::guard("positive twists", limits.max_orderings, total));
    }

    let mut base = vec![0i64; graph.num_half_edges()];
    for (h, mk) in graph.legs() {
        base[h] = weighting.weight(mk);
    }
    let mut twists = Vec::with_capacity(total);
    let mut idx = vec![0usize; per_vertex.len()];
    loop {
        let mut values = base.clone();
        for (j, (pos, comps)) in per_vertex.iter().enumerate() {
            for (&p, &x) in pos.iter().zip(&comps[idx[j]]) {
                values[halves[p]] = x;
                values[graph.pair(halves[p])] = -x;
            }
        }
        let twist = Twist::new(weighting.k, values);
        let c = star.center;
        let sum: i64 = graph.half_edges_at(c).iter().map(|&h| twist.get(h)).sum();
        if sum != k * graph.canonical_degree(c) {
            return Err(DrcError::invariant(format!(
                "centre balance fails: {sum} != {}",
                k * graph.canonical_degree(c)
            )));
        }
        twists.push(PositiveTwist {
            star: star.clone(),
            twist,
            outlying_halves: halves.clone(),
        });
        // odometer, last vertex fastest
        let mut j = per_vertex.len();
        loop {
            if j == 0 {
                return Ok(PositiveTwists {
                    twists,
                    diagnostic: None,
                });
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < per_vertex[j].1.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// True iff no directed cycle has all traversed values `I(h) >= 0` with at
/// least one positive, where `h` is the half-edge the cycle leaves through.
pub fn fp_sign_vanishing_check(graph: &StableGraph, twist: &Twist, limits: &Limits) -> Result<bool> {
    let cycles = all_cycles(graph, limits)?;
    Ok(!cycles.iter().any(|c| {
        let vals: Vec<i64> = c.half_edges().iter().map(|&h| twist.get(h)).collect();
        vals.iter().all(|&x| x >= 0) && vals.iter().any(|&x| x > 0)
    }))
}

/// Every twist with `|I(h)| <= bound` on all edge halves, by brute force.
/// `Tw(Γ)` is infinite in general, so the bound is mandatory.
pub fn enumerate_twists_bounded(
    graph: &StableGraph,
    weighting: &LegWeighting,
    bound: i64,
    limits: &Limits,
) -> Result<Vec<Twist>> {
    weighting.check(graph)?;
    if bound < 0 {
        return Err(DrcError::input("twist bound must be nonnegative"));
    }
    let edges = graph.edges();
    let width = (2 * bound + 1) as usize;
    let total = (0..edges.len())
        .try_fold(1usize, |acc, _| acc.checked_mul(width))
        .unwrap_or(usize::MAX);
    if total > limits.max_orderings {
        return Err(DrcError::guard("bounded twists", limits.max_orderings, total));
    }
    let mut base = vec![0i64; graph.num_half_edges()];
    for (h, mk) in graph.legs() {
        base[h] = weighting.weight(mk);
    }
    let mut out = Vec::new();
    for code in 0..total {
        let mut values = base.clone();
        let mut c = code;
        for e in &edges {
            let x = (c % width) as i64 - bound;
            c /= width;
            values[e.h] = x;
            values[e.h2] = -x;
        }
        let t = Twist::new(weighting.k, values);
        if validate_twist(graph, weighting, &t).is_valid() {
            out.push(t);
        }
    }
    out.sort_by(|a, b| a.values.cmp(&b.values));
    Ok(out)
}

/// Leg weights read off a twist, by marking.
pub fn leg_weights(graph: &StableGraph, twist: &Twist) -> Vec<i64> {
    let mut legs = graph.legs();
    legs.sort_by_key(|&(_, marking)| marking);
    legs.into_iter().map(|(h, _)| twist.get(h)).collect()
}

/// Parses a twist given either as JSON (`{"half_edge_values": {...}}`) or
/// inline as `[e0:3,e1:3,e2:6]`, where `e<id>` is the edge whose smaller
/// half-edge is `id`.
///
/// Inline values are placed on the half-edge away from `center` (the star
/// centre when known); without a centre they go on the larger half-edge id.
/// The partner half gets the negated value and legs get `m`, or 0 when `m`
/// is absent.
pub fn parse_twist(
    text: &str,
    graph: &StableGraph,
    k: u32,
    m: Option<&[i64]>,
    center: Option<usize>,
) -> Result<Twist> {
    let text = text.trim();
    if text.starts_with('{') {
        let spec: TwistSpec = serde_json::from_str(text)
            .map_err(|e| DrcError::input(format!("twist JSON: {e}")))?;
        return Twist::from_spec(k, &spec, graph);
    }
    let body = text
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| DrcError::input(format!("twist {text:?} is neither JSON nor [e<id>:value,...]")))?;
    let mut values = vec![None; graph.num_half_edges()];
    for (h, marking) in graph.legs() {
        let w = match m {
            Some(m) => *m
                .get(marking - 1)
                .ok_or_else(|| DrcError::input(format!("no weight for marking {marking}")))?,
            None => 0,
        };
        values[h] = Some(w);
    }
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, v) = item
            .split_once(':')
            .ok_or_else(|| DrcError::input(format!("twist entry {item:?} is not e<id>:value")))?;
        let id: usize = name
            .trim()
            .strip_prefix('e')
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| DrcError::input(format!("bad edge name {name:?}")))?;
        let v: i64 = v
            .trim()
            .parse()
            .map_err(|_| DrcError::input(format!("bad twist value in {item:?}")))?;
        let edge = graph
            .edge_of(id)
            .filter(|e| e.h == id)
            .ok_or_else(|| DrcError::input(format!("e{id} is not an edge")))?;
        let (far, near) = match center {
            Some(c) if graph.vertex_of(edge.h) == c => (edge.h2, edge.h),
            Some(c) if graph.vertex_of(edge.h2) == c => (edge.h, edge.h2),
            _ => (edge.h2, edge.h),
        };
        if values[far].is_some() {
            return Err(DrcError::input(format!("edge e{id} given twice")));
        }
        values[far] = Some(v);
        values[near] = Some(-v);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(h, v)| v.ok_or_else(|| DrcError::input(format!("twist misses half-edge {h}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Twist { k, values })
}
