//! Decorated boundary strata (simple star + positive twist) for given
//! `(g, n, m, k)`, their class-decomposition coefficients and vertex labels.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};
use crate::graph::{GraphBuilder, LegWeighting, Limits, StableGraph};
use crate::iso::{automorphism_count, canonical_form, CanonicalKey};
use crate::rational::{self, Rational};
use crate::twist::{enumerate_positive_twists, validate_twist, PositiveTwist};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "K_ZERO")]
    KZero,
    #[serde(rename = "K1_ALL_NONNEG")]
    K1AllNonneg,
    #[serde(rename = "K_GT1_ALL_DIV_NONNEG")]
    KGt1AllDivNonneg,
    #[serde(rename = "GENERIC")]
    Generic,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseTag::KZero => "K_ZERO",
            CaseTag::K1AllNonneg => "K1_ALL_NONNEG",
            CaseTag::KGt1AllDivNonneg => "K_GT1_ALL_DIV_NONNEG",
            CaseTag::Generic => "GENERIC",
        })
    }
}

/// `k(2g - 2)`, the required total leg weight.
pub fn required_sum(g: u32, k: u32) -> i64 {
    k as i64 * (2 * g as i64 - 2)
}

pub fn classify_case(g: u32, m: &[i64], k: u32) -> Result<CaseTag> {
    let sum: i64 = m.iter().sum();
    let want = required_sum(g, k);
    if sum != want {
        return Err(DrcError::input(format!(
            "leg weights sum to {sum}, expected k(2g-2) = {want} (discrepancy {})",
            sum - want
        )));
    }
    let ki = k as i64;
    Ok(if k == 0 {
        CaseTag::KZero
    } else if m.iter().any(|&x| x < 0 || x % ki != 0) {
        CaseTag::Generic
    } else if k == 1 {
        CaseTag::K1AllNonneg
    } else {
        CaseTag::KGt1AllDivNonneg
    })
}

/// Enumeration bounds. Inputs needing more genus, legs, edges or vertices
/// than allowed are rejected with a guard error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrataConfig {
    pub max_genus: u32,
    pub max_legs: usize,
    pub max_edges: usize,
    pub max_strata: usize,
    pub limits: Limits,
}

impl Default for StrataConfig {
    fn default() -> Self {
        StrataConfig {
            max_genus: 6,
            max_legs: 6,
            max_edges: 12,
            max_strata: 200_000,
            limits: Limits::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexStratumLabel {
    pub vertex: usize,
    pub genus: u32,
    /// `k` at the centre, `1` at outlying vertices.
    pub order: u32,
    pub signature: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoratedStratum {
    pub graph: StableGraph,
    pub weighting: LegWeighting,
    pub twist: PositiveTwist,
    pub weight: Rational,
    pub fp_coefficient: Rational,
    pub aut_order: u64,
    pub vertex_labels: Vec<VertexStratumLabel>,
    pub key: CanonicalKey,
    /// The single-vertex term: the closure of the interior.
    pub interior: bool,
    /// Set on boundary strata, whose vertex-level spaces of differentials
    /// may be empty; the coefficient is emitted regardless.
    pub formal_term: bool,
}

fn edge_product(values: &[i64]) -> Rational {
    values.iter().fold(Rational::one(), |acc, &x| acc * rational::int(x))
}

/// `prod I(e) / k^{#V-1}`.
pub fn stratum_weight(graph: &StableGraph, twist: &PositiveTwist) -> Rational {
    let k = rational::int(twist.k() as i64);
    edge_product(&twist.edge_values()) / rational::pow(&k, graph.num_vertices() as i64 - 1)
}

/// `prod I(e) / (|Aut| k^{#V_out})`.
pub fn fp_coefficient(twist: &PositiveTwist, aut_order: u64) -> Rational {
    let k = rational::int(twist.k() as i64);
    edge_product(&twist.edge_values())
        / (rational::int(aut_order as i64) * rational::pow(&k, twist.star.outlying.len() as i64))
}

/// Centre: order `k`, signature `(m at the centre, I(h) - k per centre half)`.
/// Outlying: order 1, signature `(m/k, I(e)/k - 1)`. Legs come first in
/// marking order, node entries in edge-id order.
pub fn vertex_labels(graph: &StableGraph, twist: &PositiveTwist) -> Result<Vec<VertexStratumLabel>> {
    let k = twist.k() as i64;
    let star = &twist.star;
    let mut out = Vec::new();
    let node_halves = |v: usize| -> Vec<usize> {
        graph
            .edges()
            .into_iter()
            .map(|e| if graph.vertex_of(e.h) == v { e.h } else { e.h2 })
            .filter(|&h| graph.vertex_of(h) == v)
            .collect()
    };
    let legs_at = |v: usize| -> Vec<usize> {
        let mut l = graph.legs_at(v);
        l.sort_by_key(|&h| graph.marking(h));
        l
    };
    for v in std::iter::once(star.center).chain(star.outlying.iter().copied()) {
        let centre = v == star.center;
        let mut sig = Vec::new();
        for h in legs_at(v) {
            let x = twist.twist.get(h);
            sig.push(if centre { x } else { x / k });
        }
        for h in node_halves(v) {
            let x = twist.twist.get(h);
            sig.push(if centre { x - k } else { x / k - 1 });
        }
        let order = if centre { twist.k() } else { 1 };
        let want = order as i64 * (2 * graph.genus_of(v) as i64 - 2);
        let sum: i64 = sig.iter().sum();
        if sum != want {
            return Err(DrcError::invariant(format!(
                "vertex {v} signature sums to {sum}, expected {want}"
            )));
        }
        if !centre && sig.iter().any(|&x| x < 0) {
            return Err(DrcError::invariant(format!(
                "outlying vertex {v} has a negative signature entry"
            )));
        }
        out.push(VertexStratumLabel {
            vertex: v,
            genus: graph.genus_of(v),
            order,
            signature: sig,
        });
    }
    Ok(out)
}

impl DecoratedStratum {
    /// Computes and cross-checks every coefficient of a star with a positive
    /// twist.
    pub fn new(
        graph: StableGraph,
        weighting: LegWeighting,
        twist: PositiveTwist,
        limits: &Limits,
    ) -> Result<Self> {
        let report = validate_twist(&graph, &weighting, &twist.twist);
        if !report.is_valid() {
            return Err(DrcError::invariant(format!("invalid twist: {:?}", report.issues)));
        }
        let values = &twist.twist.values;
        let aut_order = automorphism_count(&graph, &weighting, Some(values), limits)?;
        let key = canonical_form(&graph, &weighting, Some(values), limits)?;
        let weight = stratum_weight(&graph, &twist);
        let fp = fp_coefficient(&twist, aut_order);

        let k = rational::int(twist.k() as i64);
        let divided = twist.divided()?;
        let via_betti = rational::pow(&k, graph.betti1() as i64) * edge_product(&divided);
        if via_betti != weight {
            return Err(DrcError::invariant(format!(
                "weight {} differs from k^b1 prod I' = {}",
                rational::to_text(&weight),
                rational::to_text(&via_betti)
            )));
        }
        let back = &fp * rational::int(aut_order as i64) * rational::pow(&k, twist.star.outlying.len() as i64);
        if back != edge_product(&twist.edge_values()) {
            return Err(DrcError::invariant("fp coefficient does not reconcile with prod I(e)"));
        }
        let vertex_labels = vertex_labels(&graph, &twist)?;
        let interior = graph.num_vertices() == 1;
        Ok(DecoratedStratum {
            graph,
            weighting,
            twist,
            weight,
            fp_coefficient: fp,
            aut_order,
            vertex_labels,
            key,
            interior,
            formal_term: !interior,
        })
    }

    pub fn num_outlying(&self) -> usize {
        self.twist.star.outlying.len()
    }

    /// `I(e)` as a sorted multiset.
    pub fn twist_multiset(&self) -> Vec<i64> {
        let mut v = self.twist.edge_values();
        v.sort_unstable();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub g: u32,
    pub k: u32,
    pub m: Vec<i64>,
    pub case: CaseTag,
    /// Sorted by vertex count, then canonical key.
    pub strata: Vec<DecoratedStratum>,
}

impl Decomposition {
    pub fn n(&self) -> usize {
        self.m.len()
    }
}

/// Outlying vertex shapes: nonincreasing lists of `(g_v, E_v)` with
/// `g_v, E_v >= 1` and `sum (g_v + E_v - 1) <= g`.
fn shapes(g: u32, max_edges: usize) -> Vec<Vec<(u32, usize)>> {
    let mut out = Vec::new();
    fn rec(
        budget: u32,
        edges_left: usize,
        max: (u32, usize),
        cur: &mut Vec<(u32, usize)>,
        out: &mut Vec<Vec<(u32, usize)>>,
    ) {
        out.push(cur.clone());
        for gv in 1..=budget {
            for ev in 1..=edges_left {
                let cost = gv + ev as u32 - 1;
                if cost > budget || (gv, ev) > max {
                    continue;
                }
                cur.push((gv, ev));
                rec(budget - cost, edges_left - ev, (gv, ev), cur, out);
                cur.pop();
            }
        }
    }
    rec(g, max_edges, (u32::MAX, usize::MAX), &mut Vec::new(), &mut out);
    out
}

/// Star with centre 0 of genus `g0`, outlying vertices `1..=r`, legs first
/// (marking order) and then each edge as (centre half, outlying half).
fn build_star(g0: u32, shape: &[(u32, usize)], placement: &[usize]) -> Result<StableGraph> {
    let mut b = GraphBuilder::new();
    let c = b.vertex(g0);
    let outs: Vec<usize> = shape.iter().map(|&(gv, _)| b.vertex(gv)).collect();
    for (i, &v) in placement.iter().enumerate() {
        b.leg(v, i + 1);
    }
    for (j, &(_, ev)) in shape.iter().enumerate() {
        for _ in 0..ev {
            b.edge(c, outs[j]);
        }
    }
    b.build()
}

fn is_stable(graph: &StableGraph) -> bool {
    (0..graph.num_vertices())
        .all(|v| 2 * graph.genus_of(v) as i64 - 2 + graph.half_edges_at(v).len() as i64 > 0)
}

type WorkItem = (u32, Vec<(u32, usize)>, Vec<usize>);

/// All isomorphism classes of simple stars of genus `g` with a positive
/// twist, plus the single-vertex interior term.
pub fn enumerate_strata(g: u32, m: &[i64], k: u32, config: &StrataConfig) -> Result<Decomposition> {
    let case = classify_case(g, m, k)?;
    if case != CaseTag::Generic {
        return Err(DrcError::input(format!(
            "case {case}: the boundary decomposition is only defined for GENERIC inputs"
        )));
    }
    if g > config.max_genus {
        return Err(DrcError::guard("genus", config.max_genus as usize, g as usize));
    }
    if m.len() > config.max_legs {
        return Err(DrcError::guard("legs", config.max_legs, m.len()));
    }
    let weighting = LegWeighting::new(k, m.to_vec());
    let n = m.len();
    let good: Vec<usize> = (0..n).filter(|&i| !weighting.is_bad(i + 1)).collect();

    // Work items: (g0, shape, leg placement).
    let mut items: Vec<WorkItem> = Vec::new();
    // a star of genus g has at most g edges
    for shape in shapes(g, g as usize) {
        let edges: usize = shape.iter().map(|&(_, ev)| ev).sum();
        let edge_guard = config.max_edges.min(config.limits.max_edges);
        if edges > edge_guard {
            return Err(DrcError::guard("edges", edge_guard, edges));
        }
        if shape.len() + 1 > config.limits.max_vertices {
            return Err(DrcError::guard("vertices", config.limits.max_vertices, shape.len() + 1));
        }
        let used: u32 = shape.iter().map(|&(gv, ev)| gv + ev as u32 - 1).sum();
        let g0 = g - used;
        let r = shape.len();
        let combos = (r + 1).pow(good.len() as u32);
        for code in 0..combos {
            let mut placement = vec![0usize; n];
            let mut c = code;
            for &i in &good {
                placement[i] = c % (r + 1);
                c /= r + 1;
            }
            items.push((g0, shape.clone(), placement));
        }
    }

    let found: Vec<Result<Vec<DecoratedStratum>>> = items
        .par_iter()
        .map(|(g0, shape, placement)| {
            let graph = build_star(*g0, shape, placement)?;
            if !is_stable(&graph) {
                return Ok(Vec::new());
            }
            let twists = enumerate_positive_twists(&graph, &weighting, &config.limits)?;
            let mut local: BTreeMap<CanonicalKey, DecoratedStratum> = BTreeMap::new();
            for t in twists.twists {
                let key = canonical_form(&graph, &weighting, Some(&t.twist.values), &config.limits)?;
                if local.contains_key(&key) {
                    continue;
                }
                let s = DecoratedStratum::new(graph.clone(), weighting.clone(), t, &config.limits)?;
                local.insert(key, s);
            }
            Ok(local.into_values().collect())
        })
        .collect();

    let mut merged: BTreeMap<CanonicalKey, DecoratedStratum> = BTreeMap::new();
    for r in found {
        for s in r? {
            merged.entry(s.key.clone()).or_insert(s);
            if merged.len() > config.max_strata {
                return Err(DrcError::guard("strata", config.max_strata, merged.len()));
            }
        }
    }
    let mut strata: Vec<DecoratedStratum> = merged.into_values().collect();
    strata.sort_by(|a, b| {
        (a.graph.num_vertices(), &a.key).cmp(&(b.graph.num_vertices(), &b.key))
    });
    Ok(Decomposition {
        g,
        k,
        m: m.to_vec(),
        case,
        strata,
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::is_simple_star;

    fn figure_one_stratum() -> DecoratedStratum {
        let (g, _) = figure_one();
        let w = figure_one_weighting();
        let ts = enumerate_positive_twists(&g, &w, &Limits::default()).unwrap();
        let t = ts.twists.into_iter().find(|t| t.edge_values() == vec![3, 3, 6]).unwrap();
        DecoratedStratum::new(g, w, t, &Limits::default()).unwrap()
    }

    #[test]
    fn classify() {
        assert_eq!(classify_case(4, &[-2, 5, 3, 12], 3).unwrap(), CaseTag::Generic);
        assert_eq!(classify_case(2, &[2, 0], 1).unwrap(), CaseTag::K1AllNonneg);
        assert_eq!(classify_case(2, &[4, 0], 2).unwrap(), CaseTag::KGt1AllDivNonneg);
        assert_eq!(classify_case(1, &[0], 0).unwrap(), CaseTag::KZero);
        let e = classify_case(2, &[1, 0], 1).unwrap_err();
        assert!(e.to_string().contains("discrepancy -1"));
    }

    #[test]
    fn figure_one_coefficients() {
        let s = figure_one_stratum();
        assert_eq!(s.weight, rational::int(6));
        assert_eq!(s.aut_order, 1);
        assert_eq!(s.fp_coefficient, rational::int(6));
        let sig: Vec<Vec<i64>> = s.vertex_labels.iter().map(|l| l.signature.clone()).collect();
        assert_eq!(sig[0], vec![-2, 5, 12, -6, -6, -9]);
        assert_eq!(sig[1], vec![0]);
        assert_eq!(sig[2], vec![1, 0, 1]);
        assert_eq!(s.vertex_labels[0].order, 3);
    }

    #[test]
    fn symmetric_twist_halves_fp_coefficient() {
        // two parallel edges with equal twist to one outlying vertex
        let g = banana(0, 1, 2, 2);
        let w = LegWeighting::new(1, vec![-1, 3]);
        let ts = enumerate_positive_twists(&g, &w, &Limits::default()).unwrap();
        assert_eq!(ts.twists.len(), 1);
        let s = DecoratedStratum::new(g, w, ts.twists[0].clone(), &Limits::default()).unwrap();
        assert_eq!(s.twist.edge_values(), vec![1, 1]);
        assert_eq!(s.aut_order, 2);
        assert_eq!(s.fp_coefficient, rational::frac(1, 2));
        assert_eq!(s.weight, rational::int(1));
    }

    #[test]
    fn figure_one_is_enumerated() {
        let d = enumerate_strata(4, &[-2, 5, 3, 12], 3, &StrataConfig::default()).unwrap();
        let fig = figure_one_stratum();
        let hit = d.strata.iter().find(|s| s.key == fig.key).expect("Figure 1 stratum");
        assert_eq!(hit.weight, rational::int(6));
        assert_eq!(hit.twist_multiset(), vec![3, 3, 6]);
        assert!(d.strata[0].interior);
        assert_eq!(d.strata[0].weight, rational::int(1));
        let keys: std::collections::BTreeSet<_> = d.strata.iter().map(|s| &s.key).collect();
        assert_eq!(keys.len(), d.strata.len());
        for s in &d.strata {
            assert!(is_simple_star(&s.graph, &s.weighting).is_some());
            assert!(validate_twist(&s.graph, &s.weighting, &s.twist.twist).is_valid());
        }
    }

    #[test]
    fn non_generic_is_rejected() {
        let e = enumerate_strata(2, &[2, 0], 1, &StrataConfig::default()).unwrap_err();
        assert!(e.to_string().contains("K1_ALL_NONNEG"));
        let e = enumerate_strata(2, &[4, 0], 2, &StrataConfig::default()).unwrap_err();
        assert!(e.to_string().contains("K_GT1_ALL_DIV_NONNEG"));
    }

    #[test]
    fn matches_brute_force_oracle() {
        for (g, m, k) in [
            (1u32, vec![1i64, -1], 1u32),
            (1, vec![2, -2], 2),
            (2, vec![3, -1], 1),
            (2, vec![-1, 3], 1),
            (2, vec![5, -1], 2),
            (1, vec![3, -1, -2], 1),
        ] {
            let d = enumerate_strata(g, &m, k, &StrataConfig::default()).unwrap();
            let fast: std::collections::BTreeSet<_> = d.strata.iter().map(|s| s.key.clone()).collect();
            let slow = oracle::brute_force_keys(g, &m, k);
            assert_eq!(fast, slow, "g={g} m={m:?} k={k}");
            assert!(fast.len() >= 2);
        }
    }

    #[test]
    fn keys_survive_relabelling() {
        let d = enumerate_strata(3, &[-1, 5], 1, &StrataConfig::default()).unwrap();
        for s in &d.strata {
            let nv = s.graph.num_vertices();
            let nh = s.graph.num_half_edges();
            let vperm: Vec<usize> = (0..nv).rev().collect();
            let hperm: Vec<usize> = (0..nh).rev().collect();
            let g2 = s.graph.relabeled(&vperm, &hperm);
            let mut t2 = vec![0; nh];
            for h in 0..nh {
                t2[hperm[h]] = s.twist.twist.get(h);
            }
            let k2 = canonical_form(&g2, &s.weighting, Some(&t2), &Limits::default()).unwrap();
            assert_eq!(k2, s.key);
        }
    }
}
