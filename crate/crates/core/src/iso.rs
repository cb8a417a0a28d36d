//! Automorphisms and canonical keys of decorated stable graphs.
//!
//! Legs are labelled, so automorphisms fix them pointwise. An optional twist
//! (one integer per half-edge) is part of the decoration when supplied.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};
use crate::graph::{LegWeighting, Limits, StableGraph};

type Label = (i64, i64);

struct Decorated<'a> {
    graph: &'a StableGraph,
    /// Oriented labels of the edges between distinct vertices, keyed `(u, v)`.
    between: BTreeMap<(usize, usize), Vec<Label>>,
    /// Unordered labels of the self-loops at each vertex.
    loops: Vec<Vec<Label>>,
    markings: Vec<Vec<usize>>,
    colors: Vec<usize>,
}

impl<'a> Decorated<'a> {
    fn new(graph: &'a StableGraph, twist: Option<&[i64]>) -> Self {
        let n = graph.num_vertices();
        let t = |h: usize| twist.map_or(0, |t| t[h]);
        let mut between: BTreeMap<(usize, usize), Vec<Label>> = BTreeMap::new();
        let mut loops = vec![Vec::new(); n];
        for e in graph.edges() {
            let (u, v) = (graph.vertex_of(e.h), graph.vertex_of(e.h2));
            let (a, b) = (t(e.h), t(e.h2));
            if u == v {
                loops[u].push((a.min(b), a.max(b)));
            } else {
                between.entry((u, v)).or_default().push((a, b));
                between.entry((v, u)).or_default().push((b, a));
            }
        }
        between.values_mut().for_each(|l| l.sort_unstable());
        loops.iter_mut().for_each(|l| l.sort_unstable());
        let markings = (0..n)
            .map(|v| {
                let mut m: Vec<usize> = graph
                    .legs_at(v)
                    .into_iter()
                    .filter_map(|h| graph.marking(h))
                    .collect();
                m.sort_unstable();
                m
            })
            .collect();
        let mut d = Decorated {
            graph,
            between,
            loops,
            markings,
            colors: Vec::new(),
        };
        d.colors = d.refine();
        d
    }

    fn labels(&self, u: usize, v: usize) -> &[Label] {
        self.between.get(&(u, v)).map_or(&[], |l| l.as_slice())
    }

    /// Colour refinement; colours are ranks of isomorphism-invariant
    /// signatures, so equal colours are necessary for any isomorphism.
    fn refine(&self) -> Vec<usize> {
        let n = self.graph.num_vertices();
        let initial: Vec<Vec<i64>> = (0..n)
            .map(|v| {
                let mut s = vec![self.graph.genus_of(v) as i64, self.markings[v].len() as i64];
                s.extend(self.markings[v].iter().map(|&m| m as i64));
                s.push(self.loops[v].len() as i64);
                s.extend(self.loops[v].iter().flat_map(|&(a, b)| [a, b]));
                s
            })
            .collect();
        let mut colors = rank(&initial);
        loop {
            let sigs: Vec<Vec<i64>> = (0..n)
                .map(|v| {
                    let mut nb: Vec<[i64; 3]> = Vec::new();
                    for w in 0..n {
                        for &(a, b) in self.labels(v, w) {
                            nb.push([colors[w] as i64, a, b]);
                        }
                    }
                    nb.sort_unstable();
                    let mut s = vec![colors[v] as i64];
                    s.extend(nb.into_iter().flatten());
                    s
                })
                .collect();
            let next = rank(&sigs);
            let count = |c: &[usize]| c.iter().max().map_or(0, |m| m + 1);
            if count(&next) == count(&colors) {
                return next;
            }
            colors = next;
        }
    }

    /// Cells of equal colour, in colour order.
    fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &c) in self.colors.iter().enumerate() {
            cells.entry(c).or_default().push(v);
        }
        cells.into_values().collect()
    }
}

fn rank(sigs: &[Vec<i64>]) -> Vec<usize> {
    let mut sorted: Vec<&Vec<i64>> = sigs.iter().collect();
    sorted.sort();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(&s).unwrap())
        .collect()
}

fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, x| acc.checked_mul(x))
}

fn multiplicity_factor(labels: &[Label]) -> Option<u64> {
    let mut acc = 1u64;
    let mut i = 0;
    while i < labels.len() {
        let j = labels[i..].iter().take_while(|&&l| l == labels[i]).count();
        acc = acc.checked_mul(factorial(j)?)?;
        i += j;
    }
    Some(acc)
}

/// Order of the automorphism group of the decorated graph (half-edge
/// permutations commuting with the involution, preserving genera, fixing
/// every leg, and preserving the twist when one is given).
pub fn automorphism_count(
    graph: &StableGraph,
    _weighting: &LegWeighting,
    twist: Option<&[i64]>,
    limits: &Limits,
) -> Result<u64> {
    limits.check_graph(graph)?;
    let d = Decorated::new(graph, twist);
    let n = graph.num_vertices();

    // Edge permutations over a fixed vertex permutation do not depend on it.
    let overflow = || DrcError::guard("automorphism group order", u64::MAX as usize, 0);
    let mut edge_factor = 1u64;
    for (&(u, v), labels) in &d.between {
        if u < v {
            edge_factor = edge_factor
                .checked_mul(multiplicity_factor(labels).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
        }
    }
    for l in &d.loops {
        edge_factor = edge_factor
            .checked_mul(multiplicity_factor(l).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
        for &(a, b) in l {
            if a == b {
                edge_factor = edge_factor.checked_mul(2).ok_or_else(overflow)?;
            }
        }
    }

    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut count = 0u64;
    let mut visited = 0usize;
    fn search(
        d: &Decorated,
        v: usize,
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        count: &mut u64,
        visited: &mut usize,
        cap: usize,
    ) -> Result<()> {
        let n = image.len();
        *visited += 1;
        if *visited > cap {
            return Err(DrcError::guard("automorphism search nodes", cap, *visited));
        }
        if v == n {
            *count += 1;
            return Ok(());
        }
        for w in 0..n {
            if used[w] || d.colors[w] != d.colors[v] {
                continue;
            }
            if !d.markings[v].is_empty() && w != v {
                continue;
            }
            if d.loops[v] != d.loops[w] {
                continue;
            }
            let consistent = (0..v).all(|u| d.labels(u, v) == d.labels(image[u], w));
            if !consistent {
                continue;
            }
            image[v] = w;
            used[w] = true;
            search(d, v + 1, image, used, count, visited, cap)?;
            used[w] = false;
        }
        Ok(())
    }
    search(&d, 0, &mut image, &mut used, &mut count, &mut visited, limits.max_orderings)?;
    count.checked_mul(edge_factor).ok_or_else(overflow)
}

/// Isomorphism-invariant key of a decorated graph, hex encoded.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalKey(pub String);

impl std::fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Minimises an adjacency encoding over every vertex ordering compatible
/// with the colour refinement. Exhaustive, hence exact, within the guard.
pub fn canonical_form(
    graph: &StableGraph,
    weighting: &LegWeighting,
    twist: Option<&[i64]>,
    limits: &Limits,
) -> Result<CanonicalKey> {
    limits.check_graph(graph)?;
    let d = Decorated::new(graph, twist);
    let cells = d.cells();
    let orderings = cells
        .iter()
        .try_fold(1usize, |acc, c| {
            factorial(c.len()).and_then(|f| acc.checked_mul(f as usize))
        })
        .unwrap_or(usize::MAX);
    if orderings > limits.max_orderings {
        return Err(DrcError::guard(
            "canonical-form orderings",
            limits.max_orderings,
            orderings,
        ));
    }

    let mut header = vec![weighting.k as i64, weighting.m.len() as i64];
    header.extend(weighting.m.iter().copied());
    header.push(twist.is_some() as i64);
    header.push(graph.num_vertices() as i64);

    let encode = |order: &[usize]| -> Vec<i64> {
        let mut out = header.clone();
        for &v in order {
            out.push(graph.genus_of(v) as i64);
            out.push(d.markings[v].len() as i64);
            out.extend(d.markings[v].iter().map(|&m| m as i64));
            out.push(d.loops[v].len() as i64);
            out.extend(d.loops[v].iter().flat_map(|&(a, b)| [a, b]));
        }
        for (i, &u) in order.iter().enumerate() {
            for &v in &order[i + 1..] {
                let l = d.labels(u, v);
                out.push(l.len() as i64);
                out.extend(l.iter().flat_map(|&(a, b)| [a, b]));
            }
        }
        out
    };

    let mut best: Option<Vec<i64>> = None;
    let mut perms: Vec<Vec<usize>> = cells.clone();
    loop {
        let order: Vec<usize> = perms.iter().flatten().copied().collect();
        let enc = encode(&order);
        if best.as_ref().is_none_or(|b| enc < *b) {
            best = Some(enc);
        }
        // odometer over the per-cell permutations
        let mut i = perms.len();
        loop {
            if i == 0 {
                return Ok(CanonicalKey(hex::encode(varint_bytes(&best.unwrap()))));
            }
            i -= 1;
            if next_permutation(&mut perms[i]) {
                break;
            }
            perms[i] = cells[i].clone();
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn varint_bytes(xs: &[i64]) -> Vec<u8> {
    let mut out = Vec::new();
    for &x in xs {
        let mut z = ((x << 1) ^ (x >> 63)) as u64;
        loop {
            let byte = (z & 0x7f) as u8;
            z >>= 7;
            if z == 0 {
                out.push(byte);
                break;
            }
            out.push(byte | 0x80);
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod oracle {
    use super::*;

    /// Counts decorated automorphisms by trying every permutation of the
    /// non-leg half-edges. Only for tiny graphs.
    pub fn brute_force_automorphisms(graph: &StableGraph, twist: Option<&[i64]>) -> u64 {
        let nh = graph.num_half_edges();
        let free: Vec<usize> = (0..nh).filter(|&h| !graph.is_leg(h)).collect();
        let mut perm = free.clone();
        let mut count = 0;
        loop {
            let mut map: Vec<usize> = (0..nh).collect();
            for (i, &h) in free.iter().enumerate() {
                map[h] = perm[i];
            }
            if is_automorphism(graph, twist, &map) {
                count += 1;
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        count
    }

    fn is_automorphism(graph: &StableGraph, twist: Option<&[i64]>, map: &[usize]) -> bool {
        let nh = graph.num_half_edges();
        let nv = graph.num_vertices();
        let mut vmap = vec![usize::MAX; nv];
        for h in 0..nh {
            if graph.pair(map[h]) != map[graph.pair(h)] {
                return false;
            }
            if let Some(t) = twist {
                if t[map[h]] != t[h] {
                    return false;
                }
            }
            let (a, b) = (graph.vertex_of(h), graph.vertex_of(map[h]));
            if vmap[a] == usize::MAX {
                vmap[a] = b;
            } else if vmap[a] != b {
                return false;
            }
        }
        // isolated vertices cannot occur in connected graphs with > 1 vertex
        let mut seen = vec![false; nv];
        for v in 0..nv {
            let w = if vmap[v] == usize::MAX { v } else { vmap[v] };
            if seen[w] || graph.genus_of(v) != graph.genus_of(w) {
                return false;
            }
            seen[w] = true;
        }
        true
    }
}
