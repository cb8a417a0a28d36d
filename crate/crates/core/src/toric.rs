//! Monoid generators and binomial chart equations `Ψ_f` of the toric charts
//! attached to a twisted graph, and the complete-intersection witness check.
//!
//! Orientation convention: a cycle walking the directed edge `h` (from
//! `end(h)` to `end(i(h))`) picks up `I_γ(e) = I(i(h))`, the twist at the
//! half-edge where it arrives. Leaving the centre of a star along an edge
//! therefore contributes `+I(e)`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};
use crate::graph::{
    all_cycles, basis_coordinates, cycle_basis_rooted, spanning_tree, Cycle, Edge, Limits,
    StableGraph, StarShape,
};
use crate::laurent::{ExponentVector, LaurentPolynomial, Var};
use crate::twist::Twist;

/// Integer weights on the cycles of `Υ`, by index.
pub type CycleFlow = BTreeMap<usize, i64>;

pub fn delta(i: usize) -> CycleFlow {
    CycleFlow::from([(i, 1)])
}

pub fn flow_add(a: &CycleFlow, b: &CycleFlow, sign: i64) -> CycleFlow {
    let mut out = a.clone();
    for (&i, &x) in b {
        *out.entry(i).or_insert(0) += sign * x;
    }
    out.retain(|_, x| *x != 0);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomialEquation {
    pub lhs: ExponentVector,
    pub rhs: ExponentVector,
    pub flow: CycleFlow,
}

impl BinomialEquation {
    /// `lhs - rhs`.
    pub fn polynomial(&self) -> LaurentPolynomial {
        LaurentPolynomial::binomial(&self.lhs, &self.rhs)
    }

    pub fn is_trivial(&self) -> bool {
        self.lhs == self.rhs
    }

    pub fn display(&self) -> String {
        format!("{} = {}", self.lhs, self.rhs)
    }
}

/// Role of an equation in [`ToricChart::equation_system`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationRole {
    /// `Ψ_{f_γ - δ_γ}`, relating `a_γ` to the basis variables.
    CycleRelation,
    /// `Ψ_{δ_β}` for a basis cycle `β`.
    BasisCycle,
    /// Low-degree flow kept for auditing.
    Audit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartEquation {
    pub role: EquationRole,
    pub equation: BinomialEquation,
    pub trivial: bool,
}

/// The cycle set, the chosen basis and the twist values used by the chart.
#[derive(Clone, Debug)]
pub struct ToricChart {
    graph: StableGraph,
    /// `Υ`, sorted.
    pub cycles: Vec<Cycle>,
    /// Indices into `cycles` of the fundamental basis.
    pub basis: Vec<usize>,
    /// Coordinates of every cycle in the basis.
    pub coordinates: Vec<Vec<i64>>,
    /// Per half-edge twist, divided by `k` when `divided` is set.
    values: Vec<i64>,
    pub divided: bool,
    pub k: u32,
}

impl ToricChart {
    /// Builds the chart data. The basis is rooted at `root` (the centre for
    /// stars), so basis cycles leave the root along a tree edge.
    pub fn new(
        graph: &StableGraph,
        twist: &Twist,
        divided: bool,
        root: usize,
        limits: &Limits,
    ) -> Result<Self> {
        limits.check_graph(graph)?;
        if twist.values.len() != graph.num_half_edges() {
            return Err(DrcError::input("twist length does not match the graph"));
        }
        let k = twist.k as i64;
        let mut values = twist.values.clone();
        if divided {
            for e in graph.edges() {
                for h in [e.h, e.h2] {
                    if k == 0 || values[h] % k != 0 {
                        return Err(DrcError::input(format!(
                            "twist {} at half-edge {h} is not divisible by k = {k}",
                            values[h]
                        )));
                    }
                    values[h] /= k;
                }
            }
        }
        let cycles = all_cycles(graph, limits)?;
        let tree = spanning_tree(graph);
        let basis_cycles = cycle_basis_rooted(graph, &tree, root)?;
        let basis = basis_cycles
            .iter()
            .map(|b| {
                cycles
                    .binary_search(b)
                    .map_err(|_| DrcError::invariant("basis cycle missing from the cycle list"))
            })
            .collect::<Result<Vec<_>>>()?;
        let coordinates = cycles
            .iter()
            .map(|c| basis_coordinates(graph, &tree, &basis_cycles, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(ToricChart {
            graph: graph.clone(),
            cycles,
            basis,
            coordinates,
            values,
            divided,
            k: twist.k,
        })
    }

    pub fn graph(&self) -> &StableGraph {
        &self.graph
    }

    /// Index of the inverse cycle `i(γ)`.
    pub fn inverse_of(&self, i: usize) -> usize {
        let inv = self.cycles[i].inverse(&self.graph);
        self.cycles.binary_search(&inv).expect("cycle list is closed under inversion")
    }

    /// `I_γ(e)` (or `I'_γ(e)` on a divided chart).
    pub fn i_gamma(&self, cycle: usize, edge: Edge) -> i64 {
        i_gamma(&self.graph, &self.cycles[cycle], edge, &self.values)
    }

    /// The edge generators `a_e`, then one exponent vector per cycle.
    pub fn monoid_generators(&self) -> Vec<ExponentVector> {
        let edges = self.graph.edges();
        let mut out: Vec<ExponentVector> =
            edges.iter().map(|e| ExponentVector::var(Var::Edge(e.id()), 1)).collect();
        for i in 0..self.cycles.len() {
            let mut x = ExponentVector::one();
            for e in &edges {
                x.add_to(Var::Edge(e.id()), self.i_gamma(i, *e));
            }
            out.push(x);
        }
        out
    }

    /// `M_{e,f} = Σ_γ f_γ I_γ(e)`.
    pub fn m_ef(&self, flow: &CycleFlow, edge: Edge) -> i64 {
        flow.iter().map(|(&i, &f)| f * self.i_gamma(i, edge)).sum()
    }

    pub fn psi_equation(&self, flow: &CycleFlow) -> BinomialEquation {
        let mut lhs = ExponentVector::one();
        let mut rhs = ExponentVector::one();
        for (&i, &f) in flow {
            if f > 0 {
                lhs.add_to(Var::Cycle(i), f);
            } else if f < 0 {
                rhs.add_to(Var::Cycle(i), -f);
            }
        }
        for e in self.graph.edges() {
            let m = self.m_ef(flow, e);
            if m < 0 {
                lhs.add_to(Var::Edge(e.id()), -m);
            } else if m > 0 {
                rhs.add_to(Var::Edge(e.id()), m);
            }
        }
        BinomialEquation {
            lhs,
            rhs,
            flow: flow.clone(),
        }
    }

    /// `f_γ`: the basis expansion of `γ` as a flow.
    pub fn basis_flow(&self, i: usize) -> CycleFlow {
        let mut f = CycleFlow::new();
        for (j, &c) in self.coordinates[i].iter().enumerate() {
            if c != 0 {
                f.insert(self.basis[j], c);
            }
        }
        f
    }

    /// The essential family (`Ψ_{f_γ - δ_γ}` for every cycle, `Ψ_{δ_β}` for
    /// every basis cycle) followed by every flow with `‖f‖₁ <= bound`.
    pub fn equation_system(&self, bound: usize, limits: &Limits) -> Result<Vec<ChartEquation>> {
        let mut out = Vec::new();
        let mk = |role, eq: BinomialEquation| ChartEquation {
            role,
            trivial: eq.is_trivial(),
            equation: eq,
        };
        for i in 0..self.cycles.len() {
            let f = flow_add(&self.basis_flow(i), &delta(i), -1);
            out.push(mk(EquationRole::CycleRelation, self.psi_equation(&f)));
        }
        for &b in &self.basis {
            out.push(mk(EquationRole::BasisCycle, self.psi_equation(&delta(b))));
        }
        let flows = flows_up_to(self.cycles.len(), bound, limits.max_orderings)?;
        out.extend(
            flows
                .par_iter()
                .map(|f| mk(EquationRole::Audit, self.psi_equation(f)))
                .collect::<Vec<_>>(),
        );
        Ok(out)
    }

    /// `|Υ|` minus the rank of the cycle relations: the number of `a_γ` left
    /// free once every cycle is expressed through the basis.
    pub fn independent_cycle_variables(&self) -> Result<usize> {
        let n = self.cycles.len();
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        for i in 0..n {
            let eq = self.psi_equation(&flow_add(&self.basis_flow(i), &delta(i), -1));
            let mut row = vec![BigRational::zero(); n];
            for (v, e) in eq.lhs.iter().chain(eq.rhs.inverse().iter()) {
                match v {
                    Var::Cycle(j) => row[j] += BigRational::from_integer(e.into()),
                    Var::Edge(_) => {
                        return Err(DrcError::invariant(
                            "a null-homologous flow produced an edge exponent",
                        ))
                    }
                }
            }
            rows.push(row);
        }
        Ok(n - rank(rows))
    }

    /// Checks that `Ψ_{f+f'}` is a monomial multiple of a combination of
    /// `Ψ_f` and `Ψ_{f'}`: `D Ψ_{f+f'} = lhs_f Ψ_{f'} + rhs_{f'} Ψ_f` with
    /// `D = rhs_f rhs_{f'} / rhs_{f+f'}` polynomial in the `a_e`.
    pub fn monomial_consequence_check(&self, f: &CycleFlow, g: &CycleFlow) -> bool {
        let pf = self.psi_equation(f);
        let pg = self.psi_equation(g);
        let ps = self.psi_equation(&flow_add(f, g, 1));
        let d = pf.rhs.times(&pg.rhs).times(&ps.rhs.inverse());
        if !d.is_edge_polynomial() {
            return false;
        }
        let left = ps.polynomial().times_monomial(&d);
        let right = pg.polynomial().times_monomial(&pf.lhs) + pf.polynomial().times_monomial(&pg.rhs);
        (left - right).is_zero()
    }
}

/// `I_γ(e)`: `0` off the cycle, otherwise the value at the arrival half.
pub fn i_gamma(graph: &StableGraph, cycle: &Cycle, edge: Edge, values: &[i64]) -> i64 {
    for h in [edge.h, edge.h2] {
        if cycle.traverses(h) {
            return values[graph.pair(h)];
        }
    }
    0
}

/// Every nonzero flow on `n` cycles with `‖f‖₁ <= bound`.
pub fn flows_up_to(n: usize, bound: usize, cap: usize) -> Result<Vec<CycleFlow>> {
    let mut out = Vec::new();
    fn rec(
        start: usize,
        n: usize,
        left: usize,
        cur: &mut CycleFlow,
        out: &mut Vec<CycleFlow>,
        cap: usize,
    ) -> Result<()> {
        for i in start..n {
            for mag in 1..=left as i64 {
                for s in [mag, -mag] {
                    cur.insert(i, s);
                    out.push(cur.clone());
                    if out.len() > cap {
                        return Err(DrcError::guard("audit flows", cap, out.len()));
                    }
                    rec(i + 1, n, left - mag as usize, cur, out, cap)?;
                    cur.remove(&i);
                }
            }
        }
        Ok(())
    }
    rec(0, n, bound, &mut CycleFlow::new(), &mut out, cap)?;
    Ok(out)
}

fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let factor = &rows[i][c] / &pivot;
                for j in c..cols {
                    let delta = &factor * &rows[r][j];
                    rows[i][j] -= delta;
                }
            }
        }
        r += 1;
    }
    r
}

/// Outcome of one witness identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub cycle: usize,
    pub holds: bool,
}

/// For every cycle of a simple star outside the basis, verifies exactly that
/// `Ψ_{δ_γ}` lies in the Laurent ideal generated by the cycle relation of `γ`
/// and the basis equations:
///
/// * `γ = e1 ∘ i(e2)`, neither edge the tree edge `e0`:
///   `a_{β1} Ψ_{δ_γ} = Ψ_{δ_{β2}} - Ψ_{δ_{β1}} - a_{e2}^{I'(e2)} Ψ_{f_γ - δ_γ}`
/// * `γ = e1 ∘ i(e0)`, the inverse of `β1`:
///   `Ψ_{δ_γ} = -a_γ Ψ_{δ_{β1}} - a_{e1}^{I'(e1)} Ψ_{f_γ - δ_γ}`
///
/// where `β_j = e0 ∘ i(e_j)` are the basis cycles.
pub fn lci_witness_check(
    graph: &StableGraph,
    star: &StarShape,
    twist: &Twist,
    limits: &Limits,
) -> Result<Vec<WitnessResult>> {
    let chart = ToricChart::new(graph, twist, true, star.center, limits)?;
    if graph.has_self_loop() {
        return Err(DrcError::input("witness check needs a simple star"));
    }
    for e in graph.edges() {
        let (a, b) = (graph.vertex_of(e.h), graph.vertex_of(e.h2));
        if (a == star.center) == (b == star.center) {
            return Err(DrcError::input("witness check needs a simple star"));
        }
    }
    let tree: Vec<usize> = spanning_tree(graph);
    let centre_half = |e: Edge| if graph.vertex_of(e.h) == star.center { e.h } else { e.h2 };
    let outer_half = |e: Edge| graph.pair(centre_half(e));
    let edge_by_id: BTreeMap<usize, Edge> = graph.edges().into_iter().map(|e| (e.id(), e)).collect();
    // Outlying vertex -> its tree edge.
    let tree_edge: BTreeMap<usize, Edge> = tree
        .iter()
        .map(|id| {
            let e = edge_by_id[id];
            (graph.vertex_of(outer_half(e)), e)
        })
        .collect();
    let cycle_index = |walk: Vec<usize>| -> Result<usize> {
        let c = Cycle::new(graph, walk)?;
        chart
            .cycles
            .binary_search(&c)
            .map_err(|_| DrcError::invariant("expected cycle not enumerated"))
    };
    let psi = |f: CycleFlow| chart.psi_equation(&f).polynomial();
    let edge_power = |e: Edge| -> ExponentVector {
        ExponentVector::var(Var::Edge(e.id()), chart.values[outer_half(e)])
    };

    let mut out = Vec::new();
    for (i, cycle) in chart.cycles.iter().enumerate() {
        if chart.basis.contains(&i) {
            continue;
        }
        let walk = cycle.half_edges();
        if walk.len() != 2 {
            return Err(DrcError::invariant("star cycle of length other than 2"));
        }
        // Rotate so the walk leaves the centre first.
        let (out_h, back_h) = if graph.vertex_of(walk[0]) == star.center {
            (walk[0], walk[1])
        } else {
            (walk[1], walk[0])
        };
        let e1 = graph.edge_of(out_h).unwrap();
        let e2 = graph.edge_of(back_h).unwrap();
        let v = graph.vertex_of(outer_half(e1));
        let e0 = tree_edge[&v];
        let target = psi(delta(i));
        let relation = psi(flow_add(&chart.basis_flow(i), &delta(i), -1));
        let holds = if e2 == e0 {
            let b1 = cycle_index(vec![centre_half(e0), outer_half(e1)])?;
            let rhs = -psi(delta(b1)).times_monomial(&ExponentVector::var(Var::Cycle(i), 1))
                - relation.times_monomial(&edge_power(e1));
            (target - rhs).is_zero()
        } else if e1 == e0 {
            return Err(DrcError::invariant("cycle leaving along the tree edge is not in the basis"));
        } else {
            let b1 = cycle_index(vec![centre_half(e0), outer_half(e1)])?;
            let b2 = cycle_index(vec![centre_half(e0), outer_half(e2)])?;
            let lhs = target.times_monomial(&ExponentVector::var(Var::Cycle(b1), 1));
            let rhs = psi(delta(b2)) - psi(delta(b1)) - relation.times_monomial(&edge_power(e2));
            (lhs - rhs).is_zero()
        };
        out.push(WitnessResult { cycle: i, holds });
    }
    Ok(out)
}
