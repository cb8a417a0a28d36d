//! Local invariants of the double ramification locus along a stratum:
//! fibre count, local Artin ring and its length, the multiplicity
//! reconciliation with the stratum weight, and tangent dimensions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};
use crate::rational::{self, Rational};
use crate::strata::DecoratedStratum;

/// `κ[[ℓ_e]] / (ℓ_e^{I'(e)})`, one variable per edge keyed by edge id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRingPresentation {
    pub exponents: BTreeMap<usize, i64>,
}

impl LocalRingPresentation {
    pub fn new(exponents: BTreeMap<usize, i64>) -> Result<Self> {
        if let Some((e, x)) = exponents.iter().find(|(_, &x)| x < 1) {
            return Err(DrcError::input(format!("edge {e} has relation exponent {x} < 1")));
        }
        Ok(LocalRingPresentation { exponents })
    }

    pub fn describe(&self) -> String {
        if self.exponents.is_empty() {
            return "k".to_string();
        }
        let vars: Vec<String> = self.exponents.keys().map(|e| format!("l_{e}")).collect();
        let rels: Vec<String> = self
            .exponents
            .iter()
            .map(|(e, x)| if *x == 1 { format!("l_{e}") } else { format!("l_{e}^{x}") })
            .collect();
        format!("k[[{}]]/({})", vars.join(", "), rels.join(", "))
    }

    /// True when every relation is linear, i.e. the ring is the reduced point.
    pub fn is_reduced(&self) -> bool {
        self.exponents.values().all(|&x| x == 1)
    }
}

/// `k^{b1}`, computed as `k^{#E - #V_out}` and checked against `b1`.
pub fn fibre_count(stratum: &DecoratedStratum) -> Result<u64> {
    let g = &stratum.graph;
    let e = g.num_edges();
    let out = stratum.num_outlying();
    if e + 1 < out + 1 || e - out != g.betti1() {
        return Err(DrcError::invariant(format!(
            "#E - #V_out = {} differs from b1 = {}",
            e as i64 - out as i64,
            g.betti1()
        )));
    }
    (stratum.twist.k() as u64)
        .checked_pow((e - out) as u32)
        .ok_or_else(|| DrcError::guard("fibre count", u64::MAX as usize, 0))
}

pub fn local_ring(stratum: &DecoratedStratum) -> Result<LocalRingPresentation> {
    let divided = stratum.twist.divided()?;
    let ids = stratum.graph.edges().into_iter().map(|e| e.id());
    LocalRingPresentation::new(ids.zip(divided).collect())
}

/// `∏ I'(e)`, with an overflow guard.
pub fn local_ring_length(p: &LocalRingPresentation) -> Result<u64> {
    p.exponents.values().try_fold(1u64, |acc, &x| {
        acc.checked_mul(x as u64)
            .ok_or_else(|| DrcError::guard("local ring length", u64::MAX as usize, acc as usize))
    })
}

/// Counts the standard monomials `∏ ℓ_e^{a_e}` with `0 <= a_e < I'(e)` one
/// by one. Used as an oracle for [`local_ring_length`].
pub fn standard_monomial_count(exponents: &[i64]) -> u64 {
    let mut a = vec![0i64; exponents.len()];
    let mut count = 0u64;
    if exponents.iter().any(|&x| x < 1) {
        return 0;
    }
    loop {
        count += 1;
        let mut i = 0;
        loop {
            if i == a.len() {
                return count;
            }
            a[i] += 1;
            if a[i] < exponents[i] {
                break;
            }
            a[i] = 0;
            i += 1;
        }
    }
}

/// Fibre count times length, which must equal the stratum weight.
pub fn drc_multiplicity(stratum: &DecoratedStratum) -> Result<Rational> {
    let fibre = fibre_count(stratum)?;
    let length = local_ring_length(&local_ring(stratum)?)?;
    let product = rational::int(fibre as i64) * rational::int(length as i64);
    if product != stratum.weight {
        return Err(DrcError::invariant(format!(
            "multiplicity {} x {} = {} differs from weight {} for stratum {}",
            fibre,
            length,
            rational::to_text(&product),
            rational::to_text(&stratum.weight),
            stratum.key
        )));
    }
    Ok(product)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangentReport {
    pub dim_drl: i64,
    pub n_thick_edges: usize,
    pub dim_tangent: i64,
    pub coker_dim: usize,
    pub v1_set: Vec<usize>,
    pub vgt1_set: Vec<usize>,
}

/// Outlying vertices all of whose edges have `I' > 1`.
pub fn tangent_kernel_basis_labels(stratum: &DecoratedStratum) -> Result<Vec<usize>> {
    Ok(partition(stratum)?.1)
}

fn partition(stratum: &DecoratedStratum) -> Result<(Vec<usize>, Vec<usize>)> {
    let g = &stratum.graph;
    let divided = stratum.twist.divided()?;
    let mut v1 = Vec::new();
    let mut vgt1 = Vec::new();
    for &v in &stratum.twist.star.outlying {
        let thin = stratum
            .twist
            .outlying_halves
            .iter()
            .zip(&divided)
            .any(|(&h, &x)| g.vertex_of(h) == v && x == 1);
        if thin {
            v1.push(v);
        } else {
            vgt1.push(v);
        }
    }
    Ok((v1, vgt1))
}

pub fn tangent_report(stratum: &DecoratedStratum, g: u32, n: usize) -> Result<TangentReport> {
    let graph = &stratum.graph;
    if graph.genus() != g || graph.num_legs() != n {
        return Err(DrcError::input(format!(
            "stratum has genus {} with {} legs, not ({g}, {n})",
            graph.genus(),
            graph.num_legs()
        )));
    }
    let (g, n) = (g as i64, n as i64);
    let divided = stratum.twist.divided()?;
    let thick = divided.iter().filter(|&&x| x > 1).count();
    let (v1, vgt1) = partition(stratum)?;
    let e = graph.num_edges() as i64;
    let v = graph.num_vertices() as i64;
    let dim_drl = 2 * g - 3 + n;
    let lhs = (3 * g - 3 + n - e) + (1 - v + e) + thick as i64 + v1.len() as i64 + vgt1.len() as i64 - g;
    let rhs = dim_drl + thick as i64;
    if lhs != rhs {
        return Err(DrcError::invariant(format!(
            "tangent bookkeeping {lhs} != {rhs} for stratum {}",
            stratum.key
        )));
    }
    if v1.len() + vgt1.len() != stratum.num_outlying() {
        return Err(DrcError::invariant("V^1 and V^>1 do not partition V_out"));
    }
    Ok(TangentReport {
        dim_drl,
        n_thick_edges: thick,
        dim_tangent: rhs,
        coker_dim: vgt1.len(),
        v1_set: v1,
        vgt1_set: vgt1,
    })
}

/// Everything above for one stratum, with all identities asserted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DrlReport {
    pub fibre_count: u64,
    pub local_ring: LocalRingPresentation,
    pub length: u64,
    #[serde(with = "rational::serde_text")]
    pub multiplicity: Rational,
    pub tangent: TangentReport,
}

pub fn drl_report(stratum: &DecoratedStratum) -> Result<DrlReport> {
    let ring = local_ring(stratum)?;
    let length = local_ring_length(&ring)?;
    let g = &stratum.graph;
    Ok(DrlReport {
        fibre_count: fibre_count(stratum)?,
        multiplicity: drc_multiplicity(stratum)?,
        tangent: tangent_report(stratum, g.genus(), g.num_legs())?,
        local_ring: ring,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::{GraphBuilder, LegWeighting, Limits, StableGraph};
    use crate::twist::enumerate_positive_twists;

    fn strata_of(g: StableGraph, w: LegWeighting) -> Vec<DecoratedStratum> {
        enumerate_positive_twists(&g, &w, &Limits::default())
            .unwrap()
            .twists
            .into_iter()
            .map(|t| DecoratedStratum::new(g.clone(), w.clone(), t, &Limits::default()).unwrap())
            .collect()
    }

    fn figure_one_stratum() -> DecoratedStratum {
        strata_of(figure_one().0, figure_one_weighting())
            .into_iter()
            .find(|s| s.twist.edge_values() == vec![3, 3, 6])
            .unwrap()
    }

    #[test]
    fn figure_one_report() {
        let s = figure_one_stratum();
        let r = drl_report(&s).unwrap();
        assert_eq!(r.fibre_count, 3);
        let mut ex: Vec<i64> = r.local_ring.exponents.values().copied().collect();
        ex.sort();
        assert_eq!(ex, vec![1, 1, 2]);
        assert_eq!(r.length, 2);
        assert_eq!(r.multiplicity, rational::int(6));
        assert_eq!(r.tangent.n_thick_edges, 1);
        assert_eq!(r.tangent.dim_tangent, 10);
        assert_eq!(r.tangent.coker_dim, 0);
        assert_eq!(r.tangent.v1_set, vec![1, 2]);
        assert!(tangent_kernel_basis_labels(&s).unwrap().is_empty());
    }

    #[test]
    fn two_thick_edges_give_cokernel() {
        // one outlying genus-1 vertex, two edges with I' = 2 each, k = 1
        let g = banana(0, 1, 2, 2);
        let w = LegWeighting::new(1, vec![-3, 5]);
        let ss = strata_of(g, w);
        let s = ss.iter().find(|s| s.twist.edge_values() == vec![2, 2]);
        assert!(s.is_none(), "can(v) = 2 allows only (1,1)");
        let g = banana(0, 3, 2, 2);
        let w = LegWeighting::new(1, vec![-3, 9]);
        let ss = strata_of(g, w);
        let s = ss.iter().find(|s| s.twist.edge_values() == vec![3, 3]).unwrap();
        let r = tangent_report(s, 4, 2).unwrap();
        assert_eq!(r.coker_dim, 1);
        assert_eq!(r.vgt1_set, vec![1]);
        let s = ss.iter().find(|s| s.twist.edge_values() == vec![1, 5]).unwrap();
        assert!(tangent_kernel_basis_labels(s).unwrap().is_empty());
    }

    #[test]
    fn fibre_counts() {
        let g = banana(0, 1, 3, 2);
        let w = LegWeighting::new(2, vec![-2, 10]);
        for s in strata_of(g, w) {
            assert_eq!(fibre_count(&s).unwrap(), 4);
        }
        let mut b = GraphBuilder::new();
        let c = b.vertex(0);
        let v = b.vertex(1);
        b.leg(c, 1);
        b.leg(c, 2);
        b.edge(c, v);
        let s = strata_of(b.build().unwrap(), LegWeighting::new(1, vec![-1, 1]));
        assert_eq!(fibre_count(&s[0]).unwrap(), 1);
        assert_eq!(drc_multiplicity(&s[0]).unwrap(), rational::int(1));
        assert!(local_ring(&s[0]).unwrap().is_reduced());
    }

    #[test]
    fn lengths() {
        let p = LocalRingPresentation::new(BTreeMap::from([(0, 2), (2, 3)])).unwrap();
        assert_eq!(local_ring_length(&p).unwrap(), 6);
        assert_eq!(standard_monomial_count(&[2, 3]), 6);
        assert_eq!(standard_monomial_count(&[1, 1, 2]), 2);
        assert_eq!(standard_monomial_count(&[]), 1);
        let p = LocalRingPresentation::new(BTreeMap::from([(0, 5)])).unwrap();
        assert_eq!(p.describe(), "k[[l_0]]/(l_0^5)");
        assert!(LocalRingPresentation::new(BTreeMap::from([(0, 0)])).is_err());
        let huge = LocalRingPresentation::new((0..5).map(|e| (e, i64::MAX / 2)).collect()).unwrap();
        assert!(matches!(local_ring_length(&huge), Err(DrcError::Guard { .. })));
    }

    #[test]
    fn mixed_twist_multiplicity() {
        // twists (k, 2k) on two edges: k^1 x 2 = 2k
        for k in 1..=3u32 {
            let mut b = GraphBuilder::new();
            let c = b.vertex(0);
            let v = b.vertex(2);
            b.leg(c, 1);
            b.leg(c, 2);
            b.leg(v, 3);
            b.edge(c, v);
            b.edge(c, v);
            let g = b.build().unwrap();
            let ki = k as i64;
            let w = LegWeighting::new(k, vec![-1, 3 * ki + 1, ki]);
            let ss = strata_of(g, w);
            let s = ss.iter().find(|s| s.twist.edge_values() == vec![ki, 2 * ki]).unwrap();
            assert_eq!(drc_multiplicity(s).unwrap(), rational::int(2 * ki));
        }
    }
}
