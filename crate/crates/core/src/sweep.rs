//! Property sweeps: every GENERIC input in a range is enumerated and each
//! stratum goes through the full invariant suite.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::drl::{drl_report, local_ring_length, standard_monomial_count};
use crate::error::{DrcError, Result};
use crate::graph::is_simple_star;
use crate::strata::{classify_case, enumerate_strata, required_sum, CaseTag, DecoratedStratum, StrataConfig};
use crate::toric::{lci_witness_check, ToricChart};
use crate::twist::validate_twist;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRanges {
    pub max_g: u32,
    pub max_n: usize,
    pub ks: Vec<u32>,
    pub max_abs_m: i64,
    /// Toric checks are skipped on strata with more edges than this.
    pub max_chart_edges: usize,
}

impl Default for SweepRanges {
    fn default() -> Self {
        SweepRanges {
            max_g: 3,
            max_n: 3,
            ks: vec![1, 2],
            max_abs_m: 4,
            max_chart_edges: 6,
        }
    }
}

/// Test-only fault injection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FaultInjection {
    /// Shift one outlying twist value on the first boundary stratum of each input.
    pub corrupt_twist: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub g: u32,
    pub k: u32,
    pub m: Vec<i64>,
    pub stratum: String,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub g: u32,
    pub n: usize,
    pub k: u32,
    pub inputs: usize,
    pub strata: usize,
    pub checks: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub total_strata: usize,
    pub total_checks: usize,
    pub violations: Vec<Violation>,
}

impl SweepReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:>3} {:>3} {:>3} {:>7} {:>7} {:>8} {:>10}\n", "g", "n", "k", "inputs", "strata", "checks", "violations");
        for r in &self.rows {
            out.push_str(&format!(
                "{:>3} {:>3} {:>3} {:>7} {:>7} {:>8} {:>10}\n",
                r.g, r.n, r.k, r.inputs, r.strata, r.checks, r.violations
            ));
        }
        out.push_str(&format!(
            "total: {} strata, {} checks, {} violations\n",
            self.total_strata,
            self.total_checks,
            self.violations.len()
        ));
        out
    }
}

/// Nondecreasing weight vectors of length `n` with entries in
/// `[-bound, bound]` summing to `total`.
pub fn sorted_weightings(n: usize, bound: i64, total: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, lo: i64, bound: i64, total: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if n == 0 {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in lo..=bound {
            // remaining entries are all >= x
            if x * n as i64 > total || bound * (n as i64 - 1) + x < total {
                continue;
            }
            cur.push(x);
            rec(n - 1, x, bound, total - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, -bound, bound, total, &mut Vec::new(), &mut out);
    out
}

/// Every GENERIC `(g, k, m)` in the range, ordered.
pub fn sweep_inputs(r: &SweepRanges) -> Vec<(u32, u32, Vec<i64>)> {
    let mut out = Vec::new();
    for g in 0..=r.max_g {
        for n in 1..=r.max_n {
            if 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            for &k in &r.ks {
                if k == 0 {
                    continue;
                }
                for m in sorted_weightings(n, r.max_abs_m, required_sum(g, k)) {
                    if classify_case(g, &m, k).ok() == Some(CaseTag::Generic) {
                        out.push((g, k, m));
                    }
                }
            }
        }
    }
    out
}

struct Outcome {
    strata: usize,
    checks: usize,
    violations: Vec<Violation>,
}

/// Runs the invariant suite on one stratum; returns the number of checks.
pub fn check_stratum(s: &DecoratedStratum, max_chart_edges: usize, config: &StrataConfig) -> std::result::Result<usize, (String, String)> {
    let mut checks = 0;
    let mut expect = |ok: bool, name: &str, detail: String| {
        checks += 1;
        if ok {
            Ok(())
        } else {
            Err((name.to_string(), detail))
        }
    };
    let twist_report = validate_twist(&s.graph, &s.weighting, &s.twist.twist);
    expect(twist_report.is_valid(), "twist_validity", format!("{:?}", twist_report.issues))?;
    expect(is_simple_star(&s.graph, &s.weighting).is_some(), "simple_star", String::new())?;
    let report = drl_report(s).map_err(|e| ("drl_report".to_string(), e.to_string()))?;
    expect(report.multiplicity == s.weight, "multiplicity", format!("{} vs {}", report.multiplicity, s.weight))?;
    let exps: Vec<i64> = report.local_ring.exponents.values().copied().collect();
    let length = local_ring_length(&report.local_ring).map_err(|e| ("length".to_string(), e.to_string()))?;
    expect(length == standard_monomial_count(&exps), "length_oracle", format!("{length}"))?;
    // definitional V^{>1}: every incident edge has I' > 1
    let divided = s.twist.divided().map_err(|e| ("divided".to_string(), e.to_string()))?;
    let vgt1 = s
        .twist
        .star
        .outlying
        .iter()
        .filter(|&&v| {
            s.twist
                .outlying_halves
                .iter()
                .zip(&divided)
                .filter(|(&h, _)| s.graph.vertex_of(h) == v)
                .all(|(_, &x)| x > 1)
        })
        .count();
    expect(report.tangent.coker_dim == vgt1, "coker_dim", format!("{} vs {vgt1}", report.tangent.coker_dim))?;
    for l in s.vertex_labels.iter().filter(|l| l.vertex != s.twist.star.center) {
        let sum: i64 = l.signature.iter().sum();
        expect(
            l.signature.iter().all(|&x| x >= 0) && sum == 2 * l.genus as i64 - 2,
            "outlying_signature",
            format!("vertex {} signature {:?}", l.vertex, l.signature),
        )?;
    }
    if s.graph.num_edges() <= max_chart_edges && !s.interior {
        let limits = &config.limits;
        let chart = ToricChart::new(&s.graph, &s.twist.twist, true, s.twist.star.center, limits)
            .map_err(|e| ("chart".to_string(), e.to_string()))?;
        let free = chart
            .independent_cycle_variables()
            .map_err(|e| ("chart".to_string(), e.to_string()))?;
        expect(free == s.graph.betti1(), "independent_cycles", format!("{free} vs b1 {}", s.graph.betti1()))?;
        let w = lci_witness_check(&s.graph, &s.twist.star, &s.twist.twist, limits)
            .map_err(|e| ("lci_witness".to_string(), e.to_string()))?;
        expect(w.iter().all(|r| r.holds), "lci_witness", format!("{w:?}"))?;
    }
    Ok(checks)
}

fn run_input(g: u32, k: u32, m: &[i64], r: &SweepRanges, config: &StrataConfig, fault: FaultInjection) -> Result<Outcome> {
    let d = enumerate_strata(g, m, k, config)?;
    let mut out = Outcome {
        strata: d.strata.len(),
        checks: 0,
        violations: Vec::new(),
    };
    let mut corrupted = false;
    for s in &d.strata {
        let mut s = s.clone();
        if fault.corrupt_twist && !s.interior && !corrupted {
            let h = s.twist.outlying_halves[0];
            s.twist.twist.values[h] += k as i64;
            corrupted = true;
        }
        match check_stratum(&s, r.max_chart_edges, config) {
            Ok(c) => out.checks += c,
            Err((check, detail)) => {
                out.checks += 1;
                out.violations.push(Violation {
                    g,
                    k,
                    m: m.to_vec(),
                    stratum: s.key.0.clone(),
                    check,
                    detail,
                })
            }
        }
    }
    Ok(out)
}

/// Enumerates every GENERIC input in `ranges` and checks every stratum.
pub fn run_sweep(ranges: &SweepRanges, config: &StrataConfig, fault: FaultInjection) -> Result<SweepReport> {
    if ranges.max_g > config.max_genus {
        return Err(DrcError::guard("sweep genus", config.max_genus as usize, ranges.max_g as usize));
    }
    if ranges.max_n > config.max_legs {
        return Err(DrcError::guard("sweep legs", config.max_legs, ranges.max_n));
    }
    let inputs = sweep_inputs(ranges);
    let outcomes = inputs
        .par_iter()
        .map(|(g, k, m)| run_input(*g, *k, m, ranges, config, fault))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: BTreeMap<(u32, usize, u32), SweepRow> = BTreeMap::new();
    let mut report = SweepReport::default();
    for ((g, k, m), o) in inputs.iter().zip(outcomes) {
        let row = rows.entry((*g, m.len(), *k)).or_insert_with(|| SweepRow {
            g: *g,
            n: m.len(),
            k: *k,
            ..SweepRow::default()
        });
        row.inputs += 1;
        row.strata += o.strata;
        row.checks += o.checks;
        row.violations += o.violations.len();
        report.total_strata += o.strata;
        report.total_checks += o.checks;
        report.violations.extend(o.violations);
    }
    report.rows = rows.into_values().collect();
    Ok(report)
}
