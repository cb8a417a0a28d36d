//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use drc_core::archive::{parse_archive, run_enumerate, RunConfig};
use drc_core::drl::{drl_report, local_ring_length, standard_monomial_count, tangent_report, LocalRingPresentation};
use drc_core::graph::fixtures::{figure_one, figure_one_weighting};
use drc_core::graph::{GraphBuilder, Limits, StarShape};
use drc_core::iso::canonical_form;
use drc_core::rational::{self, frac, int, Rational};
use drc_core::residue::{
    k_residue, k_residue_with_leading_root, leading_coefficient, residue, root_sum_experiment, step1_closed_form,
    step1_differential, KDifferential0, Point,
};
use drc_core::strata::{enumerate_strata, DecoratedStratum, StrataConfig};
use drc_core::sweep::{sweep_inputs, SweepRanges};
use drc_core::toric::{delta, flow_add, lci_witness_check, ToricChart};
use drc_core::twist::Twist;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    check(t < limit, format!("took {t:.2?}, limit {limit:?}"))
}

fn figure_one_twist() -> Twist {
    let (g, [o1, o2, o3]) = figure_one();
    let w = figure_one_weighting();
    let mut values = vec![0; g.num_half_edges()];
    for (h, mk) in g.legs() {
        values[h] = w.weight(mk);
    }
    for (o, x) in [(o1, 3), (o2, 3), (o3, 6)] {
        values[o] = x;
        values[g.pair(o)] = -x;
    }
    Twist::new(3, values)
}

fn figure_one_config() -> RunConfig {
    RunConfig::new(4, Some(4), 3, vec![-2, 5, 3, 12], StrataConfig::default()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let d = enumerate_strata(4, &[-2, 5, 3, 12], 3, &StrataConfig::default()).map_err(|e| e.to_string())?;
    let (g, _) = figure_one();
    let key = canonical_form(&g, &figure_one_weighting(), Some(&figure_one_twist().values), &Limits::default())
        .map_err(|e| e.to_string())?;
    let s = d
        .strata
        .iter()
        .find(|s| s.key == key)
        .ok_or("no enumerated stratum is isomorphic to Figure 1")?;
    check(s.twist_multiset() == vec![3, 3, 6], format!("twist multiset {:?}", s.twist_multiset()))?;
    check(s.weight == int(6), format!("weight {}", s.weight))?;
    let r = drl_report(s).map_err(|e| e.to_string())?;
    let mut exps: Vec<i64> = r.local_ring.exponents.values().copied().collect();
    exps.sort_unstable();
    check(r.fibre_count == 3, format!("fibre count {}", r.fibre_count))?;
    check(exps == vec![1, 1, 2], format!("exponents {exps:?}"))?;
    check(r.length == 2, format!("length {}", r.length))?;
    check(int((r.fibre_count * r.length) as i64) == s.weight, "fibre x length != weight")?;
    within(start, Duration::from_secs(5))?;
    Ok(format!(
        "weight 6, fibre 3, exponents {{1,1,2}}, length 2, 3x2 = 6 ({:.2?})",
        start.elapsed()
    ))
}

fn sweep_strata() -> Result<Vec<(u32, usize, DecoratedStratum)>, String> {
    let ranges = SweepRanges {
        max_g: 4,
        max_n: 4,
        ks: vec![1, 2, 3],
        max_abs_m: 6,
        max_chart_edges: 0,
    };
    let per_input = sweep_inputs(&ranges)
        .par_iter()
        .map(|(g, k, m)| {
            enumerate_strata(*g, m, *k, &StrataConfig::default())
                .map(|d| d.strata.into_iter().map(|s| (*g, m.len(), s)).collect::<Vec<_>>())
                .map_err(|e| format!("({g}, {m:?}, {k}): {e}"))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(per_input.into_iter().flatten().collect())
}

fn criterion_2(strata: &[(u32, usize, DecoratedStratum)], enum_time: Duration) -> Outcome {
    let start = Instant::now();
    let failures: Vec<String> = strata
        .par_iter()
        .filter_map(|(_, _, s)| {
            let k = int(s.twist.k() as i64);
            let divided = s.twist.divided().ok()?;
            let prod_div = divided.iter().fold(Rational::one(), |a, &x| a * int(x));
            let prod = s.twist.edge_values().iter().fold(Rational::one(), |a, &x| a * int(x));
            let lhs = rational::pow(&k, s.graph.betti1() as i64) * prod_div;
            let rhs = prod / rational::pow(&k, s.graph.num_vertices() as i64 - 1);
            (lhs != rhs || rhs != s.weight).then(|| s.key.to_string())
        })
        .collect();
    check(failures.is_empty(), format!("{} failures, first {:?}", failures.len(), failures.first()))?;
    check(strata.len() >= 200, format!("only {} strata", strata.len()))?;
    let total = enum_time + start.elapsed();
    check(total < Duration::from_secs(60), format!("took {total:.2?}"))?;
    Ok(format!("{} strata, 0 failures ({total:.2?})", strata.len()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut done = 0;
    while done < 500 {
        let len = rng.gen_range(1..=6);
        let mut exps = Vec::new();
        let mut prod = 1i64;
        for _ in 0..len {
            let cap = 10_000 / prod;
            if cap < 1 {
                break;
            }
            let x = rng.gen_range(1..=cap.min(60));
            prod *= x;
            exps.push(x);
        }
        let map: BTreeMap<usize, i64> = exps.iter().enumerate().map(|(i, &x)| (i, x)).collect();
        let p = LocalRingPresentation::new(map).map_err(|e| e.to_string())?;
        let l = local_ring_length(&p).map_err(|e| e.to_string())?;
        let b = standard_monomial_count(&exps);
        check(l == b, format!("exponents {exps:?}: length {l}, brute force {b}"))?;
        done += 1;
    }
    Ok("500 random exponent vectors agree with the standard-monomial count".into())
}

fn criterion_4(strata: &[(u32, usize, DecoratedStratum)]) -> Outcome {
    let failures: Vec<String> = strata
        .par_iter()
        .filter_map(|(g, n, s)| {
            let t = match tangent_report(s, *g, *n) {
                Ok(t) => t,
                Err(e) => return Some(format!("{}: {e}", s.key)),
            };
            let divided = s.twist.divided().ok()?;
            let thick = divided.iter().filter(|&&x| x > 1).count() as i64;
            let (g, n) = (*g as i64, *n as i64);
            let e = s.graph.num_edges() as i64;
            let v = s.graph.num_vertices() as i64;
            let vgt1 = s
                .twist
                .star
                .outlying
                .iter()
                .filter(|&&w| {
                    s.twist
                        .outlying_halves
                        .iter()
                        .zip(&divided)
                        .filter(|(&h, _)| s.graph.vertex_of(h) == w)
                        .all(|(_, &x)| x > 1)
                })
                .count() as i64;
            let v1 = s.num_outlying() as i64 - vgt1;
            let lhs = (3 * g - 3 + n - e) + (1 - v + e) + thick + v1 + vgt1 - g;
            let rhs = (2 * g - 3 + n) + thick;
            (lhs != rhs || t.coker_dim as i64 != vgt1 || t.dim_tangent != rhs)
                .then(|| format!("{}: {lhs} vs {rhs}, coker {} vs {vgt1}", s.key, t.coker_dim))
        })
        .collect();
    check(failures.is_empty(), format!("{} failures, first {:?}", failures.len(), failures.first()))?;
    Ok(format!("identity and coker_dim hold on {} strata", strata.len()))
}

/// Nondecreasing lists of length `len` over `1..=max`.
fn multisets(len: usize, max: i64) -> Vec<Vec<i64>> {
    fn rec(len: usize, lo: i64, max: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for x in lo..=max {
            cur.push(x);
            rec(len, x, max, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, 1, max, &mut Vec::new(), &mut out);
    out
}

/// Every star with up to three outlying vertices of up to three edges each
/// and divided twists in `1..=4`, up to permuting parallel edges and equal
/// outlying vertices.
fn toric_cases() -> Vec<Vec<Vec<i64>>> {
    let mut vertex_options: Vec<Vec<i64>> = Vec::new();
    for e in 1..=3 {
        vertex_options.extend(multisets(e, 4));
    }
    let mut out = Vec::new();
    let n = vertex_options.len();
    for r in 1..=3usize {
        // nondecreasing index tuples
        let mut idx = vec![0usize; r];
        loop {
            out.push(idx.iter().map(|&i| vertex_options[i].clone()).collect());
            let mut j = r;
            while j > 0 && idx[j - 1] == n - 1 {
                j -= 1;
            }
            if j == 0 {
                break;
            }
            idx[j - 1] += 1;
            let v = idx[j - 1];
            for x in idx.iter_mut().skip(j) {
                *x = v;
            }
        }
    }
    out
}

fn toric_case(vertices: &[Vec<i64>]) -> Result<(), String> {
    let k = 2i64;
    let mut b = GraphBuilder::new();
    let c = b.vertex(0);
    b.leg(c, 1);
    let mut halves = Vec::new();
    let mut outlying = Vec::new();
    for vals in vertices {
        let v = b.vertex(1);
        outlying.push(v);
        for &x in vals {
            let (hc, ho) = b.edge(c, v);
            halves.push((hc, ho, x));
        }
    }
    let graph = b.build().map_err(|e| e.to_string())?;
    let mut values = vec![0; graph.num_half_edges()];
    for (hc, ho, x) in halves {
        values[ho] = k * x;
        values[hc] = -k * x;
    }
    let twist = Twist::new(k as u32, values);
    let star = StarShape { center: c, outlying };
    let limits = Limits::default();
    let w = lci_witness_check(&graph, &star, &twist, &limits).map_err(|e| e.to_string())?;
    check(w.iter().all(|r| r.holds), format!("witness failed for {vertices:?}"))?;
    let chart = ToricChart::new(&graph, &twist, true, c, &limits).map_err(|e| e.to_string())?;
    for i in 0..chart.cycles.len() {
        let j = chart.inverse_of(i);
        let eq = chart.psi_equation(&flow_add(&delta(i), &delta(j), 1));
        let want = flow_add(&delta(i), &delta(j), 1);
        let lhs_ok = eq.lhs.iter().all(|(v, e)| matches!(v, drc_core::laurent::Var::Cycle(x) if want.get(&x) == Some(&e)))
            && eq.lhs.iter().count() == want.len();
        check(lhs_ok && eq.rhs.is_one(), format!("{vertices:?}: cycle {i} gives {}", eq.display()))?;
    }
    let free = chart.independent_cycle_variables().map_err(|e| e.to_string())?;
    check(free == graph.betti1(), format!("{vertices:?}: {free} free a_g, b1 = {}", graph.betti1()))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let cases = toric_cases();
    cases.par_iter().map(|c| toric_case(c)).collect::<Result<Vec<()>, String>>()?;
    within(start, Duration::from_secs(120))?;
    Ok(format!("{} star twists: witnesses hold, inverse pairs give a_g a_i(g) = 1, free a_g = b1 ({:.2?})", cases.len(), start.elapsed()))
}

fn random_rational(rng: &mut ChaCha8Rng, nonzero: bool) -> Rational {
    loop {
        let p: i64 = rng.gen_range(-20..=20);
        let q: i64 = rng.gen_range(1..=9);
        if !(nonzero && p == 0) {
            return frac(p, q);
        }
    }
}

fn distinct_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    while out.len() < n {
        let x = random_rational(rng, false);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // (a) residue theorem for k = 1
    for trial in 0..200 {
        let n = rng.gen_range(1..=5);
        let locs = distinct_points(&mut rng, n);
        let factors: Vec<(Rational, i64)> = locs.into_iter().map(|b| (b, rng.gen_range(-3..=2))).collect();
        let w = KDifferential0::new(1, random_rational(&mut rng, true), factors).map_err(|e| e.to_string())?;
        let poles: Vec<Point> = w.divisor().into_iter().filter(|(_, m)| *m < 0).map(|(p, _)| p).collect();
        check(poles.len() <= 6, "too many poles")?;
        let mut sum = Rational::zero();
        for p in &poles {
            sum += residue(&w, p).map_err(|e| e.to_string())?.value;
        }
        check(sum.is_zero(), format!("trial {trial}: residues sum to {sum}"))?;
    }
    // (b) closed form against extraction
    let mut triples = 0;
    for k in 1..=4u32 {
        for t in 1..=4i64 {
            let m1 = -(k as i64) * t;
            for m2 in -9..=9i64 {
                if m2 >= 0 && m2 % k as i64 == 0 {
                    continue;
                }
                let w = step1_differential(k, m1, m2).map_err(|e| e.to_string())?;
                let ext = k_residue(&w, &Point::Finite(int(0))).map_err(|e| e.to_string())?.value;
                let cf = step1_closed_form(k, m1, m2).map_err(|e| e.to_string())?;
                check(ext == cf, format!("(k, m1, m2) = ({k}, {m1}, {m2}): {ext} vs {cf}"))?;
                triples += 1;
            }
        }
    }
    let quarter = step1_closed_form(2, -4, -1).map_err(|e| e.to_string())?;
    check(quarter == frac(1, 4), format!("Res^2 for (2, -4, -1) is {quarter}"))?;
    // (c) root choice and affine changes
    let mut changes = 0;
    while changes < 50 {
        let k: u32 = rng.gen_range(2..=4);
        let others = rng.gen_range(1..=3);
        let locs = distinct_points(&mut rng, others + 1);
        let mut factors: Vec<(Rational, i64)> = vec![(locs[0].clone(), -(k as i64) * rng.gen_range(1..=3))];
        for b in &locs[1..] {
            factors.push((b.clone(), rng.gen_range(-4..=4)));
        }
        let mut w = KDifferential0::new(k, random_rational(&mut rng, true), factors).map_err(|e| e.to_string())?;
        let p = Point::Finite(locs[0].clone());
        // rescale so the leading coefficient is a k-th power q^k
        let q = random_rational(&mut rng, true);
        let c = leading_coefficient(&w, &p);
        w.scalar = &w.scalar / &c * rational::pow(&q, k as i64);
        let base = k_residue(&w, &p).map_err(|e| e.to_string())?.value;
        let roots = if k.is_multiple_of(2) { vec![q.clone(), -q.clone()] } else { vec![q.clone()] };
        for r in roots {
            let v = k_residue_with_leading_root(&w, &p, &r).map_err(|e| e.to_string())?;
            check(v == base, format!("root choice changes Res^k: {v} vs {base}"))?;
        }
        let a = random_rational(&mut rng, true);
        let shift = random_rational(&mut rng, false);
        let moved = w.affine_pullback(&a, &shift).map_err(|e| e.to_string())?;
        let p2 = Point::Finite((&locs[0] - &shift) / &a);
        let v = k_residue(&moved, &p2).map_err(|e| e.to_string())?.value;
        check(v == base, format!("affine change z = {a} z' + {shift}: {v} vs {base}"))?;
        changes += 1;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "200 residue sums vanish, {triples} closed-form triples match, Res^2(2,-4,-1) = 1/4, 50 affine changes invariant ({:.2?})",
        start.elapsed()
    ))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let grid: &[(u32, &[i64])] = &[
        (1, &[-2, -1, 1]),
        (1, &[-1, -1, -1, 1]),
        (1, &[-3, -1, 2]),
        (2, &[-4, -1, 1]),
        (2, &[-2, -2, -1, 1]),
        (2, &[-4, -2, 1, 1]),
        (2, &[-2, -3, 1]),
        (3, &[-3, -3, -1, 1]),
        (3, &[-6, -1, 1]),
        (3, &[-3, -2, -1]),
        (4, &[-4, -4, -1, 1]),
    ];
    let mut subsets = 0;
    let mut choices_checked = 0usize;
    for (i, (k, m)) in grid.iter().enumerate() {
        let r = root_sum_experiment(*k, m, None, 200, 700 + i as u64, 1_000_000).map_err(|e| e.to_string())?;
        for s in r.subsets.iter().filter(|s| s.proper) {
            check(
                s.zero_trials == 0,
                format!("k = {k}, stratum {m:?}, subset {:?}: {} trials with a vanishing sum", s.subset, s.zero_trials),
            )?;
            check(
                s.undecided_trials == 0,
                format!("k = {k}, stratum {m:?}, subset {:?}: {} undecided trials", s.subset, s.undecided_trials),
            )?;
            subsets += 1;
            choices_checked += s.trials * (*k as usize).pow(s.subset.len() as u32 - 1);
        }
    }
    Ok(format!(
        "{} strata, {subsets} proper subsets, {choices_checked} root choices, no vanishing sum ({:.2?})",
        grid.len(),
        start.elapsed()
    ))
}

fn criterion_8() -> Outcome {
    let (a, _) = run_enumerate(&figure_one_config()).map_err(|e| e.to_string())?;
    let (b, _) = run_enumerate(&figure_one_config()).map_err(|e| e.to_string())?;
    let (ja, jb) = (a.to_json(), b.to_json());
    check(ja == jb, "reruns produced different archives")?;
    let parsed = parse_archive(ja.as_bytes(), &Limits::default()).map_err(|e| e.to_string())?;
    check(parsed == a, "parsed archive differs")?;
    check(parsed.to_json() == ja, "serialize after parse is not byte-identical")?;
    Ok(format!("{} bytes, byte-identical rerun and round trip", ja.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, r: Outcome| match r {
        Ok(msg) => println!("criterion {n} [{name}]: PASS - {msg}"),
        Err(msg) => {
            failed += 1;
            println!("criterion {n} [{name}]: FAIL - {msg}");
        }
    };
    report(1, "figure one", criterion_1());
    let start = Instant::now();
    let strata = sweep_strata();
    let enum_time = start.elapsed();
    match strata {
        Ok(strata) => {
            report(2, "multiplicity sweep", criterion_2(&strata, enum_time));
            report(3, "length oracle", criterion_3());
            report(4, "tangent bookkeeping", criterion_4(&strata));
        }
        Err(e) => {
            report(2, "multiplicity sweep", Err(e.clone()));
            report(3, "length oracle", criterion_3());
            report(4, "tangent bookkeeping", Err(e));
        }
    }
    report(5, "toric charts", criterion_5());
    report(6, "residues", criterion_6());
    report(7, "root sums", criterion_7());
    report(8, "determinism", criterion_8());
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
