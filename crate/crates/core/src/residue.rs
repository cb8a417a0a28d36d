//! Residues and k-residues of meromorphic k-differentials on the projective
//! line, the closed form for three marked points, and the root-sum
//! experiment.
//!
//! Sign convention at infinity: with `w = 1/z` we have
//! `(dz)^k = (-1)^k w^{-2k} (dw)^k`, so `ξ = S ∏ (z - b_j)^{m_j} (dz)^k`
//! becomes `(-1)^k S w^{m_∞} ∏ (1 - b_j w)^{m_j} (dw)^k` with
//! `m_∞ = -2k - Σ m_j`. Residues at infinity are taken in `w`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};
use crate::interval::{self, Enclosure};
use crate::rational::{self, Rational};
use crate::series::{self, Expansion, LaurentSeries, PowerSeries};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Finite(Rational),
    Infinity,
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(q) => f.write_str(&rational::to_text(q)),
            Point::Infinity => f.write_str("inf"),
        }
    }
}

impl Point {
    /// `"inf"` or a rational such as `"0"`, `"-3/2"`.
    pub fn parse(s: &str) -> Result<Point> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Point::Infinity),
            t => Ok(Point::Finite(rational::parse(t)?)),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Point::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    #[serde(with = "rational::serde_text")]
    pub location: Rational,
    pub multiplicity: i64,
}

/// `scalar · ∏ (z - b_j)^{m_j} (dz)^k` on the projective line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KDifferential0 {
    pub k: u32,
    #[serde(with = "rational::serde_text")]
    pub scalar: Rational,
    pub factors: Vec<Factor>,
}

impl KDifferential0 {
    pub fn new(k: u32, scalar: Rational, factors: Vec<(Rational, i64)>) -> Result<Self> {
        if k == 0 {
            return Err(DrcError::input("k must be positive"));
        }
        if scalar.is_zero() {
            return Err(DrcError::input("scalar must be nonzero"));
        }
        let locs: BTreeSet<&Rational> = factors.iter().map(|(b, _)| b).collect();
        if locs.len() != factors.len() {
            return Err(DrcError::input("factor locations must be pairwise distinct"));
        }
        Ok(KDifferential0 {
            k,
            scalar,
            factors: factors
                .into_iter()
                .map(|(location, multiplicity)| Factor { location, multiplicity })
                .collect(),
        })
    }

    /// Parses `"0:-2,1:-1"` into factors.
    pub fn parse_factors(s: &str) -> Result<Vec<(Rational, i64)>> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (b, m) = p
                    .rsplit_once(':')
                    .ok_or_else(|| DrcError::input(format!("factor {p:?} is not location:multiplicity")))?;
                let m: i64 = m
                    .trim()
                    .parse()
                    .map_err(|_| DrcError::input(format!("bad multiplicity in {p:?}")))?;
                Ok((rational::parse(b)?, m))
            })
            .collect()
    }

    pub fn m_infinity(&self) -> i64 {
        -2 * self.k as i64 - self.factors.iter().map(|f| f.multiplicity).sum::<i64>()
    }

    pub fn order_at(&self, p: &Point) -> i64 {
        match p {
            Point::Infinity => self.m_infinity(),
            Point::Finite(b) => self
                .factors
                .iter()
                .find(|f| &f.location == b)
                .map_or(0, |f| f.multiplicity),
        }
    }

    /// Listed locations and infinity with their orders, zeros of order 0 skipped.
    pub fn divisor(&self) -> Vec<(Point, i64)> {
        let mut out: Vec<(Point, i64)> = self
            .factors
            .iter()
            .filter(|f| f.multiplicity != 0)
            .map(|f| (Point::Finite(f.location.clone()), f.multiplicity))
            .collect();
        if self.m_infinity() != 0 {
            out.push((Point::Infinity, self.m_infinity()));
        }
        out
    }

    /// `ξ/(dt)^k = c t^m U(t)` in the local coordinate at `p`, with `U(0) = 1`
    /// and `U` known to `len` terms.
    pub fn local_form(&self, p: &Point, len: usize) -> (Rational, i64, PowerSeries) {
        let mut u: PowerSeries = vec![Rational::one()];
        u.resize(len.max(1), Rational::zero());
        let mut c = self.scalar.clone();
        match p {
            Point::Infinity => {
                if self.k % 2 == 1 {
                    c = -c;
                }
                for f in &self.factors {
                    let s = series::binomial_series(&-f.location.clone(), &rational::int(f.multiplicity), len);
                    u = series::mul(&u, &s, len);
                }
                (c, self.m_infinity(), u)
            }
            Point::Finite(b) => {
                let mut m = 0;
                for f in &self.factors {
                    if &f.location == b {
                        m = f.multiplicity;
                        continue;
                    }
                    // (t + d)^m = d^m (1 + t/d)^m with d = b - b_j
                    let d = b - &f.location;
                    c *= rational::pow(&d, f.multiplicity);
                    let s = series::binomial_series(&d.recip(), &rational::int(f.multiplicity), len);
                    u = series::mul(&u, &s, len);
                }
                (c, m, u)
            }
        }
    }

    /// Laurent expansion of `ξ/(dt)^k` at `p` to `len` terms.
    pub fn laurent_series(&self, p: &Point, len: usize) -> LaurentSeries {
        let (c, m, u) = self.local_form(p, len);
        LaurentSeries {
            valuation: m,
            coeffs: u.into_iter().map(|x| x * &c).collect(),
            expansion: match p {
                Point::Finite(b) => Expansion::At(b.clone()),
                Point::Infinity => Expansion::Infinity,
            },
        }
    }

    /// The same differential in the coordinate `z'` with `z = a z' + c`.
    pub fn affine_pullback(&self, a: &Rational, c: &Rational) -> Result<Self> {
        if a.is_zero() {
            return Err(DrcError::input("affine coefficient must be nonzero"));
        }
        let total: i64 = self.factors.iter().map(|f| f.multiplicity).sum();
        let scalar = &self.scalar * rational::pow(a, total + self.k as i64);
        let factors = self
            .factors
            .iter()
            .map(|f| ((&f.location - c) / a, f.multiplicity))
            .collect();
        KDifferential0::new(self.k, scalar, factors)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueValue {
    #[serde(with = "rational::serde_text")]
    pub value: Rational,
    /// False when the point is not a pole (the value is then 0).
    pub is_pole: bool,
}

/// Ordinary residue of a 1-differential.
pub fn residue(diff: &KDifferential0, p: &Point) -> Result<ResidueValue> {
    if diff.k != 1 {
        return Err(DrcError::input("residue needs k = 1; use the k-residue"));
    }
    let m = diff.order_at(p);
    if m >= 0 {
        return Ok(ResidueValue {
            value: Rational::zero(),
            is_pole: false,
        });
    }
    let len = (-m) as usize + 1;
    let s = diff.laurent_series(p, len);
    Ok(ResidueValue {
        value: s.coeff(-1)?,
        is_pole: true,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KResidueValue {
    /// `Res^k = s^k`.
    #[serde(with = "rational::serde_text")]
    pub value: Rational,
    /// Every rational `r` with `r^k = value`.
    pub rational_roots: Vec<String>,
    /// Symbolic root when no rational root exists.
    pub symbolic_root: Option<String>,
}

/// Order at `p` and `G_N`, the coefficient of `t^N` of `U^{1/k}` with
/// `N = -m/k - 1`, together with the leading coefficient `c`.
fn root_data(diff: &KDifferential0, p: &Point) -> Result<(Rational, Rational)> {
    let k = diff.k as i64;
    let m = diff.order_at(p);
    if m >= 0 {
        return Err(DrcError::input(format!("{p} is not a pole (order {m})")));
    }
    if m % k != 0 {
        return Err(DrcError::input(format!("pole order {m} at {p} is not divisible by k = {k}")));
    }
    let n = (-m / k - 1) as usize;
    // expanded to |m| + 1 terms, more than the N + 1 needed
    let len = ((-m) as usize + 1).max(n + 1);
    let (c, _, u) = diff.local_form(p, len);
    let g = series::power(&u, &rational::frac(1, k), len)?;
    Ok((c, g[n].clone()))
}

pub fn k_residue(diff: &KDifferential0, p: &Point) -> Result<KResidueValue> {
    let (c, gn) = root_data(diff, p)?;
    let value = c * rational::pow(&gn, diff.k as i64);
    Ok(describe_k_residue(value, diff.k))
}

fn describe_k_residue(value: Rational, k: u32) -> KResidueValue {
    let roots: Vec<Rational> = match rational::rational_root(&value, k) {
        None => Vec::new(),
        Some(r) if r.is_zero() => vec![r],
        Some(r) if k.is_multiple_of(2) => vec![-r.clone(), r],
        Some(r) => vec![r],
    };
    let symbolic_root = roots
        .is_empty()
        .then(|| format!("zeta_{k}^j * ({})^(1/{k})", rational::to_text(&value)));
    KResidueValue {
        value,
        rational_roots: roots.iter().map(rational::to_text).collect(),
        symbolic_root,
    }
}

/// `Res^k` computed with a prescribed root `r` of the leading coefficient
/// (`r^k` must equal it): `(r G_N)^k`.
pub fn k_residue_with_leading_root(diff: &KDifferential0, p: &Point, root: &Rational) -> Result<Rational> {
    let (c, gn) = root_data(diff, p)?;
    if rational::pow(root, diff.k as i64) != c {
        return Err(DrcError::input("the supplied root does not match the leading coefficient"));
    }
    Ok(rational::pow(&(root * gn), diff.k as i64))
}

/// Leading coefficient of the local form at `p`.
pub fn leading_coefficient(diff: &KDifferential0, p: &Point) -> Rational {
    diff.local_form(p, 1).0
}

/// `z^{m1} (1 - z)^{m2} (dz)^k`, with the third point at infinity.
pub fn step1_differential(k: u32, m1: i64, m2: i64) -> Result<KDifferential0> {
    let scalar = if m2 % 2 == 0 { rational::int(1) } else { rational::int(-1) };
    KDifferential0::new(k, scalar, vec![(rational::int(0), m1), (rational::int(1), m2)])
}

/// `((-1)^b (m2/k)(m2/k - 1)⋯(m2/k - b + 1) / b!)^k` with `b = -m1/k - 1`:
/// the k-residue at 0 of `z^{m1}(1 - z)^{m2}(dz)^k`.
pub fn step1_closed_form(k: u32, m1: i64, m2: i64) -> Result<Rational> {
    let ki = k as i64;
    if k == 0 {
        return Err(DrcError::input("k must be positive"));
    }
    if m1 >= 0 || m1 % ki != 0 {
        return Err(DrcError::input(format!("m1 = {m1} must be negative and divisible by k = {k}")));
    }
    if m2 >= 0 && m2 % ki == 0 {
        return Err(DrcError::input(format!(
            "m2 = {m2} must be negative or not divisible by k = {k}"
        )));
    }
    let b = -m1 / ki - 1;
    let alpha = rational::frac(m2, ki);
    let mut d = Rational::one();
    for i in 0..b {
        d *= &alpha - rational::int(i);
    }
    if b % 2 == 1 {
        d = -d;
    }
    let fact: Rational = (1..=b).fold(Rational::one(), |acc, i| acc * rational::int(i));
    let value = rational::pow(&(d / fact), ki);
    if value.is_zero() {
        return Err(DrcError::invariant("closed form vanished"));
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// Root sums

/// `Φ_n` with integer coefficients, lowest degree first.
pub fn cyclotomic(n: u32) -> Vec<BigInt> {
    let mut p: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    p[0] = -BigInt::one();
    p[n as usize] = BigInt::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            p = exact_div(&p, &cyclotomic(d));
        }
    }
    p
}

fn exact_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![BigInt::zero(); r.len() - dd];
    for i in (0..q.len()).rev() {
        let c = &r[i + dd] / &den[dd];
        for (j, x) in den.iter().enumerate() {
            r[i + j] -= &c * x;
        }
        q[i] = c;
    }
    q
}

/// Remainder of `p` modulo the monic integer polynomial `m`.
fn reduce(p: &mut Vec<Rational>, m: &[BigInt]) {
    let dm = m.len() - 1;
    while p.len() > dm {
        let c = p.pop().unwrap();
        let top = p.len() - dm;
        for (j, x) in m.iter().enumerate().take(dm) {
            p[top + j] -= &c * Rational::from_integer(x.clone());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSumOutcome {
    /// Root choices examined (the first root is fixed).
    pub choices: usize,
    pub zero_choices: usize,
    /// Choices whose certified enclosure could not exclude zero.
    pub undecided_choices: usize,
    /// Decided by exact cyclotomic arithmetic rather than enclosures.
    pub exact: bool,
    /// The subset satisfies the hypotheses of the non-vanishing statement.
    pub proper: bool,
    pub k_residues: Vec<String>,
}

impl RootSumOutcome {
    pub fn all_nonzero(&self) -> bool {
        self.zero_choices == 0 && self.undecided_choices == 0
    }
}

/// Checks whether `r_1 + ... + r_{n'}` can vanish for some choice of k-th
/// roots `r_i` of the k-residues at `points`. Multiplying every root by a
/// common root of unity does not affect vanishing, so the first root is
/// fixed.
pub fn root_sum_check(diff: &KDifferential0, points: &[Point], max_choices: usize) -> Result<RootSumOutcome> {
    if points.is_empty() {
        return Err(DrcError::input("empty pole subset"));
    }
    let k = diff.k;
    let ki = k as i64;
    if points.contains(&Point::Infinity) && diff.m_infinity() >= 0 {
        return Err(DrcError::input(format!(
            "subset contains infinity but m_inf = {} is not a pole",
            diff.m_infinity()
        )));
    }
    let distinct: BTreeSet<&Point> = points.iter().collect();
    if distinct.len() != points.len() {
        return Err(DrcError::input("pole subset repeats a point"));
    }
    let values: Vec<Rational> = points
        .iter()
        .map(|p| k_residue(diff, p).map(|v| v.value))
        .collect::<Result<_>>()?;

    let divisor = diff.divisor();
    let proper = points.len() < divisor.len()
        && divisor
            .iter()
            .any(|(p, m)| !points.contains(p) && (*m < 0 || m % ki != 0));

    let choices = (1..points.len())
        .try_fold(1usize, |acc, _| acc.checked_mul(k as usize))
        .unwrap_or(usize::MAX);
    if choices > max_choices {
        return Err(DrcError::guard("root choices", max_choices, choices));
    }

    // r_i = |v_i|^{1/k} ζ_{2k}^{e_i}, e_i = 2 j_i (+1 when v_i < 0)
    let parity: Vec<u32> = values.iter().map(|v| u32::from(v.is_negative())).collect();
    let magnitudes: Vec<Option<Rational>> = values.iter().map(|v| rational::rational_root(&v.abs(), k)).collect();
    let exact = magnitudes.iter().all(Option::is_some);
    let two_k = 2 * k;

    let mut zero_choices = 0;
    let mut undecided_choices = 0;
    let mut js = vec![0u32; points.len()];
    let phi = cyclotomic(two_k);
    let (cos_tab, sin_tab, enc_mag) = if exact {
        (Vec::new(), Vec::new(), Vec::new())
    } else {
        let pi = interval::pi();
        let mut c = Vec::new();
        let mut s = Vec::new();
        for e in 0..two_k {
            let (x, y) = interval::cos_sin(&pi.scale(e as i64).div_int(ki));
            c.push(x);
            s.push(y);
        }
        let mags = values
            .iter()
            .map(|v| {
                if v.is_zero() {
                    Enclosure::exact_int(0)
                } else {
                    interval::kth_root(&v.abs(), k)
                }
            })
            .collect();
        (c, s, mags)
    };
    for _ in 0..choices {
        let exps: Vec<u32> = js.iter().zip(&parity).map(|(j, p)| (2 * j + p) % two_k).collect();
        if exact {
            let mut poly = vec![Rational::zero(); two_k as usize];
            for (e, m) in exps.iter().zip(&magnitudes) {
                poly[*e as usize] += m.clone().unwrap();
            }
            reduce(&mut poly, &phi);
            if poly.iter().all(Zero::is_zero) {
                zero_choices += 1;
            }
        } else {
            let mut re = Enclosure::exact_int(0);
            let mut im = Enclosure::exact_int(0);
            for (e, m) in exps.iter().zip(&enc_mag) {
                re = re.add(&m.mul(&cos_tab[*e as usize]));
                im = im.add(&m.mul(&sin_tab[*e as usize]));
            }
            if re.contains_zero() && im.contains_zero() {
                undecided_choices += 1;
            }
        }
        // odometer over j_2.., j_1 stays 0
        for j in js.iter_mut().skip(1) {
            *j += 1;
            if *j < k {
                break;
            }
            *j = 0;
        }
    }
    Ok(RootSumOutcome {
        choices,
        zero_choices,
        undecided_choices,
        exact,
        proper,
        k_residues: values.iter().map(rational::to_text).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetReport {
    /// Markings (1-based) in the subset.
    pub subset: Vec<usize>,
    pub proper: bool,
    pub trials: usize,
    pub nonzero_trials: usize,
    pub zero_trials: usize,
    pub undecided_trials: usize,
    pub exact_trials: usize,
    /// `nonzero_trials / trials`.
    pub frequency: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSumReport {
    pub k: u32,
    pub stratum: Vec<i64>,
    pub seed: u64,
    pub subsets: Vec<SubsetReport>,
}

impl RootSumReport {
    pub fn all_nonzero(&self) -> bool {
        self.subsets
            .iter()
            .filter(|s| s.proper)
            .all(|s| s.zero_trials == 0 && s.undecided_trials == 0)
    }
}

/// Nonempty subsets of the markings with `m_i < 0`, `k | m_i` that leave
/// some marking with `m < 0` or `k ∤ m` outside.
pub fn admissible_subsets(k: u32, m: &[i64]) -> Vec<Vec<usize>> {
    let ki = k as i64;
    let div: Vec<usize> = (0..m.len()).filter(|&i| m[i] < 0 && m[i] % ki == 0).collect();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << div.len()) {
        let s: Vec<usize> = (0..div.len()).filter(|b| mask >> b & 1 == 1).map(|b| div[b]).collect();
        let outside_bad = (0..m.len()).any(|i| !s.contains(&i) && (m[i] < 0 || m[i] % ki != 0));
        if outside_bad {
            out.push(s.into_iter().map(|i| i + 1).collect());
        }
    }
    out
}

/// Numerators up to 10^6 and denominators up to 10^3: the degenerate loci
/// where a root sum can vanish are hypersurfaces, which small-height grids
/// hit with visible frequency.
fn random_rational(rng: &mut ChaCha8Rng, nonzero: bool) -> Rational {
    loop {
        let p: i64 = rng.gen_range(-1_000_000..=1_000_000);
        let q: i64 = rng.gen_range(1..=1_000);
        if !(nonzero && p == 0) {
            return rational::frac(p, q);
        }
    }
}

/// A random differential with divisor `Σ m_i p_i`: markings `1..n-1` at
/// distinct random rationals, marking `n` at infinity, random scalar.
pub fn random_differential(k: u32, m: &[i64], rng: &mut ChaCha8Rng) -> Result<(KDifferential0, Vec<Point>)> {
    let sum: i64 = m.iter().sum();
    if sum != -2 * k as i64 {
        return Err(DrcError::input(format!(
            "genus-0 weights must sum to -2k = {} (discrepancy {})",
            -2 * k as i64,
            sum + 2 * k as i64
        )));
    }
    if m.len() < 2 {
        return Err(DrcError::input("need at least two markings"));
    }
    let mut locs: Vec<Rational> = Vec::new();
    while locs.len() + 1 < m.len() {
        let x = random_rational(rng, false);
        if !locs.contains(&x) {
            locs.push(x);
        }
    }
    let scalar = random_rational(rng, true);
    let factors = locs.iter().cloned().zip(m.iter().copied()).collect();
    let diff = KDifferential0::new(k, scalar, factors)?;
    let mut points: Vec<Point> = locs.into_iter().map(Point::Finite).collect();
    points.push(Point::Infinity);
    Ok((diff, points))
}

/// Runs [`root_sum_check`] on `trials` seeded random differentials of the
/// stratum for each subset (all admissible subsets when `subsets` is None).
/// Trial `t` draws from the ChaCha stream `t` of `seed`.
pub fn root_sum_experiment(
    k: u32,
    m: &[i64],
    subsets: Option<Vec<Vec<usize>>>,
    trials: usize,
    seed: u64,
    max_choices: usize,
) -> Result<RootSumReport> {
    let ki = k as i64;
    let subsets = subsets.unwrap_or_else(|| admissible_subsets(k, m));
    for s in &subsets {
        for &i in s {
            if i == 0 || i > m.len() {
                return Err(DrcError::input(format!("subset names unknown marking {i}")));
            }
            if m[i - 1] >= 0 || m[i - 1] % ki != 0 {
                return Err(DrcError::input(format!(
                    "marking {i} has weight {}, not a pole of order divisible by k",
                    m[i - 1]
                )));
            }
        }
    }
    let outcomes: Vec<Vec<RootSumOutcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let (diff, points) = random_differential(k, m, &mut rng)?;
            subsets
                .iter()
                .map(|s| {
                    let pts: Vec<Point> = s.iter().map(|&i| points[i - 1].clone()).collect();
                    root_sum_check(&diff, &pts, max_choices)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let reports = subsets
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let col: Vec<&RootSumOutcome> = outcomes.iter().map(|o| &o[j]).collect();
            let zero = col.iter().filter(|o| o.zero_choices > 0).count();
            let undecided = col.iter().filter(|o| o.zero_choices == 0 && o.undecided_choices > 0).count();
            let nonzero = trials - zero - undecided;
            SubsetReport {
                subset: s.clone(),
                proper: col.first().is_none_or(|o| o.proper),
                trials,
                nonzero_trials: nonzero,
                zero_trials: zero,
                undecided_trials: undecided,
                exact_trials: col.iter().filter(|o| o.exact).count(),
                frequency: if trials == 0 {
                    "0/1".to_string()
                } else {
                    rational::to_text(&rational::frac(nonzero as i64, trials as i64))
                },
            }
        })
        .collect();
    Ok(RootSumReport {
        k,
        stratum: m.to_vec(),
        seed,
        subsets: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn diff(k: u32, scalar: Rational, f: &[(i64, i64)]) -> KDifferential0 {
        KDifferential0::new(k, scalar, f.iter().map(|&(b, m)| (int(b), m)).collect()).unwrap()
    }

    #[test]
    fn residues_of_simple_form() {
        // z^-2 (1 - z)^-1 dz = -z^-2 (z - 1)^-1 dz
        let w = diff(1, int(-1), &[(0, -2), (1, -1)]);
        assert_eq!(w.m_infinity(), 1);
        let r0 = residue(&w, &Point::Finite(int(0))).unwrap();
        let r1 = residue(&w, &Point::Finite(int(1))).unwrap();
        let ri = residue(&w, &Point::Infinity).unwrap();
        assert_eq!(r0.value, int(1));
        assert_eq!(r1.value, int(-1));
        assert_eq!(ri.value, int(0));
        assert!(!ri.is_pole);
        let dz_over_z = diff(1, int(1), &[(0, -1)]);
        assert_eq!(residue(&dz_over_z, &Point::Finite(int(0))).unwrap().value, int(1));
        assert_eq!(residue(&dz_over_z, &Point::Infinity).unwrap().value, int(-1));
        let r = residue(&dz_over_z, &Point::Finite(int(5))).unwrap();
        assert!(!r.is_pole && r.value.is_zero());
    }

    #[test]
    fn k_residue_examples() {
        let w = step1_differential(2, -2, -1).unwrap();
        assert_eq!(k_residue(&w, &Point::Finite(int(0))).unwrap().value, int(1));
        let w = diff(3, int(1), &[(0, -3)]);
        let r = k_residue(&w, &Point::Finite(int(0))).unwrap();
        assert_eq!(r.value, int(1));
        assert_eq!(r.rational_roots, vec!["1/1"]);
        let w = step1_differential(2, -4, -1).unwrap();
        assert_eq!(k_residue(&w, &Point::Finite(int(0))).unwrap().value, frac(1, 4));
        let w = diff(1, int(-1), &[(0, -2), (1, -1)]);
        assert_eq!(k_residue(&w, &Point::Finite(int(1))).unwrap().value, int(-1));
        assert!(k_residue(&diff(2, int(1), &[(0, -3), (1, -1)]), &Point::Finite(int(0))).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(step1_closed_form(2, -2, -1).unwrap(), int(1));
        assert_eq!(step1_closed_form(3, -3, -2).unwrap(), int(1));
        assert_eq!(step1_closed_form(2, -4, -1).unwrap(), frac(1, 4));
        assert!(step1_closed_form(2, -4, 2).is_err());
        assert!(step1_closed_form(2, -3, -1).is_err());
    }

    #[test]
    fn closed_form_matches_extraction() {
        for k in 1..=4u32 {
            for t in 1..=4i64 {
                let m1 = -(k as i64) * t;
                for m2 in -9..=9i64 {
                    if m2 >= 0 && m2 % k as i64 == 0 {
                        continue;
                    }
                    let w = step1_differential(k, m1, m2).unwrap();
                    let ext = k_residue(&w, &Point::Finite(int(0))).unwrap().value;
                    assert_eq!(ext, step1_closed_form(k, m1, m2).unwrap(), "k={k} m1={m1} m2={m2}");
                }
            }
        }
    }

    #[test]
    fn root_choice_and_affine_invariance() {
        let w = diff(2, int(-8), &[(0, -4), (2, -1), (-1, 3)]);
        assert_eq!(w.m_infinity(), -2);
        let p = Point::Finite(int(0));
        let c = leading_coefficient(&w, &p);
        let r = rational::rational_root(&c, 2);
        assert!(r.is_some());
        let base = k_residue(&w, &p).unwrap().value;
        if let Some(r) = r {
            assert_eq!(k_residue_with_leading_root(&w, &p, &r).unwrap(), base);
            assert_eq!(k_residue_with_leading_root(&w, &p, &-r).unwrap(), base);
        }
        let moved = w.affine_pullback(&frac(3, 2), &frac(-1, 5)).unwrap();
        let p2 = Point::Finite((int(0) - frac(-1, 5)) / frac(3, 2));
        assert_eq!(k_residue(&moved, &p2).unwrap().value, base);
        let inf = k_residue(&w, &Point::Infinity).unwrap().value;
        assert_eq!(k_residue(&moved, &Point::Infinity).unwrap().value, inf);
    }

    #[test]
    fn cyclotomic_polynomials() {
        let to_i: fn(Vec<BigInt>) -> Vec<i64> =
            |v| v.into_iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert_eq!(to_i(cyclotomic(1)), vec![-1, 1]);
        assert_eq!(to_i(cyclotomic(4)), vec![1, 0, 1]);
        assert_eq!(to_i(cyclotomic(6)), vec![1, -1, 1]);
        assert_eq!(to_i(cyclotomic(12)), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn exact_and_certified_root_sums() {
        // two poles with equal k-residues 1 at k = 2: roots ±1, so 1 + (-1) = 0
        let w = diff(2, int(1), &[(0, -2), (1, -2)]);
        let pts = [Point::Finite(int(0)), Point::Finite(int(1))];
        let o = root_sum_check(&w, &pts, 1000).unwrap();
        assert!(o.exact);
        assert_eq!(o.choices, 2);
        // k-residues here: at 0: 1·(0-1)^-2 = 1, at 1: 1
        assert_eq!(o.zero_choices, 1);
        // single-pole subsets never vanish
        let s = root_sum_check(&step1_differential(2, -2, -1).unwrap(), &[Point::Finite(int(0))], 10).unwrap();
        assert!(s.all_nonzero() && s.proper);
        // k = 1, all poles: residue theorem, flagged improper
        let w = diff(1, int(3), &[(0, -1), (1, -1)]);
        let o = root_sum_check(&w, &[Point::Finite(int(0)), Point::Finite(int(1))], 10).unwrap();
        assert_eq!(o.zero_choices, 1);
        assert!(!o.proper);
        // irrational magnitudes go through enclosures
        let w = diff(2, int(2), &[(0, -2), (3, -2)]);
        let o = root_sum_check(&w, &[Point::Finite(int(0))], 10).unwrap();
        assert!(!o.exact && o.all_nonzero());
        // subset with infinity when it is not a pole
        let w = diff(1, int(1), &[(0, -2)]);
        assert!(root_sum_check(&w, &[Point::Infinity], 10).is_err());
    }

    #[test]
    fn experiment_is_seeded() {
        let a = root_sum_experiment(1, &[-1, -1, 0], None, 20, 7, 1000).unwrap();
        let b = root_sum_experiment(1, &[-1, -1, 0], None, 20, 7, 1000).unwrap();
        assert_eq!(a, b);
        assert!(a.all_nonzero());
        assert_eq!(a.subsets.len(), 2);
        let s = root_sum_experiment(2, &[-4, -1, 1], None, 10, 1, 1000).unwrap();
        assert_eq!(s.subsets[0].subset, vec![1]);
        assert!(s.all_nonzero());
    }

    #[test]
    fn factor_parsing() {
        let f = KDifferential0::parse_factors("0:-2,1:-1, 3/2:4").unwrap();
        assert_eq!(f, vec![(int(0), -2), (int(1), -1), (frac(3, 2), 4)]);
        assert!(KDifferential0::parse_factors("0-2").is_err());
    }
}
