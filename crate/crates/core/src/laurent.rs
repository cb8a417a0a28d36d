//! Sparse Laurent polynomials with rational coefficients over the chart
//! variables `a_γ` (cycles) and `a_e` (edges).

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

/// Cycle variables sort before edge variables; both by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    Cycle(usize),
    Edge(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Cycle(i) => write!(f, "a_g{i}"),
            Var::Edge(e) => write!(f, "a_e{e}"),
        }
    }
}

/// A Laurent monomial; zero exponents are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExponentVector(BTreeMap<Var, i64>);

impl ExponentVector {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: Var, e: i64) -> Self {
        let mut x = Self::default();
        x.add_to(v, e);
        x
    }

    pub fn add_to(&mut self, v: Var, e: i64) {
        let slot = self.0.entry(v).or_insert(0);
        *slot += e;
        if *slot == 0 {
            self.0.remove(&v);
        }
    }

    pub fn get(&self, v: Var) -> i64 {
        self.0.get(&v).copied().unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, i64)> + '_ {
        self.0.iter().map(|(&v, &e)| (v, e))
    }

    pub fn times(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (v, e) in other.iter() {
            out.add_to(v, e);
        }
        out
    }

    pub fn inverse(&self) -> Self {
        ExponentVector(self.0.iter().map(|(&v, &e)| (v, -e)).collect())
    }

    pub fn scaled(&self, c: i64) -> Self {
        let mut out = Self::default();
        for (v, e) in self.iter() {
            out.add_to(v, e * c);
        }
        out
    }

    /// True when every edge variable has a nonnegative exponent.
    pub fn is_edge_polynomial(&self) -> bool {
        self.iter().all(|(v, e)| matches!(v, Var::Cycle(_)) || e >= 0)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(v, e)| if e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        f.write_str(&parts.join(" * "))
    }
}

/// Canonical sparse form: no zero coefficients, terms ordered by monomial.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPolynomial {
    terms: BTreeMap<ExponentVector, Rational>,
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(m: ExponentVector, c: Rational) -> Self {
        let mut p = Self::default();
        p.add_term(m, c);
        p
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(ExponentVector::one(), rational::int(c))
    }

    /// `lhs - rhs`.
    pub fn binomial(lhs: &ExponentVector, rhs: &ExponentVector) -> Self {
        Self::monomial(lhs.clone(), Rational::one()) - Self::monomial(rhs.clone(), Rational::one())
    }

    fn add_term(&mut self, m: ExponentVector, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn times_monomial(&self, m: &ExponentVector) -> Self {
        LaurentPolynomial {
            terms: self.terms.iter().map(|(x, c)| (x.times(m), c.clone())).collect(),
        }
    }
}

impl Add for LaurentPolynomial {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Neg for LaurentPolynomial {
    type Output = Self;
    fn neg(self) -> Self {
        LaurentPolynomial {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Sub for LaurentPolynomial {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, rhs: Self) -> LaurentPolynomial {
        let mut out = LaurentPolynomial::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a.times(b), x * y);
            }
        }
        out
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({}) {}", rational::to_text(c), m))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
