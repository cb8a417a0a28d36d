//! Truncated Laurent series with exact rational coefficients.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{DrcError, Result};
use crate::rational::{self, Rational};

/// Where a series is expanded: in `z - b`, or in `w = 1/z` at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expansion {
    At(#[serde(with = "rational::serde_text")] Rational),
    Infinity,
}

/// `Σ_{j >= valuation} c_j t^j`, known exactly for `j < valuation + coeffs.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    pub valuation: i64,
    pub coeffs: Vec<Rational>,
    pub expansion: Expansion,
}

impl LaurentSeries {
    /// First index whose coefficient is not known.
    pub fn precision(&self) -> i64 {
        self.valuation + self.coeffs.len() as i64
    }

    /// Coefficient of `t^j`; errors when `j` is beyond the truncation.
    pub fn coeff(&self, j: i64) -> Result<Rational> {
        if j < self.valuation {
            return Ok(Rational::zero());
        }
        if j >= self.precision() {
            return Err(DrcError::invariant(format!(
                "coefficient {j} requested beyond truncation order {}",
                self.precision()
            )));
        }
        Ok(self.coeffs[(j - self.valuation) as usize].clone())
    }
}

/// Power series `Σ_{i < len} c_i t^i`.
pub type PowerSeries = Vec<Rational>;

/// `(1 + x t)^e` for integer or rational `e`, to `len` terms.
pub fn binomial_series(x: &Rational, e: &Rational, len: usize) -> PowerSeries {
    let mut out = Vec::with_capacity(len);
    let mut c = Rational::one();
    for i in 0..len {
        out.push(c.clone());
        let i = rational::int(i as i64);
        c = c * (e - &i) / (&i + Rational::one()) * x;
    }
    out
}

pub fn mul(a: &PowerSeries, b: &PowerSeries, len: usize) -> PowerSeries {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `u^α` for a power series with `u_0 = 1`, via the recurrence obtained from
/// `u (u^α)' = α u' u^α`.
pub fn power(u: &PowerSeries, alpha: &Rational, len: usize) -> Result<PowerSeries> {
    if u.first().is_none_or(|c| !c.is_one()) {
        return Err(DrcError::invariant("power series must start with 1"));
    }
    let mut g: PowerSeries = Vec::with_capacity(len);
    if len == 0 {
        return Ok(g);
    }
    g.push(Rational::one());
    for n in 1..len {
        let mut acc = Rational::zero();
        for j in 1..=n.min(u.len() - 1) {
            let coef = alpha * rational::int(j as i64) - rational::int((n - j) as i64);
            acc += coef * &u[j] * &g[n - j];
        }
        g.push(acc / rational::int(n as i64));
    }
    Ok(g)
}
