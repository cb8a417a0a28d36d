//! Exact rationals and their `"num/den"` text form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{DrcError, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Lowest terms with a positive denominator, always carrying the `/den` part.
pub fn to_text(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"p/q"`, `"p"` or a decimal-free integer. Rejects zero denominators.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n
        .parse()
        .map_err(|_| DrcError::input(format!("bad rational numerator in {s:?}")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| DrcError::input(format!("bad rational denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(DrcError::input(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Parses the canonical form only: lowest terms, positive denominator, explicit `/`.
pub fn parse_canonical(s: &str) -> Result<Rational> {
    let q = parse(s)?;
    if to_text(&q) != s {
        return Err(DrcError::input(format!(
            "rational {s:?} is not in canonical num/den form"
        )));
    }
    Ok(q)
}

pub fn pow(q: &Rational, e: i64) -> Rational {
    if e >= 0 {
        num_traits::pow(q.clone(), e as usize)
    } else {
        num_traits::pow(q.recip(), (-e) as usize)
    }
}

/// Exact integer k-th root of a nonnegative big integer, if it exists.
pub fn exact_int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// A rational `r` with `r^k = q`, preferring the nonnegative one. `None` when
/// no rational root exists.
pub fn rational_root(q: &Rational, k: u32) -> Option<Rational> {
    if k == 0 {
        return None;
    }
    if q.is_zero() {
        return Some(Rational::zero());
    }
    if q.is_negative() {
        if k.is_multiple_of(2) {
            return None;
        }
        return rational_root(&-q, k).map(|r| -r);
    }
    let n = exact_int_root(q.numer(), k)?;
    let d = exact_int_root(q.denom(), k)?;
    Some(BigRational::new(n, d))
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

pub mod serde_text {
    //! Serde adapter for `"num/den"` strings.
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_text(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_canonical(&s).map_err(D::Error::custom)
    }
}
