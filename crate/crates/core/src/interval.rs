//! Certified real enclosures in fixed point: a value is known to lie in
//! `[lo, hi] · 2^-PREC`. Every operation rounds outward.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::rational::Rational;

pub const PREC: u32 = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigInt,
    hi: BigInt,
}

fn unit() -> BigInt {
    BigInt::one() << PREC
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl Enclosure {
    pub fn exact_int(n: i64) -> Self {
        let x = BigInt::from(n) << PREC;
        Enclosure { lo: x.clone(), hi: x }
    }

    pub fn from_rational(q: &Rational) -> Self {
        let num = q.numer() << PREC;
        Enclosure {
            lo: floor_div(&num, q.denom()),
            hi: ceil_div(&num, q.denom()),
        }
    }

    /// `[-r, r]` for a nonnegative rational `r`.
    pub fn plus_minus(r: &Rational) -> Self {
        let e = Self::from_rational(&r.abs());
        Enclosure { lo: -e.hi.clone(), hi: e.hi }
    }

    pub fn add(&self, o: &Self) -> Self {
        Enclosure {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn neg(&self) -> Self {
        Enclosure {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let min = p.iter().min().unwrap();
        let max = p.iter().max().unwrap();
        let u = unit();
        Enclosure {
            lo: floor_div(min, &u),
            hi: ceil_div(max, &u),
        }
    }

    pub fn scale(&self, n: i64) -> Self {
        let (a, b) = (&self.lo * n, &self.hi * n);
        if n >= 0 {
            Enclosure { lo: a, hi: b }
        } else {
            Enclosure { lo: b, hi: a }
        }
    }

    /// Division by a positive integer.
    pub fn div_int(&self, n: i64) -> Self {
        let d = BigInt::from(n);
        Enclosure {
            lo: floor_div(&self.lo, &d),
            hi: ceil_div(&self.hi, &d),
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Width in raw units of `2^-PREC`.
    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    /// Upper bound on the absolute value, as a rational.
    pub fn abs_upper(&self) -> Rational {
        let m = self.lo.abs().max(self.hi.abs());
        Rational::new(m, unit())
    }

    pub fn lower(&self) -> Rational {
        Rational::new(self.lo.clone(), unit())
    }

    pub fn upper(&self) -> Rational {
        Rational::new(self.hi.clone(), unit())
    }

    fn widen(&self, r: &BigInt) -> Self {
        Enclosure {
            lo: &self.lo - r,
            hi: &self.hi + r,
        }
    }
}

/// `atan(1/x)` by its alternating series; the first omitted term bounds
/// the error.
fn atan_inv(x: i64) -> Enclosure {
    let mut sum = Enclosure::exact_int(0);
    let x = BigInt::from(x);
    let mut n = 0u32;
    let tiny = BigInt::one();
    loop {
        let den = BigInt::from(2 * n + 1) * num_traits::pow(x.clone(), (2 * n + 1) as usize);
        let term = Enclosure::from_rational(&Rational::new(BigInt::one(), den));
        if term.hi <= tiny {
            return sum.widen(&(&term.hi + BigInt::one()));
        }
        sum = if n.is_multiple_of(2) { sum.add(&term) } else { sum.sub(&term) };
        n += 1;
    }
}

/// Machin's formula `π = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi() -> Enclosure {
    atan_inv(5).scale(16).sub(&atan_inv(239).scale(4))
}

/// `(cos x, sin x)` for `x` in the enclosure. Taylor series at the midpoint
/// with the Lagrange remainder, widened by the half-width of `x`.
pub fn cos_sin(x: &Enclosure) -> (Enclosure, Enclosure) {
    let mid_raw: BigInt = (&x.lo + &x.hi) >> 1u32;
    let mid = Enclosure {
        lo: mid_raw.clone(),
        hi: mid_raw,
    };
    let radius = x.width() + BigInt::one();
    let mut cos = Enclosure::exact_int(0);
    let mut sin = Enclosure::exact_int(0);
    let mut term = Enclosure::exact_int(1); // mid^j / j!
    let mut j: i64 = 0;
    let tiny = BigInt::from(4);
    loop {
        let mag = term.lo.abs().max(term.hi.abs());
        if mag <= tiny && j > 2 {
            let bound = mag + BigInt::one();
            return (cos.widen(&bound).widen(&radius), sin.widen(&bound).widen(&radius));
        }
        match j % 4 {
            0 => cos = cos.add(&term),
            1 => sin = sin.add(&term),
            2 => cos = cos.sub(&term),
            _ => sin = sin.sub(&term),
        }
        j += 1;
        term = term.mul(&mid).div_int(j);
    }
}

/// Enclosure of `v^{1/k}` for a positive rational `v`.
pub fn kth_root(v: &Rational, k: u32) -> Enclosure {
    let scaled_num = v.numer() << (PREC * k);
    let d = v.denom();
    let lo_in = floor_div(&scaled_num, d);
    let hi_in = ceil_div(&scaled_num, d);
    let lo = lo_in.nth_root(k);
    let mut hi = hi_in.nth_root(k);
    if num_traits::pow(hi.clone(), k as usize) < hi_in {
        hi += BigInt::one();
    }
    Enclosure { lo, hi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn pi_is_tight_and_correct() {
        let p = pi();
        assert!(p.lower() < frac(314159265358979324, 100000000000000000));
        assert!(p.upper() > frac(314159265358979323, 100000000000000000));
        assert!(p.width() < BigInt::from(100000));
    }

    #[test]
    fn trigonometry() {
        let p = pi();
        // cos(π) = -1, sin(π/2) = 1
        let (c, _) = cos_sin(&p);
        assert!(c.add(&Enclosure::exact_int(1)).contains_zero());
        let (_, s) = cos_sin(&p.div_int(2));
        assert!(s.sub(&Enclosure::exact_int(1)).contains_zero());
        // cos(2π/3) = -1/2 exactly; enclosure must contain it and exclude 0
        let (c, s) = cos_sin(&p.scale(2).div_int(3));
        assert!(c.add(&Enclosure::from_rational(&frac(1, 2))).contains_zero());
        assert!(!c.contains_zero() && !s.contains_zero());
    }

    #[test]
    fn roots() {
        let r = kth_root(&frac(8, 1), 3);
        assert!(r.sub(&Enclosure::exact_int(2)).contains_zero());
        let r = kth_root(&frac(2, 1), 2);
        let sq = r.mul(&r);
        assert!(sq.sub(&Enclosure::exact_int(2)).contains_zero());
        assert!(r.lower() > frac(14142, 10000) && r.upper() < frac(14143, 10000));
    }
}
