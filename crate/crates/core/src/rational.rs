//! Rational helpers and the canonical `"num/den"` text form used in reports.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Small exact rationals: lattice coordinates, weights, exponents, mode indices.
pub type Q64 = num_rational::Rational64;
/// Arbitrary precision coefficients.
pub type Rational = num_rational::BigRational;

pub fn q(n: i64, d: i64) -> Q64 {
    Q64::new(n, d)
}

pub fn qi(n: i64) -> Q64 {
    Q64::from_integer(n)
}

pub fn big(x: Q64) -> Rational {
    Rational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Converts back to a small rational; panics on overflow, which only happens
/// if a coefficient is misused as a weight.
pub fn small(x: &Rational) -> Q64 {
    Q64::new(
        x.numer().to_i64().expect("numerator fits in i64"),
        x.denom().to_i64().expect("denominator fits in i64"),
    )
}

pub fn is_integer(x: Q64) -> bool {
    *x.denom() == 1
}

/// Generalized binomial coefficient `C(top, k)` for rational `top`.
pub fn binomial(top: Q64, k: u32) -> Rational {
    let top = big(top);
    let mut acc = Rational::one();
    for i in 0..k {
        acc *= &top - rint(i as i64);
        acc /= rint(i as i64 + 1);
    }
    acc
}

pub fn binomial_int(n: i64, k: i64) -> Rational {
    if k < 0 {
        return Rational::zero();
    }
    binomial(qi(n), k as u32)
}

pub fn factorial(k: u32) -> Rational {
    (1..=k as i64).fold(Rational::one(), |acc, i| acc * rint(i))
}

pub fn sign(even: bool) -> Rational {
    if even {
        Rational::one()
    } else {
        -Rational::one()
    }
}

pub fn fmt_big(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn fmt_q(x: Q64) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `"n/d"`, `"n"`, or a decimal-free signed integer pair.
pub fn parse_q(s: &str) -> Option<Q64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Q64::new(n, d))
        }
        None => s.parse::<i64>().ok().map(Q64::from_integer),
    }
}

pub fn parse_big(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Floor of a small rational as an integer.
pub fn floor_q(x: Q64) -> i64 {
    x.floor().to_integer()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn abs_big(x: &Rational) -> Rational {
    x.abs()
}
