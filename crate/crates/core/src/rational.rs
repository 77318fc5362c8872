//! Rational helpers: `p/q` parsing and formatting, reduction mod 1.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("malformed rational '{s}' (expected p/q)"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

pub fn format_rational(x: &BigRational) -> String {
    x.to_string()
}

/// Representative of `x` in `[0, 1)`.
pub fn mod_one(x: &BigRational) -> BigRational {
    x - x.floor()
}

pub fn is_integer(x: &BigRational) -> bool {
    x.denom().is_one()
}

/// Least common multiple of the reduced denominators.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}
