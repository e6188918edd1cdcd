//! Small helpers around [`BigRational`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serializer;

use crate::error::{Error, Result};

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn pow(x: &BigRational, e: usize) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= x;
    }
    out
}

pub fn to_f64(x: &BigRational) -> f64 {
    // Ratio<BigInt>::to_f64 handles huge numerators and denominators.
    x.to_f64().unwrap_or(f64::NAN)
}

/// `floor(x)` as `i64`.
pub fn floor_i64(x: &BigRational) -> Result<i64> {
    x.floor()
        .to_integer()
        .to_i64()
        .ok_or(Error::Overflow("flooring a rational"))
}

/// `ceil(x)` as `i64`.
pub fn ceil_i64(x: &BigRational) -> Result<i64> {
    x.ceil()
        .to_integer()
        .to_i64()
        .ok_or(Error::Overflow("taking the ceiling of a rational"))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.125`.
pub fn parse(src: &str) -> Result<BigRational> {
    let s = src.trim();
    let bad = || Error::Parse(format!("not a rational number: `{src}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let w: BigInt = if whole_abs.is_empty() {
            BigInt::zero()
        } else {
            whole_abs.parse().map_err(|_| bad())?
        };
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let f: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = BigRational::new(w * &scale + f, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

/// Canonical `p/q` text (integers print without a denominator).
pub fn display(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn serialize<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&display(x))
}

pub fn serialize_opt<S: Serializer>(
    x: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&display(v)),
        None => s.serialize_none(),
    }
}

/// Reduces `x` into `[0, 1)`.
pub fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_int(x: &BigRational) -> BigRational {
    let f = frac(x);
    let g = BigRational::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

pub fn abs(x: &BigRational) -> BigRational {
    x.abs()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}
