//! Arbitrary-precision rationals and the handful of helpers the rest of the
//! crate needs on top of `num-rational`.

use alloc::format;
use alloc::string::ToString;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Reduced fraction with positive denominator.
pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"` or an integer string. Whitespace around the tokens is ignored.
pub fn parse(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = |msg: &str| Error::Parse { column: 0, message: format!("{msg}: {s:?}") };
    if t.is_empty() {
        return Err(bad("empty rational"));
    }
    match t.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad("bad numerator"))?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad("bad denominator"))?;
            if q.is_zero() {
                return Err(bad("zero denominator"));
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(
            BigInt::from_str(t).map_err(|_| bad("bad integer"))?,
        )),
    }
}

/// Canonical string form: `"p"` for integers, `"p/q"` otherwise.
pub fn to_string(q: &Rational) -> alloc::string::String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Nearest `f64`; saturates to +-inf for magnitudes beyond the float range.
pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn floor(q: &Rational) -> BigInt {
    q.numer().div_floor(q.denom())
}

/// Exact comparison `sqrt(r) <= u` for `r >= 0`.
pub fn sqrt_le(r: &Rational, u: &Rational) -> bool {
    !u.is_negative() && *r <= u * u
}

/// Exact comparison `sqrt(r) >= u` for `r >= 0`.
pub fn sqrt_ge(r: &Rational, u: &Rational) -> bool {
    !u.is_positive() || u * u <= *r
}

pub fn is_zero(q: &Rational) -> bool {
    q.is_zero()
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Largest integer `n` with `pred(n)` true, for `pred` monotone (true below
/// the answer, false above), starting the search at `guess`.
pub(crate) fn monotone_sup(guess: i64, pred: impl Fn(i64) -> bool) -> i64 {
    let mut lo;
    let mut hi;
    if pred(guess) {
        lo = guess;
        let mut step = 1i64;
        loop {
            let probe = lo.saturating_add(step);
            if !pred(probe) {
                hi = probe;
                break;
            }
            lo = probe;
            step = step.saturating_mul(2);
        }
    } else {
        hi = guess;
        let mut step = 1i64;
        loop {
            let probe = hi.saturating_sub(step);
            if pred(probe) {
                lo = probe;
                break;
            }
            hi = probe;
            step = step.saturating_mul(2);
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3").unwrap(), int(3));
        assert_eq!(parse(" -6/4 ").unwrap(), frac(-3, 2));
        assert_eq!(parse("1/-2").unwrap(), frac(-1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn string_roundtrip() {
        assert_eq!(to_string(&frac(6, 4)), "3/2");
        assert_eq!(to_string(&int(-7)), "-7");
    }

    #[test]
    fn sqrt_comparisons() {
        // sqrt(2) in (1.41, 1.42)
        assert!(sqrt_ge(&int(2), &frac(141, 100)));
        assert!(sqrt_le(&int(2), &frac(142, 100)));
        assert!(!sqrt_le(&int(2), &frac(141, 100)));
        assert!(sqrt_ge(&int(2), &int(-5)));
        assert!(!sqrt_le(&int(0), &int(-1)));
    }

    #[test]
    fn monotone_search() {
        assert_eq!(monotone_sup(0, |n| n * n <= 50), 7);
        assert_eq!(monotone_sup(100, |n| n <= -3), -3);
        assert_eq!(monotone_sup(-3, |n| n <= -3), -3);
    }
}
