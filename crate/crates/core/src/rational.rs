//! Exact rational scalars and conversions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = BigRational;

/// Shorthand for `n/d` in lowest terms.
pub fn rat(n: i64, d: i64) -> Rational {
    assert!(d != 0, "zero denominator");
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "p/q" or "p". The denominator must be positive after reduction.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let make_err = || Error::Parse(format!("invalid rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| make_err())?;
    let den: BigInt = den.parse().map_err(|_| make_err())?;
    if den.is_zero() {
        return Err(make_err());
    }
    Ok(Rational::new(num, den))
}

/// Formats as "p/q", or just "p" for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64()
        .unwrap_or_else(|| r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN))
}

/// Best rational approximation of `x` within `tol`, by continued fractions.
///
/// Denominators are capped at 10^15; the cap is never reached for the
/// tolerances used in this crate (1e-12 on values that are small rationals).
pub fn approx_from_f64(x: f64, tol: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot rationalize {x}")));
    }
    let negative = x < 0.0;
    let x_abs = x.abs();
    // convergents p/q of the continued fraction of x_abs
    let (mut p_prev, mut q_prev): (i128, i128) = (1, 0);
    let (mut p, mut q): (i128, i128) = (x_abs.floor() as i128, 1);
    let mut frac = x_abs - x_abs.floor();
    for _ in 0..64 {
        let approx = p as f64 / q as f64;
        if (approx - x_abs).abs() <= tol {
            break;
        }
        if frac.abs() < f64::EPSILON {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor() as i128;
        frac = inv - inv.floor();
        let p_next = a.saturating_mul(p).saturating_add(p_prev);
        let q_next = a.saturating_mul(q).saturating_add(q_prev);
        if q_next > 1_000_000_000_000_000 {
            break;
        }
        (p_prev, q_prev) = (p, q);
        (p, q) = (p_next, q_next);
    }
    let mut r = Rational::new(BigInt::from(p), BigInt::from(q));
    if negative {
        r = -r;
    }
    if (to_f64(&r) - x).abs() > tol.max(1e-9) {
        return Err(Error::Domain(format!(
            "no rational approximation of {x} within {tol}"
        )));
    }
    Ok(r)
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["1/2", "-3/7", "0", "5", "10/4"] {
            let r = parse_rational(s).unwrap();
            let back = parse_rational(&format_rational(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(parse_rational("10/4").unwrap(), rat(5, 2));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn negative_denominator_normalizes() {
        assert_eq!(parse_rational("1/-2").unwrap(), rat(-1, 2));
    }

    #[test]
    fn approximates_simple_fractions() {
        assert_eq!(approx_from_f64(0.5, 1e-12).unwrap(), rat(1, 2));
        assert_eq!(approx_from_f64(1.0 / 3.0, 1e-12).unwrap(), rat(1, 3));
        assert_eq!(approx_from_f64(-0.25, 1e-12).unwrap(), rat(-1, 4));
        assert_eq!(approx_from_f64(0.0, 1e-12).unwrap(), int(0));
    }
}
