//! Exact rational numbers and their text form.
//!
//! Every quantity in the crate (allocations, alternatives, slacks, potentials,
//! messages) is an exact [`Rational`]. The text form is `p/q` with integer
//! shorthand (`3` for `3/1`). Parsing also accepts decimals and scientific
//! notation (`0.25`, `1e-6`, `2.5e-3`), read exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn half(v: &Rational) -> Rational {
    v / int(2)
}

/// `2^-k`.
pub fn pow2_inv(k: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

pub fn abs(v: &Rational) -> Rational {
    v.abs()
}

pub fn max_of<'a>(a: &'a Rational, b: &'a Rational) -> &'a Rational {
    if a >= b {
        a
    } else {
        b
    }
}

/// Serializes as `p/q`, or just `p` when the denominator is one.
pub fn format(v: &Rational) -> String {
    v.to_string()
}

/// Lossy conversion for display only.
pub fn to_f64(v: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

pub fn parse(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty rational".into()));
    }
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| bad())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let combined = format!("{whole}{frac}");
    let numer: BigInt = combined.parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i64;
    if scale.unsigned_abs() > 10_000 {
        return Err(bad());
    }
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

pub mod serde_rational {
    //! Serde adapter storing a [`Rational`] as its `p/q` string.
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = RawRational::deserialize(d)?;
        match raw {
            RawRational::Int(i) => Ok(super::int(i)),
            RawRational::Text(t) => super::parse(&t).map_err(serde::de::Error::custom),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum RawRational {
        Int(i64),
        Text(String),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse("-4/6").unwrap(), ratio(-2, 3));
        assert_eq!(parse("7").unwrap(), int(7));
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse("1e-6").unwrap(), ratio(1, 1_000_000));
        assert_eq!(parse("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse("2.5e-3").unwrap(), ratio(1, 400));
        assert_eq!(parse("1E3").unwrap(), int(1000));
        assert_eq!(parse(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "1/0", "abc", "1.2.3", "e5", "1/x"] {
            assert!(parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn formats_with_integer_shorthand() {
        assert_eq!(format(&ratio(2, 4)), "1/2");
        assert_eq!(format(&int(3)), "3");
        assert_eq!(format(&ratio(-1, 3)), "-1/3");
    }

    #[test]
    fn pow2_inv_is_exact() {
        assert_eq!(pow2_inv(3), ratio(1, 8));
        assert_eq!(pow2_inv(0), int(1));
    }
}
