//! Exact rationals backed by `num-rational`.

use alloc::format;
use alloc::string::{String, ToString};
use core::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"p/q"` or `"p"` with decimal integers.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::input(format!("malformed rational {text:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::input(format!("zero denominator in {text:?}")));
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Nearest binary64 value; saturates to 0 / infinity instead of failing on
/// huge numerators or denominators.
pub fn to_f64(value: &Rational) -> f64 {
    if let Some(x) = value.to_f64() {
        if x.is_finite() && (x != 0.0 || value.is_zero()) {
            return x;
        }
    }
    // Shift both parts down to 1000 bits so the division is representable.
    let sign = if value.is_negative() { -1.0 } else { 1.0 };
    let num = value.numer().abs();
    let den = value.denom().clone();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift_n = (nb - 1000).max(0) as usize;
    let shift_d = (db - 1000).max(0) as usize;
    let n = (&num >> shift_n).to_f64().unwrap_or(f64::INFINITY);
    let d = (&den >> shift_d).to_f64().unwrap_or(f64::INFINITY);
    let exp = shift_n as i64 - shift_d as i64;
    sign * (n / d) * libm::exp2(exp as f64)
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Writes each probability as `weight / denominator` over a common
/// denominator (the lcm of the individual ones).
pub(crate) fn common_denominator(probs: &[Rational]) -> (alloc::vec::Vec<BigUint>, BigUint) {
    let mut den = BigInt::one();
    for p in probs {
        den = den.lcm(p.denom());
    }
    let weights = probs
        .iter()
        .map(|p| {
            let w = p.numer() * (&den / p.denom());
            w.to_biguint().expect("probabilities are nonnegative")
        })
        .collect();
    (weights, den.to_biguint().expect("positive denominator"))
}


/// Serde adapter writing rationals as `"p/q"` strings.
pub mod serde_string {
    use super::{format_rational, parse_rational, Rational};
    use alloc::string::String;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(de::Error::custom)
    }
}
