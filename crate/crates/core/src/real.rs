//! Scalar types for the floating-point part of the pipeline: binary64 and a
//! software float with a 192-bit significand.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfAway;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use num_bigint::{BigInt, Sign};

use crate::rational::{to_f64, Rational};

pub trait Real:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn from_rational(x: &Rational) -> Self;
    fn to_f64(&self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Real for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_rational(x: &Rational) -> Self {
        to_f64(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Significand bits of [`Extended`].
pub const EXTENDED_PRECISION: usize = 192;

type Big = FBig<HalfAway, 2>;

/// Binary float with a 192-bit significand.
#[derive(Clone, Debug, PartialEq)]
pub struct Extended(Big);

impl Extended {
    fn wrap(x: Big) -> Self {
        Extended(x.with_precision(EXTENDED_PRECISION).value())
    }

    fn from_bigint(x: &BigInt) -> Self {
        let (sign, bytes) = x.to_bytes_le();
        let mag = IBig::from(UBig::from_le_bytes(&bytes));
        let v = if sign == Sign::Minus { -mag } else { mag };
        Self::wrap(Big::from(v))
    }
}

impl Real for Extended {
    fn zero() -> Self {
        Self::wrap(Big::ZERO)
    }

    fn one() -> Self {
        Self::wrap(Big::ONE)
    }

    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value {x}");
        if x == 0.0 {
            return Self::zero();
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let exp_bits = ((bits >> 52) & 0x7ff) as isize;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let m = IBig::from(mantissa);
        let m = if negative { -m } else { m };
        Self::wrap(Big::from_parts(m, exponent))
    }

    fn from_rational(x: &Rational) -> Self {
        Self::from_bigint(x.numer()) / Self::from_bigint(x.denom())
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }
}

macro_rules! forward_op {
    ($trait:ident, $method:ident) => {
        impl $trait for Extended {
            type Output = Extended;

            fn $method(self, rhs: Extended) -> Extended {
                Extended::wrap((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_op!(Add, add);
forward_op!(Sub, sub);
forward_op!(Mul, mul);
forward_op!(Div, div);

impl Neg for Extended {
    type Output = Extended;

    fn neg(self) -> Extended {
        Extended(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn f64_round_trip() {
        for x in [1.0, -0.375, 1e-300, 5e-324, 123456.789, -2.5e17] {
            assert_eq!(Extended::from_f64(x).to_f64(), x);
        }
    }

    #[test]
    fn extended_keeps_more_digits_than_f64() {
        // (1 + 2^-80) - 1 vanishes in binary64 but not here
        let tiny = Extended::from_f64(libm::exp2(-80.0));
        let d = (Extended::one() + tiny.clone()) - Extended::one();
        assert_eq!(d, tiny);
        let third = Extended::from_rational(&ratio(1, 3));
        let back = third * Extended::from_usize(3);
        assert!((back.to_f64() - 1.0).abs() < 1e-300);
    }

    #[test]
    fn rational_conversion() {
        assert_eq!(Extended::from_rational(&ratio(-3, 4)).to_f64(), -0.75);
        assert_eq!(<f64 as Real>::from_rational(&ratio(1, 8)), 0.125);
    }
}
