//! Arbitrary-precision rational numbers, stored reduced.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FractionError {
    #[error("denominator must be nonzero")]
    ZeroDenominator,
    #[error("cannot parse `{0}` as a fraction (expected `a` or `a/b`)")]
    Parse(String),
}

/// Exact rational with arbitrary-precision numerator and denominator.
///
/// Always stored reduced with a positive denominator; ordering and equality
/// are the rational order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactFraction(BigRational);

impl ExactFraction {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, FractionError> {
        let d = denom.into();
        if d.is_zero() {
            return Err(FractionError::ZeroDenominator);
        }
        Ok(Self(BigRational::new(numer.into(), d)))
    }

    /// Ratio of two non-negative machine integers; `denom` must be nonzero.
    pub fn ratio_u128(numer: u128, denom: u128) -> Self {
        assert!(denom != 0, "denominator must be nonzero");
        Self(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Nearest double; exact rationals round once, here, and nowhere else.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Fall back to a scaled division for extreme magnitudes.
            let n = self.0.numer().to_f64().unwrap_or(f64::MAX);
            let d = self.0.denom().to_f64().unwrap_or(f64::MAX);
            n / d
        })
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }
}

impl From<BigRational> for ExactFraction {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

impl fmt::Display for ExactFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for ExactFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExactFraction {
    type Err = FractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse_int = |t: &str| BigInt::from_str(t.trim()).map_err(|_| FractionError::Parse(s.to_string()));
        match s.split_once('/') {
            Some((n, d)) => {
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(FractionError::ZeroDenominator);
                }
                Ok(Self(BigRational::new(parse_int(n)?, d)))
            }
            None => Ok(Self::from_integer(parse_int(s)?)),
        }
    }
}

impl Serialize for ExactFraction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for ExactFraction {
            type Output = ExactFraction;
            fn $method(self, rhs: ExactFraction) -> ExactFraction {
                ExactFraction(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a ExactFraction> for &'a ExactFraction {
            type Output = ExactFraction;
            fn $method(self, rhs: &'a ExactFraction) -> ExactFraction {
                ExactFraction((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for ExactFraction {
    type Output = ExactFraction;
    fn neg(self) -> ExactFraction {
        ExactFraction(-self.0)
    }
}

impl PartialEq<ExactFraction> for &ExactFraction {
    fn eq(&self, other: &ExactFraction) -> bool {
        self.0 == other.0
    }
}

impl ExactFraction {
    pub fn cmp_ref(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}
