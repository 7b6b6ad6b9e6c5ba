//! Exact rational coordinates.
//!
//! Box geometry is held in `BigRational` so that containment, disjointness
//! and cover checks on packings are decided without round-off. Values cross
//! into `f64` only when a solver needs them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Exact(pub BigRational);

impl Exact {
    pub fn zero() -> Self {
        Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Exact(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact value of a finite float (every finite `f64` is a dyadic rational).
    pub fn from_f64(v: f64) -> Result<Self> {
        BigRational::from_float(v)
            .map(Exact)
            .ok_or_else(|| Error::Argument(format!("non-finite coordinate {v}")))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn pow(&self, e: i32) -> Self {
        Exact(num_traits::pow::Pow::pow(&self.0, e))
    }

    pub fn recip(&self) -> Self {
        Exact(self.0.recip())
    }

    /// `Some(f)` when the value is exactly representable as an `f64`.
    fn as_exact_f64(&self) -> Option<f64> {
        let f = self.to_f64();
        if f.is_finite() && BigRational::from_float(f).as_ref() == Some(&self.0) {
            Some(f)
        } else {
            None
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl std::ops::$tr<&Exact> for &Exact {
            type Output = Exact;
            fn $method(self, rhs: &Exact) -> Exact {
                Exact(std::ops::$tr::$method(&self.0, &rhs.0))
            }
        }
        impl std::ops::$tr<Exact> for Exact {
            type Output = Exact;
            fn $method(self, rhs: Exact) -> Exact {
                Exact(std::ops::$tr::$method(self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl std::iter::Sum for Exact {
    fn sum<I: Iterator<Item = Exact>>(iter: I) -> Self {
        iter.fold(Exact::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Exact {
    type Err = Error;

    /// Accepts `"p/q"`, `"p"` or a decimal literal such as `"0.125"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Argument(format!("cannot parse rational from {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Exact(BigRational::new(n, d)));
        }
        if let Ok(n) = BigInt::from_str(s) {
            return Ok(Exact(BigRational::from_integer(n)));
        }
        // decimal literal: exact base-10 value, not the nearest float
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = body.split_once('.').ok_or_else(bad)?;
        if frac_part.is_empty() && int_part.is_empty() {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let n = BigInt::from_str(&digits).map_err(|_| bad())?;
        let d = num_traits::pow::pow(BigInt::from(10), frac_part.len());
        let v = BigRational::new(n, d);
        Ok(Exact(if neg { -v } else { v }))
    }
}

impl Serialize for Exact {
    /// Integers and exactly representable floats are written as JSON
    /// numbers; anything else as a `"p/q"` string.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(i) = self.0.numer().to_i64() {
                return s.serialize_i64(i);
            }
        }
        match self.as_exact_f64() {
            Some(f) => s.serialize_f64(f),
            None => s.serialize_str(&self.to_string()),
        }
    }
}

struct ExactVisitor;

impl<'de> Visitor<'de> for ExactVisitor {
    type Value = Exact;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a rational string \"p/q\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exact, E> {
        Ok(Exact::int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exact, E> {
        Ok(Exact(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exact, E> {
        Exact::from_f64(v).map_err(E::custom)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exact, E> {
        Exact::from_str(v).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(ExactVisitor)
    }
}

/// Serde adapter that always writes rationals as strings.
pub mod as_string {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Exact, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Exact, D::Error> {
        Exact::deserialize(d)
    }
}

/// Vector form of [`as_string`].
pub mod vec_as_string {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Exact], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Exact>, D::Error> {
        Vec::<Exact>::deserialize(d)
    }
}
