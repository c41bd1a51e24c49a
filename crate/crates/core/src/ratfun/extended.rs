use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;

use crate::serde_ext::Real;

/// A point of the extended complex plane: a finite value or the single,
/// unsigned point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtendedComplex {
    pub const ZERO: ExtendedComplex = ExtendedComplex::Finite(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Self {
        ExtendedComplex::Finite(Complex64::new(re, im))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedComplex::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            ExtendedComplex::Finite(z) => Some(z),
            ExtendedComplex::Infinity => None,
        }
    }

    /// Modulus, `f64::INFINITY` at the point at infinity.
    pub fn norm(&self) -> f64 {
        match self {
            ExtendedComplex::Finite(z) => z.norm(),
            ExtendedComplex::Infinity => f64::INFINITY,
        }
    }

    pub fn conj(&self) -> Self {
        match *self {
            ExtendedComplex::Finite(z) => ExtendedComplex::Finite(z.conj()),
            ExtendedComplex::Infinity => ExtendedComplex::Infinity,
        }
    }

    /// True on the open real interval (-4, 0).
    pub fn in_critical_strip(&self) -> bool {
        match self {
            ExtendedComplex::Finite(z) => z.im == 0.0 && z.re > -4.0 && z.re < 0.0,
            ExtendedComplex::Infinity => false,
        }
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(z: Complex64) -> Self {
        if z.re.is_infinite() || z.im.is_infinite() {
            ExtendedComplex::Infinity
        } else {
            ExtendedComplex::Finite(z)
        }
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedComplex::Finite(z)
                if z.im < 0.0 || (z.im == 0.0 && z.im.is_sign_negative()) =>
            {
                write!(f, "{} - {}j", z.re, -z.im)
            }
            ExtendedComplex::Finite(z) => write!(f, "{} + {}j", z.re, z.im),
            ExtendedComplex::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedComplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedComplex::Finite(z) => (Real(z.re), Real(z.im)).serialize(s),
            ExtendedComplex::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedComplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Pair(Real, Real),
            Text(String),
        }
        match Wire::deserialize(d)? {
            Wire::Pair(re, im) => Ok(Complex64::new(re.0, im.0).into()),
            Wire::Text(t) if t == "inf" => Ok(ExtendedComplex::Infinity),
            Wire::Text(t) => Err(de::Error::invalid_value(
                de::Unexpected::Str(&t),
                &"[re, im] or \"inf\"",
            )),
        }
    }
}
