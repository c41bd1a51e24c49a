use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use super::{ExtendedComplex, Polynomial};
use crate::error::{Error, Result};
use crate::serde_ext::complex_list;

/// Relative tolerance used by [`RationalFunction::reduce`] when the caller
/// has no better value.
pub const REDUCE_TOL: f64 = 1e-9;

// A sampled `den(s)` counts as zero below this many ulps of its magnitude scale.
const ZERO_ULPS: f64 = 16.0;

/// `num(s) / den(s)` with a monic denominator. Improper functions are
/// allowed. Common factors are never cancelled implicitly; see
/// [`RationalFunction::reduce`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RationalWire", into = "CoeffWire")]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        let Some(lead) = den.leading() else {
            return Err(Error::invalid("denominator is identically zero"));
        };
        Ok(RationalFunction {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn zero() -> Self {
        Self::from_poly(Polynomial::zero())
    }

    /// `gain * prod (s - z) / prod (s - p)`.
    pub fn from_zpk(zeros: &[Complex64], poles: &[Complex64], gain: f64) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::invalid("gain must be finite"));
        }
        Self::new(
            Polynomial::from_roots(zeros, gain)?,
            Polynomial::from_roots(poles, 1.0)?,
        )
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg num - deg den`; `None` for the zero function.
    pub fn relative_degree(&self) -> Option<i64> {
        let dn = self.num.degree()? as i64;
        Some(dn - self.den.degree().unwrap_or(0) as i64)
    }

    /// True when `deg num <= deg den`.
    pub fn is_proper(&self) -> bool {
        self.relative_degree().is_none_or(|d| d <= 0)
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        self.num.roots()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    /// Ratio of leading coefficients.
    pub fn leading_ratio(&self) -> Option<f64> {
        self.num.leading()
    }

    /// Value at a complex point. A pole gives `Infinity`; a point where both
    /// polynomials vanish is reported as an unreduced common root.
    pub fn eval_s(&self, s: Complex64) -> Result<ExtendedComplex> {
        if self.num.is_zero() {
            return Ok(ExtendedComplex::ZERO);
        }
        let d = self.den.eval(s);
        let n = self.num.eval(s);
        let d_small = d.norm() <= ZERO_ULPS * f64::EPSILON * self.den.eval_scale(s);
        if d_small {
            let n_small = n.norm() <= ZERO_ULPS * f64::EPSILON * self.num.eval_scale(s);
            if n_small {
                return Err(Error::UnreducedCommonRoot { re: s.re, im: s.im });
            }
            return Ok(ExtendedComplex::Infinity);
        }
        Ok((n / d).into())
    }

    /// Value at `s = j omega`; `omega` may be infinite (the point at infinity
    /// is unsigned).
    pub fn eval(&self, omega: f64) -> Result<ExtendedComplex> {
        if omega.is_infinite() {
            Ok(self.value_at_infinity())
        } else {
            self.eval_s(Complex64::new(0.0, omega))
        }
    }

    pub fn value_at_infinity(&self) -> ExtendedComplex {
        match self.relative_degree() {
            None => ExtendedComplex::ZERO,
            Some(d) if d < 0 => ExtendedComplex::ZERO,
            Some(0) => ExtendedComplex::new(self.num.leading().unwrap_or(0.0), 0.0),
            Some(_) => ExtendedComplex::Infinity,
        }
    }

    pub fn checked_div(&self, rhs: &RationalFunction) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }

    pub fn recip(&self) -> Result<Self> {
        RationalFunction::constant(1.0).checked_div(self)
    }

    /// Cancels numerator/denominator root pairs that agree to within
    /// `tol * max(1, |root|)`, then rebuilds both sides from the surviving
    /// roots with the original leading-coefficient ratio.
    pub fn reduce(&self, tol: f64) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        let mut zeros = self.zeros();
        let mut poles = self.poles();
        let mut i = 0;
        let mut cancelled = false;
        while i < zeros.len() {
            let z = zeros[i];
            let hit = poles
                .iter()
                .enumerate()
                .filter(|(_, p)| (z - **p).norm() <= tol * p.norm().max(1.0))
                .min_by(|a, b| (z - a.1).norm().total_cmp(&(z - b.1).norm()))
                .map(|(j, _)| j);
            match hit {
                Some(j) => {
                    zeros.swap_remove(i);
                    poles.swap_remove(j);
                    cancelled = true;
                }
                None => i += 1,
            }
        }
        if !cancelled {
            return self.clone();
        }
        let gain = self.num.leading().unwrap_or(0.0);
        // Survivors are conjugate-closed because matched pairs were removed
        // symmetrically up to rounding; fall back to the input otherwise.
        Self::from_zpk(&zeros, &poles, gain).unwrap_or_else(|_| self.clone())
    }
}

/// `s^2 * plant_den_extra(s) / K(s)`, the chain element induced by a
/// controller `K` acting on a vehicle `1 / (s^2 plant_den_extra(s))`.
pub fn h_from_controller(
    k: &RationalFunction,
    plant_den_extra: &Polynomial,
) -> Result<RationalFunction> {
    if k.is_zero() {
        return Err(Error::invalid(
            "controller K is identically zero; h is undefined",
        ));
    }
    let s2 = Polynomial::monomial(1.0, 2);
    RationalFunction::from_poly(&s2 * plant_den_extra).checked_div(k)
}

impl Add for &RationalFunction {
    type Output = RationalFunction;

    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFunction::new(num, &self.den * &rhs.den)
            .expect("product of monic denominators is nonzero")
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;

    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        self + &(-rhs)
    }
}

impl Neg for &RationalFunction {
    type Output = RationalFunction;

    fn neg(self) -> RationalFunction {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;

    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction::new(&self.num * &rhs.num, &self.den * &rhs.den)
            .expect("product of monic denominators is nonzero")
    }
}

#[derive(Serialize)]
struct CoeffWire {
    num: Polynomial,
    den: Polynomial,
}

impl From<RationalFunction> for CoeffWire {
    fn from(r: RationalFunction) -> Self {
        CoeffWire {
            num: r.num,
            den: r.den,
        }
    }
}

/// Accepts either `{"num", "den"}` or `{"zeros", "poles", "gain"}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalWire {
    num: Option<Polynomial>,
    den: Option<Polynomial>,
    #[serde(default, with = "opt_complex_list")]
    zeros: Option<Vec<Complex64>>,
    #[serde(default, with = "opt_complex_list")]
    poles: Option<Vec<Complex64>>,
    gain: Option<f64>,
}

mod opt_complex_list {
    use super::*;
    use serde::Deserializer;

    #[derive(Deserialize)]
    struct List(#[serde(with = "complex_list")] Vec<Complex64>);

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<Complex64>>, D::Error> {
        Ok(Option::<List>::deserialize(d)?.map(|l| l.0))
    }
}

impl TryFrom<RationalWire> for RationalFunction {
    type Error = Error;

    fn try_from(w: RationalWire) -> Result<Self> {
        let coeff_form = w.num.is_some() || w.den.is_some();
        let zpk_form = w.zeros.is_some() || w.poles.is_some() || w.gain.is_some();
        match (coeff_form, zpk_form) {
            (true, true) => Err(Error::invalid(
                "rational function: use either num/den or zeros/poles/gain, not both",
            )),
            (true, false) => {
                let num = w
                    .num
                    .ok_or_else(|| Error::invalid("rational function: missing field `num`"))?;
                let den = w
                    .den
                    .ok_or_else(|| Error::invalid("rational function: missing field `den`"))?;
                RationalFunction::new(num, den)
            }
            (false, true) => {
                let gain = w
                    .gain
                    .ok_or_else(|| Error::invalid("rational function: missing field `gain`"))?;
                RationalFunction::from_zpk(
                    &w.zeros.unwrap_or_default(),
                    &w.poles.unwrap_or_default(),
                    gain,
                )
            }
            (false, false) => Err(Error::invalid(
                "rational function: expected fields num/den or zeros/poles/gain",
            )),
        }
    }
}
