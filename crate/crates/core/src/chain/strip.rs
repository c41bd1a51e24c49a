//! Does `h(s)` avoid the strip `(-4, 0)` on the closed right half plane?
//!
//! Two parts. The imaginary axis is sampled densely and checked directly.
//! The open right half plane is checked by the argument principle: for a
//! set of test values `c` in the strip, the number of solutions of
//! `h(s) = c` with `Re s > 0` is `P - W`, where `P` counts right-half-plane
//! poles of `h` and `W` is the counter-clockwise winding of `h(jw) - c` as
//! `w` runs up the axis and back around the large semicircle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ratfun::{ExtendedComplex, RationalFunction};

/// Test values used by the design check.
pub const DEFAULT_TEST_POINTS: usize = 64;
/// Log-spaced axis samples (plus `w = 0`).
const AXIS_SAMPLES: usize = 4000;
/// A sample lies on the strip when its imaginary part is this small
/// relative to its modulus.
const ON_STRIP_REL: f64 = 1e-9;
/// Poles this close to the axis (relative to `max(1, |p|)`) count as on it.
const AXIS_POLE_TOL: f64 = 1e-9;
const MAX_REFINE_DEPTH: u32 = 40;

/// Winding result for one test value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripTest {
    pub c: f64,
    pub winding: i64,
    pub rhp_solutions: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub ok: bool,
    pub rhp_poles: usize,
    /// Frequencies at which `h(jw)` was found on the strip. Contiguous runs
    /// of violating samples are reported by their first frequency.
    #[serde(with = "crate::serde_ext::real_vec")]
    pub violations: Vec<f64>,
    /// Empty when the axis check already failed.
    pub tests: Vec<StripTest>,
    pub omega_range: [f64; 2],
}

impl StripReport {
    /// The report itself when `ok`, otherwise the matching domain error.
    pub fn into_result(self) -> Result<StripReport> {
        if !self.violations.is_empty() {
            return Err(Error::StripViolation {
                omegas: self.violations,
            });
        }
        let bad: Vec<f64> = self
            .tests
            .iter()
            .filter(|t| t.rhp_solutions != 0)
            .map(|t| t.c)
            .collect();
        if !bad.is_empty() {
            return Err(Error::StripEncircled { values: bad });
        }
        Ok(self)
    }
}

fn on_strip(v: Complex64) -> bool {
    v.re > -4.0 && v.re < 0.0 && v.im.abs() <= ON_STRIP_REL * v.norm()
}

fn wrap(mut d: f64) -> f64 {
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

struct Axis<'a> {
    h: &'a RationalFunction,
}

impl Axis<'_> {
    fn at(&self, w: f64) -> Result<Complex64> {
        match self.h.eval(w)? {
            ExtendedComplex::Finite(v) => Ok(v),
            ExtendedComplex::Infinity => Err(Error::ImaginaryAxisPole { re: 0.0, im: w }),
        }
    }

    fn crossing(&self, mut lo: f64, mut hi: f64, im_lo: f64) -> Result<f64> {
        for _ in 0..100 {
            let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.at(mid)?;
            if v.im == 0.0 {
                return Ok(mid);
            }
            if (v.im > 0.0) == (im_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Unwrapped change of `arg(h(jw) - c)` from `w0` to `w1`.
    fn increment(
        &self,
        c: f64,
        w0: f64,
        v0: Complex64,
        w1: f64,
        v1: Complex64,
        depth: u32,
    ) -> Result<f64> {
        let d = wrap(v1.arg() - v0.arg());
        if d.abs() <= 0.5 * PI {
            return Ok(d);
        }
        let mid = if w0 > 0.0 { (w0 * w1).sqrt() } else { 0.5 * w1 };
        if depth == 0 || mid <= w0 || mid >= w1 {
            if d.abs() > PI - 1e-3 {
                return Err(Error::InconclusiveWinding(format!(
                    "phase of h(jw) - ({c}) jumps by {d:.3} rad near w = {w0:e}"
                )));
            }
            return Ok(d);
        }
        let vm = self.at(mid)? - c;
        Ok(self.increment(c, w0, v0, mid, vm, depth - 1)?
            + self.increment(c, mid, vm, w1, v1, depth - 1)?)
    }
}

fn sample_range(h: &RationalFunction) -> (f64, f64) {
    let mags: Vec<f64> = h
        .zeros()
        .into_iter()
        .chain(h.poles())
        .map(|r| r.norm())
        .filter(|m| *m > 0.0 && m.is_finite())
        .collect();
    let lo = mags.iter().copied().fold(1.0, f64::min) * 1e-3;
    let hi = mags.iter().copied().fold(1.0, f64::max) * 1e3;
    (lo, hi)
}

/// Run both checks with `n_test_points` test values
/// `c_k = -4 + 4 (k + 1/2) / n`.
pub fn strip_avoidance(h: &RationalFunction, n_test_points: usize) -> Result<StripReport> {
    if n_test_points == 0 {
        return Err(Error::invalid("need at least one strip test point"));
    }
    let poles = h.poles();
    if let Some(p) = poles
        .iter()
        .find(|p| p.re.abs() <= AXIS_POLE_TOL * p.norm().max(1.0))
    {
        return Err(Error::ImaginaryAxisPole { re: p.re, im: p.im });
    }
    let rhp_poles = poles.iter().filter(|p| p.re > 0.0).count();

    let (lo, hi) = sample_range(h);
    let (l, u) = (lo.log10(), hi.log10());
    let omegas: Vec<f64> = std::iter::once(0.0)
        .chain(
            (0..AXIS_SAMPLES)
                .map(|i| 10f64.powf(l + (u - l) * i as f64 / (AXIS_SAMPLES - 1) as f64)),
        )
        .collect();
    let axis = Axis { h };
    let values = omegas
        .iter()
        .map(|&w| axis.at(w))
        .collect::<Result<Vec<_>>>()?;

    let mut violations = Vec::new();
    let mut in_run = false;
    for (i, (&w, &v)) in omegas.iter().zip(&values).enumerate() {
        let hit = on_strip(v);
        if hit && !in_run {
            violations.push(w);
        }
        in_run = hit;
        if i + 1 < values.len() {
            let next = values[i + 1];
            if v.im != 0.0 && next.im != 0.0 && (v.im > 0.0) != (next.im > 0.0) {
                let wc = axis.crossing(w, omegas[i + 1], v.im)?;
                let re = axis.at(wc)?.re;
                if re > -4.0 && re < 0.0 && !hit && !on_strip(next) {
                    violations.push(wc);
                }
            }
        }
    }
    let at_inf = h.value_at_infinity();
    if let ExtendedComplex::Finite(v) = at_inf {
        if v.re > -4.0 && v.re < 0.0 {
            violations.push(f64::INFINITY);
        }
    }

    let mut tests = Vec::new();
    if violations.is_empty() {
        let d = h.relative_degree();
        for k in 0..n_test_points {
            let c = -4.0 + 4.0 * (k as f64 + 0.5) / n_test_points as f64;
            let mut theta = 0.0;
            for i in 0..omegas.len() - 1 {
                theta += axis.increment(
                    c,
                    omegas[i],
                    values[i] - c,
                    omegas[i + 1],
                    values[i + 1] - c,
                    MAX_REFINE_DEPTH,
                )?;
            }
            let last = *values.last().expect("axis samples are nonempty") - c;
            let lead = h.num().leading().unwrap_or(0.0);
            let asym = match d {
                Some(d) if d > 0 => Complex64::from_polar(1.0, d as f64 * 0.5 * PI) * lead,
                Some(0) => Complex64::new(lead - c, 0.0),
                _ => Complex64::new(-c, 0.0),
            };
            theta += wrap(asym.arg() - last.arg());
            let arc = d.filter(|d| *d > 0).unwrap_or(0) as f64 * PI;
            let turns = (2.0 * theta - arc) / (2.0 * PI);
            let winding = turns.round();
            if (turns - winding).abs() > 0.05 {
                return Err(Error::InconclusiveWinding(format!(
                    "{turns:.3} turns around c = {c}"
                )));
            }
            let winding = winding as i64;
            tests.push(StripTest {
                c,
                winding,
                rhp_solutions: rhp_poles as i64 - winding,
            });
        }
    }
    let ok = violations.is_empty() && tests.iter().all(|t| t.rhp_solutions == 0);
    Ok(StripReport {
        ok,
        rhp_poles,
        violations,
        tests,
        omega_range: [lo, hi],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bound::canonical_h;
    use crate::ratfun::{h_from_controller, Polynomial};
    use proptest::prelude::*;

    /// Right-half-plane roots of `num - c den`, counted directly.
    fn rhp_roots(h: &RationalFunction, c: f64) -> i64 {
        let p = h.num() - &h.den().scale(c);
        p.roots().iter().filter(|r| r.re > 1e-9).count() as i64
    }

    #[test]
    fn canonical_elements_avoid_the_strip() {
        for a in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let h = canonical_h(a).unwrap();
            let r = strip_avoidance(&h, 16).unwrap();
            assert!(r.ok, "a = {a}: {r:?}");
            for t in &r.tests {
                assert_eq!(t.rhp_solutions, rhp_roots(&h, t.c), "a = {a}, c = {}", t.c);
            }
        }
        // a = 2 has a right-half-plane pole; the count only balances with it.
        assert_eq!(
            strip_avoidance(&canonical_h(2.0).unwrap(), 4)
                .unwrap()
                .rhp_poles,
            1
        );
    }

    #[test]
    fn preset_controller_design_avoids_the_strip() {
        let k = RationalFunction::from_coeffs(&[0.5, 10.05, 1.0], &[1.0, 0.03, 0.0002]).unwrap();
        let h = h_from_controller(&k, &Polynomial::new(vec![1.0, 0.1])).unwrap();
        let r = strip_avoidance(&h, DEFAULT_TEST_POINTS).unwrap();
        assert!(r.ok, "{r:?}");
        assert!(r.into_result().is_ok());
    }

    #[test]
    fn constant_in_strip_is_a_boundary_violation() {
        let r = strip_avoidance(&RationalFunction::constant(-2.0), 8).unwrap();
        assert!(!r.ok);
        assert_eq!(r.violations[0], 0.0);
        assert!(matches!(r.into_result(), Err(Error::StripViolation { .. })));
        assert!(strip_avoidance(&RationalFunction::zero(), 8).unwrap().ok);
        assert!(
            strip_avoidance(&RationalFunction::constant(-4.0), 8)
                .unwrap()
                .ok
        );
    }

    #[test]
    fn crossing_between_samples_is_found() {
        // 2 (1 - s)/(1 + s) runs round a circle of radius 2, through -2 at w = inf.
        let h = RationalFunction::from_coeffs(&[2.0, -2.0], &[1.0, 1.0]).unwrap();
        let r = strip_avoidance(&h, 8).unwrap();
        assert_eq!(r.violations, vec![f64::INFINITY]);
        // 3 (s - 1)(s - 2)/((s + 1)(s + 2)) passes through -3 at w = sqrt(2).
        let h = RationalFunction::from_coeffs(&[6.0, -9.0, 3.0], &[2.0, 3.0, 1.0]).unwrap();
        let r = strip_avoidance(&h, 8).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert!(
            (r.violations[0] - 2f64.sqrt()).abs() < 1e-9,
            "{:?}",
            r.violations
        );
    }

    #[test]
    fn encirclement_is_detected() {
        // 10 (s - 1)/(s + 1) encloses the strip: h(s) = c at s = (10 + c)/(10 - c).
        let h = RationalFunction::from_coeffs(&[-10.0, 10.0], &[1.0, 1.0]).unwrap();
        let r = strip_avoidance(&h, 8).unwrap();
        assert!(r.violations.is_empty());
        assert!(r.tests.iter().all(|t| t.rhp_solutions == 1));
        assert!(matches!(r.into_result(), Err(Error::StripEncircled { .. })));
    }

    #[test]
    fn axis_poles_are_rejected() {
        let h = RationalFunction::from_coeffs(&[1.0], &[0.0, 1.0]).unwrap();
        assert!(matches!(
            strip_avoidance(&h, 4),
            Err(Error::ImaginaryAxisPole { .. })
        ));
        let h = RationalFunction::from_coeffs(&[1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            strip_avoidance(&h, 4),
            Err(Error::ImaginaryAxisPole { .. })
        ));
        assert!(strip_avoidance(&RationalFunction::constant(1.0), 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn winding_matches_root_count(
            zeros in prop::collection::vec(-5.0f64..5.0, 0..3),
            poles in prop::collection::vec(0.1f64..5.0, 1..3),
            sign in prop::sample::select(vec![-1.0, 1.0]),
            gain in 0.1f64..20.0,
        ) {
            let zs: Vec<Complex64> = zeros.iter().map(|&z| Complex64::new(z, 0.0)).collect();
            let ps: Vec<Complex64> = poles.iter().map(|&p| Complex64::new(sign * p, 0.0)).collect();
            let h = RationalFunction::from_zpk(&zs, &ps, gain).unwrap();
            if let Ok(r) = strip_avoidance(&h, 8) {
                for t in &r.tests {
                    prop_assert_eq!(t.rhp_solutions, rhp_roots(&h, t.c));
                }
            }
        }
    }
}
