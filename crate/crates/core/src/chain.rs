//! Pointwise analysis of the chain family `F_N`.
//!
//! Every quantity here is computed frequency by frequency from the scalar
//! map `y -> (y + z) / (y + z + 1)` started at `y = 0`: with `z = h(jw)` the
//! iterates are `F_1(jw), F_2(jw), ...`.

mod strip;

pub use strip::{strip_avoidance, StripReport, StripTest, DEFAULT_TEST_POINTS};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::bound::f_bound;
use crate::error::{Error, Result};
use crate::ratfun::{ExtendedComplex, RationalFunction};
use crate::serde_ext::{fmt_real, real};

/// Denominator magnitude below which an iterate is recorded as a pole.
pub const NEAR_POLE_TOL: f64 = 1e-14;
/// Default early-stop tolerance of [`g_lower`].
pub const DEFAULT_EARLY_STOP: f64 = 1e-13;
/// Default iteration count of [`g_lower`] and [`eps_ratio`].
pub const DEFAULT_LOWER_BOUND_ITERATIONS: usize = 1_000_000;

/// Nonnegative sample frequencies (rad/s), strictly increasing, optionally
/// followed by the point at infinity. Negative frequencies follow by
/// conjugate symmetry and are never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridWire", into = "GridWire")]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
    include_infinity: bool,
}

impl FrequencyGrid {
    pub fn new(omegas: Vec<f64>, include_infinity: bool) -> Result<Self> {
        if omegas.is_empty() && !include_infinity {
            return Err(Error::invalid("frequency grid is empty"));
        }
        if let Some(w) = omegas.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!(
                "grid frequencies must be finite and nonnegative, got {w}"
            )));
        }
        if omegas.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::invalid(
                "grid frequencies must be strictly increasing",
            ));
        }
        Ok(FrequencyGrid {
            omegas,
            include_infinity,
        })
    }

    /// `points` log-spaced frequencies on `[min, max]`, optionally with 0 and
    /// infinity.
    pub fn log_spaced(
        min: f64,
        max: f64,
        points: usize,
        include_zero: bool,
        include_infinity: bool,
    ) -> Result<Self> {
        if !(min > 0.0 && max > min && max.is_finite()) {
            return Err(Error::invalid(format!(
                "need 0 < min < max, got [{min}, {max}]"
            )));
        }
        if points < 2 {
            return Err(Error::invalid("a log grid needs at least 2 points"));
        }
        let (l, h) = (min.log10(), max.log10());
        let mut omegas = Vec::with_capacity(points + 1);
        if include_zero {
            omegas.push(0.0);
        }
        omegas
            .extend((0..points).map(|i| 10f64.powf(l + (h - l) * i as f64 / (points - 1) as f64)));
        Self::new(omegas, include_infinity)
    }

    /// 2000 log-spaced points on `[1e-4, 1e4]` plus `0` and infinity.
    pub fn default_design() -> Self {
        Self::log_spaced(1e-4, 1e4, 2000, true, true).expect("static grid is valid")
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn include_infinity(&self) -> bool {
        self.include_infinity
    }

    pub fn len(&self) -> usize {
        self.omegas.len() + usize::from(self.include_infinity)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All grid points in order, infinity last as `f64::INFINITY`.
    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        self.omegas
            .iter()
            .copied()
            .chain(self.include_infinity.then_some(f64::INFINITY))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.points().collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridWire {
    omegas: Vec<f64>,
    include_infinity: bool,
}

impl TryFrom<GridWire> for FrequencyGrid {
    type Error = Error;

    fn try_from(w: GridWire) -> Result<Self> {
        FrequencyGrid::new(w.omegas, w.include_infinity)
    }
}

impl From<FrequencyGrid> for GridWire {
    fn from(g: FrequencyGrid) -> Self {
        GridWire {
            omegas: g.omegas,
            include_infinity: g.include_infinity,
        }
    }
}

/// Transfer-function values on a [`FrequencyGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseCurve {
    grid: FrequencyGrid,
    values: Vec<ExtendedComplex>,
}

impl ResponseCurve {
    pub fn new(grid: FrequencyGrid, values: Vec<ExtendedComplex>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "curve has {} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        Ok(ResponseCurve { grid, values })
    }

    /// `r(jw)` at every grid point.
    pub fn sample(r: &RationalFunction, grid: &FrequencyGrid) -> Result<Self> {
        let values = grid
            .points()
            .map(|w| r.eval(w))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid.clone(), values)
    }

    pub fn from_fn(grid: &FrequencyGrid, f: impl Fn(f64) -> ExtendedComplex) -> Self {
        let values = grid.points().map(f).collect();
        ResponseCurve {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[ExtendedComplex] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, ExtendedComplex)> + '_ {
        self.grid.points().zip(self.values.iter().copied())
    }

    /// Value at `-w` for the sample at index `i`, by conjugate symmetry.
    pub fn mirrored(&self, i: usize) -> ExtendedComplex {
        self.values[i].conj()
    }

    /// CSV with header `omega,re,im,abs`; non-finite entries print as `inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,re,im,abs\n");
        for (w, v) in self.iter() {
            match v {
                ExtendedComplex::Finite(z) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}",
                        w,
                        fmt_real(z.re),
                        fmt_real(z.im),
                        fmt_real(z.norm())
                    );
                }
                ExtendedComplex::Infinity => {
                    let _ = writeln!(out, "{w},inf,inf,inf");
                }
            }
        }
        out
    }
}

/// One application of `y -> (y + z) / (y + z + 1)` on the extended plane.
/// An infinite `y` or `z` maps to 1; a denominator within
/// [`NEAR_POLE_TOL`] of zero yields the point at infinity.
#[inline]
pub fn mobius_step(y: ExtendedComplex, z: ExtendedComplex) -> ExtendedComplex {
    match (y, z) {
        (ExtendedComplex::Finite(y), ExtendedComplex::Finite(z)) => {
            let n = y + z;
            let d = n + 1.0;
            if d.norm() < NEAR_POLE_TOL {
                ExtendedComplex::Infinity
            } else {
                ExtendedComplex::Finite(n / d)
            }
        }
        _ => ExtendedComplex::Finite(Complex64::new(1.0, 0.0)),
    }
}

/// `y_n` for the map started at `y_0 = 0`.
pub fn iterate_final(z: ExtendedComplex, n: usize) -> ExtendedComplex {
    (0..n).fold(ExtendedComplex::ZERO, |y, _| mobius_step(y, z))
}

/// `F_0, F_1, ..., F_N` on the grid of `h`, computed pointwise. Index `i`
/// of the result holds `F_i`.
pub fn iterate_f(h: &ResponseCurve, n: usize) -> Vec<ResponseCurve> {
    let mut out = Vec::with_capacity(n + 1);
    let mut current = vec![ExtendedComplex::ZERO; h.values.len()];
    out.push(ResponseCurve {
        grid: h.grid.clone(),
        values: current.clone(),
    });
    for _ in 0..n {
        for (y, z) in current.iter_mut().zip(&h.values) {
            *y = mobius_step(*y, *z);
        }
        out.push(ResponseCurve {
            grid: h.grid.clone(),
            values: current.clone(),
        });
    }
    out
}

/// `max_{1 <= N <= n} |F_N(jw)|` at every grid point of `h`.
pub fn max_modulus_over_chain(h: &ResponseCurve, n: usize) -> Vec<f64> {
    h.values
        .par_iter()
        .map(|&z| {
            let mut y = ExtendedComplex::ZERO;
            let mut best: f64 = 0.0;
            for _ in 0..n {
                y = mobius_step(y, z);
                best = best.max(y.norm());
            }
            best
        })
        .collect()
}

fn check_off_strip(z: ExtendedComplex) -> Result<()> {
    match z {
        ExtendedComplex::Finite(v) if z.in_critical_strip() => {
            Err(Error::CriticalStrip { re: v.re, im: v.im })
        }
        _ => Ok(()),
    }
}

/// `g_n(z) = max_{1 <= N <= n} |y_N|`, stopping once successive iterates
/// differ by less than `early_stop_tol` (the map has reached its attracting
/// fixed point, a root of `y^2 + z y - z = 0`).
pub fn g_lower(z: ExtendedComplex, n: usize, early_stop_tol: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("g_lower needs n >= 1"));
    }
    check_off_strip(z)?;
    let mut y = ExtendedComplex::ZERO;
    let mut best: f64 = 0.0;
    for _ in 0..n {
        let next = mobius_step(y, z);
        best = best.max(next.norm());
        let settled = match (y, next) {
            (ExtendedComplex::Finite(a), ExtendedComplex::Finite(b)) => {
                (b - a).norm() < early_stop_tol
            }
            _ => false,
        };
        y = next;
        if settled {
            break;
        }
    }
    Ok(best)
}

/// `eps_n(z) = f(z) / g_n(z)`: infinite when `g = 0 < f`, and 1 when both
/// vanish (`z = 0`).
pub fn eps_ratio(z: ExtendedComplex, n: usize) -> Result<f64> {
    let f = f_bound(z)?.a;
    let g = g_lower(z, n, DEFAULT_EARLY_STOP)?;
    Ok(ratio(f, g))
}

pub(crate) fn ratio(f: f64, g: f64) -> f64 {
    if g == 0.0 {
        if f == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        f / g
    }
}

/// Largest modulus on the grid. This is a lower estimate of the true
/// supremum; see [`hinf_estimate_refined`].
pub fn hinf_estimate(curve: &ResponseCurve) -> f64 {
    curve.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// [`hinf_estimate`] followed by one golden-section search on `|eval(w)|`
/// over the bracket formed by the neighbours of the gridded maximiser.
pub fn hinf_estimate_refined(curve: &ResponseCurve, eval: impl Fn(f64) -> ExtendedComplex) -> f64 {
    let pts = curve.grid.to_vec();
    let (idx, best) = curve.values.iter().map(|v| v.norm()).enumerate().fold(
        (0, f64::NEG_INFINITY),
        |acc, (i, m)| if m > acc.1 { (i, m) } else { acc },
    );
    if !best.is_finite() || pts.len() < 2 || pts[idx].is_infinite() {
        return best.max(0.0);
    }
    let lo = pts[idx.saturating_sub(1)];
    let hi = if pts[(idx + 1).min(pts.len() - 1)].is_finite() {
        pts[(idx + 1).min(pts.len() - 1)]
    } else {
        pts[idx]
    };
    if hi <= lo {
        return best;
    }
    let g = |w: f64| eval(w).norm();
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = g(d);
        }
        if (b - a).abs() <= 1e-12 * b.abs() {
            break;
        }
    }
    best.max(fc).max(fd)
}

/// One sample of the weighted bound curve `|W(jw)| f(h(jw))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    #[serde(with = "real")]
    pub omega: f64,
    #[serde(with = "real")]
    pub weight_abs: f64,
    pub h: ExtendedComplex,
    #[serde(with = "real")]
    pub f: f64,
    #[serde(with = "real")]
    pub value: f64,
}

/// Output of [`weighted_design_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCurve {
    #[serde(with = "real")]
    pub max: f64,
    #[serde(with = "real")]
    pub argmax_omega: f64,
    pub points: Vec<DesignPoint>,
}

impl DesignCurve {
    /// Whether the weighted bound meets the `<= 1` target on the grid.
    pub fn passes(&self) -> bool {
        self.max <= 1.0
    }

    /// CSV with header `omega,weight_abs,h_re,h_im,f,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega,weight_abs,h_re,h_im,f,value\n");
        for p in &self.points {
            let (re, im) = match p.h {
                ExtendedComplex::Finite(z) => (z.re, z.im),
                ExtendedComplex::Infinity => (f64::INFINITY, f64::INFINITY),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_real(p.omega),
                fmt_real(p.weight_abs),
                fmt_real(re),
                fmt_real(im),
                fmt_real(p.f),
                fmt_real(p.value)
            );
        }
        out
    }
}

/// `max_w |W(jw)| f(h(jw))` on the grid, after confirming that `h` keeps
/// out of the critical strip on the closed right half plane.
pub fn weighted_design_check(
    weight: &RationalFunction,
    h: &RationalFunction,
    grid: &FrequencyGrid,
) -> Result<DesignCurve> {
    let report = strip_avoidance(h, DEFAULT_TEST_POINTS)?;
    report.into_result()?;
    let omegas = grid.to_vec();
    let points = omegas
        .par_iter()
        .map(|&w| -> Result<DesignPoint> {
            let hv = h.eval(w)?;
            let weight_abs = weight.eval(w)?.norm();
            let f = match f_bound(hv) {
                Ok(wit) => wit.a,
                Err(Error::CriticalStrip { .. }) => {
                    return Err(Error::StripViolation { omegas: vec![w] })
                }
                Err(e) => return Err(e),
            };
            let value = if weight_abs == 0.0 {
                0.0
            } else {
                weight_abs * f
            };
            Ok(DesignPoint {
                omega: w,
                weight_abs,
                h: hv,
                f,
                value,
            })
        })
        .collect::<Vec<_>>();
    let mut offending = Vec::new();
    let mut ok = Vec::with_capacity(points.len());
    for p in points {
        match p {
            Ok(p) => ok.push(p),
            Err(Error::StripViolation { omegas }) => offending.extend(omegas),
            Err(e) => return Err(e),
        }
    }
    if !offending.is_empty() {
        return Err(Error::StripViolation { omegas: offending });
    }
    let (max, argmax_omega) = ok.iter().fold((f64::NEG_INFINITY, f64::NAN), |acc, p| {
        if p.value > acc.0 {
            (p.value, p.omega)
        } else {
            acc
        }
    });
    Ok(DesignCurve {
        max,
        argmax_omega,
        points: ok,
    })
}
