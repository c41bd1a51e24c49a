//! The canonical chain element `h(s; a) = a^2 s^2 / ((1 - a) s^2 + 2 s + 1)`
//! and the length-independent pointwise bound `f(z)` built from it.
//!
//! For the canonical element every `F_N` satisfies `|F_N(jw)| <= a`. The
//! bound `f(z)` is the least `a` for which some frequency maps the canonical
//! element onto `z`, so `sup_N |F_N(s)| <= f(h(s))` for a general `h`.

pub mod oracle;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{iterate_final, FrequencyGrid};
use crate::error::{Error, Result};
use crate::ratfun::{ExtendedComplex, Polynomial, RationalFunction};
use crate::serde_ext::real;

/// Absolute residual (scaled by `max(1, |z|)`) a root-found candidate must
/// meet on the complex constraint.
pub const CANDIDATE_RESIDUAL_TOL: f64 = 1e-8;

/// `a^2 s^2 / ((1 - a) s^2 + 2 s + 1)`. At `a = 1` the denominator drops to
/// `2 s + 1`.
pub fn canonical_h(a: f64) -> Result<RationalFunction> {
    check_a(a)?;
    RationalFunction::new(
        Polynomial::monomial(a * a, 2),
        Polynomial::new(vec![1.0, 2.0, 1.0 - a]),
    )
}

/// The canonical element evaluated at `s = j omega`:
/// `-a^2 w^2 / (-(1 - a) w^2 + 2 j w + 1)`. At `omega = inf` this is
/// `a^2 / (1 - a)`, or the point at infinity when `a = 1`.
pub fn forward_map(a: f64, omega: f64) -> ExtendedComplex {
    if omega.is_infinite() {
        if a == 1.0 {
            return ExtendedComplex::Infinity;
        }
        return ExtendedComplex::new(a * a / (1.0 - a), 0.0);
    }
    let w2 = omega * omega;
    let den = Complex64::new((a - 1.0) * w2 + 1.0, 2.0 * omega);
    ExtendedComplex::Finite(Complex64::new(-a * a * w2, 0.0) / den)
}

/// The all-pass `z(jw) = sqrt((jw - 1)/(jw + 1)) = exp(j atan(1/w))`.
///
/// At `omega = 0` this returns the one-sided limit from `w -> 0+`, which is `j`.
pub fn allpass_z(omega: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::i();
    }
    if omega.is_infinite() {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, (1.0 / omega).atan())
}

/// `max_w |(2/a) F_N(jw) - z(jw)| - 1` over the grid with `h = canonical_h(a)`.
/// Non-positive whenever `(2/a) F_N(jw)` stays in the unit disc around the
/// all-pass.
pub fn disc_invariant_residual(a: f64, n: usize, grid: &FrequencyGrid) -> Result<f64> {
    check_a(a)?;
    let mut worst = f64::NEG_INFINITY;
    for omega in grid.points() {
        let fz = iterate_final(forward_map(a, omega), n);
        let r = match fz {
            ExtendedComplex::Finite(v) => (v * (2.0 / a) - allpass_z(omega)).norm() - 1.0,
            ExtendedComplex::Infinity => f64::INFINITY,
        };
        worst = worst.max(r);
    }
    Ok(worst)
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "a must be positive and finite, got {a}"
        )))
    }
}

/// One feasible `(a, omega)` pair: the canonical element with parameter `a`
/// takes the requested value at `s = j omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub a: f64,
    #[serde(with = "real")]
    pub omega: f64,
}

/// Result of minimising `a` over all feasible pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundWitness {
    pub a: f64,
    #[serde(with = "real")]
    pub omega: f64,
    pub candidates: Vec<Candidate>,
    /// False only at `z = 0`, where every `a > 0` is feasible and the
    /// reported `a = 0` is an infimum.
    pub attained: bool,
}

impl BoundWitness {
    fn from_candidates(candidates: Vec<Candidate>) -> Option<Self> {
        let best = *candidates.iter().min_by(|x, y| x.a.total_cmp(&y.a))?;
        Some(BoundWitness {
            a: best.a,
            omega: best.omega,
            candidates,
            attained: true,
        })
    }
}

/// Root-scan settings for [`BoundSolver::solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSolver {
    pub omega_min: f64,
    pub omega_max: f64,
    /// Log-spaced brackets over `[omega_min, omega_max]`.
    pub brackets: usize,
    /// Range tried, at the same bracket density, when the primary scan finds
    /// nothing (roots pushed out by a nearly real `z`).
    pub fallback_decades: (f64, f64),
}

impl Default for BoundSolver {
    fn default() -> Self {
        BoundSolver {
            omega_min: 1e-8,
            omega_max: 1e8,
            brackets: 2000,
            fallback_decades: (-30.0, 30.0),
        }
    }
}

impl BoundSolver {
    /// `f(z)` with its witnesses.
    ///
    /// Writing `z = x + jy`, the constraint `z ((a-1) w^2 + 1 + 2jw) = -a^2 w^2`
    /// splits into `a = 1 - 1/w^2 - 2x/(y w)` (imaginary part) and
    /// `a^2 w = 2|z|^2 / y` (real part combined with the imaginary part). A
    /// positive root needs `sign(w) = sign(y)` and then `a = sqrt(2|z|^2/(y w))`,
    /// so the feasible frequencies are exactly the roots of
    /// `1 - 1/w^2 - 2x/(y w) - sqrt(2|z|^2/(y w))`, which has no spurious
    /// `a < 0` branch. Real `z` is only reachable at `w = inf` (or `w = 0`
    /// for `z = 0`), where `z = a^2/(1 - a)`.
    pub fn solve(&self, z: ExtendedComplex) -> Result<BoundWitness> {
        let z = match z {
            ExtendedComplex::Infinity => {
                return Ok(BoundWitness {
                    a: 1.0,
                    omega: f64::INFINITY,
                    candidates: vec![Candidate {
                        a: 1.0,
                        omega: f64::INFINITY,
                    }],
                    attained: true,
                })
            }
            ExtendedComplex::Finite(z) => z,
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid(format!(
                "z must be finite or \"inf\", got {z}"
            )));
        }
        if ExtendedComplex::Finite(z).in_critical_strip() {
            return Err(Error::CriticalStrip { re: z.re, im: z.im });
        }
        if z.re == 0.0 && z.im == 0.0 {
            return Ok(BoundWitness {
                a: 0.0,
                omega: 0.0,
                candidates: Vec::new(),
                attained: false,
            });
        }
        let candidates = if z.im == 0.0 {
            infinity_branch(z.re)
        } else {
            let mut found = self.scan(
                z,
                self.omega_min.log10(),
                self.omega_max.log10(),
                self.brackets,
            );
            if found.is_empty() {
                let per_decade = self.brackets as f64 / (self.omega_max / self.omega_min).log10();
                let (lo, hi) = self.fallback_decades;
                let n = ((hi - lo) * per_decade).ceil() as usize;
                log::debug!("f_bound: primary scan empty for z = {z}, widening to 1e{lo}..1e{hi}");
                found = self.scan(z, lo, hi, n);
            }
            found
        };
        BoundWitness::from_candidates(candidates).ok_or(Error::Infeasible { re: z.re, im: z.im })
    }

    fn scan(&self, z: Complex64, log_lo: f64, log_hi: f64, brackets: usize) -> Vec<Candidate> {
        let (x, y) = (z.re, z.im);
        let sign = y.signum();
        let c = x / y;
        let k = 2.0 * z.norm_sqr() / y;
        let residual = |w: f64| {
            let u = 1.0 / w;
            (1.0 - u * u - 2.0 * c * u) - (k * u).sqrt()
        };
        let brackets = brackets.max(1);
        let step = (log_hi - log_lo) / brackets as f64;
        let omega_at = |i: usize| sign * 10f64.powf(log_lo + step * i as f64);

        let mut out = Vec::new();
        let mut push = |w: f64| {
            let a = (k / w).sqrt();
            if !(a > 0.0 && a.is_finite()) {
                return;
            }
            let r = match forward_map(a, w) {
                ExtendedComplex::Finite(v) => (v - z).norm(),
                ExtendedComplex::Infinity => f64::INFINITY,
            };
            if r <= CANDIDATE_RESIDUAL_TOL * z.norm().max(1.0) {
                out.push(Candidate { a, omega: w });
            } else {
                log::debug!("f_bound: dropped candidate a = {a}, w = {w}, residual {r:e}");
            }
        };

        // Two roots closer than one bracket leave no sign change but turn the
        // sampled |R| into a local minimum; those brackets are searched for
        // the extremum of R and split there.
        let samples: Vec<(f64, f64)> = (0..=brackets)
            .map(|i| {
                let w = omega_at(i);
                (w, residual(w))
            })
            .collect();
        for (i, &(w, r)) in samples.iter().enumerate() {
            if r == 0.0 {
                push(w);
                continue;
            }
            if i == 0 {
                continue;
            }
            let (w_prev, r_prev) = samples[i - 1];
            if r_prev != 0.0 && (r_prev < 0.0) != (r < 0.0) {
                push(bisect(&residual, w_prev, r_prev, w));
            } else if i + 1 < samples.len() {
                let (w_next, r_next) = samples[i + 1];
                let same = r_prev != 0.0
                    && r_next != 0.0
                    && (r_prev < 0.0) == (r < 0.0)
                    && (r < 0.0) == (r_next < 0.0);
                if same && r.abs() < r_prev.abs() && r.abs() < r_next.abs() {
                    let s = r.signum();
                    let wm = golden_min(&|w: f64| s * residual(w), w_prev, w_next);
                    let rm = residual(wm);
                    if rm == 0.0 {
                        push(wm);
                    } else if (rm < 0.0) != (r < 0.0) {
                        push(bisect(&residual, w_prev, r_prev, wm));
                        push(bisect(&residual, wm, rm, w_next));
                    }
                }
            }
        }
        out
    }
}

/// Minimiser of `f` on `[lo, hi]` (same sign), searched in `log|w|`.
fn golden_min(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let sign = lo.signum();
    let g = |t: f64| f(sign * t.exp());
    let (mut a, mut b) = (lo.abs().ln(), hi.abs().ln());
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..100 {
        if fc < fd {
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
        if b - a <= 1e-15 * b.abs().max(1.0) {
            break;
        }
    }
    sign * (0.5 * (a + b)).exp()
}

/// Bisection to full double precision (at least `|dw|/|w| <= 1e-12`).
fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut f_lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi || (hi - lo).abs() <= 2.0 * f64::EPSILON * mid.abs() {
            return mid;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive roots of `a^2 + x a - x = 0`, the `w = inf` branch for real `z = x`.
fn infinity_branch(x: f64) -> Vec<Candidate> {
    let disc = x * x + 4.0 * x;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    let mut roots = Vec::new();
    if x > 0.0 {
        // Product of the roots is -x < 0: a single positive root, written
        // without cancellation.
        roots.push(2.0 * x / (x + sq));
    } else {
        // x <= -4: both roots positive.
        let big = (-x + sq) / 2.0;
        roots.push(big);
        if sq > 0.0 {
            roots.push(-x / big);
        }
    }
    roots
        .into_iter()
        .filter(|a| *a > 0.0)
        .map(|a| Candidate {
            a,
            omega: f64::INFINITY,
        })
        .collect()
}

/// `f(z)` with the default solver.
pub fn f_bound(z: ExtendedComplex) -> Result<BoundWitness> {
    BoundSolver::default().solve(z)
}
