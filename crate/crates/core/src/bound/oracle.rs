//! Brute-force reference for `f(z)`.
//!
//! Samples the forward map `(a, w) -> -a^2 w^2 / ((a - 1) w^2 + 1 + 2 j w)` on
//! a dense log grid and returns the smallest `a` whose image cell contains
//! `z`. No root finding is involved; tests use it to check [`super::f_bound`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Grid extents of the oracle.
#[derive(Debug, Clone, Copy)]
pub struct OracleGrid {
    pub a_range: (f64, f64),
    pub omega_range: (f64, f64),
    pub a_points: usize,
    pub omega_points: usize,
}

impl OracleGrid {
    /// `a` in `logspace[1e-3, 1e3]`, `|w|` in `logspace[1e-6, 1e6]`, plus
    /// `w = 0` and `w = inf`, at `density x density` samples.
    pub fn with_density(density: usize) -> Self {
        OracleGrid {
            a_range: (1e-3, 1e3),
            omega_range: (1e-6, 1e6),
            a_points: density,
            omega_points: density,
        }
    }
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l, h) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(l + (h - l) * i as f64 / (n - 1).max(1) as f64))
        .collect()
}

// Written out independently of `bound::forward_map`.
fn image(a: f64, w: f64) -> Option<Complex64> {
    if w.is_infinite() {
        return (a != 1.0).then(|| Complex64::new(a * a / (1.0 - a), 0.0));
    }
    let s = Complex64::new(0.0, w);
    let v = (s * s * a * a) / (s * s * (1.0 - a) + s * 2.0 + 1.0);
    v.is_finite().then_some(v)
}

/// Even-odd crossing test against the closed polygon `poly`.
fn inside(poly: &[Complex64; 4], z: Complex64) -> bool {
    let mut crossings = false;
    for i in 0..4 {
        let p = poly[i];
        let q = poly[(i + 1) % 4];
        if (p.im > z.im) != (q.im > z.im) {
            let t = (z.im - p.im) / (q.im - p.im);
            if z.re < p.re + t * (q.re - p.re) {
                crossings = !crossings;
            }
        }
    }
    crossings
}

fn split(lo: f64, hi: f64) -> f64 {
    if lo == 0.0 || hi == 0.0 {
        0.5 * (lo + hi)
    } else {
        lo.signum() * (lo * hi).sqrt()
    }
}

/// Confirms a polygon hit by recursive 2x2 subdivision of the parameter
/// cell until the image is small next to `|z|`. Cells whose image swings across a large
/// arc (near `a = 1` at high frequency) produce spurious polygon hits that
/// this rejects.
fn confirm(a: (f64, f64), w: (f64, f64), z: Complex64, depth: u32) -> bool {
    let corners = [
        image(a.0, w.0),
        image(a.0, w.1),
        image(a.1, w.1),
        image(a.1, w.0),
    ];
    let quad = match corners {
        [Some(p), Some(q), Some(r), Some(s)] => [p, q, r, s],
        _ => return false,
    };
    if !inside(&quad, z) {
        return false;
    }
    let diam = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
        .map(|(i, j)| (quad[i] - quad[j]).norm())
        .fold(0.0, f64::max);
    if depth == 0 || diam <= 0.1 * z.norm().max(1.0) {
        return true;
    }
    let (am, wm) = (split(a.0, a.1), split(w.0, w.1));
    [
        ((a.0, am), (w.0, wm)),
        ((a.0, am), (wm, w.1)),
        ((am, a.1), (w.0, wm)),
        ((am, a.1), (wm, w.1)),
    ]
    .into_iter()
    .any(|(sa, sw)| confirm(sa, sw, z, depth - 1))
}

/// Smallest `a` on the grid that reproduces `z`.
///
/// Cells of the `(a, w)` grid map to image quadrilaterals; the first row (in
/// increasing `a`) with a confirmed quadrilateral containing `z` yields the
/// geometric midpoint of its `a` interval. On the real `w = inf` branch, which carries
/// no area, a node counts as a hit when `z` is within half its largest
/// neighbour spacing.
pub fn f_bound_oracle(z: Complex64, grid: &OracleGrid) -> Result<f64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid("oracle needs a finite z"));
    }
    if z.im == 0.0 && z.re > -4.0 && z.re < 0.0 {
        return Err(Error::CriticalStrip { re: z.re, im: z.im });
    }
    let a_grid = logspace(grid.a_range.0, grid.a_range.1, grid.a_points);
    let w_pos = logspace(grid.omega_range.0, grid.omega_range.1, grid.omega_points);
    // Two signed sweeps, each 0, +-w_1, ..., +-w_n, inf; cells join
    // neighbouring columns within a sweep.
    let sweeps: Vec<Vec<f64>> = [1.0, -1.0]
        .iter()
        .map(|sign| {
            std::iter::once(0.0)
                .chain(w_pos.iter().map(|w| sign * w))
                .chain(std::iter::once(f64::INFINITY))
                .collect()
        })
        .collect();
    let rows = |a: f64| -> Vec<Vec<Option<Complex64>>> {
        sweeps
            .iter()
            .map(|sw| sw.iter().map(|&w| image(a, w)).collect())
            .collect()
    };
    let inf_col = w_pos.len() + 1;
    let real_z = z.im == 0.0;

    let mut below = rows(a_grid[0]);
    let mut prev_inf: Option<Complex64> = None;
    for i in 0..a_grid.len() {
        let above = (i + 1 < a_grid.len()).then(|| rows(a_grid[i + 1]));

        if real_z {
            if let Some(v) = below[0][inf_col] {
                let mut spacing: f64 = 0.0;
                if let Some(p) = prev_inf {
                    spacing = spacing.max((v - p).norm());
                }
                if let Some(Some(n)) = above.as_ref().map(|r| r[0][inf_col]) {
                    spacing = spacing.max((v - n).norm());
                }
                if (v - z).norm() <= 0.5 * spacing {
                    return Ok(a_grid[i]);
                }
            }
            if z.re == 0.0 {
                return Ok(a_grid[i]);
            }
        }

        if let Some(up) = &above {
            // Between a_i < 1 < a_{i+1} the w = inf images jump from +inf to
            // -inf; that cell wraps through infinity and is skipped.
            let wraps = (a_grid[i] - 1.0) * (a_grid[i + 1] - 1.0) <= 0.0;
            for ((lo_row, hi_row), sweep) in below.iter().zip(up).zip(&sweeps) {
                for j in 0..inf_col {
                    if wraps && j + 1 == inf_col {
                        continue;
                    }
                    let quad = match (lo_row[j], lo_row[j + 1], hi_row[j + 1], hi_row[j]) {
                        (Some(p), Some(q), Some(r), Some(s)) => [p, q, r, s],
                        _ => continue,
                    };
                    let (lo_re, hi_re) = quad
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), c| {
                            (l.min(c.re), h.max(c.re))
                        });
                    if z.re < lo_re || z.re > hi_re {
                        continue;
                    }
                    let finite_cell = j + 1 < inf_col;
                    if inside(&quad, z)
                        && (!finite_cell
                            || confirm((a_grid[i], a_grid[i + 1]), (sweep[j], sweep[j + 1]), z, 40))
                    {
                        return Ok((a_grid[i] * a_grid[i + 1]).sqrt());
                    }
                }
            }
        }

        prev_inf = below[0][inf_col];
        match above {
            Some(r) => below = r,
            None => break,
        }
    }
    Err(Error::InsufficientDensity { re: z.re, im: z.im })
}
