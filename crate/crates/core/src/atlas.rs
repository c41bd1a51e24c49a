//! `f`, `g_n` and `eps_n` rasterised over a rectangle of the complex plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::bound::f_bound;
use crate::chain::{g_lower, ratio, DEFAULT_EARLY_STOP};
use crate::error::{Error, Result};
use crate::ratfun::ExtendedComplex;
use crate::serde_ext::{fmt_real, real_opt};

/// Axis-aligned window `[re_min, re_max] x [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_range: [f64; 2],
    pub im_range: [f64; 2],
}

impl Default for Window {
    fn default() -> Self {
        Window {
            re_range: [-8.0, 4.0],
            im_range: [-6.0, 6.0],
        }
    }
}

impl Window {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("re", self.re_range), ("im", self.im_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!(
                    "{name} range must satisfy min < max, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtlasCell {
    pub re: f64,
    pub im: f64,
    #[serde(with = "real_opt")]
    pub f: Option<f64>,
    #[serde(with = "real_opt")]
    pub g: Option<f64>,
    #[serde(with = "real_opt")]
    pub eps: Option<f64>,
    pub in_strip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasGrid {
    pub re_range: [f64; 2],
    pub im_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub n_iter: usize,
    /// Cell values that could not be computed and were stored as NaN.
    pub failures: usize,
    /// Row-major: `cells[j * nx + i]` is column `i` of row `j`, rows in
    /// increasing imaginary part.
    pub cells: Vec<AtlasCell>,
}

fn eval_cell(re: f64, im: f64, n_iter: usize, row_straddles_axis: bool) -> (AtlasCell, usize) {
    let in_strip = row_straddles_axis && re > -4.0 && re < 0.0;
    if in_strip {
        return (
            AtlasCell {
                re,
                im,
                f: None,
                g: None,
                eps: None,
                in_strip,
            },
            0,
        );
    }
    let z = ExtendedComplex::new(re, im);
    let mut failures = 0;
    let f = f_bound(z).map(|w| w.a).unwrap_or_else(|e| {
        log::debug!("atlas: f failed at {re} + {im}j: {e}");
        failures += 1;
        f64::NAN
    });
    let g = g_lower(z, n_iter, DEFAULT_EARLY_STOP).unwrap_or_else(|e| {
        log::debug!("atlas: g failed at {re} + {im}j: {e}");
        failures += 1;
        f64::NAN
    });
    let eps = ratio(f, g);
    (
        AtlasCell {
            re,
            im,
            f: Some(f),
            g: Some(g),
            eps: Some(eps),
            in_strip,
        },
        failures,
    )
}

/// Evaluate every cell centre of an `nx x ny` subdivision of `window`.
pub fn compute_atlas(window: &Window, nx: usize, ny: usize, n_iter: usize) -> Result<AtlasGrid> {
    window.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::invalid(format!(
            "resolution must be positive, got {nx} x {ny}"
        )));
    }
    if n_iter == 0 {
        return Err(Error::invalid("n_iter must be at least 1"));
    }
    let [re_lo, re_hi] = window.re_range;
    let [im_lo, im_hi] = window.im_range;
    let dx = (re_hi - re_lo) / nx as f64;
    let dy = (im_hi - im_lo) / ny as f64;
    let results: Vec<(AtlasCell, usize)> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % nx, idx / nx);
            let re = re_lo + (i as f64 + 0.5) * dx;
            let im = im_lo + (j as f64 + 0.5) * dy;
            // Row edges from the same formula, so a row whose edge lands on
            // the axis is treated like its mirror image.
            let straddles = im_lo + j as f64 * dy < 0.0 && im_lo + (j + 1) as f64 * dy > 0.0;
            eval_cell(re, im, n_iter, straddles)
        })
        .collect();
    let failures = results.iter().map(|r| r.1).sum();
    Ok(AtlasGrid {
        re_range: window.re_range,
        im_range: window.im_range,
        nx,
        ny,
        n_iter,
        failures,
        cells: results.into_iter().map(|r| r.0).collect(),
    })
}

impl AtlasGrid {
    /// CSV with header `re,im,f,g,eps,in_strip`; strip cells are omitted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,f,g,eps,in_strip\n");
        let show = |v: Option<f64>| fmt_real(v.unwrap_or(f64::NAN));
        for c in self.cells.iter().filter(|c| !c.in_strip) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.re,
                c.im,
                show(c.f),
                show(c.g),
                show(c.eps),
                c.in_strip
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("atlas serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(re: [f64; 2], im: [f64; 2]) -> Window {
        Window {
            re_range: re,
            im_range: im,
        }
    }

    #[test]
    fn small_window_is_sandwiched() {
        let g = compute_atlas(&win([1.0, 2.0], [1.0, 2.0]), 2, 2, 10_000).unwrap();
        assert_eq!(g.cells.len(), 4);
        assert_eq!(g.failures, 0);
        for c in &g.cells {
            assert!(!c.in_strip);
            assert!(c.g.unwrap() <= c.f.unwrap() + 1e-9);
            assert!(c.eps.unwrap() >= 1.0 - 1e-9);
        }
        assert_eq!((g.cells[1].re, g.cells[1].im), (1.75, 1.25));
    }

    #[test]
    fn cell_next_to_minus_four() {
        // Centres at im = +-0.005, re = -4.005: just off the strip end.
        let g = compute_atlas(&win([-4.01, -4.0], [-0.01, 0.01]), 1, 2, 1000).unwrap();
        for c in &g.cells {
            let f = c.f.unwrap();
            assert!(f > 1.9 && f < 2.3, "{f}");
        }
    }

    #[test]
    fn window_inside_strip() {
        let g = compute_atlas(&win([-3.0, -1.0], [-0.1, 0.1]), 5, 1, 10).unwrap();
        assert!(g.cells.iter().all(|c| c.in_strip));
        assert_eq!(g.to_csv(), "re,im,f,g,eps,in_strip\n");
    }

    #[test]
    fn strip_rows_are_symmetric() {
        // Even row count: the axis is a row edge, so no row straddles it.
        let even = compute_atlas(&win([-1.0, 1.0], [-1.0, 1.0]), 10, 10, 100).unwrap();
        assert!(even.cells.iter().all(|c| !c.in_strip));
        let odd = compute_atlas(&win([-1.0, 1.0], [-1.0, 1.0]), 10, 9, 100).unwrap();
        let strip: Vec<usize> = (0..odd.cells.len())
            .filter(|&k| odd.cells[k].in_strip)
            .collect();
        assert_eq!(strip, (40..45).collect::<Vec<_>>());
    }

    #[test]
    fn single_cell_csv() {
        let g = compute_atlas(&win([0.5, 1.5], [-0.5, 0.5]), 1, 1, 1000).unwrap();
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        let fields: Vec<f64> = lines[1]
            .split(',')
            .take(5)
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!((fields[0], fields[1]), (1.0, 0.0));
        assert!(fields[3] <= fields[2]);
    }

    #[test]
    fn json_round_trip_is_identity() {
        let g = compute_atlas(&win([-6.0, 2.0], [-1.0, 1.0]), 7, 4, 100).unwrap();
        let text = g.to_json();
        let back: AtlasGrid = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.to_csv(), g.to_csv());
    }

    #[test]
    fn validation() {
        assert!(compute_atlas(&win([1.0, 0.0], [0.0, 1.0]), 2, 2, 1).is_err());
        assert!(compute_atlas(&win([0.0, 1.0], [0.0, 1.0]), 0, 2, 1).is_err());
        assert!(compute_atlas(&win([0.0, 1.0], [0.0, 1.0]), 2, 2, 0).is_err());
    }

    #[test]
    fn refinement_keeps_coincident_centres() {
        // Tripling keeps every coarse centre as a fine centre.
        let w = win([-5.0, 1.0], [-3.0, 3.0]);
        let coarse = compute_atlas(&w, 4, 4, 1000).unwrap();
        let fine = compute_atlas(&w, 12, 12, 1000).unwrap();
        for j in 0..4 {
            for i in 0..4 {
                let a = coarse.cells[j * 4 + i];
                let b = fine.cells[(3 * j + 1) * 12 + 3 * i + 1];
                assert!((a.re - b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12);
                if !a.in_strip {
                    let (fa, fb) = (a.f.unwrap(), b.f.unwrap());
                    assert!((fa - fb).abs() <= 1e-12 * fa.max(1.0), "{fa} {fb}");
                }
            }
        }
    }
}
