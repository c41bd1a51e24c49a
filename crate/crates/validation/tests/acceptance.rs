//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line; the
//! binary exits nonzero if any criterion fails.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use scalefree::atlas::{compute_atlas, Window};
use scalefree::bound::oracle::{f_bound_oracle, OracleGrid};
use scalefree::bound::{disc_invariant_residual, f_bound, forward_map};
use scalefree::chain::{
    g_lower, iterate_f, max_modulus_over_chain, strip_avoidance, FrequencyGrid, ResponseCurve,
    DEFAULT_EARLY_STOP, DEFAULT_TEST_POINTS,
};
use scalefree::design::preset;
use scalefree::platoon::{direct_frequency_response, simulate, DisturbanceSpec, SimulationResult};
use scalefree::ratfun::{h_from_controller, ExtendedComplex};

const PARAMETERS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 5.0];
const SEED: u64 = 0x5ca1_ef4e;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { name, pass, detail }
}

fn bound_grid() -> FrequencyGrid {
    FrequencyGrid::log_spaced(1e-6, 1e6, 2000, true, true).unwrap()
}

fn canonical_bound() -> Outcome {
    let grid = bound_grid();
    let mut worst = f64::NEG_INFINITY;
    for a in PARAMETERS {
        let h = ResponseCurve::from_fn(&grid, |w| forward_map(a, w));
        let m = max_modulus_over_chain(&h, 200)
            .into_iter()
            .fold(0.0, f64::max);
        worst = worst.max(m - a);
    }
    outcome(
        "canonical element bound: max_N<=200 |F_N| <= a",
        worst <= 1e-9,
        format!("worst max|F_N| - a = {worst:.3e} (tol 1e-9)"),
    )
}

fn disc_invariant() -> Outcome {
    let grid = bound_grid();
    let mut worst = f64::NEG_INFINITY;
    for a in PARAMETERS {
        for n in [1, 10, 100] {
            worst = worst.max(disc_invariant_residual(a, n, &grid).unwrap());
        }
    }
    outcome(
        "disc invariant",
        worst <= 1e-9,
        format!("worst residual {worst:.3e} (tol 1e-9)"),
    )
}

fn closed_forms() -> Outcome {
    let at = |re: f64| f_bound(ExtendedComplex::new(re, 0.0)).unwrap();
    let minus4 = at(-4.0);
    let zero = at(0.0);
    let big = at(1e6);
    let pass = (minus4.a - 2.0).abs() <= 1e-9
        && zero.a == 0.0
        && !zero.attained
        && (big.a - 1.0).abs() <= 1e-2;
    outcome(
        "f closed-form values",
        pass,
        format!(
            "f(-4) = {}, f(0) = {} (attained: {}), f(1e6) = {}",
            minus4.a, zero.a, zero.attained, big.a
        ),
    )
}

fn samples() -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut out = Vec::with_capacity(100);
    while out.len() < 100 {
        let z = Complex64::new(rng.gen_range(-8.0..4.0), rng.gen_range(-6.0..6.0));
        if !ExtendedComplex::Finite(z).in_critical_strip() {
            out.push(z);
        }
    }
    out
}

fn oracle_agreement(zs: &[Complex64]) -> Outcome {
    let start = Instant::now();
    let grid = OracleGrid::with_density(2000);
    let errors: Vec<(Complex64, f64, Result<f64, String>)> = zs
        .par_iter()
        .map(|&z| {
            let f = f_bound(ExtendedComplex::Finite(z)).unwrap().a;
            (z, f, f_bound_oracle(z, &grid).map_err(|e| e.to_string()))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut worst_z = Complex64::new(0.0, 0.0);
    let mut missing = 0;
    for (z, f, o) in &errors {
        match o {
            Ok(o) => {
                let rel = (f - o).abs() / f;
                if rel > worst {
                    worst = rel;
                    worst_z = *z;
                }
            }
            Err(_) => missing += 1,
        }
    }
    outcome(
        "oracle agreement",
        worst <= 1e-2 && missing == 0,
        format!(
            "worst relative error {worst:.3e} at z = {worst_z} (tol 1e-2), {missing} unresolved, {:.1} s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn sandwich(zs: &[Complex64]) -> Outcome {
    let rows: Vec<(f64, f64)> = zs
        .par_iter()
        .map(|&z| {
            let z = ExtendedComplex::Finite(z);
            let f = f_bound(z).unwrap().a;
            let g = g_lower(z, 1_000_000, DEFAULT_EARLY_STOP).unwrap();
            (f, g)
        })
        .collect();
    let above = rows.iter().filter(|(f, g)| *g > f + 1e-9).count();
    let eps: Vec<f64> = rows.iter().map(|(f, g)| f / g).collect();
    let below_one = eps.iter().filter(|e| **e < 1.0 - 1e-9).count();
    let within_two = eps.iter().filter(|e| **e <= 2.0).count();
    let max_eps = eps.iter().copied().fold(0.0, f64::max);
    outcome(
        "sandwich g_n <= f, eps >= 1",
        above == 0 && below_one == 0,
        format!(
            "{above} samples with g > f + 1e-9, {below_one} with eps < 1; eps <= 2 on {within_two}/100 \
             (soft target 80), max eps {max_eps:.3}"
        ),
    )
}

fn recursion_vs_direct() -> Outcome {
    let k = preset::controller();
    let extra = preset::plant_den_extra();
    let h = h_from_controller(&k, &extra).unwrap();
    let grid = FrequencyGrid::log_spaced(1e-3, 1e2, 50, false, false).unwrap();
    let curve = ResponseCurve::sample(&h, &grid).unwrap();
    let fs = iterate_f(&curve, 50);
    let mut worst = 0.0f64;
    for n in [1, 2, 5, 20, 50] {
        for (i, w) in grid.points().enumerate() {
            let direct = direct_frequency_response(n, &k, &extra, w).unwrap();
            let rec = fs[n].values()[i].finite().unwrap();
            worst = worst.max((direct - rec).norm());
        }
    }
    outcome(
        "recursion vs direct solve",
        worst <= 1e-8,
        format!("worst |difference| {worst:.3e} (tol 1e-8)"),
    )
}

fn platoon_strip() -> Outcome {
    let h = h_from_controller(&preset::controller(), &preset::plant_den_extra()).unwrap();
    match strip_avoidance(&h, DEFAULT_TEST_POINTS) {
        Ok(r) => outcome(
            "platoon design avoids the strip",
            r.ok,
            format!(
                "{} violations, {} right-half-plane poles, {} test values",
                r.violations.len(),
                r.rhp_poles,
                r.tests.len()
            ),
        ),
        Err(e) => outcome("platoon design avoids the strip", false, e.to_string()),
    }
}

fn peak(r: &SimulationResult) -> f64 {
    r.spacings[0]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn suppression() -> [Outcome; 2] {
    let start = Instant::now();
    let sizes = [5usize, 10, 20, 50];
    let runs: Vec<SimulationResult> = sizes
        .par_iter()
        .map(|&n| simulate(&preset::platoon_config(n)).unwrap())
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    let peaks: Vec<f64> = runs.iter().map(peak).collect();
    let ends: Vec<f64> = runs
        .iter()
        .map(|r| *r.spacings[0].last().unwrap())
        .collect();
    let rel = (peaks[2] - peaks[3]).abs() / peaks[3];
    let worst_end = ends.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let table = |v: &[f64]| {
        sizes
            .iter()
            .zip(v)
            .map(|(n, x)| format!("N={n}: {x:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    [
        outcome(
            "scale-free suppression: peak first spacing, N=20 vs N=50",
            rel <= 1e-2,
            format!(
                "relative difference {rel:.4} (tol 0.01); peaks {}; {elapsed:.1} s for four runs",
                table(&peaks)
            ),
        ),
        outcome(
            "scale-free suppression: first spacing within 0.01 of 0 at t=100",
            worst_end <= 1e-2,
            format!("worst |spacing_1(100)| = {worst_end:.4}; {}", table(&ends)),
        ),
    ]
}

fn time_frequency() -> Outcome {
    let w = 0.5;
    let period = 2.0 * std::f64::consts::PI / w;
    let mut config = preset::platoon_config(10);
    config.disturbance = DisturbanceSpec::Sine {
        amplitude: 1.0,
        omega: w,
        phase: 0.0,
    };
    config.t_final = 10.0 * period;
    let r = simulate(&config).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (t, s) in r.times.iter().zip(&r.spacings[0]) {
        if *t >= 5.0 * period {
            lo = lo.min(*s);
            hi = hi.max(*s);
        }
    }
    let simulated = 0.5 * (hi - lo);
    let h = h_from_controller(&preset::controller(), &preset::plant_den_extra()).unwrap();
    let predicted = scalefree::chain::iterate_final(h.eval(w).unwrap(), 10).norm();
    let rel = (simulated - predicted).abs() / predicted;
    outcome(
        "time/frequency consistency at w = 0.5, N = 10",
        rel <= 2e-2,
        format!("simulated amplitude {simulated:.6}, |F_10(j0.5)| = {predicted:.6}, relative {rel:.2e} (tol 0.02)"),
    )
}

fn atlas_determinism() -> Outcome {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let g = compute_atlas(&Window::default(), 100, 100, 10_000).unwrap();
            (g.to_csv(), g.to_json())
        })
    };
    let a = run(1);
    let b = run(4);
    let c = run(4);
    let pass = a == b && b == c;
    outcome(
        "atlas determinism across runs and thread counts",
        pass,
        format!(
            "100x100 exports: csv {} bytes, json {} bytes, identical: {pass}",
            a.0.len(),
            a.1.len()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let zs = samples();
    let mut results = vec![
        canonical_bound(),
        disc_invariant(),
        closed_forms(),
        oracle_agreement(&zs),
        sandwich(&zs),
        recursion_vs_direct(),
        platoon_strip(),
    ];
    results.extend(suppression());
    results.push(time_frequency());
    results.push(atlas_determinism());

    let mut failed = 0;
    for r in &results {
        println!(
            "{} {}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        failed += usize::from(!r.pass);
    }
    println!(
        "acceptance: {} passed, {} failed, {:.1} s",
        results.len() - failed,
        failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
