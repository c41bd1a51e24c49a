//! Symmetric bidirectional vehicle platoon.
//!
//! Vehicle `i` obeys `x_i = u_i / (m s^2 (tau s + 1))` with
//! `u_i = K(s) e_i`, where `e_i = (x_{i+1} - x_i) - (x_i - x_{i-1})` for
//! interior vehicles and `e_N = x_{N-1} - x_N` for the last one. The lead
//! position `x_0(t)` is the exogenous input. All positions are relative to
//! the nominal constant-velocity trajectory.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ratfun::{ExtendedComplex, Polynomial, RationalFunction};

/// Absolute state magnitude treated as divergence.
pub const BLOWUP_THRESHOLD: f64 = 1e9;
/// Upper bound on output samples unless raw output is requested.
pub const MAX_OUTPUT_POINTS: usize = 10_000;
pub const DEFAULT_DT: f64 = 2e-4;

/// Lead-vehicle trajectory `x_0(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceSpec {
    /// `amplitude / (1 + exp(-rate t + offset))` for `t >= 0`, else 0.
    Sigmoid {
        #[serde(default = "default_rate")]
        rate: f64,
        #[serde(default = "default_offset")]
        offset: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// `amplitude` from `time` on.
    Step {
        #[serde(default)]
        time: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Piecewise-linear through the samples, held constant outside them.
    Table { times: Vec<f64>, values: Vec<f64> },
    /// `amplitude sin(omega t + phase)` for `t >= 0`.
    Sine {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
}

fn default_rate() -> f64 {
    0.2
}

fn default_offset() -> f64 {
    8.0
}

fn default_amplitude() -> f64 {
    1.0
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        DisturbanceSpec::Sigmoid {
            rate: 0.2,
            offset: 8.0,
            amplitude: 1.0,
        }
    }
}

/// The lead-vehicle manoeuvre `1 / (1 + exp(-0.2 t + 8))`, zero for `t < 0`.
pub fn sigmoid_disturbance(t: f64) -> f64 {
    DisturbanceSpec::default().eval(t)
}

impl DisturbanceSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DisturbanceSpec::Sigmoid {
                rate,
                offset,
                amplitude,
            } => {
                if t < 0.0 {
                    0.0
                } else {
                    amplitude / (1.0 + (-rate * t + offset).exp())
                }
            }
            DisturbanceSpec::Step { time, amplitude } => {
                if t >= *time {
                    *amplitude
                } else {
                    0.0
                }
            }
            DisturbanceSpec::Table { times, values } => {
                let i = times.partition_point(|&s| s <= t);
                if i == 0 {
                    values[0]
                } else if i == times.len() {
                    values[times.len() - 1]
                } else {
                    let (t0, t1) = (times[i - 1], times[i]);
                    let (v0, v1) = (values[i - 1], values[i]);
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
            }
            DisturbanceSpec::Sine {
                amplitude,
                omega,
                phase,
            } => {
                if t < 0.0 {
                    0.0
                } else {
                    amplitude * (omega * t + phase).sin()
                }
            }
        }
    }

    /// The same manoeuvre with its amplitude multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        match self.clone() {
            DisturbanceSpec::Sigmoid {
                rate,
                offset,
                amplitude,
            } => DisturbanceSpec::Sigmoid {
                rate,
                offset,
                amplitude: k * amplitude,
            },
            DisturbanceSpec::Step { time, amplitude } => DisturbanceSpec::Step {
                time,
                amplitude: k * amplitude,
            },
            DisturbanceSpec::Table { times, values } => DisturbanceSpec::Table {
                times,
                values: values.iter().map(|v| k * v).collect(),
            },
            DisturbanceSpec::Sine {
                amplitude,
                omega,
                phase,
            } => DisturbanceSpec::Sine {
                amplitude: k * amplitude,
                omega,
                phase,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("disturbance {name} must be finite")))
            }
        };
        match self {
            DisturbanceSpec::Sigmoid {
                rate,
                offset,
                amplitude,
            } => {
                finite("rate", *rate)?;
                finite("offset", *offset)?;
                finite("amplitude", *amplitude)
            }
            DisturbanceSpec::Step { time, amplitude } => {
                finite("time", *time)?;
                finite("amplitude", *amplitude)
            }
            DisturbanceSpec::Table { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::invalid(
                        "disturbance table needs equally many times and values",
                    ));
                }
                if times.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::invalid("disturbance table entries must be finite"));
                }
                if times.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(Error::invalid(
                        "disturbance table times must be strictly increasing",
                    ));
                }
                Ok(())
            }
            DisturbanceSpec::Sine {
                amplitude,
                omega,
                phase,
            } => {
                finite("amplitude", *amplitude)?;
                finite("omega", *omega)?;
                finite("phase", *phase)
            }
        }
    }
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatoonConfig {
    pub schema: u32,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: RationalFunction,
    pub vehicle_lag: f64,
    pub mass: f64,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    pub t_final: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

impl PlatoonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::invalid(format!(
                "unsupported schema {}, expected 1",
                self.schema
            )));
        }
        if self.n == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final > self.dt && self.t_final.is_finite()) {
            return Err(Error::invalid(format!(
                "t_final must exceed dt, got {}",
                self.t_final
            )));
        }
        if !(self.vehicle_lag >= 0.0 && self.vehicle_lag.is_finite()) {
            return Err(Error::invalid(format!(
                "vehicle_lag must be nonnegative, got {}",
                self.vehicle_lag
            )));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if !self.k.is_proper() {
            return Err(Error::invalid(
                "controller K must be proper (deg num <= deg den)",
            ));
        }
        self.disturbance.validate()
    }

    /// `m (tau s + 1)`, the factor beyond `s^2` in the vehicle denominator.
    pub fn plant_den_extra(&self) -> Polynomial {
        Polynomial::new(vec![self.mass, self.mass * self.vehicle_lag])
    }
}

/// `K = d + c(s)/a(s)` with monic `a` realised in controllable canonical
/// form: `xi' = A xi + B e`, `u = C xi + d e`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerRealization {
    /// Coefficients `a_0 .. a_{n-1}` of the monic denominator.
    pub den: Vec<f64>,
    /// Coefficients `c_0 .. c_{n-1}` of the strictly proper numerator.
    pub num: Vec<f64>,
    pub feedthrough: f64,
}

impl ControllerRealization {
    pub fn new(k: &RationalFunction) -> Result<Self> {
        if !k.is_proper() {
            return Err(Error::invalid(
                "controller K must be proper (deg num <= deg den)",
            ));
        }
        let den = k.den().coeffs();
        let order = den.len() - 1;
        let feedthrough = if k.num().degree() == Some(order) {
            k.num().leading().unwrap_or(0.0)
        } else {
            0.0
        };
        let rest = k.num() - &k.den().scale(feedthrough);
        let mut num = rest.coeffs().to_vec();
        num.resize(order, 0.0);
        Ok(ControllerRealization {
            den: den[..order].to_vec(),
            num,
            feedthrough,
        })
    }

    pub fn order(&self) -> usize {
        self.den.len()
    }
}

/// Assembled platoon; the state is stacked per vehicle as
/// `[position, velocity, filtered force (if tau > 0), controller states]`.
#[derive(Debug, Clone)]
pub struct PlatoonModel {
    n: usize,
    mass: f64,
    lag: f64,
    ctrl: ControllerRealization,
}

pub fn build_platoon(config: &PlatoonConfig) -> Result<PlatoonModel> {
    config.validate()?;
    Ok(PlatoonModel {
        n: config.n,
        mass: config.mass,
        lag: config.vehicle_lag,
        ctrl: ControllerRealization::new(&config.k)?,
    })
}

impl PlatoonModel {
    fn has_lag(&self) -> bool {
        self.lag > 0.0
    }

    fn block(&self) -> usize {
        2 + usize::from(self.has_lag()) + self.ctrl.order()
    }

    pub fn vehicles(&self) -> usize {
        self.n
    }

    pub fn state_dim(&self) -> usize {
        self.n * self.block()
    }

    /// Position of vehicle `i` (1-based) in `state`.
    pub fn position(&self, state: &[f64], i: usize) -> f64 {
        state[(i - 1) * self.block()]
    }

    fn error(&self, state: &[f64], x0: f64, i: usize) -> f64 {
        let prev = if i == 1 {
            x0
        } else {
            self.position(state, i - 1)
        };
        let here = self.position(state, i);
        if i == self.n {
            prev - here
        } else {
            self.position(state, i + 1) - 2.0 * here + prev
        }
    }

    /// `state' = f(state, x0)`, in O(N).
    pub fn derivative(&self, state: &[f64], x0: f64, out: &mut [f64]) {
        let b = self.block();
        let nc = self.ctrl.order();
        let off = 2 + usize::from(self.has_lag());
        for i in 1..=self.n {
            let e = self.error(state, x0, i);
            let s = &state[(i - 1) * b..i * b];
            let d = &mut out[(i - 1) * b..i * b];
            let xi = &s[off..];
            let dot = |c: &[f64]| c.iter().zip(xi).map(|(c, x)| c * x).sum::<f64>();
            let u = self.ctrl.feedthrough * e + dot(&self.ctrl.num);
            if nc > 0 {
                d[off..off + nc - 1].copy_from_slice(&xi[1..nc]);
                d[off + nc - 1] = e - dot(&self.ctrl.den);
            }
            d[0] = s[1];
            if self.has_lag() {
                d[1] = s[2] / self.mass;
                d[2] = (u - s[2]) / self.lag;
            } else {
                d[1] = u / self.mass;
            }
        }
    }

    /// Dense `(A, B)` with `state' = A state + B x0`, for inspection and tests.
    pub fn to_dense(&self) -> (DMatrix<f64>, DVector<f64>) {
        let n = self.state_dim();
        let mut a = DMatrix::zeros(n, n);
        let mut basis = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            basis[j] = 1.0;
            self.derivative(&basis, 0.0, &mut col);
            a.set_column(j, &DVector::from_column_slice(&col));
            basis[j] = 0.0;
        }
        self.derivative(&basis, 1.0, &mut col);
        (a, DVector::from_vec(col))
    }
}

/// Options beyond the config itself.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimulationOptions {
    /// Keep every integration step instead of decimating.
    pub raw: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub method: String,
    pub steps: usize,
    pub output_stride: usize,
    pub state_dim: usize,
    pub max_abs_state: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub config: PlatoonConfig,
    pub stats: IntegratorStats,
    pub times: Vec<f64>,
    pub x0: Vec<f64>,
    /// `spacings[i - 1]` is `x_{i-1} - x_i`.
    pub spacings: Vec<Vec<f64>>,
}

impl SimulationResult {
    /// CSV with header `t,x0,spacing_1,...,spacing_N`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x0");
        for i in 1..=self.spacings.len() {
            let _ = write!(out, ",spacing_{i}");
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{},{}", t, self.x0[k]);
            for s in &self.spacings {
                let _ = write!(out, ",{}", s[k]);
            }
            out.push('\n');
        }
        out
    }
}

pub fn simulate(config: &PlatoonConfig) -> Result<SimulationResult> {
    simulate_with(config, SimulationOptions::default())
}

/// Classical RK4 at fixed step `dt` from the zero state.
pub fn simulate_with(config: &PlatoonConfig, opts: SimulationOptions) -> Result<SimulationResult> {
    let model = build_platoon(config)?;
    let dim = model.state_dim();
    let steps = ((config.t_final / config.dt) - 1e-9).ceil().max(1.0) as usize;
    let stride = if opts.raw {
        1
    } else {
        steps.div_ceil(MAX_OUTPUT_POINTS - 2).max(1)
    };
    let dist = &config.disturbance;

    let mut x = vec![0.0; dim];
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut tmp = vec![0.0; dim];
    let mut times = Vec::new();
    let mut x0s = Vec::new();
    let mut spacings = vec![Vec::new(); model.n];
    let mut record = |t: f64, x: &[f64]| {
        let lead = dist.eval(t);
        times.push(t);
        x0s.push(lead);
        let mut prev = lead;
        for (i, s) in spacings.iter_mut().enumerate() {
            let p = model.position(x, i + 1);
            s.push(prev - p);
            prev = p;
        }
    };
    record(0.0, &x);
    let mut max_abs: f64 = 0.0;
    for step in 1..=steps {
        let t = (step - 1) as f64 * config.dt;
        let h = if step == steps {
            config.t_final - t
        } else {
            config.dt
        };
        let (u0, uh, u1) = (dist.eval(t), dist.eval(t + 0.5 * h), dist.eval(t + h));
        model.derivative(&x, u0, &mut k1);
        for j in 0..dim {
            tmp[j] = x[j] + 0.5 * h * k1[j];
        }
        model.derivative(&tmp, uh, &mut k2);
        for j in 0..dim {
            tmp[j] = x[j] + 0.5 * h * k2[j];
        }
        model.derivative(&tmp, uh, &mut k3);
        for j in 0..dim {
            tmp[j] = x[j] + h * k3[j];
        }
        model.derivative(&tmp, u1, &mut k4);
        let mut m: f64 = 0.0;
        for j in 0..dim {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            // NaN propagates so a poisoned state is caught below.
            m = if m.is_nan() || x[j].is_nan() {
                f64::NAN
            } else {
                m.max(x[j].abs())
            };
        }
        let t_now = t + h;
        if m.is_nan() || m > BLOWUP_THRESHOLD {
            return Err(Error::Unstable {
                time: t_now,
                magnitude: m,
            });
        }
        max_abs = max_abs.max(m);
        if step % stride == 0 || step == steps {
            record(t_now, &x);
        }
    }
    Ok(SimulationResult {
        config: config.clone(),
        stats: IntegratorStats {
            method: "rk4".into(),
            steps,
            output_stride: stride,
            state_dim: dim,
            max_abs_state: max_abs,
        },
        times,
        x0: x0s,
        spacings,
    })
}

/// `F_N(j omega) = 1 - x_1 / x_0` from the tridiagonal interconnection at
/// `s = j omega`, solved directly (no recursion).
pub fn direct_frequency_response(
    n: usize,
    k: &RationalFunction,
    plant_den_extra: &Polynomial,
    omega: f64,
) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if !omega.is_finite() {
        return Err(Error::invalid(
            "direct frequency response needs a finite omega",
        ));
    }
    let s = Complex64::new(0.0, omega);
    let kv = match k.eval_s(s)? {
        ExtendedComplex::Finite(v) => v,
        ExtendedComplex::Infinity => return Err(Error::Singular { omega }),
    };
    let p = s * s * plant_den_extra.eval(s);
    // Rows i = 1..N: -K x_{i-1} + d_i x_i - K x_{i+1} = (i == 1) K x_0.
    let diag = |i: usize| if i == n { p + kv } else { p + kv * 2.0 };
    let off = -kv;
    let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
    let mut d_prime = vec![Complex64::new(0.0, 0.0); n];
    let scale = p.norm() + kv.norm();
    for i in 0..n {
        let (sub, rhs) = if i == 0 {
            (Complex64::new(0.0, 0.0), kv)
        } else {
            (off, Complex64::new(0.0, 0.0))
        };
        let denom = if i == 0 {
            diag(1)
        } else {
            diag(i + 1) - sub * c_prime[i - 1]
        };
        if denom.norm() <= 1e-14 * scale || !denom.is_finite() {
            return Err(Error::Singular { omega });
        }
        c_prime[i] = off / denom;
        d_prime[i] = if i == 0 {
            rhs / denom
        } else {
            (rhs - sub * d_prime[i - 1]) / denom
        };
    }
    let mut x = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x = d_prime[i] - c_prime[i] * x;
    }
    Ok(Complex64::new(1.0, 0.0) - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::iterate_final;
    use crate::design::preset;
    use crate::ratfun::h_from_controller;

    fn config(n: usize, disturbance: DisturbanceSpec, t_final: f64) -> PlatoonConfig {
        PlatoonConfig {
            schema: 1,
            n,
            k: preset::controller(),
            vehicle_lag: 0.1,
            mass: 1.0,
            disturbance,
            t_final,
            dt: DEFAULT_DT,
        }
    }

    #[test]
    fn sigmoid_examples() {
        assert_eq!(sigmoid_disturbance(40.0), 0.5);
        assert!((sigmoid_disturbance(1e4) - 1.0).abs() < 1e-15);
        assert!((sigmoid_disturbance(0.0) - 3.3535e-4).abs() < 1e-8);
        assert_eq!(sigmoid_disturbance(-1.0), 0.0);
    }

    #[test]
    fn table_interpolates_and_holds() {
        let d = DisturbanceSpec::Table {
            times: vec![0.0, 1.0, 3.0],
            values: vec![0.0, 2.0, 1.0],
        };
        assert_eq!(d.eval(-1.0), 0.0);
        assert_eq!(d.eval(0.5), 1.0);
        assert_eq!(d.eval(2.0), 1.5);
        assert_eq!(d.eval(10.0), 1.0);
    }

    #[test]
    fn disturbance_json() {
        let d: DisturbanceSpec = serde_json::from_str(r#"{"kind":"sigmoid"}"#).unwrap();
        assert_eq!(d, DisturbanceSpec::default());
        assert!(serde_json::from_str::<DisturbanceSpec>(r#"{"kind":"sigmoid","rat":1}"#).is_err());
        let d: DisturbanceSpec = serde_json::from_str(r#"{"kind":"step","amplitude":2}"#).unwrap();
        assert_eq!(d.eval(0.0), 2.0);
    }

    #[test]
    fn config_validation() {
        let good = config(3, DisturbanceSpec::default(), 1.0);
        assert!(good.validate().is_ok());
        let mut c = good.clone();
        c.n = 0;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.t_final = c.dt;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.vehicle_lag = -0.1;
        assert!(c.validate().is_err());
        let mut c = good.clone();
        c.k = RationalFunction::from_coeffs(&[0.0, 0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(c.validate().is_err());
        let mut c = good;
        c.schema = 2;
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let c = config(3, DisturbanceSpec::default(), 1.0);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"N\":3"));
        let back: PlatoonConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        let typo = text.replace("\"mass\"", "\"mas\"");
        assert!(serde_json::from_str::<PlatoonConfig>(&typo).is_err());
    }

    #[test]
    fn realization_of_preset_controller() {
        let r = ControllerRealization::new(&preset::controller()).unwrap();
        assert_eq!(r.order(), 2);
        assert!((r.feedthrough - 5000.0).abs() < 1e-9);
        assert!((r.den[0] - 5000.0).abs() < 1e-9 && (r.den[1] - 150.0).abs() < 1e-9);
        assert!((r.num[0] + 24_997_500.0).abs() < 1e-6 && (r.num[1] + 699_750.0).abs() < 1e-6);
    }

    #[test]
    fn state_dimension_and_dense_form() {
        let model = build_platoon(&config(3, DisturbanceSpec::default(), 1.0)).unwrap();
        assert_eq!(model.state_dim(), 15);
        let (a, b) = model.to_dense();
        let x: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut d = vec![0.0; 15];
        model.derivative(&x, 0.7, &mut d);
        let dense = &a * DVector::from_vec(x) + &b * 0.7;
        for i in 0..15 {
            assert!((dense[i] - d[i]).abs() <= 1e-9 * d[i].abs().max(1.0));
        }
        let mut c = config(3, DisturbanceSpec::default(), 1.0);
        c.vehicle_lag = 0.0;
        assert_eq!(build_platoon(&c).unwrap().state_dim(), 12);
    }

    #[test]
    fn dense_model_is_stable() {
        let model = build_platoon(&config(4, DisturbanceSpec::default(), 1.0)).unwrap();
        let (a, _) = model.to_dense();
        let worst = a
            .complex_eigenvalues()
            .iter()
            .map(|e| e.re)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(worst < 0.0, "{worst}");
    }

    #[test]
    fn constant_lead_is_an_equilibrium() {
        let model = build_platoon(&config(5, DisturbanceSpec::default(), 1.0)).unwrap();
        let b = model.block();
        let mut x = vec![0.0; model.state_dim()];
        for i in 0..5 {
            x[i * b] = 2.5;
        }
        let mut d = vec![1.0; x.len()];
        model.derivative(&x, 2.5, &mut d);
        assert!(d.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_disturbance_gives_zero_traces() {
        let c = config(
            4,
            DisturbanceSpec::Step {
                time: 0.0,
                amplitude: 0.0,
            },
            1.0,
        );
        let r = simulate(&c).unwrap();
        assert!(r.spacings.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(r.spacings.len(), 4);
        assert!(r.spacings.iter().all(|s| s.len() == r.times.len()));
        assert!(r.times.len() <= MAX_OUTPUT_POINTS);
        assert_eq!(*r.times.last().unwrap(), 1.0);
    }

    #[test]
    fn raw_output_keeps_every_step() {
        let mut c = config(1, DisturbanceSpec::default(), 0.1);
        c.dt = 1e-3;
        let r = simulate_with(&c, SimulationOptions { raw: true }).unwrap();
        assert_eq!(r.times.len(), 101);
    }

    #[test]
    fn doubling_amplitude_doubles_traces() {
        let c = config(3, DisturbanceSpec::default(), 5.0);
        let mut c2 = c.clone();
        c2.disturbance = c.disturbance.scaled(2.0);
        let (r1, r2) = (simulate(&c).unwrap(), simulate(&c2).unwrap());
        for (s1, s2) in r1.spacings.iter().zip(&r2.spacings) {
            for (a, b) in s1.iter().zip(s2) {
                assert!(
                    (b - 2.0 * a).abs() <= 1e-12 * b.abs().max(1e-300),
                    "{a} {b}"
                );
            }
        }
    }

    #[test]
    fn halving_dt_converges() {
        let mut c = config(
            3,
            DisturbanceSpec::Sine {
                amplitude: 1.0,
                omega: 2.0,
                phase: 0.0,
            },
            2.0,
        );
        c.dt = 4e-3;
        let coarse = simulate_with(&c, SimulationOptions { raw: true }).unwrap();
        c.dt = 2e-3;
        let fine = simulate_with(&c, SimulationOptions { raw: true }).unwrap();
        c.dt = 1e-3;
        let finer = simulate_with(&c, SimulationOptions { raw: true }).unwrap();
        let at_end = |r: &SimulationResult| *r.spacings[0].last().unwrap();
        let e1 = (at_end(&coarse) - at_end(&finer)).abs();
        let e2 = (at_end(&fine) - at_end(&finer)).abs();
        assert!(e2 < e1 && e2 < 1e-8, "{e1} {e2}");
    }

    #[test]
    fn step_response_spacing_decays() {
        let r = simulate(&config(
            1,
            DisturbanceSpec::Step {
                time: 0.0,
                amplitude: 1.0,
            },
            200.0,
        ))
        .unwrap();
        assert!(r.spacings[0].last().unwrap().abs() < 1e-3);
    }

    #[test]
    fn blow_up_is_reported() {
        let mut c = config(2, DisturbanceSpec::default(), 50.0);
        c.k = RationalFunction::constant(-1.0);
        c.vehicle_lag = 0.0;
        match simulate(&c) {
            Err(Error::Unstable { time, .. }) => assert!(time > 0.0 && time < 50.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn direct_response_examples() {
        let k = preset::controller();
        let extra = preset::plant_den_extra();
        let h = h_from_controller(&k, &extra).unwrap();
        for w in [0.01, 1.0, 30.0] {
            let d = direct_frequency_response(1, &k, &extra, w).unwrap();
            let hv = h.eval(w).unwrap().finite().unwrap();
            assert!((d - hv / (hv + 1.0)).norm() < 1e-12);
        }
        let z = h.eval(1.0).unwrap();
        let d = direct_frequency_response(10, &k, &extra, 1.0).unwrap();
        let r = iterate_final(z, 10).finite().unwrap();
        assert!((d - r).norm() <= 1e-9 * r.norm());
        assert!(
            direct_frequency_response(5, &k, &extra, 0.0)
                .unwrap()
                .norm()
                < 1e-15
        );
        assert!(direct_frequency_response(0, &k, &extra, 1.0).is_err());
    }

    #[test]
    fn resonance_is_singular() {
        // K = 1, no lag, N = 1: s^2 + 1 vanishes at w = 1.
        let k = RationalFunction::constant(1.0);
        let err = direct_frequency_response(1, &k, &Polynomial::one(), 1.0).unwrap_err();
        assert_eq!(err, Error::Singular { omega: 1.0 });
    }
}
