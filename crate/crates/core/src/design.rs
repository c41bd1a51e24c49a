//! Weighted design problems and the platoon design used throughout the
//! examples.

use serde::{Deserialize, Serialize};

use crate::chain::{weighted_design_check, DesignCurve, FrequencyGrid};
use crate::error::{Error, Result};
use crate::ratfun::{h_from_controller, Polynomial, RationalFunction};

/// Frequency grid as written in a config file: either log-spaced bounds or
/// an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Log {
        min: f64,
        max: f64,
        points: usize,
        #[serde(default = "yes")]
        include_zero: bool,
        #[serde(default = "yes")]
        include_infinity: bool,
    },
    Explicit(FrequencyGrid),
}

fn yes() -> bool {
    true
}

impl Default for GridSpec {
    /// 2000 log-spaced points on `[1e-4, 1e4]` plus `0` and infinity.
    fn default() -> Self {
        GridSpec::Log {
            min: 1e-4,
            max: 1e4,
            points: 2000,
            include_zero: true,
            include_infinity: true,
        }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<FrequencyGrid> {
        match self {
            GridSpec::Log {
                min,
                max,
                points,
                include_zero,
                include_infinity,
            } => FrequencyGrid::log_spaced(*min, *max, *points, *include_zero, *include_infinity),
            GridSpec::Explicit(g) => Ok(g.clone()),
        }
    }
}

/// Weight `W`, vehicle factor `plant_den_extra` and controller `K`; the
/// chain element is `h = s^2 plant_den_extra / K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignProblem {
    pub schema: u32,
    #[serde(rename = "W")]
    pub w: RationalFunction,
    pub plant_den_extra: Polynomial,
    #[serde(rename = "K")]
    pub k: RationalFunction,
    #[serde(default)]
    pub grid: GridSpec,
}

impl DesignProblem {
    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::invalid(format!(
                "unsupported schema {}, expected 1",
                self.schema
            )));
        }
        self.grid.build().map(|_| ())
    }

    pub fn h(&self) -> Result<RationalFunction> {
        h_from_controller(&self.k, &self.plant_den_extra)
    }

    /// Strip check followed by the weighted bound curve.
    pub fn check(&self) -> Result<DesignCurve> {
        self.validate()?;
        weighted_design_check(&self.w, &self.h()?, &self.grid.build()?)
    }
}

/// The platoon design: unit mass, 0.1 s actuator lag, a lead-lag controller
/// with zeros at -0.05 and -10, poles at -50 and -100, and the weight
/// `9s / (4s + 2)`.
pub mod preset {
    use num_complex::Complex64;

    use super::{DesignProblem, GridSpec};
    use crate::platoon::{DisturbanceSpec, PlatoonConfig, DEFAULT_DT};
    use crate::ratfun::{Polynomial, RationalFunction};

    /// `(s^2 + 10.05 s + 0.5) / (0.0002 s^2 + 0.03 s + 1)`.
    pub fn controller() -> RationalFunction {
        let re = |x: f64| Complex64::new(x, 0.0);
        RationalFunction::from_zpk(&[re(-0.05), re(-10.0)], &[re(-50.0), re(-100.0)], 5000.0)
            .expect("real zeros and poles")
    }

    pub fn weight() -> RationalFunction {
        RationalFunction::from_coeffs(&[0.0, 9.0], &[2.0, 4.0]).expect("nonzero denominator")
    }

    /// `0.1 s + 1`.
    pub fn plant_den_extra() -> Polynomial {
        Polynomial::new(vec![1.0, 0.1])
    }

    pub fn problem() -> DesignProblem {
        DesignProblem {
            schema: 1,
            w: weight(),
            plant_den_extra: plant_den_extra(),
            k: controller(),
            grid: GridSpec::default(),
        }
    }

    /// Sigmoid lead manoeuvre over 100 s at the default step.
    pub fn platoon_config(n: usize) -> PlatoonConfig {
        PlatoonConfig {
            schema: 1,
            n,
            k: controller(),
            vehicle_lag: 0.1,
            mass: 1.0,
            disturbance: DisturbanceSpec::default(),
            t_final: 100.0,
            dt: DEFAULT_DT,
        }
    }
}
