//! Text and JSON renderings shared by the CLI and the service.

use serde::Serialize;

use scalefree::atlas::AtlasGrid;
use scalefree::bound::BoundWitness;
use scalefree::chain::{
    strip_avoidance, weighted_design_check, DesignCurve, FrequencyGrid, StripReport,
};
use scalefree::design::DesignProblem;
use scalefree::platoon::SimulationResult;
use scalefree::ratfun::{ExtendedComplex, RationalFunction};
use scalefree::{Result, VERSION};

#[derive(Serialize)]
pub struct BoundResponse<'a> {
    pub version: &'static str,
    pub z: ExtendedComplex,
    #[serde(flatten)]
    pub witness: &'a BoundWitness,
}

#[derive(Serialize)]
pub struct CurveResponse<'a> {
    pub version: &'static str,
    pub passes: bool,
    #[serde(flatten)]
    pub curve: &'a DesignCurve,
    pub csv: String,
}

impl<'a> CurveResponse<'a> {
    pub fn new(curve: &'a DesignCurve) -> Self {
        CurveResponse {
            version: VERSION,
            passes: curve.passes(),
            curve,
            csv: curve.to_csv(),
        }
    }
}

#[derive(Serialize)]
pub struct AtlasResponse<'a> {
    pub version: &'static str,
    #[serde(flatten)]
    pub grid: &'a AtlasGrid,
}

#[derive(Serialize)]
pub struct SimulationResponse<'a> {
    pub version: &'static str,
    #[serde(flatten)]
    pub result: &'a SimulationResult,
}

#[derive(Serialize)]
pub struct StripResponse<'a> {
    pub version: &'static str,
    pub ok: bool,
    pub report: &'a StripReport,
}

/// `f(h(jw))` on the grid, with the strip check applied first.
pub fn bound_curve(h: &RationalFunction, grid: &FrequencyGrid) -> Result<DesignCurve> {
    weighted_design_check(&RationalFunction::constant(1.0), h, grid)
}

pub fn design_check(problem: &DesignProblem) -> Result<DesignCurve> {
    problem.check()
}

pub fn strip_check(h: &RationalFunction, test_points: usize) -> Result<StripReport> {
    strip_avoidance(h, test_points)
}

/// Human-readable witness, one fact per line.
pub fn witness_text(witness: &BoundWitness) -> String {
    let mut out = format!("f(z) = {}\n", witness.a);
    if witness.attained {
        out.push_str(&format!("omega = {}\n", witness.omega));
    } else {
        out.push_str("infimum, not attained (every a > 0 is feasible at z = 0)\n");
    }
    for c in &witness.candidates {
        out.push_str(&format!("candidate a = {} at omega = {}\n", c.a, c.omega));
    }
    out
}

/// Summary lines of a design check: max, argmax and the verdict against
/// the `<= 1` target.
pub fn design_summary(curve: &DesignCurve) -> String {
    format!(
        "max = {}\nargmax omega = {}\n{}\n",
        curve.max,
        curve.argmax_omega,
        if curve.passes() {
            "PASS (max <= 1)"
        } else {
            "FAIL (max > 1)"
        }
    )
}
