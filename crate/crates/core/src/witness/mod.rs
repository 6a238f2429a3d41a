//! The witness engine: assemblage functionals, violation degrees, the
//! steering-equivalent-observable map, and the measurement and instrument
//! incompatibility monotones.

mod instrument;
mod optimize;
mod seo;
mod wiring;

pub use instrument::{instrument_incompatibility, InstrumentOptimum};
pub use optimize::{measurement_incompatibility, MeasurementOptimum, OptimizerConfig};
pub use seo::{embed_measurement, seo};
pub use wiring::{apply_wiring, Wireable, Wiring};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::WitnessFunctional;
use crate::quantum::{DensityMatrix, StateAssemblage, PROB_FLOOR};

/// Assemblages with a violation above this are reported as incompatible.
pub const VIOLATION_TOL: f64 = 1e-9;

fn weighted_sum(
    sigma: &StateAssemblage,
    x: usize,
    f: impl Fn(&DensityMatrix) -> Result<f64>,
) -> Result<f64> {
    let mut total = 0.0;
    for element in sigma.setting(x)? {
        if let Some(rho) = element.conditional() {
            total += element.weight() * f(&rho)?;
        }
    }
    Ok(total)
}

/// `g^as(σ_x) = Σ_a p(a|x) g(σ_{a|x}/p(a|x))`, skipping outcomes with
/// `p(a|x)` below the probability floor.
pub fn assemblage_value(g: &WitnessFunctional, sigma: &StateAssemblage, x: usize) -> Result<f64> {
    weighted_sum(sigma, x, |rho| g.evaluate_g(rho))
}

/// `F^as(σ_x) = Σ_a p(a|x) F_g(σ_{a|x}/p(a|x))`.
pub fn roof_value(g: &WitnessFunctional, sigma: &StateAssemblage, x: usize) -> Result<f64> {
    weighted_sum(sigma, x, |rho| g.evaluate_roof(rho))
}

/// Tolerances a report was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub prob_floor: f64,
    pub violation_tol: f64,
}

impl Default for ReportMetadata {
    fn default() -> Self {
        Self {
            prob_floor: PROB_FLOOR,
            violation_tol: VIOLATION_TOL,
        }
    }
}

/// Per-setting values and the resulting violation degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub functional: String,
    pub g_as: Vec<f64>,
    #[serde(rename = "F_as")]
    pub f_as: Vec<f64>,
    /// Setting maximizing `g^as`.
    pub x_star: usize,
    /// Setting minimizing `F^as`.
    pub x_lower: usize,
    /// `max_x g^as − min_x F^as` before clamping.
    pub margin: f64,
    pub violation: f64,
    pub metadata: ReportMetadata,
}

impl WitnessReport {
    /// Whether the violation exceeds [`VIOLATION_TOL`].
    pub fn is_violated(&self) -> bool {
        self.violation > VIOLATION_TOL
    }
}

/// Index of the extreme value, keeping the lowest index on ties.
fn arg_extreme(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if better(v, values[best]) {
            best = i;
        }
    }
    best
}

/// `V = max{max_x g^as − min_x F^as, 0}`.
///
/// Functionals whose roof is not exact are refused: an underestimated roof
/// would make the difference positive on compatible assemblages.
pub fn violation(g: &WitnessFunctional, sigma: &StateAssemblage) -> Result<WitnessReport> {
    if !g.roof_exact() {
        return Err(Error::InexactRoof(g.name().to_string()));
    }
    let settings = sigma.settings();
    let mut g_as = Vec::with_capacity(settings);
    let mut f_as = Vec::with_capacity(settings);
    for x in 0..settings {
        g_as.push(assemblage_value(g, sigma, x)?);
        f_as.push(roof_value(g, sigma, x)?);
    }
    let x_star = arg_extreme(&g_as, |a, b| a > b);
    let x_lower = arg_extreme(&f_as, |a, b| a < b);
    let margin = g_as[x_star] - f_as[x_lower];
    Ok(WitnessReport {
        functional: g.name().to_string(),
        g_as,
        f_as,
        x_star,
        x_lower,
        margin,
        violation: margin.max(0.0),
        metadata: ReportMetadata::default(),
    })
}

/// `[F_g − g](ρ_B)`, the ceiling on violations from pure shared states with
/// rank-one measurements.
pub fn pure_state_bound(g: &WitnessFunctional, rho_b: &DensityMatrix) -> Result<f64> {
    Ok(g.evaluate_roof(rho_b)? - g.evaluate_g(rho_b)?)
}
