//! Chern numbers and Brouwer degrees by independent routes, and the class-AI checks.

mod chern;
mod checks;
mod degree;

pub use chern::*;
pub use checks::*;
pub use degree::*;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::GridSpec;

/// Vol(S⁴) = 8π²/3.
pub const VOL_S4: f64 = 8.0 * std::f64::consts::PI * std::f64::consts::PI / 3.0;
/// Vol(S³) = 2π².
pub const VOL_S3: f64 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub grid: GridSpec,
    pub value: f64,
    pub residual: f64,
}

/// A numerical invariant with its rounding made explicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub quantity: String,
    pub value: f64,
    pub nearest_integer: i64,
    pub residual: f64,
    pub method: String,
    pub grid: Option<GridSpec>,
    /// Values at successive resolutions, coarsest first; the last entry is `value`.
    pub refinement: Vec<RefinementStep>,
    pub diagnostics: BTreeMap<String, serde_json::Value>,
}

impl InvariantReport {
    pub fn new(quantity: &str, method: &str, value: f64, grid: Option<GridSpec>) -> Self {
        let nearest = value.round();
        let refinement = grid
            .map(|g| vec![RefinementStep { grid: g, value, residual: (value - nearest).abs() }])
            .unwrap_or_default();
        InvariantReport {
            quantity: quantity.into(),
            value,
            nearest_integer: nearest as i64,
            residual: (value - nearest).abs(),
            method: method.into(),
            grid,
            refinement,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, v: impl Serialize) -> Self {
        self.diagnostics.insert(key.into(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null));
        self
    }

    /// Folds runs at several resolutions (coarsest first) into one report carrying the
    /// finest value and the whole history.
    pub fn refined(mut runs: Vec<InvariantReport>) -> Option<InvariantReport> {
        let history: Vec<RefinementStep> = runs.iter().flat_map(|r| r.refinement.clone()).collect();
        let mut last = runs.pop()?;
        last.refinement = history;
        Some(last)
    }

    /// Whether the residual decreased at every refinement step.
    pub fn residual_decreasing(&self) -> bool {
        self.refinement.windows(2).all(|w| w[1].residual < w[0].residual)
    }
}
