//! Per-iteration convergence records.

use serde::{Deserialize, Serialize};

/// One row of a convergence trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    /// Seconds since the start of preprocessing.
    pub seconds: f64,
    pub objective: f64,
    pub kkt: Option<f64>,
    pub sigma_x: Option<f64>,
    pub sigma_z: Option<f64>,
    pub rho: Option<f64>,
}

/// Convergence history of one solver run.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub solver: String,
    /// Display name; defaults to the solver name.
    pub label: String,
    pub config_hash: String,
    pub preprocessing_seconds: f64,
    pub rows: Vec<TraceRow>,
    /// Set when the run stopped on a divergence signal.
    pub divergence: Option<String>,
    /// Final primal iterate.
    pub solution: Vec<f64>,
}

impl Trace {
    pub fn new(solver: impl Into<String>, preprocessing_seconds: f64) -> Self {
        let solver = solver.into();
        Self {
            label: solver.clone(),
            solver,
            config_hash: String::new(),
            preprocessing_seconds,
            rows: Vec::new(),
            divergence: None,
            solution: Vec::new(),
        }
    }

    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    /// Objective of the last recorded row.
    pub fn final_objective(&self) -> Option<f64> {
        self.rows.last().map(|r| r.objective)
    }

    /// Iteration count of the last recorded row.
    pub fn iterations(&self) -> usize {
        self.rows.last().map_or(0, |r| r.iter)
    }

    pub fn min_objective(&self) -> Option<f64> {
        self.rows
            .iter()
            .map(|r| r.objective)
            .filter(|v| v.is_finite())
            .min_by(f64::total_cmp)
    }

    /// Rows have strictly increasing iterations and non-decreasing time.
    pub fn is_well_ordered(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].iter > w[0].iter && w[1].seconds >= w[0].seconds)
            && self.preprocessing_seconds >= 0.0
    }
}
