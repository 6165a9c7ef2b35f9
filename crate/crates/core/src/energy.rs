//! Pipeline energy metering: E = α·compute + β·transfer.
//!
//! `compute_seconds` is processor-seconds and `transferred_mb` is megabytes;
//! α and β carry the conversion to kWh. This meters the pipeline's own
//! computation and is kept apart from the facility's process energy.

use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyModel {
    /// kWh per processor-second.
    pub alpha: f64,
    /// kWh per megabyte transferred.
    pub beta: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            alpha: 0.002,
            beta: 0.0001,
        }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            out.push(Diagnostic::new("energy_model.alpha", "must be >= 0"));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            out.push(Diagnostic::new("energy_model.beta", "must be >= 0"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageUsage {
    pub stage_name: String,
    pub compute_seconds: f64,
    pub transferred_mb: f64,
}

impl StageUsage {
    pub fn new(stage_name: impl Into<String>, compute_seconds: f64, transferred_mb: f64) -> Self {
        Self {
            stage_name: stage_name.into(),
            compute_seconds,
            transferred_mb,
        }
    }
}

pub fn energy_of(model: &EnergyModel, usage: &StageUsage) -> f64 {
    model.alpha * usage.compute_seconds + model.beta * usage.transferred_mb
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageEnergy {
    pub usage: StageUsage,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub stages: Vec<StageEnergy>,
    pub total_kwh: f64,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a stage and returns its energy.
    pub fn record_stage(&mut self, model: &EnergyModel, usage: StageUsage) -> f64 {
        let energy_kwh = energy_of(model, &usage);
        self.total_kwh += energy_kwh;
        self.stages.push(StageEnergy { usage, energy_kwh });
        energy_kwh
    }

    pub fn stage(&self, name: &str) -> Option<&StageEnergy> {
        self.stages.iter().find(|s| s.usage.stage_name == name)
    }

    /// True when `total_kwh` matches the stage sum within `rel_tol`.
    pub fn is_consistent(&self, rel_tol: f64) -> bool {
        let sum: f64 = self.stages.iter().map(|s| s.energy_kwh).sum();
        (sum - self.total_kwh).abs() <= rel_tol * sum.abs().max(self.total_kwh.abs()).max(f64::MIN_POSITIVE)
    }
}
