//! Lifecycle carbon accounting: CO₂ = Σ eᵢ·fᵢ over processes.
//!
//! Everything is kept in kilograms; conversion to tons happens only when a
//! report is rendered.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::Diagnostic;

/// Relative tolerance for the report's internal re-summation audit.
pub const REPORT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifecycleStage {
    Collection,
    Transport,
    Processing,
    Recovery,
    Disposal,
}

impl LifecycleStage {
    pub const ALL: [LifecycleStage; 5] = [
        LifecycleStage::Collection,
        LifecycleStage::Transport,
        LifecycleStage::Processing,
        LifecycleStage::Recovery,
        LifecycleStage::Disposal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LifecycleStage::Collection => "collection",
            LifecycleStage::Transport => "transport",
            LifecycleStage::Processing => "processing",
            LifecycleStage::Recovery => "recovery",
            LifecycleStage::Disposal => "disposal",
        }
    }
}

impl fmt::Display for LifecycleStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// kg CO₂ emitted per activity unit of one process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionFactor {
    pub id: String,
    pub process_id: String,
    /// kg CO₂ per activity unit.
    pub e: f64,
    pub stage: LifecycleStage,
}

/// Activity level per process, in that process's own units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityLedger {
    pub entries: BTreeMap<String, f64>,
}

impl ActivityLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, process_id: &str, amount: f64) {
        *self.entries.entry(process_id.to_owned()).or_insert(0.0) += amount;
    }

    pub fn get(&self, process_id: &str) -> f64 {
        self.entries.get(process_id).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }

    /// Component-wise sum of two ledgers.
    pub fn merged(&self, other: &ActivityLedger) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add(k, *v);
        }
        out
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        self.entries
            .iter()
            .filter(|(_, f)| !(f.is_finite() && **f >= 0.0))
            .map(|(p, f)| {
                Diagnostic::new(
                    format!("activity_ledger.{p}"),
                    format!("activity level must be a nonnegative finite number, got {f}"),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CarbonReport {
    pub total_kg: f64,
    pub by_stage: BTreeMap<LifecycleStage, f64>,
    pub by_process: BTreeMap<String, f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum CarbonError {
    #[error("no emission factor registered for process `{0}`")]
    MissingFactor(String),
    #[error("process `{process_id}` has more than one emission factor ({first}, {second})")]
    DuplicateFactor {
        process_id: String,
        first: String,
        second: String,
    },
    #[error("activity level for `{0}` is negative or not finite")]
    InvalidActivity(String),
    #[error("inconsistent carbon report: stage sum {stage_sum} vs process sum {process_sum} vs total {total}")]
    InconsistentReport {
        stage_sum: f64,
        process_sum: f64,
        total: f64,
    },
}

/// Indexes factors by process, rejecting processes with two factors.
pub fn factor_index(factors: &[EmissionFactor]) -> Result<BTreeMap<&str, &EmissionFactor>, CarbonError> {
    let mut index: BTreeMap<&str, &EmissionFactor> = BTreeMap::new();
    for factor in factors {
        if let Some(prev) = index.insert(factor.process_id.as_str(), factor) {
            let (first, second) = if prev.id <= factor.id {
                (prev.id.clone(), factor.id.clone())
            } else {
                (factor.id.clone(), prev.id.clone())
            };
            return Err(CarbonError::DuplicateFactor {
                process_id: factor.process_id.clone(),
                first,
                second,
            });
        }
    }
    Ok(index)
}

/// Computes `by_process[p] = e_p · f_p` and the stage/total roll-ups.
pub fn carbon_footprint(
    factors: &[EmissionFactor],
    ledger: &ActivityLedger,
) -> Result<CarbonReport, CarbonError> {
    let index = factor_index(factors)?;
    let mut report = CarbonReport::default();
    for (process_id, &activity) in &ledger.entries {
        if !(activity.is_finite() && activity >= 0.0) {
            return Err(CarbonError::InvalidActivity(process_id.clone()));
        }
        let factor = index
            .get(process_id.as_str())
            .ok_or_else(|| CarbonError::MissingFactor(process_id.clone()))?;
        let kg = factor.e * activity;
        report.by_process.insert(process_id.clone(), kg);
        *report.by_stage.entry(factor.stage).or_insert(0.0) += kg;
    }
    report.total_kg = report.by_process.values().fold(0.0, |acc, v| acc + v);
    Ok(report)
}

/// Returns the per-stage breakdown after re-summing both breakdowns against
/// the total.
pub fn aggregate_by_stage(
    report: &CarbonReport,
) -> Result<BTreeMap<LifecycleStage, f64>, CarbonError> {
    let stage_sum: f64 = report.by_stage.values().sum();
    let process_sum: f64 = report.by_process.values().sum();
    let scale = report.total_kg.abs().max(stage_sum.abs()).max(process_sum.abs());
    let tol = REPORT_REL_TOL * scale.max(f64::MIN_POSITIVE);
    if (stage_sum - process_sum).abs() > tol || (stage_sum - report.total_kg).abs() > tol {
        return Err(CarbonError::InconsistentReport {
            stage_sum,
            process_sum,
            total: report.total_kg,
        });
    }
    Ok(report.by_stage.clone())
}
