//! End-to-end runs in baseline or framework mode, run comparison and the
//! model feedback loop.

mod compare;
mod districts;
mod feedback;
mod run;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compare::{
    compare_runs, Annotation, DeltaForm, Direction, ImprovementReport, MetricRow, MetricUnit,
    ANNOTATION_THRESHOLD,
};
pub use districts::partition_districts;
pub use feedback::{feedback_update, FeedbackOutcome};
pub use run::{run, AllocationSummary, ModelArtifacts, RunArtifacts, RunOutput, RunResult, StageTiming, STAGES};

use crate::classifier::TrainConfig;
use crate::diagnostics::{self, Diagnostic};
use crate::energy::EnergyModel;
use crate::milp::SolverOptions;
use crate::routing::RLConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Baseline,
    Framework,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Framework => "framework",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Mode::Baseline),
            "framework" => Ok(Mode::Framework),
            other => Err(format!("unknown mode `{other}` (expected baseline or framework)")),
        }
    }
}

/// Which case study a scenario belongs to, inferred from its components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioFamily {
    Battery,
    Waste,
    Mixed,
    Empty,
}

/// Fixed compute and transfer cost charged to a stage instead of measuring it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageCost {
    pub compute_seconds: f64,
    #[serde(default)]
    pub transferred_mb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeedbackSettings {
    /// Steps of fresh bin events simulated per feedback round.
    pub new_event_horizon: usize,
    /// Q-learning episodes added per district per round.
    pub extra_episodes: usize,
}

impl Default for FeedbackSettings {
    fn default() -> Self {
        Self {
            new_event_horizon: 100,
            extra_episodes: 1_000,
        }
    }
}

/// Per-run knobs carried in the scenario's `settings` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub energy_model: EnergyModel,
    /// When nonempty, every stage is charged these costs (zero if absent)
    /// instead of measured wall-clock time, making runs machine-independent.
    pub stage_costs: BTreeMap<String, StageCost>,
    pub rl: RLConfig,
    pub classifier: TrainConfig,
    pub district_max_bins: usize,
    pub feedback: FeedbackSettings,
    pub solver: SolverOptions,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            energy_model: EnergyModel::default(),
            stage_costs: BTreeMap::new(),
            rl: RLConfig::default(),
            classifier: TrainConfig::default(),
            district_max_bins: 10,
            feedback: FeedbackSettings::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl RunSettings {
    pub fn is_default(&self) -> bool {
        *self == Self::default()
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = self.energy_model.validate();
        out.extend(self.rl.validate());
        out.extend(self.classifier.validate());
        if self.district_max_bins == 0 || self.district_max_bins > crate::routing::MAX_TABULAR_BINS {
            out.push(Diagnostic::new(
                "settings.district_max_bins",
                format!("must lie in [1, {}]", crate::routing::MAX_TABULAR_BINS),
            ));
        }
        for (name, c) in &self.stage_costs {
            if !STAGES.contains(&name.as_str()) {
                out.push(Diagnostic::new(format!("settings.stage_costs.{name}"), "unknown stage"));
            }
            if !(c.compute_seconds >= 0.0 && c.transferred_mb >= 0.0) {
                out.push(Diagnostic::new(format!("settings.stage_costs.{name}"), "costs must be >= 0"));
            }
        }
        out.into_iter()
            .map(|d| {
                if d.path.starts_with("settings.") {
                    d
                } else {
                    Diagnostic::new(format!("settings.{}", d.path), d.message)
                }
            })
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid scenario: {}", diagnostics::join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("mode unsupported: {0}")]
    ModeUnsupported(String),
    #[error("stage `{stage}` failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("expected a baseline run and a framework run, got {baseline} and {framework}")]
    ModeMismatch { baseline: Mode, framework: Mode },
    #[error("runs come from different scenario families ({0:?} vs {1:?})")]
    FamilyMismatch(ScenarioFamily, ScenarioFamily),
    #[error("missing artifacts: {0}")]
    MissingArtifacts(String),
}

impl PipelineError {
    pub(crate) fn stage(stage: &'static str, err: impl fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: err.to_string(),
        }
    }
}
