use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Mode, PipelineError, RunResult, ScenarioFamily};
use crate::report::format::{signed_percent, signed_points};

/// Reference figures further than this (in points) from the computed delta
/// are annotated.
pub const ANNOTATION_THRESHOLD: f64 = 1.0;
const UNCHANGED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricUnit {
    Percent,
    Kwh,
    Tons,
    Kg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Improved,
    Worsened,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaForm {
    /// Percentage points, `framework − baseline`.
    Pp,
    /// Signed percent change, `(framework − baseline) / baseline · 100`.
    Relative,
}

impl DeltaForm {
    fn key(self) -> &'static str {
        match self {
            DeltaForm::Pp => "delta_pp",
            DeltaForm::Relative => "delta_relative",
        }
    }
}

/// One comparison row; values are in display units (percent, kWh, tons, kg).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub key: String,
    pub label: String,
    pub unit: MetricUnit,
    pub baseline: f64,
    pub framework: f64,
    pub delta_pp: Option<f64>,
    pub delta_relative: Option<f64>,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub metric: String,
    pub form: DeltaForm,
    pub computed: f64,
    pub stated: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementReport {
    pub family: ScenarioFamily,
    pub rows: Vec<MetricRow>,
    pub annotations: Vec<Annotation>,
    pub notes: Vec<String>,
}

impl ImprovementReport {
    pub fn row(&self, key: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.key == key)
    }
}

fn element_label(el: &str) -> String {
    let mut c = el.chars();
    match c.next() {
        Some(first) => format!("{}{} Recovery Rate (%)", first.to_uppercase(), c.as_str()),
        None => "Recovery Rate (%)".into(),
    }
}

/// Canonical element order: the critical battery metals first.
fn element_order(recovery: &BTreeMap<String, f64>) -> Vec<&String> {
    const FIRST: [&str; 3] = ["cobalt", "nickel", "lithium"];
    let mut out: Vec<&String> = FIRST
        .iter()
        .filter_map(|f| recovery.keys().find(|k| k.as_str() == *f))
        .collect();
    out.extend(recovery.keys().filter(|k| !FIRST.contains(&k.as_str())));
    out
}

fn row(key: &str, label: &str, unit: MetricUnit, higher_is_better: bool, b: f64, f: f64) -> MetricRow {
    let diff = f - b;
    let delta_pp = (unit == MetricUnit::Percent).then_some(diff);
    let delta_relative = (b != 0.0).then(|| diff / b * 100.0);
    let direction = if diff.abs() <= UNCHANGED_TOL * b.abs().max(1.0) {
        Direction::Unchanged
    } else if (diff > 0.0) == higher_is_better {
        Direction::Improved
    } else {
        Direction::Worsened
    };
    MetricRow {
        key: key.into(),
        label: label.into(),
        unit,
        baseline: b,
        framework: f,
        delta_pp,
        delta_relative,
        direction,
    }
}

/// Rows for every metric both runs carry, in a fixed order, with both delta
/// forms for percentage metrics, plus annotations where the framework
/// scenario's stated reference figures disagree with the computed deltas.
pub fn compare_runs(b: &RunResult, f: &RunResult) -> Result<ImprovementReport, PipelineError> {
    if b.mode != Mode::Baseline || f.mode != Mode::Framework {
        return Err(PipelineError::ModeMismatch {
            baseline: b.mode,
            framework: f.mode,
        });
    }
    if b.family != f.family {
        return Err(PipelineError::FamilyMismatch(b.family, f.family));
    }
    let pct = |x: f64| x * 100.0;
    let mut rows = Vec::new();

    for el in element_order(&b.recovery) {
        if let Some(&fr) = f.recovery.get(el) {
            rows.push(row(
                &format!("{el}_recovery"),
                &element_label(el),
                MetricUnit::Percent,
                true,
                pct(b.recovery[el]),
                pct(fr),
            ));
        }
    }
    if let (Some(ba), Some(fa)) = (b.average_recovery(), f.average_recovery()) {
        rows.push(row("average_recovery", "Average Recovery Rate (%)", MetricUnit::Percent, true, pct(ba), pct(fa)));
    }
    if b.process_energy_kwh > 0.0 || f.process_energy_kwh > 0.0 {
        rows.push(row(
            "energy",
            "Energy Consumption (kWh)",
            MetricUnit::Kwh,
            false,
            b.process_energy_kwh,
            f.process_energy_kwh,
        ));
    }
    if b.carbon.total_kg > 0.0 || f.carbon.total_kg > 0.0 {
        rows.push(row(
            "co2",
            "CO₂ Emissions (tons)",
            MetricUnit::Tons,
            false,
            b.co2_kg / 1000.0,
            f.co2_kg / 1000.0,
        ));
    }
    if b.input_mass_kg > 0.0 || f.input_mass_kg > 0.0 {
        rows.push(row(
            "waste_reduction",
            "Waste Reduction (%)",
            MetricUnit::Percent,
            true,
            pct(b.waste_reduction_fraction),
            pct(f.waste_reduction_fraction),
        ));
    }
    if let (Some(ba), Some(fa)) = (b.classification_accuracy, f.classification_accuracy) {
        rows.push(row(
            "classification_accuracy",
            "Waste Classification Accuracy (%)",
            MetricUnit::Percent,
            true,
            pct(ba),
            pct(fa),
        ));
    }
    if let (Some(bt), Some(ft)) = (b.transport_emissions_kg, f.transport_emissions_kg) {
        if bt > 0.0 {
            rows.push(row(
                "transport_share",
                "Transportation Emissions (%)",
                MetricUnit::Percent,
                false,
                100.0,
                ft / bt * 100.0,
            ));
        }
        rows.push(row(
            "transport_emissions",
            "Transportation Emissions (kg CO₂)",
            MetricUnit::Kg,
            false,
            bt,
            ft,
        ));
    }
    rows.push(row(
        "pipeline_energy",
        "Pipeline Compute Energy (kWh)",
        MetricUnit::Kwh,
        false,
        b.pipeline_energy.total_kwh,
        f.pipeline_energy.total_kwh,
    ));

    let mut expectations = b.expectations.clone();
    expectations.extend(f.expectations.iter().map(|(k, v)| (k.clone(), *v)));
    let mut annotations = Vec::new();
    for r in &rows {
        for (form, computed) in [(DeltaForm::Pp, r.delta_pp), (DeltaForm::Relative, r.delta_relative)] {
            let (Some(computed), Some(&stated)) = (computed, expectations.get(&format!("{}.{}", r.key, form.key())))
            else {
                continue;
            };
            if (computed - stated).abs() > ANNOTATION_THRESHOLD {
                let render = match form {
                    DeltaForm::Pp => signed_points,
                    DeltaForm::Relative => signed_percent,
                };
                let what = match form {
                    DeltaForm::Pp => "change",
                    DeltaForm::Relative => "relative change",
                };
                annotations.push(Annotation {
                    metric: r.key.clone(),
                    form,
                    computed,
                    stated,
                    text: format!(
                        "{}: computed {what} {} vs reference figure {}",
                        r.label,
                        render(computed),
                        render(stated)
                    ),
                });
            }
        }
    }

    let mut notes = vec![
        "Percentage metrics show the change in percentage points (pp) and, in parentheses, the relative change."
            .to_string(),
        "Energy Consumption is facility process energy from the simulation; Pipeline Compute Energy is the metered cost of running this toolkit."
            .to_string(),
    ];
    if rows.iter().any(|r| r.key == "waste_reduction") {
        notes.push("Waste Reduction = 1 - residual mass / input mass of the recycling run.".into());
    }
    if rows.iter().any(|r| r.key == "transport_share") {
        notes.push("Transportation Emissions (%) is relative to the baseline route over the same bins.".into());
    }

    Ok(ImprovementReport {
        family: f.family,
        rows,
        annotations,
        notes,
    })
}
