//! Three-way methods comparison: reference columns come verbatim from a
//! fixture, the last column from this toolkit's own latest framework run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::format::decimal;
use super::manifest::load_manifest;
use super::{ReportError, RunManifest};
use crate::pipeline::Mode;

/// GJ per kWh.
const GJ_PER_KWH: f64 = 0.0036;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table3Row {
    pub metric: String,
    /// Cell text for each fixture column, rendered as is.
    pub values: Vec<String>,
    /// Which measured quantity fills the last column: `energy_intensity`,
    /// `recovery` or `co2_reduction`.
    #[serde(default)]
    pub measured: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table3Fixture {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Table3Row>,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuredValues {
    pub run_id: String,
    pub energy_intensity_gj_per_t: Option<f64>,
    pub recovery_percent: Option<f64>,
    pub co2_reduction_percent: Option<f64>,
}

impl MeasuredValues {
    /// Values from a framework manifest; the CO₂ reduction needs a baseline
    /// manifest of the same scenario family.
    pub fn from_manifests(framework: &RunManifest, baseline: Option<&RunManifest>) -> Self {
        let m = &framework.metrics;
        let energy_intensity_gj_per_t = match (m.get("process_energy_kwh"), m.get("input_mass_kg")) {
            (Some(&e), Some(&kg)) if kg > 0.0 && e > 0.0 => Some(e * GJ_PER_KWH / (kg / 1000.0)),
            _ => None,
        };
        let recovery_percent = m.get("average_recovery").map(|v| v * 100.0);
        let co2_reduction_percent = baseline.and_then(|b| match (b.metrics.get("co2_kg"), m.get("co2_kg")) {
            (Some(&bc), Some(&fc)) if bc > 0.0 => Some((1.0 - fc / bc) * 100.0),
            _ => None,
        });
        Self {
            run_id: framework.run_id.clone(),
            energy_intensity_gj_per_t,
            recovery_percent,
            co2_reduction_percent,
        }
    }

    fn get(&self, key: &str) -> Option<f64> {
        match key {
            "energy_intensity" => self.energy_intensity_gj_per_t,
            "recovery" => self.recovery_percent,
            "co2_reduction" => self.co2_reduction_percent,
            _ => None,
        }
    }
}

fn manifests_in(out_dir: &Path) -> Vec<(RunManifest, PathBuf)> {
    let Ok(entries) = fs::read_dir(out_dir) else {
        return Vec::new();
    };
    let mut dirs: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_dir()).collect();
    dirs.sort();
    dirs.into_iter()
        .filter_map(|d| load_manifest(&d).ok().map(|m| (m, d)))
        .collect()
}

/// Most recent framework manifest under `out_dir` (by creation time, then
/// path), paired with the most recent baseline manifest of the same family.
/// Runs that simulated a recycling facility take precedence, since every
/// measured quantity but CO₂ comes from the facility.
pub fn latest_framework_manifest(out_dir: &Path) -> Option<(RunManifest, Option<RunManifest>)> {
    let all = manifests_in(out_dir);
    let latest = |mode: Mode, family: Option<crate::pipeline::ScenarioFamily>| {
        all.iter()
            .filter(|(m, _)| m.mode == mode && family.is_none_or(|f| m.family == f))
            .max_by(|(a, pa), (b, pb)| a.created_at.cmp(&b.created_at).then(pa.cmp(pb)))
            .map(|(m, _)| m.clone())
    };
    let recycling = all
        .iter()
        .filter(|(m, _)| m.mode == Mode::Framework && m.metrics.contains_key("average_recovery"))
        .max_by(|(a, pa), (b, pb)| a.created_at.cmp(&b.created_at).then(pa.cmp(pb)))
        .map(|(m, _)| m.clone());
    let framework = recycling.or_else(|| latest(Mode::Framework, None))?;
    let baseline = latest(Mode::Baseline, Some(framework.family));
    Some((framework, baseline))
}

fn row_line(cells: &[&str]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

pub fn render_table3(fixture: &Table3Fixture, measured: Option<&MeasuredValues>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", fixture.title);
    let mut header: Vec<&str> = vec!["Metric"];
    header.extend(fixture.columns.iter().map(String::as_str));
    header.push("Measured (this toolkit)");
    out.push_str(&row_line(&header));
    out.push('|');
    out.push_str(&"---|".repeat(header.len()));
    out.push('\n');
    for row in &fixture.rows {
        let measured_cell = row
            .measured
            .as_deref()
            .and_then(|k| measured.and_then(|m| m.get(k)))
            .map(decimal)
            .unwrap_or_else(|| "n/a".into());
        let mut cells: Vec<&str> = vec![&row.metric];
        cells.extend(row.values.iter().map(String::as_str));
        cells.push(&measured_cell);
        out.push_str(&row_line(&cells));
    }
    if !fixture.notes.is_empty() || measured.is_some() {
        out.push('\n');
    }
    for n in &fixture.notes {
        let _ = writeln!(out, "- {n}");
    }
    if let Some(m) = measured {
        let _ = writeln!(out, "- Measured column from run `{}`.", m.run_id);
    }
    out
}

/// Reads and parses a fixture file.
pub fn load_table3_fixture(path: &Path) -> Result<Table3Fixture, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ReportError::json(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Table3Fixture {
        Table3Fixture {
            title: "Methods".into(),
            columns: vec!["A".into(), "B".into()],
            rows: vec![Table3Row {
                metric: "Energy intensity (GJ/tonne)".into(),
                values: vec!["5.5".into(), "4.0".into()],
                measured: Some("energy_intensity".into()),
            }],
            notes: vec![],
        }
    }

    #[test]
    fn cells_are_verbatim() {
        let md = render_table3(&fixture(), None);
        assert!(md.contains("| Energy intensity (GJ/tonne) | 5.5 | 4.0 | n/a |\n"), "{md}");
        assert!(md.contains("|---|---|---|---|\n"));
    }

    #[test]
    fn measured_energy_intensity() {
        let m = MeasuredValues {
            run_id: "r".into(),
            energy_intensity_gj_per_t: Some(15_000.0 * GJ_PER_KWH / 15.0),
            recovery_percent: None,
            co2_reduction_percent: None,
        };
        let md = render_table3(&fixture(), Some(&m));
        assert!(md.contains("| 5.5 | 4.0 | 3.6 |"), "{md}");
    }
}
