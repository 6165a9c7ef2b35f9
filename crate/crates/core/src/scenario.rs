//! Declarative scenario files and their compilation to a linear program.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{self, Diagnostic};
use crate::lca::EmissionFactor;
use crate::milp::{LinearProgram, SolverOptions};
use crate::pipeline::RunSettings;
use crate::routing::CollectionGraph;
use crate::twin::{CalibrationTargets, FacilityModel, SensorConfig};

/// Tolerance on the sum of composition fractions.
pub const COMPOSITION_TOL: f64 = 1e-9;

/// Name of the optional target that adds a CO₂ cap row to the LP.
pub const CO2_CAP_TARGET: &str = "co2_cap_kg";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaterialCategory {
    BatteryCell,
    Plastic,
    Metal,
    Organic,
    Glass,
    Other,
}

impl MaterialCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BatteryCell => "battery-cell",
            Self::Plastic => "plastic",
            Self::Metal => "metal",
            Self::Organic => "organic",
            Self::Glass => "glass",
            Self::Other => "other",
        }
    }
}

impl fmt::Display for MaterialCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaterialStage {
    Collected,
    Disassembled,
    Recovered,
    Residual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub id: String,
    pub name: String,
    pub category: MaterialCategory,
    pub mass_kg: f64,
    /// Element token to mass fraction. Whatever the fractions leave over is
    /// treated as the implicit `other` element.
    #[serde(default)]
    pub composition: BTreeMap<String, f64>,
    pub lifecycle_stage: MaterialStage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessSpec {
    pub id: String,
    /// Cost per unit processed; negative values express net revenue.
    pub unit_cost: f64,
    pub energy_per_unit: f64,
    pub emission_factor_id: String,
    /// Optional upper bound on the allocation variable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_units: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceLimit {
    pub resource_id: String,
    pub availability: f64,
    pub consumption: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub materials: Vec<MaterialSpec>,
    #[serde(default)]
    pub processes: Vec<ProcessSpec>,
    #[serde(default)]
    pub limits: Vec<ResourceLimit>,
    #[serde(default)]
    pub emission_factors: Vec<EmissionFactor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collection_graph: Option<CollectionGraph>,
    #[serde(default)]
    pub targets: BTreeMap<String, f64>,
    #[serde(default)]
    pub integrality: BTreeSet<String>,
    pub rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facility: Option<FacilityModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensors: Option<SensorConfig>,
    #[serde(default, skip_serializing_if = "RunSettings::is_default")]
    pub settings: RunSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationTargets>,
    /// Reference figures that comparison reports check computed deltas against,
    /// keyed `<metric>.delta_pp` or `<metric>.delta_relative`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expectations: BTreeMap<String, f64>,
}

impl ScenarioSpec {
    pub fn empty(rng_seed: u64) -> Self {
        Self {
            name: None,
            materials: Vec::new(),
            processes: Vec::new(),
            limits: Vec::new(),
            emission_factors: Vec::new(),
            collection_graph: None,
            targets: BTreeMap::new(),
            integrality: BTreeSet::new(),
            rng_seed,
            facility: None,
            sensors: None,
            settings: RunSettings::default(),
            calibration: None,
            expectations: BTreeMap::new(),
        }
    }

    pub fn process_index(&self, id: &str) -> Option<usize> {
        self.processes.iter().position(|p| p.id == id)
    }

    pub fn factor(&self, id: &str) -> Option<&EmissionFactor> {
        self.emission_factors.iter().find(|f| f.id == id)
    }

    pub fn battery_cells(&self) -> impl Iterator<Item = &MaterialSpec> {
        self.materials
            .iter()
            .filter(|m| m.category == MaterialCategory::BatteryCell)
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {}", diagnostics::join(.0))]
    Validation(Vec<Diagnostic>),
    #[error("cannot compile scenario: {0}")]
    Compile(String),
}

/// Parses and validates a scenario document. `origin` labels parse errors.
pub fn parse_scenario(text: &str, origin: &str) -> Result<ScenarioSpec, ScenarioError> {
    let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let diags = validate_scenario(&spec);
    if diags.is_empty() {
        Ok(spec)
    } else {
        Err(ScenarioError::Validation(diags))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioSpec, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

pub fn save_scenario(spec: &ScenarioSpec, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    std::fs::write(path, spec.to_json_pretty()).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn nonneg(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

pub fn validate_scenario(s: &ScenarioSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let mut material_ids = BTreeSet::new();
    for (i, m) in s.materials.iter().enumerate() {
        let at = format!("materials[{i}]");
        if !material_ids.insert(m.id.as_str()) {
            out.push(Diagnostic::new(format!("{at}.id"), format!("duplicate material id `{}`", m.id)));
        }
        if !nonneg(m.mass_kg) {
            out.push(Diagnostic::new(
                format!("{at}.mass_kg"),
                format!("material `{}` has mass {} (must be >= 0)", m.id, m.mass_kg),
            ));
        }
        let mut sum = 0.0;
        for (el, &frac) in &m.composition {
            if !(0.0..=1.0).contains(&frac) {
                out.push(Diagnostic::new(
                    format!("{at}.composition.{el}"),
                    format!("material `{}`: fraction {frac} outside [0, 1]", m.id),
                ));
            }
            sum += frac;
        }
        if sum > 1.0 + COMPOSITION_TOL {
            out.push(Diagnostic::new(
                format!("{at}.composition"),
                format!("material `{}`: fractions sum > 1 ({sum})", m.id),
            ));
        }
    }

    let mut factor_ids = BTreeSet::new();
    let mut factor_processes = BTreeMap::new();
    for (i, f) in s.emission_factors.iter().enumerate() {
        let at = format!("emission_factors[{i}]");
        if !factor_ids.insert(f.id.as_str()) {
            out.push(Diagnostic::new(format!("{at}.id"), format!("duplicate emission factor id `{}`", f.id)));
        }
        if !nonneg(f.e) {
            out.push(Diagnostic::new(format!("{at}.e"), format!("factor `{}` must be >= 0", f.id)));
        }
        if s.process_index(&f.process_id).is_none() {
            out.push(Diagnostic::new(
                format!("{at}.process_id"),
                format!("unknown process `{}`", f.process_id),
            ));
        }
        if let Some(prev) = factor_processes.insert(f.process_id.as_str(), f.id.as_str()) {
            out.push(Diagnostic::new(
                format!("{at}.process_id"),
                format!("process `{}` already has factor `{prev}`", f.process_id),
            ));
        }
    }

    let mut process_ids = BTreeSet::new();
    for (i, p) in s.processes.iter().enumerate() {
        let at = format!("processes[{i}]");
        if !process_ids.insert(p.id.as_str()) {
            out.push(Diagnostic::new(format!("{at}.id"), format!("duplicate process id `{}`", p.id)));
        }
        if !p.unit_cost.is_finite() {
            out.push(Diagnostic::new(format!("{at}.unit_cost"), "must be finite"));
        }
        if !nonneg(p.energy_per_unit) {
            out.push(Diagnostic::new(
                format!("{at}.energy_per_unit"),
                format!("process `{}` has energy_per_unit {} (must be >= 0)", p.id, p.energy_per_unit),
            ));
        }
        if !factor_ids.contains(p.emission_factor_id.as_str()) {
            out.push(Diagnostic::new(
                format!("{at}.emission_factor_id"),
                format!("unknown emission factor `{}`", p.emission_factor_id),
            ));
        }
        if let Some(u) = p.max_units {
            if !(u >= 0.0) {
                out.push(Diagnostic::new(format!("{at}.max_units"), "must be >= 0"));
            }
        }
    }

    for (i, l) in s.limits.iter().enumerate() {
        let at = format!("limits[{i}]");
        if !nonneg(l.availability) {
            out.push(Diagnostic::new(
                format!("{at}.availability"),
                format!("resource `{}` availability must be >= 0", l.resource_id),
            ));
        }
        for (pid, &a) in &l.consumption {
            if !nonneg(a) {
                out.push(Diagnostic::new(format!("{at}.consumption.{pid}"), "coefficient must be >= 0"));
            }
            if !process_ids.contains(pid.as_str()) {
                out.push(Diagnostic::new(
                    format!("{at}.consumption.{pid}"),
                    format!("unknown process `{pid}`"),
                ));
            }
        }
    }

    for (k, &v) in &s.targets {
        if !nonneg(v) {
            out.push(Diagnostic::new(format!("targets.{k}"), format!("target must be >= 0, got {v}")));
        }
    }
    for pid in &s.integrality {
        if !process_ids.contains(pid.as_str()) {
            out.push(Diagnostic::new("integrality", format!("unknown process `{pid}`")));
        }
    }

    if let Some(g) = &s.collection_graph {
        out.extend(g.validate());
    }
    if let Some(f) = &s.facility {
        out.extend(f.validate());
        for (i, st) in f.stations.iter().enumerate() {
            if !factor_processes.contains_key(st.id.as_str()) {
                out.push(Diagnostic::new(
                    format!("facility.stations[{i}].id"),
                    format!("station `{}` needs a process with an emission factor of the same id", st.id),
                ));
            }
        }
    }
    if let Some(sensors) = &s.sensors {
        out.extend(sensors.validate());
    }
    out.extend(s.settings.validate());
    if let Some(c) = &s.calibration {
        out.extend(c.validate());
    }
    out
}

/// Builds `min Σ cⱼxⱼ  s.t.  Σ aᵢⱼxⱼ ≤ bᵢ,  0 ≤ xⱼ ≤ max_unitsⱼ`, one column per
/// process in declaration order and one row per limit, plus the CO₂ cap row
/// when the scenario sets `co2_cap_kg`.
pub fn compile_to_lp(s: &ScenarioSpec) -> Result<LinearProgram, ScenarioError> {
    let n = s.processes.len();
    let mut lp = LinearProgram::with_objective(s.processes.iter().map(|p| p.unit_cost).collect());
    for (j, p) in s.processes.iter().enumerate() {
        if let Some(u) = p.max_units {
            lp.upper_bounds[j] = u;
        }
        lp.integer_mask[j] = s.integrality.contains(&p.id);
    }
    for l in &s.limits {
        let mut row = vec![0.0; n];
        for (pid, &a) in &l.consumption {
            let j = s.process_index(pid).ok_or_else(|| {
                ScenarioError::Compile(format!("limit `{}` references unknown process `{pid}`", l.resource_id))
            })?;
            row[j] = a;
        }
        lp.push_row(row, l.availability);
    }
    if let Some(&cap) = s.targets.get(CO2_CAP_TARGET) {
        let mut row = Vec::with_capacity(n);
        for p in &s.processes {
            let f = s.factor(&p.emission_factor_id).ok_or_else(|| {
                ScenarioError::Compile(format!(
                    "process `{}` references unknown emission factor `{}`",
                    p.id, p.emission_factor_id
                ))
            })?;
            row.push(f.e);
        }
        lp.push_row(row, cap);
    }
    Ok(lp)
}

/// Replaces infinite upper bounds by the tightest bound implied by a single
/// row (`xⱼ ≤ bᵢ / aᵢⱼ` for every row with `aᵢⱼ > 0`). Valid because compiled
/// rows have nonnegative coefficients and variables are nonnegative.
pub fn tighten_implied_bounds(lp: &mut LinearProgram) {
    for j in 0..lp.num_vars() {
        if lp.upper_bounds[j].is_finite() {
            continue;
        }
        let implied = lp
            .rows
            .iter()
            .filter(|r| r.coefficients[j] > 0.0)
            .map(|r| r.rhs / r.coefficients[j])
            .fold(f64::INFINITY, f64::min);
        lp.upper_bounds[j] = implied;
    }
}

/// Allocation without optimization: each variable in declaration order takes
/// as much of the remaining capacity as it can (rounded down when integral).
/// Variables with no finite limit stay at zero.
pub fn declaration_order_fill(lp: &LinearProgram, opts: &SolverOptions) -> Vec<f64> {
    let n = lp.num_vars();
    let mut used = vec![0.0; lp.rows.len()];
    let mut x = vec![0.0; n];
    for j in 0..n {
        let mut cap = lp.upper_bounds[j];
        for (i, r) in lp.rows.iter().enumerate() {
            let a = r.coefficients[j];
            if a > 0.0 {
                cap = cap.min(((r.rhs - used[i]) / a).max(0.0));
            }
        }
        if !cap.is_finite() {
            continue;
        }
        let mut v = cap.max(lp.lower_bounds[j]);
        if lp.integer_mask[j] {
            v = (v + opts.int_tol).floor();
        }
        x[j] = v;
        for (i, r) in lp.rows.iter().enumerate() {
            used[i] += r.coefficients[j] * v;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lca::LifecycleStage;

    fn factor(id: &str, pid: &str, e: f64) -> EmissionFactor {
        EmissionFactor {
            id: id.into(),
            process_id: pid.into(),
            e,
            stage: LifecycleStage::Processing,
        }
    }

    fn process(id: &str, cost: f64) -> ProcessSpec {
        ProcessSpec {
            id: id.into(),
            unit_cost: cost,
            energy_per_unit: 1.0,
            emission_factor_id: format!("f_{id}"),
            max_units: None,
        }
    }

    fn two_process() -> ScenarioSpec {
        let mut s = ScenarioSpec::empty(1);
        s.processes = vec![process("P1", 3.0), process("P2", 4.0)];
        s.emission_factors = vec![factor("f_P1", "P1", 2.0), factor("f_P2", "P2", 5.0)];
        s.limits = vec![ResourceLimit {
            resource_id: "R".into(),
            availability: 4.0,
            consumption: [("P1".to_string(), 2.0), ("P2".to_string(), 3.0)].into(),
        }];
        s
    }

    #[test]
    fn direct_field_mapping() {
        let s = two_process();
        assert!(validate_scenario(&s).is_empty());
        let lp = compile_to_lp(&s).unwrap();
        assert_eq!(lp.objective, vec![3.0, 4.0]);
        assert_eq!(lp.rows.len(), 1);
        assert_eq!(lp.rows[0].coefficients, vec![2.0, 3.0]);
        assert_eq!(lp.rows[0].rhs, 4.0);
        assert_eq!(lp.lower_bounds, vec![0.0, 0.0]);
        assert!(lp.upper_bounds.iter().all(|u| u.is_infinite()));
        assert_eq!(lp.integer_mask, vec![false, false]);
    }

    #[test]
    fn co2_cap_appends_row() {
        let mut s = two_process();
        s.targets.insert(CO2_CAP_TARGET.into(), 10.0);
        s.integrality.insert("P2".into());
        let lp = compile_to_lp(&s).unwrap();
        assert_eq!(lp.rows.len(), 2);
        assert_eq!(lp.rows[1].coefficients, vec![2.0, 5.0]);
        assert_eq!(lp.rows[1].rhs, 10.0);
        assert_eq!(lp.integer_mask, vec![false, true]);
    }

    #[test]
    fn empty_scenario_compiles_to_no_rows() {
        let s = ScenarioSpec::empty(0);
        assert!(validate_scenario(&s).is_empty());
        let lp = compile_to_lp(&s).unwrap();
        assert_eq!(lp.num_vars(), 0);
        assert!(lp.rows.is_empty());
    }

    #[test]
    fn compile_rejects_dangling_limit() {
        let mut s = two_process();
        s.limits[0].consumption.insert("P9".into(), 1.0);
        assert!(matches!(compile_to_lp(&s), Err(ScenarioError::Compile(m)) if m.contains("P9")));
    }

    #[test]
    fn composition_over_one_is_reported() {
        let doc = r#"{"rng_seed": 1, "materials": [{"id": "m1", "name": "cell", "category": "battery-cell",
            "mass_kg": 1, "composition": {"cobalt": 0.7, "nickel": 0.6}, "lifecycle_stage": "collected"}]}"#;
        match parse_scenario(doc, "inline") {
            Err(ScenarioError::Validation(d)) => {
                assert_eq!(d.len(), 1);
                assert!(d[0].message.contains("m1") && d[0].message.contains("fractions sum > 1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_mass_and_dangling_factor() {
        let mut s = two_process();
        s.materials.push(MaterialSpec {
            id: "m".into(),
            name: "m".into(),
            category: MaterialCategory::Plastic,
            mass_kg: -1.0,
            composition: BTreeMap::new(),
            lifecycle_stage: MaterialStage::Collected,
        });
        let d = validate_scenario(&s);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "materials[0].mass_kg");

        let mut s = two_process();
        s.processes[1].emission_factor_id = "nope".into();
        let d = validate_scenario(&s);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("nope"));
    }

    #[test]
    fn unknown_fields_rejected_with_locus() {
        let doc = "{\n  \"rng_seed\": 1,\n  \"colour\": 3\n}";
        match parse_scenario(doc, "x.json") {
            Err(ScenarioError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_scenario("{}", "x"), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn implied_bounds_and_fill() {
        let s = two_process();
        let mut lp = compile_to_lp(&s).unwrap();
        tighten_implied_bounds(&mut lp);
        assert_eq!(lp.upper_bounds, vec![2.0, 4.0 / 3.0]);
        lp.integer_mask = vec![false, true];
        // P1 takes all 4 units of capacity first; P2 gets nothing.
        assert_eq!(declaration_order_fill(&lp, &SolverOptions::default()), vec![2.0, 0.0]);
    }

    #[test]
    fn round_trip_preserves_fields() {
        let mut s = two_process();
        s.targets.insert(CO2_CAP_TARGET.into(), 0.1 + 0.2);
        s.expectations.insert("energy.delta_relative".into(), -25.0);
        let text = s.to_json_pretty();
        let back = parse_scenario(&text, "rt").unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json_pretty(), text);
    }
}
