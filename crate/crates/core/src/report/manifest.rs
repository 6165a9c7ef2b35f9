use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ReportError;
use crate::energy::EnergyLedger;
use crate::pipeline::{Mode, ModelArtifacts, RunOutput, RunResult, ScenarioFamily, StageTiming};
use crate::scenario::ScenarioSpec;
use crate::twin::to_ndjson;
use crate::TOOL_VERSION;

pub const MANIFEST_FILE: &str = "manifest.json";
const RESULT_FILE: &str = "run_result.json";
const METRICS_FILE: &str = "metrics.json";
const MODELS_FILE: &str = "models.json";

/// Index of one persisted run. Everything except `created_at` and
/// `wall_clock_seconds` is a pure function of scenario, mode and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub tool_version: String,
    pub scenario_path: Option<String>,
    /// SHA-256 of the canonical scenario JSON.
    pub scenario_sha256: String,
    pub scenario_name: String,
    pub family: ScenarioFamily,
    pub mode: Mode,
    pub seed: u64,
    pub created_at: String,
    pub timing_source: String,
    pub timings: Vec<StageTiming>,
    pub wall_clock_seconds: BTreeMap<String, f64>,
    pub pipeline_energy: EnergyLedger,
    pub metrics: BTreeMap<String, f64>,
    /// Artifact name → path relative to the manifest's directory.
    pub artifacts: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn scenario_digest(s: &ScenarioSpec) -> String {
    sha256_hex(s.to_json_pretty().as_bytes())
}

fn run_id(digest: &str, seed: u64, mode: Mode) -> String {
    let key = format!("{digest}\n{seed}\n{mode}\n{TOOL_VERSION}");
    sha256_hex(key.as_bytes())[..16].to_string()
}

/// `<name>-<mode>-s<seed>`, with the name reduced to `[A-Za-z0-9_-]`.
pub fn run_dir_name(scenario_name: &str, mode: Mode, seed: u64) -> String {
    let stem: String = scenario_name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    let stem = if stem.is_empty() { "scenario".to_string() } else { stem };
    format!("{stem}-{mode}-s{seed}")
}

/// Flat numeric view of a result, written as `metrics.json`.
pub fn metrics_snapshot(r: &RunResult) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for (el, v) in &r.recovery {
        m.insert(format!("recovery.{el}"), *v);
    }
    if let Some(v) = r.average_recovery() {
        m.insert("average_recovery".into(), v);
    }
    m.insert("process_energy_kwh".into(), r.process_energy_kwh);
    m.insert("pipeline_energy_kwh".into(), r.pipeline_energy.total_kwh);
    m.insert("co2_kg".into(), r.co2_kg);
    m.insert("lca_co2_kg".into(), r.carbon.total_kg);
    m.insert("waste_reduction_fraction".into(), r.waste_reduction_fraction);
    m.insert("input_mass_kg".into(), r.input_mass_kg);
    if let Some(v) = r.classification_accuracy {
        m.insert("classification_accuracy".into(), v);
    }
    if let Some(v) = r.transport_emissions_kg {
        m.insert("transport_emissions_kg".into(), v);
    }
    if let Some(v) = r.naive_transport_emissions_kg {
        m.insert("naive_transport_emissions_kg".into(), v);
    }
    if let Some(v) = r.allocation.as_ref().and_then(|a| a.objective_value) {
        m.insert("allocation_objective".into(), v);
    }
    m
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serializes");
    s.push('\n');
    s
}

fn write(dir: &Path, name: &str, contents: &str, index: &mut BTreeMap<String, String>) -> Result<(), ReportError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| ReportError::io(&path, e))?;
    let key = name.split('.').next().unwrap_or(name).to_string();
    index.insert(key, name.to_string());
    Ok(())
}

/// Writes a run under `<out_dir>/<run_dir_name>/` and returns its manifest
/// and the manifest path. `spec` is the scenario as run (seed included).
pub fn persist_run(
    out_dir: &Path,
    scenario_path: Option<&Path>,
    spec: &ScenarioSpec,
    output: &RunOutput,
) -> Result<(RunManifest, PathBuf), ReportError> {
    let r = &output.result;
    let dir = out_dir.join(run_dir_name(&r.scenario, r.mode, r.seed));
    fs::create_dir_all(&dir).map_err(|e| ReportError::io(&dir, e))?;

    let mut artifacts = BTreeMap::new();
    let mut spec = spec.clone();
    spec.rng_seed = r.seed;
    write(&dir, "scenario.json", &spec.to_json_pretty(), &mut artifacts)?;
    write(&dir, RESULT_FILE, &to_json(r), &mut artifacts)?;
    let metrics = metrics_snapshot(r);
    write(&dir, METRICS_FILE, &to_json(&metrics), &mut artifacts)?;
    write(&dir, MODELS_FILE, &to_json(&output.artifacts.models), &mut artifacts)?;
    if let Some(lp) = &output.artifacts.lp {
        write(&dir, "lp.json", &to_json(lp), &mut artifacts)?;
    }
    if !output.artifacts.bnb_trace.is_empty() {
        let text: String = output.artifacts.bnb_trace.iter().map(|n| format!("{n}\n")).collect();
        write(&dir, "bnb_trace.txt", &text, &mut artifacts)?;
    }
    if let Some(trace) = &output.artifacts.trace {
        write(&dir, "trace.json", &to_json(trace), &mut artifacts)?;
    }
    if let Some(events) = &output.artifacts.events {
        write(&dir, "events.ndjson", &to_ndjson(&events.events), &mut artifacts)?;
    }
    if !output.artifacts.districts.is_empty() {
        write(&dir, "districts.json", &to_json(&output.artifacts.districts), &mut artifacts)?;
    }

    let digest = scenario_digest(&spec);
    let manifest = RunManifest {
        run_id: run_id(&digest, r.seed, r.mode),
        tool_version: TOOL_VERSION.to_string(),
        scenario_path: scenario_path.map(|p| p.display().to_string()),
        scenario_sha256: digest,
        scenario_name: r.scenario.clone(),
        family: r.family,
        mode: r.mode,
        seed: r.seed,
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
        timing_source: r.timing_source.clone(),
        timings: r.timings.clone(),
        wall_clock_seconds: output.wall_clock.clone(),
        pipeline_energy: r.pipeline_energy.clone(),
        metrics,
        artifacts,
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, to_json(&manifest)).map_err(|e| ReportError::io(&path, e))?;
    Ok((manifest, path))
}

fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_FILE)
    } else {
        path.to_path_buf()
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ReportError::json(path, e))
}

pub(crate) fn load_manifest(path: &Path) -> Result<RunManifest, ReportError> {
    read_json(&manifest_path(path))
}

/// Reads a manifest (or the run directory holding one) and its run result.
pub fn load_run(path: &Path) -> Result<(RunManifest, RunResult), ReportError> {
    let mpath = manifest_path(path);
    let manifest: RunManifest = read_json(&mpath)?;
    let dir = mpath.parent().unwrap_or(Path::new("."));
    let file = manifest.artifacts.get("run_result").map(String::as_str).unwrap_or(RESULT_FILE);
    let result = read_json(&dir.join(file))?;
    Ok((manifest, result))
}

pub fn load_models(path: &Path) -> Result<ModelArtifacts, ReportError> {
    let mpath = manifest_path(path);
    let dir = mpath.parent().unwrap_or(Path::new("."));
    read_json(&dir.join(MODELS_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dir_names() {
        assert_eq!(run_dir_name("battery framework", Mode::Framework, 42), "battery_framework-framework-s42");
        assert_eq!(run_dir_name("", Mode::Baseline, 0), "scenario-baseline-s0");
    }

    #[test]
    fn run_id_depends_on_every_input() {
        let a = run_id("abc", 1, Mode::Baseline);
        assert_eq!(a.len(), 16);
        assert_eq!(a, run_id("abc", 1, Mode::Baseline));
        assert_ne!(a, run_id("abd", 1, Mode::Baseline));
        assert_ne!(a, run_id("abc", 2, Mode::Baseline));
        assert_ne!(a, run_id("abc", 1, Mode::Framework));
    }
}
