use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::districts::partition_districts;
use super::{Mode, PipelineError, RunSettings, ScenarioFamily};
use crate::classifier::{
    evaluate_accuracy, featurize, train_classifier, FeatureVector, NormStats, RuleClassifier, SoftmaxModel,
};
use crate::energy::{EnergyLedger, StageUsage};
use crate::lca::{carbon_footprint, ActivityLedger, CarbonReport};
use crate::milp::{solve_milp_traced, LinearProgram, NodeRecord, SolveStatus};
use crate::rng;
use crate::routing::{greedy_route, naive_route, route_emissions, train_routing, CollectionGraph, QTable, Route};
use crate::scenario::{compile_to_lp, declaration_order_fill, tighten_implied_bounds, validate_scenario, ScenarioSpec};
use crate::twin::{
    recovery_rates, simulate_bins, simulate_recycling, BinEvent, BinEventStream, SimulationTrace, OTHER_ELEMENT,
};

/// Stage names in execution order.
pub const STAGES: [&str; 7] = ["preprocess", "classify", "simulate", "optimize", "route", "carbon", "metrics"];

/// Bytes charged per record moved by a stage when no synthetic cost is set.
const RECORD_BYTES: f64 = 64.0;

/// The feature the baseline rule thresholds on.
pub const RULE_FEATURE: &str = "weight";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSummary {
    /// `milp` or `declaration_order_fill`.
    pub method: String,
    pub status: SolveStatus,
    pub values: BTreeMap<String, f64>,
    pub objective_value: Option<f64>,
    pub nodes_explored: usize,
}

/// Metrics of one pipeline run. Fractions are in [0, 1], masses in kg,
/// energies in kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: String,
    pub family: ScenarioFamily,
    pub mode: Mode,
    pub seed: u64,
    pub recovery: BTreeMap<String, f64>,
    /// Facility energy from the digital twin.
    pub process_energy_kwh: f64,
    /// Metered cost of running the pipeline itself.
    pub pipeline_energy: EnergyLedger,
    pub co2_kg: f64,
    pub carbon: CarbonReport,
    pub classification_accuracy: Option<f64>,
    pub transport_emissions_kg: Option<f64>,
    /// Emissions of the lowest-id tour over the same bins.
    pub naive_transport_emissions_kg: Option<f64>,
    /// `1 − residual_kg / input_kg` of the recycling trace; 0 without input.
    pub waste_reduction_fraction: f64,
    pub input_mass_kg: f64,
    pub allocation: Option<AllocationSummary>,
    pub routes: Vec<Route>,
    /// `synthetic` when stage costs come from settings, else `measured`.
    pub timing_source: String,
    pub timings: Vec<StageTiming>,
    pub expectations: BTreeMap<String, f64>,
}

impl RunResult {
    pub fn average_recovery(&self) -> Option<f64> {
        if self.recovery.is_empty() {
            None
        } else {
            Some(self.recovery.values().sum::<f64>() / self.recovery.len() as f64)
        }
    }
}

/// Learned models of a run, versioned for the feedback loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifacts {
    pub version: u32,
    pub classifier: Option<SoftmaxModel>,
    pub rule: Option<RuleClassifier>,
    /// One table per district, in district order.
    pub qtables: Vec<QTable>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub trace: Option<SimulationTrace>,
    pub events: Option<BinEventStream>,
    pub models: ModelArtifacts,
    pub lp: Option<LinearProgram>,
    pub bnb_trace: Vec<NodeRecord>,
    pub districts: Vec<CollectionGraph>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub result: RunResult,
    pub artifacts: RunArtifacts,
    /// Measured wall-clock seconds per stage, whatever the timing source.
    pub wall_clock: BTreeMap<String, f64>,
}

pub(crate) fn family_of(s: &ScenarioSpec) -> ScenarioFamily {
    let battery = s.facility.is_some() || s.battery_cells().next().is_some();
    let waste = s.collection_graph.is_some() || s.sensors.is_some();
    match (battery, waste) {
        (true, true) => ScenarioFamily::Mixed,
        (true, false) => ScenarioFamily::Battery,
        (false, true) => ScenarioFamily::Waste,
        (false, false) => ScenarioFamily::Empty,
    }
}

struct Meter<'a> {
    settings: &'a RunSettings,
    ledger: EnergyLedger,
    timings: Vec<StageTiming>,
    wall: BTreeMap<String, f64>,
}

impl Meter<'_> {
    fn synthetic(&self) -> bool {
        !self.settings.stage_costs.is_empty()
    }

    /// Runs a stage that reports how many records it moved.
    fn stage<T>(
        &mut self,
        name: &'static str,
        f: impl FnOnce() -> Result<(T, usize), PipelineError>,
    ) -> Result<T, PipelineError> {
        let start = Instant::now();
        let (value, records) = f()?;
        let wall = start.elapsed().as_secs_f64();
        let (seconds, mb) = if self.synthetic() {
            self.settings
                .stage_costs
                .get(name)
                .map_or((0.0, 0.0), |c| (c.compute_seconds, c.transferred_mb))
        } else {
            (wall, records as f64 * RECORD_BYTES / 1e6)
        };
        self.ledger
            .record_stage(&self.settings.energy_model, StageUsage::new(name, seconds, mb));
        self.timings.push(StageTiming {
            stage: name.to_string(),
            seconds,
        });
        self.wall.insert(name.to_string(), wall);
        Ok(value)
    }
}

pub(crate) struct Splits<'a> {
    pub train: Vec<&'a BinEvent>,
    pub test: Vec<&'a BinEvent>,
}

pub(crate) fn split_events<'a>(s: &ScenarioSpec, stream: &'a BinEventStream) -> Splits<'a> {
    let split = s.sensors.as_ref().map_or(0, |c| c.split_step());
    let (train, test) = stream.split_at_step(split);
    Splits { train, test }
}

pub(crate) fn labeled(
    events: &[&BinEvent],
    stats: &NormStats,
) -> Result<Vec<(FeatureVector, String)>, PipelineError> {
    events
        .iter()
        .map(|e| {
            featurize(&e.features, stats)
                .map(|x| (x, e.true_label.clone()))
                .map_err(|err| PipelineError::stage("preprocess", err))
        })
        .collect()
}

pub(crate) fn train_on(
    s: &ScenarioSpec,
    seed: u64,
    train: &[&BinEvent],
) -> Result<(SoftmaxModel, Vec<crate::diagnostics::Diagnostic>), PipelineError> {
    let stats = NormStats::fit(train.iter().map(|e| &e.features)).map_err(|e| PipelineError::stage("classify", e))?;
    let data = labeled(train, &stats)?;
    let cfg = crate::classifier::TrainConfig {
        rng_seed: rng::derive_seed(seed, "classifier", 0),
        ..s.settings.classifier
    };
    let report = train_classifier(&data, stats, &cfg).map_err(|e| PipelineError::stage("classify", e))?;
    Ok((report.model, report.diagnostics))
}

pub(crate) fn model_accuracy(m: &SoftmaxModel, test: &[&BinEvent]) -> Result<f64, PipelineError> {
    let data = labeled(test, &m.norm_stats)?;
    evaluate_accuracy(m, &data).map_err(|e| PipelineError::stage("classify", e))
}

pub(crate) fn district_seed(seed: u64, k: usize) -> u64 {
    rng::derive_seed(seed, "district", k as u64)
}

/// Executes the pipeline stages in order; every stage is metered.
///
/// Framework mode trains the softmax classifier, solves the allocation MILP
/// and learns district routes. Baseline mode applies the weight rule, fills
/// allocations in declaration order and drives the lowest-id tour.
pub fn run(s: &ScenarioSpec, mode: Mode, seed_override: Option<u64>) -> Result<RunOutput, PipelineError> {
    let diags = validate_scenario(s);
    if !diags.is_empty() {
        return Err(PipelineError::Invalid(diags));
    }
    if s.battery_cells().next().is_some() && s.facility.is_none() {
        return Err(PipelineError::ModeUnsupported(
            "battery-cell materials need a `facility` to simulate".into(),
        ));
    }
    if s.sensors.is_some() && s.collection_graph.is_none() {
        return Err(PipelineError::ModeUnsupported("`sensors` need a `collection_graph`".into()));
    }

    let seed = seed_override.unwrap_or(s.rng_seed);
    let mut spec = s.clone();
    spec.rng_seed = seed;
    let s = &spec;
    let mut meter = Meter {
        settings: &s.settings,
        ledger: EnergyLedger::new(),
        timings: Vec::new(),
        wall: BTreeMap::new(),
    };
    let framework = mode == Mode::Framework;

    // (1) sensor ingestion and feature normalization
    let events = meter.stage("preprocess", || {
        let Some(cfg) = &s.sensors else {
            return Ok((None, 0));
        };
        let stream = simulate_bins(s, cfg.horizon).map_err(|e| PipelineError::stage("preprocess", e))?;
        let n = stream.events.len();
        Ok((Some(stream), n))
    })?;

    // (2) classification
    let (classifier, rule, accuracy) = meter.stage("classify", || {
        let (Some(stream), Some(cfg)) = (&events, &s.sensors) else {
            return Ok(((None, None, None), 0));
        };
        let splits = split_events(s, stream);
        if splits.test.is_empty() {
            return Err(PipelineError::stage("classify", "held-out split is empty"));
        }
        let n = splits.train.len() + splits.test.len();
        if framework {
            let (model, _) = train_on(s, seed, &splits.train)?;
            let acc = model_accuracy(&model, &splits.test)?;
            Ok(((Some(model), None, Some(acc)), n))
        } else {
            let rule = RuleClassifier::from_sensor_config(cfg, RULE_FEATURE)
                .map_err(|e| PipelineError::stage("classify", e))?;
            let acc = rule
                .accuracy(splits.test.iter().map(|e| (&e.features, e.true_label.as_str())))
                .map_err(|e| PipelineError::stage("classify", e))?;
            Ok(((None, Some(rule), Some(acc)), splits.test.len()))
        }
    })?;

    // (3) facility simulation
    let trace = meter.stage("simulate", || {
        let Some(f) = &s.facility else {
            return Ok((None, 0));
        };
        let trace = simulate_recycling(s, f);
        let n = trace.steps.len();
        Ok((Some(trace), n))
    })?;

    // (4) material allocation
    let (lp, allocation, bnb_trace) = meter.stage("optimize", || {
        if s.processes.is_empty() {
            return Ok(((None, None, Vec::new()), 0));
        }
        let mut lp = compile_to_lp(s).map_err(|e| PipelineError::stage("optimize", e))?;
        let ids: Vec<String> = s.processes.iter().map(|p| p.id.clone()).collect();
        let summary;
        let mut records = Vec::new();
        if framework {
            tighten_implied_bounds(&mut lp);
            let (sol, recs) =
                solve_milp_traced(&lp, &s.settings.solver).map_err(|e| PipelineError::stage("optimize", e))?;
            records = recs;
            summary = AllocationSummary {
                method: "milp".into(),
                status: sol.status,
                values: ids.iter().cloned().zip(sol.values.iter().copied()).collect(),
                objective_value: sol.objective_value.is_finite().then_some(sol.objective_value),
                nodes_explored: sol.nodes_explored,
            };
        } else {
            let x = declaration_order_fill(&lp, &s.settings.solver);
            summary = AllocationSummary {
                method: "declaration_order_fill".into(),
                status: SolveStatus::Optimal,
                objective_value: Some(lp.objective_value(&x)),
                values: ids.iter().cloned().zip(x).collect(),
                nodes_explored: 0,
            };
        }
        let n = lp.rows.len() * lp.num_vars();
        Ok(((Some(lp), Some(summary), records), n))
    })?;

    // (5) collection routing
    let (routes, qtables, districts, transport, naive) = meter.stage("route", || {
        let Some(g) = &s.collection_graph else {
            return Ok(((Vec::new(), Vec::new(), Vec::new(), None, None), 0));
        };
        let naive = naive_route(g).map_err(|e| PipelineError::stage("route", e))?;
        let naive_kg = route_emissions(g, &naive).map_err(|e| PipelineError::stage("route", e))?;
        if !framework {
            let n = naive.0.len();
            return Ok(((vec![naive], Vec::new(), Vec::new(), Some(naive_kg), Some(naive_kg)), n));
        }
        let districts = partition_districts(g, s.settings.district_max_bins);
        let mut routes = Vec::new();
        let mut tables = Vec::new();
        let mut total = 0.0;
        for (k, d) in districts.iter().enumerate() {
            let cfg = crate::routing::RLConfig {
                rng_seed: district_seed(seed, k),
                ..s.settings.rl
            };
            let q = train_routing(d, &cfg).map_err(|e| PipelineError::stage("route", e))?;
            let r = greedy_route(&q, d).map_err(|e| PipelineError::stage("route", e))?;
            total += route_emissions(d, &r).map_err(|e| PipelineError::stage("route", e))?;
            routes.push(r);
            tables.push(q);
        }
        let n = tables.iter().map(QTable::len).sum();
        Ok(((routes, tables, districts, Some(total), Some(naive_kg)), n))
    })?;

    // (6) lifecycle carbon
    let carbon = meter.stage("carbon", || {
        let empty = ActivityLedger::new();
        let ledger = trace.as_ref().map_or(&empty, |t| &t.activity_ledger);
        let report = carbon_footprint(&s.emission_factors, ledger).map_err(|e| PipelineError::stage("carbon", e))?;
        Ok((report, ledger.entries.len()))
    })?;

    // (7) metrics
    let metrics = meter.stage("metrics", || {
        let recovery: BTreeMap<String, f64> = trace
            .as_ref()
            .map(recovery_rates)
            .unwrap_or_default()
            .into_iter()
            .filter(|(el, _)| el != OTHER_ELEMENT)
            .collect();
        let input = trace.as_ref().map_or(0.0, SimulationTrace::input_kg);
        let residual = trace.as_ref().map_or(0.0, |t| t.residual_kg);
        let waste_reduction = if input > 0.0 {
            (1.0 - residual / input).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let n = recovery.len();
        Ok(((recovery, input, waste_reduction), n))
    })?;
    let (recovery, input_mass_kg, waste_reduction_fraction) = metrics;

    let co2_kg = carbon.total_kg + transport.unwrap_or(0.0);
    let result = RunResult {
        scenario: s.name.clone().unwrap_or_default(),
        family: family_of(s),
        mode,
        seed,
        recovery,
        process_energy_kwh: trace.as_ref().map_or(0.0, |t| t.energy_kwh),
        pipeline_energy: meter.ledger.clone(),
        co2_kg,
        carbon,
        classification_accuracy: accuracy,
        transport_emissions_kg: transport,
        naive_transport_emissions_kg: naive,
        waste_reduction_fraction,
        input_mass_kg,
        allocation,
        routes,
        timing_source: if meter.synthetic() { "synthetic" } else { "measured" }.into(),
        timings: meter.timings.clone(),
        expectations: s.expectations.clone(),
    };
    Ok(RunOutput {
        result,
        artifacts: RunArtifacts {
            trace,
            events,
            models: ModelArtifacts {
                version: 1,
                classifier,
                rule,
                qtables,
            },
            lp,
            bnb_trace,
            districts,
        },
        wall_clock: meter.wall,
    })
}
