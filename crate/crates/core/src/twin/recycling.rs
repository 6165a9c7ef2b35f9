use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::lca::ActivityLedger;
use crate::rng;
use crate::scenario::ScenarioSpec;

/// Element token for the mass not covered by a material's listed composition.
pub const OTHER_ELEMENT: &str = "other";

const FRACTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Station {
    pub id: String,
    /// Fraction of each incoming element recovered here; unlisted elements pass through.
    pub recovery_efficiency: BTreeMap<String, f64>,
    pub energy_kwh_per_kg: f64,
    /// Fraction of every incoming element lost here.
    pub loss_fraction: f64,
}

impl Station {
    pub fn efficiency(&self, element: &str) -> f64 {
        self.recovery_efficiency.get(element).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacilityModel {
    pub stations: Vec<Station>,
    pub throughput_kg_per_step: f64,
    /// Relative half-width of the uniform jitter applied to listed composition
    /// fractions of each incoming battery.
    #[serde(default)]
    pub composition_jitter: f64,
}

impl FacilityModel {
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if !(self.throughput_kg_per_step.is_finite() && self.throughput_kg_per_step > 0.0) {
            out.push(Diagnostic::new("facility.throughput_kg_per_step", "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.composition_jitter) {
            out.push(Diagnostic::new("facility.composition_jitter", "must lie in [0, 1)"));
        }
        let mut ids = BTreeSet::new();
        for (i, st) in self.stations.iter().enumerate() {
            let at = format!("facility.stations[{i}]");
            if !ids.insert(st.id.as_str()) {
                out.push(Diagnostic::new(format!("{at}.id"), format!("duplicate station `{}`", st.id)));
            }
            if !(st.energy_kwh_per_kg.is_finite() && st.energy_kwh_per_kg >= 0.0) {
                out.push(Diagnostic::new(format!("{at}.energy_kwh_per_kg"), "must be >= 0"));
            }
            if !(0.0..=1.0).contains(&st.loss_fraction) {
                out.push(Diagnostic::new(format!("{at}.loss_fraction"), "must lie in [0, 1]"));
            }
            for (el, &r) in &st.recovery_efficiency {
                if !(0.0..=1.0).contains(&r) {
                    out.push(Diagnostic::new(
                        format!("{at}.recovery_efficiency.{el}"),
                        "must lie in [0, 1]",
                    ));
                } else if r + st.loss_fraction > 1.0 + FRACTION_TOL {
                    out.push(Diagnostic::new(
                        format!("{at}.recovery_efficiency.{el}"),
                        format!("recovery {r} plus loss {} exceeds 1", st.loss_fraction),
                    ));
                }
            }
        }
        out
    }

    /// Fraction of an element entering the facility that ends up recovered.
    /// Independent of input mass, so it equals the simulated recovery rate.
    pub fn element_recovery_fraction(&self, element: &str) -> f64 {
        let mut remaining = 1.0;
        let mut recovered = 0.0;
        for st in &self.stations {
            let r = st.efficiency(element);
            recovered += remaining * r;
            remaining *= 1.0 - r - st.loss_fraction;
        }
        recovered
    }
}

/// What one station did to one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationEvent {
    pub step: usize,
    pub station_id: String,
    pub input_kg: f64,
    pub recovered: BTreeMap<String, f64>,
    pub lost_kg: f64,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    pub steps: Vec<StationEvent>,
    pub input_totals: BTreeMap<String, f64>,
    pub recovered_totals: BTreeMap<String, f64>,
    pub lost_totals: BTreeMap<String, f64>,
    pub residual_by_element: BTreeMap<String, f64>,
    pub residual_kg: f64,
    pub energy_kwh: f64,
    pub activity_ledger: ActivityLedger,
    pub rng_seed_used: u64,
}

impl SimulationTrace {
    pub fn input_kg(&self) -> f64 {
        self.input_totals.values().sum()
    }

    /// Largest per-element relative gap between input and
    /// recovered + lost + residual.
    pub fn mass_balance_error(&self) -> f64 {
        self.input_totals
            .iter()
            .map(|(el, &input)| {
                let get = |m: &BTreeMap<String, f64>| m.get(el).copied().unwrap_or(0.0);
                let out = get(&self.recovered_totals) + get(&self.lost_totals) + get(&self.residual_by_element);
                (input - out).abs() / input.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Element masses of one battery after composition jitter.
fn element_masses(
    mass_kg: f64,
    composition: &BTreeMap<String, f64>,
    jitter: f64,
    rng: &mut impl Rng,
) -> BTreeMap<String, f64> {
    let mut fractions: BTreeMap<String, f64> = composition
        .iter()
        .filter(|(el, _)| el.as_str() != OTHER_ELEMENT)
        .map(|(el, &f)| {
            let u: f64 = rng.random();
            (el.clone(), f * (1.0 + jitter * (2.0 * u - 1.0)))
        })
        .collect();
    let listed: f64 = fractions.values().sum();
    if listed > 1.0 {
        fractions.values_mut().for_each(|f| *f /= listed);
    }
    let listed = listed.min(1.0);
    let mut masses: BTreeMap<String, f64> = fractions.into_iter().map(|(el, f)| (el, f * mass_kg)).collect();
    masses.insert(OTHER_ELEMENT.to_string(), mass_kg * (1.0 - listed));
    masses
}

fn add_into(acc: &mut BTreeMap<String, f64>, el: &str, kg: f64) {
    *acc.entry(el.to_string()).or_insert(0.0) += kg;
}

/// Runs every battery-cell material of `s` through the facility's stations.
///
/// Batteries are grouped in declaration order into batches of at least
/// `throughput_kg_per_step` (the last batch may be lighter); each batch is one
/// step and produces one event per station.
pub fn simulate_recycling(s: &ScenarioSpec, f: &FacilityModel) -> SimulationTrace {
    let mut rng = rng::stream(s.rng_seed, "composition", 0);
    let mut trace = SimulationTrace {
        rng_seed_used: s.rng_seed,
        ..SimulationTrace::default()
    };

    let mut batches: Vec<BTreeMap<String, f64>> = Vec::new();
    let mut batch: BTreeMap<String, f64> = BTreeMap::new();
    let mut batch_kg = 0.0;
    let mut batch_items = 0usize;
    for m in s.battery_cells() {
        for (el, kg) in element_masses(m.mass_kg, &m.composition, f.composition_jitter, &mut rng) {
            add_into(&mut trace.input_totals, &el, kg);
            add_into(&mut batch, &el, kg);
        }
        batch_kg += m.mass_kg;
        batch_items += 1;
        if batch_kg >= f.throughput_kg_per_step {
            batches.push(std::mem::take(&mut batch));
            batch_kg = 0.0;
            batch_items = 0;
        }
    }
    if batch_items > 0 {
        batches.push(batch);
    }

    for (step, mut flow) in batches.into_iter().enumerate() {
        for st in &f.stations {
            let input_kg: f64 = flow.values().sum();
            let mut recovered = BTreeMap::new();
            let mut lost_kg = 0.0;
            for (el, kg) in flow.iter_mut() {
                let rec = *kg * st.efficiency(el);
                let lost = *kg * st.loss_fraction;
                *kg = (*kg - rec - lost).max(0.0);
                add_into(&mut trace.recovered_totals, el, rec);
                add_into(&mut trace.lost_totals, el, lost);
                recovered.insert(el.clone(), rec);
                lost_kg += lost;
            }
            let energy_kwh = st.energy_kwh_per_kg * input_kg;
            trace.energy_kwh += energy_kwh;
            trace.activity_ledger.add(&st.id, input_kg);
            trace.steps.push(StationEvent {
                step,
                station_id: st.id.clone(),
                input_kg,
                recovered,
                lost_kg,
                energy_kwh,
            });
        }
        for (el, kg) in flow {
            add_into(&mut trace.residual_by_element, &el, kg);
        }
    }
    trace.residual_kg = trace.residual_by_element.values().sum();
    trace
}

/// `recovered / input` per element; elements with zero input are absent.
pub fn recovery_rates(trace: &SimulationTrace) -> BTreeMap<String, f64> {
    trace
        .input_totals
        .iter()
        .filter(|(_, &input)| input > 0.0)
        .map(|(el, &input)| {
            let rec = trace.recovered_totals.get(el).copied().unwrap_or(0.0);
            (el.clone(), (rec / input).clamp(0.0, 1.0))
        })
        .collect()
}
