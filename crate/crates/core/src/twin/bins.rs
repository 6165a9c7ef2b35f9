use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::TwinError;
use crate::classifier::FEATURE_NAMES;
use crate::diagnostics::Diagnostic;
use crate::routing::NodeId;
use crate::rng;
use crate::scenario::ScenarioSpec;

const SHARE_TOL: f64 = 1e-9;

/// Feature distribution of one waste category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassProfile {
    pub label: String,
    /// Probability that a deposit belongs to this class.
    pub share: f64,
    pub means: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub classes: Vec<ClassProfile>,
    /// Per-feature noise standard deviation, shared by all classes.
    pub feature_std: BTreeMap<String, f64>,
    /// Chance that a bin receives a deposit in a given step.
    pub deposit_probability: f64,
    pub fill_increment_min: f64,
    pub fill_increment_max: f64,
    /// Steps simulated by a pipeline run.
    pub horizon: usize,
    /// Events before `train_fraction · horizon` train the classifier; the rest are held out.
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    0.7
}

impl SensorConfig {
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.classes.len() < 2 {
            out.push(Diagnostic::new("sensors.classes", "need at least two classes"));
        }
        let mut labels = BTreeSet::new();
        let mut total = 0.0;
        for (i, c) in self.classes.iter().enumerate() {
            let at = format!("sensors.classes[{i}]");
            if !labels.insert(c.label.as_str()) {
                out.push(Diagnostic::new(format!("{at}.label"), format!("duplicate label `{}`", c.label)));
            }
            if !(c.share.is_finite() && c.share >= 0.0) {
                out.push(Diagnostic::new(format!("{at}.share"), "must be >= 0"));
            }
            total += c.share;
            for name in FEATURE_NAMES {
                match c.means.get(name) {
                    Some(v) if v.is_finite() => {}
                    _ => out.push(Diagnostic::new(format!("{at}.means.{name}"), "missing or not finite")),
                }
            }
            for k in c.means.keys() {
                if !FEATURE_NAMES.contains(&k.as_str()) {
                    out.push(Diagnostic::new(format!("{at}.means.{k}"), "unknown feature"));
                }
            }
        }
        if !self.classes.is_empty() && (total - 1.0).abs() > SHARE_TOL {
            out.push(Diagnostic::new("sensors.classes", format!("shares sum to {total}, expected 1")));
        }
        for name in FEATURE_NAMES {
            match self.feature_std.get(name) {
                Some(&v) if v.is_finite() && v > 0.0 => {}
                _ => out.push(Diagnostic::new(format!("sensors.feature_std.{name}"), "must be > 0")),
            }
        }
        if !(0.0..=1.0).contains(&self.deposit_probability) {
            out.push(Diagnostic::new("sensors.deposit_probability", "must lie in [0, 1]"));
        }
        if !(0.0 <= self.fill_increment_min
            && self.fill_increment_min <= self.fill_increment_max
            && self.fill_increment_max <= 1.0)
        {
            out.push(Diagnostic::new(
                "sensors.fill_increment_min",
                "need 0 <= fill_increment_min <= fill_increment_max <= 1",
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            out.push(Diagnostic::new("sensors.train_fraction", "must lie in (0, 1)"));
        }
        out
    }

    /// First step that belongs to the held-out split.
    pub fn split_step(&self) -> usize {
        (self.train_fraction * self.horizon as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinEvent {
    pub step: usize,
    pub bin_id: NodeId,
    pub fill_level: f64,
    pub features: BTreeMap<String, f64>,
    pub true_label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BinEventStream {
    pub events: Vec<BinEvent>,
}

impl BinEventStream {
    /// Splits into (steps before `step`, the rest).
    pub fn split_at_step(&self, step: usize) -> (Vec<&BinEvent>, Vec<&BinEvent>) {
        self.events.iter().partition(|e| e.step < step)
    }

    pub fn label_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.events {
            *counts.entry(e.true_label.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

/// Smart-bin events over `horizon` steps, seeded by the scenario seed.
pub fn simulate_bins(s: &ScenarioSpec, horizon: usize) -> Result<BinEventStream, TwinError> {
    simulate_bins_seeded(s, horizon, s.rng_seed)
}

/// Each step visits the non-depot bins in ascending id order; a bin receives
/// a deposit with `deposit_probability`, its fill rises by a uniform
/// increment (capped at 1) and the deposit's features are the class means
/// plus Gaussian noise.
pub fn simulate_bins_seeded(s: &ScenarioSpec, horizon: usize, seed: u64) -> Result<BinEventStream, TwinError> {
    let g = s.collection_graph.as_ref().ok_or(TwinError::NoGraph)?;
    let cfg = s.sensors.as_ref().ok_or(TwinError::NoSensors)?;
    let mut bins: Vec<(NodeId, f64)> = g
        .nodes
        .iter()
        .filter(|n| !n.is_depot)
        .map(|n| (n.id, n.fill_level))
        .collect();
    bins.sort_by_key(|b| b.0);

    let std: Vec<f64> = FEATURE_NAMES.iter().map(|f| cfg.feature_std[*f]).collect();
    let mut rng = rng::stream(seed, "bins", 0);
    let mut events = Vec::new();
    for step in 0..horizon {
        for (bin_id, fill) in bins.iter_mut() {
            if rng.random::<f64>() >= cfg.deposit_probability {
                continue;
            }
            let u: f64 = rng.random();
            let inc = cfg.fill_increment_min + (cfg.fill_increment_max - cfg.fill_increment_min) * u;
            *fill = (*fill + inc).min(1.0);

            let pick: f64 = rng.random();
            let mut acc = 0.0;
            let mut class = cfg.classes.last().expect("validated: at least two classes");
            for c in &cfg.classes {
                acc += c.share;
                if pick < acc {
                    class = c;
                    break;
                }
            }
            let features = FEATURE_NAMES
                .iter()
                .zip(&std)
                .map(|(name, sd)| {
                    let z: f64 = rng.sample(StandardNormal);
                    (name.to_string(), class.means[*name] + sd * z)
                })
                .collect();
            events.push(BinEvent {
                step,
                bin_id: *bin_id,
                fill_level: *fill,
                features,
                true_label: class.label.clone(),
            });
        }
    }
    Ok(BinEventStream { events })
}
