//! Fits facility parameters so a scenario reproduces target recovery rates,
//! process energy and CO₂.
//!
//! Recovery is fitted per element by bisection on a multiplier applied to
//! every station's efficiency for that element (clamped so recovery + loss
//! stays ≤ 1). Energy and CO₂ are linear in the station energy intensities
//! and emission factors, so they are rescaled exactly once recovery is fixed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::recycling::{simulate_recycling, FacilityModel};
use super::TwinError;
use crate::diagnostics::Diagnostic;
use crate::lca::carbon_footprint;
use crate::scenario::ScenarioSpec;

/// Bisection stops once the recovery fraction is this close to its target.
pub const RECOVERY_TOL: f64 = 1e-9;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTargets {
    /// Element token to target recovery fraction.
    #[serde(default)]
    pub recovery: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_kwh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub co2_kg: Option<f64>,
}

impl CalibrationTargets {
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (el, &r) in &self.recovery {
            if !(0.0..=1.0).contains(&r) {
                out.push(Diagnostic::new(format!("calibration.recovery.{el}"), "must lie in [0, 1]"));
            }
        }
        for (name, v) in [("energy_kwh", self.energy_kwh), ("co2_kg", self.co2_kg)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    out.push(Diagnostic::new(format!("calibration.{name}"), "must be >= 0"));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    /// Multiplier applied to each element's station efficiencies.
    pub multipliers: BTreeMap<String, f64>,
    pub recovery: BTreeMap<String, f64>,
    pub energy_kwh: f64,
    pub co2_kg: f64,
}

fn scaled(f: &FacilityModel, element: &str, k: f64) -> FacilityModel {
    let mut out = f.clone();
    for st in &mut out.stations {
        if let Some(r) = st.recovery_efficiency.get_mut(element) {
            *r = (*r * k).min(1.0 - st.loss_fraction).max(0.0);
        }
    }
    out
}

fn fit_element(f: &FacilityModel, element: &str, target: f64) -> Result<(FacilityModel, f64), TwinError> {
    // Past `hi` every station is clamped, so recovery is at its maximum.
    let hi = f
        .stations
        .iter()
        .filter(|st| st.efficiency(element) > 0.0)
        .map(|st| (1.0 - st.loss_fraction) / st.efficiency(element))
        .fold(0.0, f64::max);
    let best = scaled(f, element, hi).element_recovery_fraction(element);
    if hi == 0.0 || best < target - RECOVERY_TOL {
        return Err(TwinError::Unreachable {
            element: element.to_string(),
            target,
            max: best,
        });
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let r = scaled(f, element, mid).element_recovery_fraction(element);
        if (r - target).abs() <= RECOVERY_TOL {
            return Ok((scaled(f, element, mid), mid));
        }
        if r < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    Ok((scaled(f, element, k), k))
}

/// Returns a copy of `s` whose facility and emission factors hit the
/// scenario's `calibration` targets.
pub fn calibrate_scenario(s: &ScenarioSpec) -> Result<(ScenarioSpec, CalibrationReport), TwinError> {
    let targets = s.calibration.as_ref().ok_or(TwinError::NoCalibration)?;
    let mut facility = s.facility.clone().ok_or(TwinError::NoFacility)?;
    let mut multipliers = BTreeMap::new();
    for (el, &target) in &targets.recovery {
        let (f, k) = fit_element(&facility, el, target)?;
        facility = f;
        multipliers.insert(el.clone(), k);
    }

    let mut out = s.clone();
    if let Some(target) = targets.energy_kwh {
        let current = simulate_recycling(&out, &facility).energy_kwh;
        if current > 0.0 {
            let ratio = target / current;
            facility.stations.iter_mut().for_each(|st| st.energy_kwh_per_kg *= ratio);
        }
    }
    out.facility = Some(facility.clone());

    let trace = simulate_recycling(&out, &facility);
    if let Some(target) = targets.co2_kg {
        let current = carbon_footprint(&out.emission_factors, &trace.activity_ledger)?.total_kg;
        if current > 0.0 {
            let ratio = target / current;
            for f in &mut out.emission_factors {
                if trace.activity_ledger.entries.contains_key(&f.process_id) {
                    f.e *= ratio;
                }
            }
        }
    }
    let co2_kg = carbon_footprint(&out.emission_factors, &trace.activity_ledger)?.total_kg;
    let report = CalibrationReport {
        multipliers,
        recovery: targets
            .recovery
            .keys()
            .map(|el| (el.clone(), facility.element_recovery_fraction(el)))
            .collect(),
        energy_kwh: trace.energy_kwh,
        co2_kg,
    };
    Ok((out, report))
}
