//! Seeded digital twin: a station-by-station recycling facility and a
//! smart-bin network that emits labeled sensor events.

mod bins;
mod calibrate;
mod recycling;

use serde::Serialize;
use thiserror::Error;

pub use bins::{simulate_bins, simulate_bins_seeded, BinEvent, BinEventStream, ClassProfile, SensorConfig};
pub use calibrate::{calibrate_scenario, CalibrationReport, CalibrationTargets, RECOVERY_TOL};
pub use recycling::{
    recovery_rates, simulate_recycling, FacilityModel, SimulationTrace, Station, StationEvent, OTHER_ELEMENT,
};

use crate::lca::CarbonError;

#[derive(Debug, Error, PartialEq)]
pub enum TwinError {
    #[error("scenario has no collection_graph")]
    NoGraph,
    #[error("scenario has no sensors configuration")]
    NoSensors,
    #[error("scenario has no facility")]
    NoFacility,
    #[error("scenario has no calibration targets")]
    NoCalibration,
    #[error("recovery target {target} for `{element}` is unreachable (maximum {max})")]
    Unreachable { element: String, target: f64, max: f64 },
    #[error(transparent)]
    Carbon(#[from] CarbonError),
}

/// One JSON document per line.
pub fn to_ndjson<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("record serializes"));
        out.push('\n');
    }
    out
}
