//! Bundled scenario and table fixtures, compiled into the binary.

use crate::report::Table3Fixture;
use crate::scenario::{parse_scenario, ScenarioError, ScenarioSpec};

pub const BATTERY_BASELINE: &str = include_str!("../fixtures/battery_baseline.json");
pub const BATTERY_FRAMEWORK: &str = include_str!("../fixtures/battery_framework.json");
pub const WASTE_BASELINE: &str = include_str!("../fixtures/waste_baseline.json");
pub const WASTE_FRAMEWORK: &str = include_str!("../fixtures/waste_framework.json");
pub const ALLOC_SMALL: &str = include_str!("../fixtures/alloc_small.json");
pub const TABLE3: &str = include_str!("../fixtures/table3.json");

/// Names accepted by [`scenario_text`].
pub const SCENARIOS: [&str; 5] = [
    "battery_baseline",
    "battery_framework",
    "waste_baseline",
    "waste_framework",
    "alloc_small",
];

pub fn scenario_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "battery_baseline" => BATTERY_BASELINE,
        "battery_framework" => BATTERY_FRAMEWORK,
        "waste_baseline" => WASTE_BASELINE,
        "waste_framework" => WASTE_FRAMEWORK,
        "alloc_small" => ALLOC_SMALL,
        _ => return None,
    })
}

/// Parses a bundled scenario. Panics on an unknown name.
pub fn scenario(name: &str) -> Result<ScenarioSpec, ScenarioError> {
    let text = scenario_text(name).unwrap_or_else(|| panic!("no bundled scenario `{name}`"));
    parse_scenario(text, &format!("{name}.json"))
}

pub fn table3() -> Table3Fixture {
    serde_json::from_str(TABLE3).expect("bundled table fixture parses")
}
