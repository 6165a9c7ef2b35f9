//! Regenerates the bundled scenario fixtures under `crates/core/fixtures/`.
//!
//! ```text
//! cargo run -p recirc --release --example gen_fixtures [-- <out-dir>]
//! ```
//!
//! Battery facilities are calibrated before writing, so the bundled files
//! reproduce their target recovery, energy and CO₂ exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::Rng;
use recirc::lca::{EmissionFactor, LifecycleStage};
use recirc::pipeline::{self, Mode, StageCost};
use recirc::routing::{BinNode, CollectionGraph, RLConfig};
use recirc::scenario::{
    save_scenario, MaterialCategory, MaterialSpec, MaterialStage, ProcessSpec, ResourceLimit, ScenarioSpec,
};
use recirc::twin::{calibrate_scenario, CalibrationTargets, ClassProfile, FacilityModel, SensorConfig, Station};
use recirc::{classifier::FEATURE_NAMES, rng};

const SEED: u64 = 42;

fn map<V: Copy>(pairs: &[(&str, V)]) -> BTreeMap<String, V> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn process(id: &str, unit_cost: f64, energy: f64, max_units: Option<f64>) -> ProcessSpec {
    ProcessSpec {
        id: id.into(),
        unit_cost,
        energy_per_unit: energy,
        emission_factor_id: format!("ef_{id}"),
        max_units,
    }
}

fn factor(process_id: &str, e: f64, stage: LifecycleStage) -> EmissionFactor {
    EmissionFactor {
        id: format!("ef_{process_id}"),
        process_id: process_id.into(),
        e,
        stage,
    }
}

fn synthetic_costs() -> BTreeMap<String, StageCost> {
    [
        ("preprocess", 2.0, 1.5),
        ("classify", 6.0, 0.5),
        ("simulate", 4.0, 2.0),
        ("optimize", 1.0, 0.1),
        ("route", 8.0, 0.2),
        ("carbon", 0.5, 0.1),
        ("metrics", 0.5, 0.1),
    ]
    .into_iter()
    .map(|(k, s, mb)| {
        (
            k.to_string(),
            StageCost {
                compute_seconds: s,
                transferred_mb: mb,
            },
        )
    })
    .collect()
}

fn battery_cells() -> Vec<MaterialSpec> {
    let mut r = rng::stream(SEED, "fixture-cells", 0);
    let raw: Vec<f64> = (0..1000).map(|_| r.random_range(12.0..18.0)).collect();
    let scale = 15_000.0 / raw.iter().sum::<f64>();
    raw.iter()
        .enumerate()
        .map(|(i, m)| {
            let mass = (m * scale * 1000.0).round() / 1000.0;
            MaterialSpec {
                id: format!("cell-{i:04}"),
                name: format!("Li-ion cell {i}"),
                category: MaterialCategory::BatteryCell,
                mass_kg: mass,
                composition: map(&[
                    ("cobalt", (r.random_range(0.03..0.05f64) * 1e4).round() / 1e4),
                    ("nickel", (r.random_range(0.10..0.14f64) * 1e4).round() / 1e4),
                    ("lithium", (r.random_range(0.015..0.025f64) * 1e4).round() / 1e4),
                ]),
                lifecycle_stage: MaterialStage::Collected,
            }
        })
        .collect()
}

fn stations(hydromet: [f64; 3], shred: [f64; 3]) -> Vec<Station> {
    let el = |v: [f64; 3]| map(&[("cobalt", v[0]), ("nickel", v[1]), ("lithium", v[2])]);
    vec![
        Station {
            id: "discharge".into(),
            recovery_efficiency: BTreeMap::new(),
            energy_kwh_per_kg: 0.05,
            loss_fraction: 0.0,
        },
        Station {
            id: "disassembly".into(),
            recovery_efficiency: BTreeMap::new(),
            energy_kwh_per_kg: 0.15,
            loss_fraction: 0.01,
        },
        Station {
            id: "shredding".into(),
            recovery_efficiency: el(shred),
            energy_kwh_per_kg: 0.3,
            loss_fraction: 0.03,
        },
        Station {
            id: "hydromet".into(),
            recovery_efficiency: el(hydromet),
            energy_kwh_per_kg: 0.8,
            loss_fraction: 0.04,
        },
    ]
}

fn battery(name: &str, framework: bool) -> ScenarioSpec {
    let processes = vec![
        process("discharge", 0.05, 0.05, Some(15_000.0)),
        process("disassembly", 0.2, 0.15, Some(15_000.0)),
        process("shredding", 0.08, 0.3, Some(15_000.0)),
        process("hydromet", -0.6, 0.8, Some(15_000.0)),
    ];
    let emission_factors = vec![
        factor("discharge", 0.2, LifecycleStage::Collection),
        factor("disassembly", 0.4, LifecycleStage::Processing),
        factor("shredding", 0.6, LifecycleStage::Processing),
        factor("hydromet", 1.2, LifecycleStage::Recovery),
    ];
    let limits = vec![
        ResourceLimit {
            resource_id: "labor_hours".into(),
            availability: 400.0,
            consumption: map(&[
                ("discharge", 0.01),
                ("disassembly", 0.05),
                ("shredding", 0.005),
                ("hydromet", 0.01),
            ]),
        },
        ResourceLimit {
            resource_id: "reagent_m3".into(),
            availability: 250.0,
            consumption: map(&[("hydromet", 0.02)]),
        },
    ];
    let (recovery, energy, co2) = if framework {
        ([0.85, 0.90, 0.88], 15_000.0, 22_000.0)
    } else {
        ([0.68, 0.70, 0.72], 20_000.0, 30_000.0)
    };
    let mut spec = ScenarioSpec::empty(SEED);
    spec.name = Some(name.into());
    spec.materials = battery_cells();
    spec.processes = processes;
    spec.limits = limits;
    spec.emission_factors = emission_factors;
    spec.facility = Some(FacilityModel {
        stations: stations([0.6, 0.6, 0.6], [0.05, 0.05, 0.05]),
        throughput_kg_per_step: 500.0,
        composition_jitter: 0.05,
    });
    spec.calibration = Some(CalibrationTargets {
        recovery: map(&[("cobalt", recovery[0]), ("nickel", recovery[1]), ("lithium", recovery[2])]),
        energy_kwh: Some(energy),
        co2_kg: Some(co2),
    });
    spec.settings.stage_costs = synthetic_costs();
    if framework {
        spec.expectations = map(&[
            ("cobalt_recovery.delta_pp", 17.0),
            ("nickel_recovery.delta_pp", 20.0),
            ("lithium_recovery.delta_pp", 16.0),
            ("energy.delta_relative", -25.0),
            ("co2.delta_relative", -28.0),
        ]);
    }
    let (calibrated, report) = calibrate_scenario(&spec).expect("battery fixture calibrates");
    eprintln!("{name}: {report:?}");
    calibrated
}

fn sensors() -> SensorConfig {
    let class = |label: &str, share: f64, means: [f64; 6]| ClassProfile {
        label: label.into(),
        share,
        means: FEATURE_NAMES.iter().zip(means).map(|(k, v)| (k.to_string(), v)).collect(),
    };
    SensorConfig {
        classes: vec![
            class("plastic", 0.35, [0.30, 1.0, 0.20, 0.60, 2.0, 14.0]),
            class("organic", 0.30, [1.06, 1.0, 0.37, 0.60, 1.575, 11.45]),
            class("glass", 0.15, [1.82, 1.0, 0.20, 0.396, 2.425, 12.47]),
            class("metal", 0.20, [2.58, 1.85, 0.20, 0.661, 2.425, 10.94]),
        ],
        feature_std: FEATURE_NAMES
            .iter()
            .zip([0.40, 0.50, 0.10, 0.12, 0.50, 3.0])
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        deposit_probability: 0.6,
        fill_increment_min: 0.01,
        fill_increment_max: 0.05,
        horizon: 400,
        train_fraction: 0.7,
    }
}

fn city_graph(bins: usize, noise: f64) -> CollectionGraph {
    let mut r = rng::stream(SEED, "fixture-city", 0);
    let mut pts: Vec<(f64, f64, f64)> = (0..bins)
        .map(|_| {
            let x: f64 = r.random_range(-5.0..5.0);
            let y: f64 = r.random_range(-5.0..5.0);
            let key = y.atan2(x) + r.random_range(-noise..=noise);
            (key, x, y)
        })
        .collect();
    // Ids follow a noisy angular sweep, the way bins get numbered street by street.
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut coords = vec![(0.0, 0.0)];
    coords.extend(pts.iter().map(|&(_, x, y)| (x, y)));
    let mut nodes = vec![BinNode {
        id: 0,
        fill_level: 0.0,
        is_depot: true,
    }];
    for i in 1..coords.len() {
        nodes.push(BinNode {
            id: i as u32,
            fill_level: (r.random_range(0.3..1.0f64) * 100.0).round() / 100.0,
            is_depot: false,
        });
    }
    let mut g = CollectionGraph::new(nodes);
    for a in 0..coords.len() {
        for b in a + 1..coords.len() {
            let (dx, dy) = (coords[a].0 - coords[b].0, coords[a].1 - coords[b].1);
            let d = ((dx * dx + dy * dy).sqrt() * 1.3 * 1000.0).round() / 1000.0;
            let rate = (r.random_range(0.7..0.9f64) * 1000.0).round() / 1000.0;
            g.add_edge(a as u32, b as u32, d, rate);
        }
    }
    g
}

fn waste(name: &str, framework: bool) -> ScenarioSpec {
    let mut spec = ScenarioSpec::empty(SEED);
    spec.name = Some(name.into());
    spec.processes = vec![
        process("recycling", -30.0, 12.0, None),
        process("composting", -10.0, 6.0, None),
        process("landfill", 20.0, 2.0, None),
    ];
    spec.emission_factors = vec![
        factor("recycling", 15.0, LifecycleStage::Processing),
        factor("composting", 8.0, LifecycleStage::Processing),
        factor("landfill", 120.0, LifecycleStage::Disposal),
    ];
    spec.limits = vec![
        ResourceLimit {
            resource_id: "truck_hours".into(),
            availability: 40.0,
            consumption: map(&[("recycling", 3.0), ("composting", 2.0), ("landfill", 1.0)]),
        },
        ResourceLimit {
            resource_id: "sorting_line_loads".into(),
            availability: 9.0,
            consumption: map(&[("recycling", 1.0)]),
        },
    ];
    spec.integrality = ["recycling", "composting", "landfill"].iter().map(|s| s.to_string()).collect();
    spec.collection_graph = Some(city_graph(50, 0.55));
    spec.sensors = Some(sensors());
    spec.settings.stage_costs = synthetic_costs();
    spec.settings.rl = RLConfig {
        learning_rate: 0.5,
        discount: 0.99,
        episodes: 50_000,
        ..RLConfig::default()
    };
    if framework {
        spec.expectations = map(&[
            ("classification_accuracy.delta_relative", 20.0),
            ("transport_share.delta_pp", -30.0),
        ]);
    }
    spec
}

fn alloc_small() -> ScenarioSpec {
    let mut spec = ScenarioSpec::empty(7);
    spec.name = Some("alloc_small".into());
    spec.processes = vec![
        process("p1", -5.0, 1.0, Some(4.0)),
        process("p2", -4.0, 1.0, Some(4.0)),
        process("p3", -3.0, 1.0, Some(4.0)),
    ];
    spec.emission_factors = vec![
        factor("p1", 1.0, LifecycleStage::Processing),
        factor("p2", 1.0, LifecycleStage::Processing),
        factor("p3", 1.0, LifecycleStage::Processing),
    ];
    spec.limits = vec![
        ResourceLimit {
            resource_id: "r1".into(),
            availability: 11.0,
            consumption: map(&[("p1", 6.0), ("p2", 4.0), ("p3", 3.0)]),
        },
        ResourceLimit {
            resource_id: "r2".into(),
            availability: 7.0,
            consumption: map(&[("p1", 2.0), ("p2", 3.0), ("p3", 1.0)]),
        },
    ];
    spec.integrality = ["p1", "p2", "p3"].iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    spec.settings.stage_costs = synthetic_costs();
    spec
}

fn summary(spec: &ScenarioSpec, mode: Mode) {
    let out = pipeline::run(spec, mode, None).expect("fixture runs");
    let r = &out.result;
    eprintln!(
        "{} [{mode}]: recovery {:?} energy {:.3} co2 {:.3} acc {:?} transport {:?} naive {:?}",
        r.scenario,
        r.recovery,
        r.process_energy_kwh,
        r.co2_kg,
        r.classification_accuracy,
        r.transport_emissions_kg,
        r.naive_transport_emissions_kg
    );
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let fixtures = [
        (battery("battery_baseline", false), Mode::Baseline),
        (battery("battery_framework", true), Mode::Framework),
        (waste("waste_baseline", false), Mode::Baseline),
        (waste("waste_framework", true), Mode::Framework),
        (alloc_small(), Mode::Framework),
    ];
    for (spec, mode) in &fixtures {
        let name = spec.name.clone().unwrap_or_default();
        let path = out.join(format!("{name}.json"));
        save_scenario(spec, &path).expect("fixture written");
        summary(spec, *mode);
        eprintln!("wrote {}", path.display());
    }
}
