mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use common::brute_force_milp;
use recirc::lca::{EmissionFactor, LifecycleStage};
use recirc::milp::{solve_milp, SolveStatus, SolverOptions};
use recirc::scenario::{
    compile_to_lp, load_scenario, save_scenario, validate_scenario, MaterialCategory, MaterialSpec, MaterialStage,
    ProcessSpec, ResourceLimit, ScenarioSpec,
};

fn arb_spec() -> impl Strategy<Value = ScenarioSpec> {
    (1usize..=5, 0usize..=4, any::<bool>(), any::<u64>()).prop_flat_map(|(n, m, cap, seed)| {
        (
            prop::collection::vec((-10.0..10.0f64, 0.0..5.0f64, prop::option::of(1.0..50.0f64), 0.0..3.0f64), n),
            prop::collection::vec((0.0..100.0f64, prop::collection::vec(prop::option::of(0.0..4.0f64), n)), m),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec((0.0..500.0f64, 0.0..0.5f64, 0.0..0.5f64), 0..4),
        )
            .prop_map(move |(procs, limits, ints, materials)| {
                let mut s = ScenarioSpec::empty(seed);
                for (i, (cost, energy, max, e)) in procs.into_iter().enumerate() {
                    s.processes.push(ProcessSpec {
                        id: format!("p{i}"),
                        unit_cost: cost,
                        energy_per_unit: energy,
                        emission_factor_id: format!("f{i}"),
                        max_units: max,
                    });
                    s.emission_factors.push(EmissionFactor {
                        id: format!("f{i}"),
                        process_id: format!("p{i}"),
                        e,
                        stage: LifecycleStage::Processing,
                    });
                }
                for (k, (avail, coeffs)) in limits.into_iter().enumerate() {
                    s.limits.push(ResourceLimit {
                        resource_id: format!("r{k}"),
                        availability: avail,
                        consumption: coeffs
                            .into_iter()
                            .enumerate()
                            .filter_map(|(i, c)| c.map(|c| (format!("p{i}"), c)))
                            .collect(),
                    });
                }
                s.integrality = ints
                    .into_iter()
                    .enumerate()
                    .filter(|(_, b)| *b)
                    .map(|(i, _)| format!("p{i}"))
                    .collect();
                for (j, (mass, co, ni)) in materials.into_iter().enumerate() {
                    s.materials.push(MaterialSpec {
                        id: format!("m{j}"),
                        name: format!("material {j}"),
                        category: MaterialCategory::Metal,
                        mass_kg: mass,
                        composition: BTreeMap::from([("cobalt".to_string(), co), ("nickel".to_string(), ni)]),
                        lifecycle_stage: MaterialStage::Collected,
                    });
                }
                if cap {
                    s.targets.insert("co2_cap_kg".into(), 1_000.0);
                }
                s
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generated_specs_validate(s in arb_spec()) {
        prop_assert!(validate_scenario(&s).is_empty(), "{:?}", validate_scenario(&s));
    }

    #[test]
    fn compile_is_deterministic(s in arb_spec()) {
        prop_assert_eq!(compile_to_lp(&s).unwrap(), compile_to_lp(&s.clone()).unwrap());
    }

    #[test]
    fn compiled_shape(s in arb_spec()) {
        let lp = compile_to_lp(&s).unwrap();
        let cap = usize::from(s.targets.contains_key("co2_cap_kg"));
        prop_assert_eq!(lp.rows.len(), s.limits.len() + cap);
        prop_assert_eq!(lp.num_vars(), s.processes.len());
        for (j, p) in s.processes.iter().enumerate() {
            prop_assert_eq!(lp.objective[j], p.unit_cost);
            prop_assert_eq!(lp.integer_mask[j], s.integrality.contains(&p.id));
        }
    }

    #[test]
    fn file_round_trip_is_exact(s in arb_spec()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        save_scenario(&s, &path).unwrap();
        prop_assert_eq!(load_scenario(&path).unwrap(), s);
    }
}

#[test]
fn bundled_fixtures_validate_and_round_trip() {
    for name in recirc::fixtures::SCENARIOS {
        let s = recirc::fixtures::scenario(name).unwrap();
        assert!(validate_scenario(&s).is_empty(), "{name}");
        let again = recirc::scenario::parse_scenario(&s.to_json_pretty(), name).unwrap();
        assert_eq!(again, s, "{name}");
    }
}

#[test]
fn battery_fixture_has_a_thousand_cells() {
    let s = recirc::fixtures::scenario("battery_baseline").unwrap();
    assert_eq!(s.materials.len(), 1_000);
    assert!(s.materials.iter().all(|m| m.category == MaterialCategory::BatteryCell));
}

#[test]
fn alloc_small_matches_enumeration() {
    let s = recirc::fixtures::scenario("alloc_small").unwrap();
    assert_eq!(s.processes.len(), 3);
    assert_eq!(s.limits.len(), 2);
    let all: BTreeSet<String> = s.processes.iter().map(|p| p.id.clone()).collect();
    assert_eq!(s.integrality, all);
    let lp = compile_to_lp(&s).unwrap();
    let sol = solve_milp(&lp, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let best = brute_force_milp(&lp).expect("feasible");
    assert!((sol.objective_value - best).abs() <= 1e-6, "{} vs {best}", sol.objective_value);
}
