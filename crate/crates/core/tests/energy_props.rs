use proptest::prelude::*;

use recirc::energy::{energy_of, EnergyLedger, EnergyModel, StageUsage};

fn arb_model() -> impl Strategy<Value = EnergyModel> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(alpha, beta)| EnergyModel { alpha, beta })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn monotone_in_compute(m in arb_model(), t in 0.0..1e4f64, dt in 0.0..1e4f64, mb in 0.0..1e4f64) {
        let lo = energy_of(&m, &StageUsage::new("s", t, mb));
        let hi = energy_of(&m, &StageUsage::new("s", t + dt, mb));
        prop_assert!(hi >= lo);
    }

    #[test]
    fn monotone_in_transfer(m in arb_model(), t in 0.0..1e4f64, mb in 0.0..1e4f64, dmb in 0.0..1e4f64) {
        let lo = energy_of(&m, &StageUsage::new("s", t, mb));
        let hi = energy_of(&m, &StageUsage::new("s", t, mb + dmb));
        prop_assert!(hi >= lo);
    }

    #[test]
    fn ledger_total_is_the_stage_sum(m in arb_model(), usages in prop::collection::vec((0.0..1e3f64, 0.0..1e3f64), 0..20)) {
        let mut ledger = EnergyLedger::new();
        let mut direct = 0.0;
        for (i, (t, mb)) in usages.iter().enumerate() {
            let e = ledger.record_stage(&m, StageUsage::new(format!("stage{i}"), *t, *mb));
            prop_assert_eq!(e, m.alpha * t + m.beta * mb);
            direct += e;
        }
        prop_assert_eq!(ledger.stages.len(), usages.len());
        prop_assert!(ledger.is_consistent(1e-12));
        prop_assert!((ledger.total_kwh - direct).abs() <= 1e-12 * direct.max(1.0));
    }
}
