mod common;

use proptest::prelude::*;

use common::{brute_force_milp, random_milp, rng};
use recirc::milp::{check_solution, solve_lp, solve_lp_with_history, solve_milp, LinearProgram, SolveStatus, SolverOptions};

fn arb_milp() -> impl Strategy<Value = LinearProgram> {
    any::<u64>().prop_map(|seed| random_milp(&mut rng(seed)))
}

/// Bounded continuous program with nonnegative rows, always feasible at 0.
fn arb_feasible_lp() -> impl Strategy<Value = LinearProgram> {
    (1usize..=6, 0usize..=5).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-10.0..10.0f64, n),
            prop::collection::vec((prop::collection::vec(0.0..5.0f64, n), 0.0..20.0f64), m),
            prop::collection::vec(0.5..6.0f64, n),
        )
            .prop_map(|(c, rows, ub)| {
                let mut lp = LinearProgram::with_objective(c);
                for (a, b) in rows {
                    lp.push_row(a, b);
                }
                lp.upper_bounds = ub;
                lp
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn milp_matches_enumeration(lp in arb_milp()) {
        let sol = solve_milp(&lp, &SolverOptions::default()).unwrap();
        match brute_force_milp(&lp) {
            Some(best) => {
                prop_assert_eq!(sol.status, SolveStatus::Optimal);
                prop_assert!((sol.objective_value - best).abs() <= 1e-6);
            }
            None => prop_assert_eq!(sol.status, SolveStatus::Infeasible),
        }
    }

    #[test]
    fn optimal_solutions_pass_the_audit(lp in arb_milp()) {
        let opts = SolverOptions::default();
        let sol = solve_milp(&lp, &opts).unwrap();
        if sol.status == SolveStatus::Optimal {
            prop_assert!(check_solution(&lp, &sol, &opts).is_empty());
        }
    }

    #[test]
    fn solves_are_bit_identical(lp in arb_milp()) {
        let opts = SolverOptions::default();
        let a = solve_milp(&lp, &opts).unwrap();
        let b = solve_milp(&lp, &opts).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
        prop_assert_eq!(
            a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        prop_assert_eq!(a.nodes_explored, b.nodes_explored);
    }

    #[test]
    fn phase_two_objective_never_increases(lp in arb_feasible_lp()) {
        let (sol, history) = solve_lp_with_history(&lp, &SolverOptions::default()).unwrap();
        prop_assert_eq!(sol.status, SolveStatus::Optimal);
        for w in history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "objective rose from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn lp_optimum_bounds_the_milp(lp in arb_milp()) {
        let opts = SolverOptions::default();
        let relaxed = solve_lp(&lp, &opts).unwrap();
        let integral = solve_milp(&lp, &opts).unwrap();
        if integral.status == SolveStatus::Optimal {
            prop_assert_eq!(relaxed.status, SolveStatus::Optimal);
            prop_assert!(relaxed.objective_value <= integral.objective_value + 1e-7);
        }
    }
}
