use super::program::{LinearProgram, MilpSolution, SolverOptions};
use crate::diagnostics::Diagnostic;

/// Independent feasibility audit of a candidate point: rows, bounds and
/// integrality, each against the tolerances in `opts`.
pub fn check_solution(lp: &LinearProgram, sol: &MilpSolution, opts: &SolverOptions) -> Vec<Diagnostic> {
    let n = lp.num_vars();
    let x = &sol.values;
    if x.len() != n {
        return vec![Diagnostic::new(
            "values",
            format!("expected {n} values, got {}", x.len()),
        )];
    }
    let mut out = Vec::new();
    for (i, row) in lp.rows.iter().enumerate() {
        let residual = row.activity(x) - row.rhs;
        if residual > opts.feas_tol * row.rhs.abs().max(1.0) {
            out.push(Diagnostic::new(
                format!("rows[{i}]"),
                format!("violated by residual {residual}"),
            ));
        }
    }
    for j in 0..n {
        let v = x[j];
        if v < lp.lower_bounds[j] - opts.feas_tol {
            out.push(Diagnostic::new(
                format!("x{j}"),
                format!("below lower bound {} by {}", lp.lower_bounds[j], lp.lower_bounds[j] - v),
            ));
        }
        if v > lp.upper_bounds[j] + opts.feas_tol {
            out.push(Diagnostic::new(
                format!("x{j}"),
                format!("above upper bound {} by {}", lp.upper_bounds[j], v - lp.upper_bounds[j]),
            ));
        }
        if lp.integer_mask[j] && (v - v.round()).abs() > opts.int_tol {
            out.push(Diagnostic::new(
                format!("x{j}"),
                format!("not integral: {v}"),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::SolveStatus;

    fn point(values: Vec<f64>) -> MilpSolution {
        MilpSolution {
            status: SolveStatus::Optimal,
            values,
            objective_value: 0.0,
            nodes_explored: 0,
            iterations: 0,
        }
    }

    #[test]
    fn row_violation_reports_residual() {
        let mut lp = LinearProgram::with_objective(vec![0.0, 0.0]);
        lp.push_row(vec![1.0, 1.0], 1.0);
        let d = check_solution(&lp, &point(vec![2.0, 0.0]), &SolverOptions::default());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "rows[0]");
        assert!(d[0].message.contains("residual 1"));
    }

    #[test]
    fn integrality_violation() {
        let mut lp = LinearProgram::with_objective(vec![0.0]);
        lp.integer_mask = vec![true];
        let d = check_solution(&lp, &point(vec![0.5]), &SolverOptions::default());
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("not integral"));
    }

    #[test]
    fn wrong_length() {
        let lp = LinearProgram::with_objective(vec![0.0, 1.0]);
        assert_eq!(check_solution(&lp, &point(vec![0.0]), &SolverOptions::default()).len(), 1);
    }
}
