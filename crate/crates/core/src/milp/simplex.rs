//! Dense tableau, two phases.
//!
//! Variables are shifted to `y = x - lb >= 0`; finite upper bounds become
//! extra `y_j <= ub_j - lb_j` rows. Rows with a negative right-hand side are
//! negated and receive an artificial column, which phase 1 drives to zero.

use super::program::{LinearProgram, MilpSolution, SolveStatus, SolverError, SolverOptions};

/// Smallest magnitude accepted as a pivot element.
const PIVOT_TOL: f64 = 1e-9;
/// Reduced-cost threshold for entering candidates. Tighter than `feas_tol`,
/// so an optimal basis never has a reduced cost below `-feas_tol`.
const DUAL_TOL: f64 = 1e-9;
/// Relative tolerance for treating two ratios as tied.
const RATIO_TIE_TOL: f64 = 1e-12;

struct Tableau {
    /// `rows[i]` has `ncols` coefficients followed by the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut CostRow) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = cost.reduced[c];
        if f != 0.0 {
            for (v, pv) in cost.reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            cost.reduced[c] = 0.0;
        }
        self.basis[r] = c;
    }
}

/// Reduced costs plus, in the last slot, minus the current objective value.
struct CostRow {
    reduced: Vec<f64>,
}

impl CostRow {
    fn from_costs(costs: &[f64], tab: &Tableau) -> Self {
        let mut reduced = costs.to_vec();
        reduced.push(0.0);
        for (i, &b) in tab.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for (v, t) in reduced.iter_mut().zip(&tab.rows[i]) {
                    *v -= cb * t;
                }
            }
        }
        Self { reduced }
    }

    fn objective(&self) -> f64 {
        -self.reduced[self.reduced.len() - 1]
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

/// Runs Bland-rule pivots until no allowed column has a negative reduced cost.
fn iterate(
    tab: &mut Tableau,
    cost: &mut CostRow,
    allowed: &[bool],
    iterations: &mut usize,
    max_iterations: usize,
    mut history: Option<&mut Vec<f64>>,
) -> PhaseOutcome {
    loop {
        let entering = (0..tab.ncols).find(|&j| allowed[j] && cost.reduced[j] < -DUAL_TOL);
        let Some(c) = entering else {
            return PhaseOutcome::Optimal;
        };
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..tab.rows.len() {
            let a = tab.rows[i][c];
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = tab.rhs(i).max(0.0) / a;
            leaving = match leaving {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    let tie = (ratio - br).abs() <= RATIO_TIE_TOL * br.abs().max(1.0);
                    if (!tie && ratio < br) || (tie && tab.basis[i] < tab.basis[bi]) {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
        let Some((r, _)) = leaving else {
            return PhaseOutcome::Unbounded;
        };
        if *iterations >= max_iterations {
            return PhaseOutcome::IterationLimit;
        }
        tab.pivot(r, c, cost);
        *iterations += 1;
        if let Some(h) = history.as_deref_mut() {
            h.push(cost.objective());
        }
    }
}

/// Solves the LP relaxation (the integer mask is ignored).
pub fn solve_lp(lp: &LinearProgram, opts: &SolverOptions) -> Result<MilpSolution, SolverError> {
    solve_lp_with_history(lp, opts).map(|(sol, _)| sol)
}

/// Like [`solve_lp`], also returning the phase-2 objective after every pivot
/// (the first entry is the objective at the phase-1 basis).
pub fn solve_lp_with_history(
    lp: &LinearProgram,
    opts: &SolverOptions,
) -> Result<(MilpSolution, Vec<f64>), SolverError> {
    lp.validate()?;
    let n = lp.num_vars();

    // Shifted rows: a·y <= b - a·lb, plus y_j <= ub_j - lb_j.
    let mut rows: Vec<(Vec<f64>, f64)> = lp
        .rows
        .iter()
        .map(|r| {
            let shift: f64 = r.coefficients.iter().zip(&lp.lower_bounds).map(|(a, l)| a * l).sum();
            (r.coefficients.clone(), r.rhs - shift)
        })
        .collect();
    for j in 0..n {
        let ub = lp.upper_bounds[j];
        if ub.is_finite() {
            let mut coeffs = vec![0.0; n];
            coeffs[j] = 1.0;
            rows.push((coeffs, ub - lp.lower_bounds[j]));
        }
    }
    let m = rows.len();
    let num_art = rows.iter().filter(|(_, b)| *b < 0.0).count();
    let ncols = n + m + num_art;

    let mut tab = Tableau {
        rows: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        ncols,
    };
    let mut next_art = n + m;
    for (i, (coeffs, b)) in rows.iter().enumerate() {
        let mut row = vec![0.0; ncols + 1];
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for (j, a) in coeffs.iter().enumerate() {
            row[j] = sign * a;
        }
        row[n + i] = sign;
        row[ncols] = sign * b;
        if *b < 0.0 {
            row[next_art] = 1.0;
            tab.basis.push(next_art);
            next_art += 1;
        } else {
            tab.basis.push(n + i);
        }
        tab.rows.push(row);
    }

    let is_art = |j: usize| j >= n + m;
    let mut iterations = 0usize;
    let rhs_scale = 1.0 + tab.rows.iter().map(|r| r[ncols].abs()).fold(0.0, f64::max);

    if num_art > 0 {
        let phase1_costs: Vec<f64> = (0..ncols).map(|j| if is_art(j) { 1.0 } else { 0.0 }).collect();
        let mut cost = CostRow::from_costs(&phase1_costs, &tab);
        let allowed = vec![true; ncols];
        match iterate(&mut tab, &mut cost, &allowed, &mut iterations, opts.max_iterations, None) {
            PhaseOutcome::Optimal => {}
            // Phase 1 is bounded below by zero.
            PhaseOutcome::Unbounded => unreachable!("phase-1 objective is bounded"),
            PhaseOutcome::IterationLimit => {
                return Ok((MilpSolution::without_point(SolveStatus::IterationLimit, n, iterations), Vec::new()));
            }
        }
        if cost.objective() > opts.feas_tol * rhs_scale {
            return Ok((MilpSolution::without_point(SolveStatus::Infeasible, n, iterations), Vec::new()));
        }
        // Drive zero-level artificials out of the basis; drop rows that are redundant.
        let mut i = 0;
        while i < tab.rows.len() {
            if is_art(tab.basis[i]) {
                let col = (0..n + m).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL);
                match col {
                    Some(c) => {
                        tab.pivot(i, c, &mut cost);
                        iterations += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut phase2_costs = vec![0.0; ncols];
    phase2_costs[..n].copy_from_slice(&lp.objective);
    let mut cost = CostRow::from_costs(&phase2_costs, &tab);
    let allowed: Vec<bool> = (0..ncols).map(|j| !is_art(j)).collect();
    let mut history = vec![cost.objective()];
    let outcome = iterate(
        &mut tab,
        &mut cost,
        &allowed,
        &mut iterations,
        opts.max_iterations,
        Some(&mut history),
    );
    match outcome {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::Unbounded => {
            return Ok((MilpSolution::without_point(SolveStatus::Unbounded, n, iterations), history));
        }
        PhaseOutcome::IterationLimit => {
            return Ok((MilpSolution::without_point(SolveStatus::IterationLimit, n, iterations), history));
        }
    }

    let mut values = lp.lower_bounds.clone();
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            values[b] += tab.rhs(i).max(0.0);
        }
    }
    let objective_value = lp.objective_value(&values);
    Ok((
        MilpSolution {
            status: SolveStatus::Optimal,
            values,
            objective_value,
            nodes_explored: 0,
            iterations,
        },
        history,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn unique_vertex_optimum() {
        let mut lp = LinearProgram::with_objective(vec![-2.0, -1.0]);
        lp.push_row(vec![1.0, 1.0], 1.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.values, vec![1.0, 0.0]);
        assert_eq!(s.objective_value, -2.0);
    }

    #[test]
    fn no_rows_minimum_at_zero() {
        let lp = LinearProgram::with_objective(vec![1.0]);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.values, vec![0.0]);
        assert_eq!(s.objective_value, 0.0);
    }

    #[test]
    fn no_rows_unbounded() {
        let lp = LinearProgram::with_objective(vec![-1.0]);
        assert_eq!(solve_lp(&lp, &opts()).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn phase_one_finds_feasible_start() {
        // min x1 + x2  s.t.  x1 + x2 >= 2 (as -x1 - x2 <= -2), x1 <= 1.5
        let mut lp = LinearProgram::with_objective(vec![1.0, 2.0]);
        lp.push_row(vec![-1.0, -1.0], -2.0).push_row(vec![1.0, 0.0], 1.5);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.values[0] - 1.5).abs() < 1e-12);
        assert!((s.values[1] - 0.5).abs() < 1e-12);
        assert!((s.objective_value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_detected() {
        let mut lp = LinearProgram::with_objective(vec![1.0]);
        lp.push_row(vec![1.0], -0.5);
        assert_eq!(solve_lp(&lp, &opts()).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn bounds_are_respected() {
        let mut lp = LinearProgram::with_objective(vec![-1.0, 1.0]);
        lp.lower_bounds = vec![1.0, 2.0];
        lp.upper_bounds = vec![3.5, 4.0];
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.values, vec![3.5, 2.0]);
        assert_eq!(s.objective_value, -1.5);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic Beale cycling example; Bland's rule must terminate.
        let mut lp = LinearProgram::with_objective(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.push_row(vec![0.25, -60.0, -0.04, 9.0], 0.0)
            .push_row(vec![0.5, -90.0, -0.02, 3.0], 0.0)
            .push_row(vec![0.0, 0.0, 1.0, 0.0], 1.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - (-0.05)).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_reported() {
        let mut lp = LinearProgram::with_objective(vec![-1.0, -1.0]);
        lp.push_row(vec![1.0, 0.0], 1.0).push_row(vec![0.0, 1.0], 1.0);
        let s = solve_lp(&lp, &SolverOptions { max_iterations: 1, ..opts() }).unwrap();
        assert_eq!(s.status, SolveStatus::IterationLimit);
    }

    #[test]
    fn phase_two_objective_never_increases() {
        let mut lp = LinearProgram::with_objective(vec![-3.0, -2.0, -4.0]);
        lp.push_row(vec![1.0, 1.0, 2.0], 4.0)
            .push_row(vec![2.0, 0.0, 3.0], 5.0)
            .push_row(vec![2.0, 1.0, 3.0], 7.0)
            .push_row(vec![-1.0, 0.0, 0.0], -0.5);
        let (s, history) = solve_lp_with_history(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        for w in history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "objective rose: {history:?}");
        }
    }

    #[test]
    fn redundant_equality_rows_are_dropped() {
        // x1 + x2 <= 2 and -x1 - x2 <= -2 pin the sum; the duplicate is redundant.
        let mut lp = LinearProgram::with_objective(vec![1.0, 0.0]);
        lp.push_row(vec![1.0, 1.0], 2.0)
            .push_row(vec![-1.0, -1.0], -2.0)
            .push_row(vec![-2.0, -2.0], -4.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.values[1] - 2.0).abs() < 1e-12);
        assert!(s.objective_value.abs() < 1e-12);
    }

    #[test]
    fn mismatched_rows_rejected() {
        let mut lp = LinearProgram::with_objective(vec![1.0, 1.0]);
        lp.push_row(vec![1.0], 1.0);
        assert!(matches!(solve_lp(&lp, &opts()), Err(SolverError::InvalidProgram(_))));
    }
}
