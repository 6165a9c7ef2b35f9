//! Best-first branch-and-bound over LP relaxations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use super::program::{LinearProgram, MilpSolution, SolveStatus, SolverError, SolverOptions};
use super::simplex::solve_lp;

/// Nodes whose bound is within this of the incumbent cannot improve on it.
const PRUNE_TOL: f64 = 1e-9;
/// Fractionality scores closer than this count as tied.
const SCORE_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchDirection {
    Down,
    Up,
}

/// One explored node, for the optional text trace.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: u64,
    pub depth: usize,
    pub bound: f64,
    /// Branching decision that created this node (`None` at the root).
    pub created_by: Option<(usize, BranchDirection, f64)>,
    /// Variable this node was split on, if any.
    pub branch_var: Option<usize>,
}

impl fmt::Display for NodeRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {} depth {} bound {:.9}", self.id, self.depth, self.bound)?;
        if let Some((j, dir, v)) = self.created_by {
            let op = match dir {
                BranchDirection::Down => "<=",
                BranchDirection::Up => ">=",
            };
            write!(f, " from x{j} {op} {v}")?;
        }
        match self.branch_var {
            Some(j) => write!(f, " branch x{j}"),
            None => write!(f, " leaf"),
        }
    }
}

struct Node {
    bound: f64,
    seq: u64,
    depth: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
    created_by: Option<(usize, BranchDirection, f64)>,
}

// Min-heap on (bound, seq): lowest bound first, FIFO among equal bounds.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Most fractional integer variable; ties go to the lowest index.
fn branching_variable(lp: &LinearProgram, x: &[f64], int_tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, (&v, &is_int)) in x.iter().zip(&lp.integer_mask).enumerate() {
        if !is_int {
            continue;
        }
        let frac = v - v.floor();
        let score = frac.min(1.0 - frac);
        if score <= int_tol {
            continue;
        }
        if best.is_none_or(|(_, s)| score > s + SCORE_TIE_TOL) {
            best = Some((j, score));
        }
    }
    best.map(|(j, _)| j)
}

pub fn solve_milp(lp: &LinearProgram, opts: &SolverOptions) -> Result<MilpSolution, SolverError> {
    solve_milp_traced(lp, opts).map(|(s, _)| s)
}

/// Branch-and-bound that also returns one record per explored node.
pub fn solve_milp_traced(
    lp: &LinearProgram,
    opts: &SolverOptions,
) -> Result<(MilpSolution, Vec<NodeRecord>), SolverError> {
    lp.validate()?;
    let n = lp.num_vars();
    for j in 0..n {
        if lp.integer_mask[j] && !lp.upper_bounds[j].is_finite() {
            return Err(SolverError::UnboundedIntegerVariable(j));
        }
    }

    // Integer variables live on the integer lattice inside their bounds.
    let mut root_lp = lp.clone();
    for j in 0..n {
        if lp.integer_mask[j] {
            root_lp.lower_bounds[j] = (lp.lower_bounds[j] - opts.int_tol).ceil();
            root_lp.upper_bounds[j] = (lp.upper_bounds[j] + opts.int_tol).floor();
            if root_lp.lower_bounds[j] > root_lp.upper_bounds[j] {
                return Ok((MilpSolution::without_point(SolveStatus::Infeasible, n, 0), Vec::new()));
            }
        }
    }

    let mut records = Vec::new();
    let mut iterations = 0usize;
    let root = solve_lp(&root_lp, opts)?;
    iterations += root.iterations;
    match root.status {
        SolveStatus::Optimal => {}
        other => {
            let mut s = MilpSolution::without_point(other, n, iterations);
            s.nodes_explored = 1;
            records.push(NodeRecord {
                id: 0,
                depth: 0,
                bound: s.objective_value,
                created_by: None,
                branch_var: None,
            });
            return Ok((s, records));
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: root.objective_value,
        seq,
        depth: 0,
        lower: root_lp.lower_bounds.clone(),
        upper: root_lp.upper_bounds.clone(),
        values: root.values,
        created_by: None,
    });

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut explored = 0usize;
    let mut hit_limit = false;

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            // Best-first: every remaining node is at least this bad.
            if node.bound >= best - PRUNE_TOL {
                break;
            }
        }
        if explored >= opts.max_nodes {
            hit_limit = true;
            break;
        }
        explored += 1;
        let branch = branching_variable(lp, &node.values, opts.int_tol);
        records.push(NodeRecord {
            id: node.seq,
            depth: node.depth,
            bound: node.bound,
            created_by: node.created_by,
            branch_var: branch,
        });
        let Some(j) = branch else {
            let better = incumbent.as_ref().is_none_or(|(best, _)| node.bound < best - PRUNE_TOL);
            if better {
                incumbent = Some((node.bound, node.values));
            }
            continue;
        };

        let v = node.values[j];
        for (dir, lo, hi) in [
            (BranchDirection::Down, node.lower[j], v.floor()),
            (BranchDirection::Up, v.ceil(), node.upper[j]),
        ] {
            if lo > hi {
                continue;
            }
            let mut child = root_lp.clone();
            child.lower_bounds = node.lower.clone();
            child.upper_bounds = node.upper.clone();
            child.lower_bounds[j] = lo;
            child.upper_bounds[j] = hi;
            let sol = solve_lp(&child, opts)?;
            iterations += sol.iterations;
            match sol.status {
                SolveStatus::Optimal => {}
                SolveStatus::Infeasible => continue,
                SolveStatus::IterationLimit => {
                    hit_limit = true;
                    continue;
                }
                // Unreachable when the root relaxation is bounded.
                SolveStatus::Unbounded => continue,
            }
            if let Some((best, _)) = &incumbent {
                if sol.objective_value >= best - PRUNE_TOL {
                    continue;
                }
            }
            seq += 1;
            let split = if dir == BranchDirection::Down { hi } else { lo };
            heap.push(Node {
                bound: sol.objective_value,
                seq,
                depth: node.depth + 1,
                lower: child.lower_bounds,
                upper: child.upper_bounds,
                values: sol.values,
                created_by: Some((j, dir, split)),
            });
        }
    }

    let status = match (&incumbent, hit_limit) {
        (_, true) => SolveStatus::IterationLimit,
        (Some(_), false) => SolveStatus::Optimal,
        (None, false) => SolveStatus::Infeasible,
    };
    let solution = match incumbent {
        Some((_, mut values)) => {
            for j in 0..n {
                if lp.integer_mask[j] {
                    values[j] = values[j].round() + 0.0; // +0.0 turns -0.0 into 0.0
                }
            }
            MilpSolution {
                status,
                objective_value: lp.objective_value(&values),
                values,
                nodes_explored: explored,
                iterations,
            }
        }
        None => {
            let mut s = MilpSolution::without_point(status, n, iterations);
            s.nodes_explored = explored;
            s
        }
    };
    Ok((solution, records))
}
