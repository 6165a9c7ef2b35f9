use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One `coefficients · x <= rhs` constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

impl Row {
    pub fn new(coefficients: Vec<f64>, rhs: f64) -> Self {
        Self { coefficients, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(a, v)| a * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    /// Minimization objective.
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower_bounds: Vec<f64>,
    /// `f64::INFINITY` for no bound; serialized as `null`.
    #[serde(with = "infinite_as_null")]
    pub upper_bounds: Vec<f64>,
    pub integer_mask: Vec<bool>,
}

impl LinearProgram {
    /// `n` continuous variables in `[0, ∞)` with a zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            rows: Vec::new(),
            lower_bounds: vec![0.0; n],
            upper_bounds: vec![f64::INFINITY; n],
            integer_mask: vec![false; n],
        }
    }

    pub fn with_objective(objective: Vec<f64>) -> Self {
        let mut lp = Self::new(objective.len());
        lp.objective = objective;
        lp
    }

    pub fn push_row(&mut self, coefficients: Vec<f64>, rhs: f64) -> &mut Self {
        self.rows.push(Row::new(coefficients, rhs));
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.num_vars();
        if self.lower_bounds.len() != n || self.upper_bounds.len() != n || self.integer_mask.len() != n {
            return Err(SolverError::InvalidProgram(format!(
                "bound/mask lengths ({}, {}, {}) differ from variable count {n}",
                self.lower_bounds.len(),
                self.upper_bounds.len(),
                self.integer_mask.len()
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(SolverError::InvalidProgram(format!("objective[{j}] is not finite")));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(SolverError::InvalidProgram(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coefficients.len()
                )));
            }
            if !row.rhs.is_finite() || row.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(SolverError::InvalidProgram(format!("row {i} has a non-finite entry")));
            }
        }
        for j in 0..n {
            let (lo, hi) = (self.lower_bounds[j], self.upper_bounds[j]);
            if !lo.is_finite() {
                return Err(SolverError::InvalidProgram(format!("lower bound of x{j} must be finite")));
            }
            if hi.is_nan() || lo > hi {
                return Err(SolverError::InvalidProgram(format!(
                    "bounds of x{j} are inverted ({lo} > {hi})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub nodes_explored: usize,
    pub iterations: usize,
}

impl MilpSolution {
    pub(crate) fn without_point(status: SolveStatus, n: usize, iterations: usize) -> Self {
        Self {
            status,
            values: vec![0.0; n],
            objective_value: match status {
                SolveStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            nodes_explored: 0,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub max_nodes: usize,
    pub feas_tol: f64,
    pub int_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            max_nodes: 100_000,
            feas_tol: 1e-7,
            int_tol: 1e-6,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid linear program: {0}")]
    InvalidProgram(String),
    #[error("integer variable x{0} needs finite bounds")]
    UnboundedIntegerVariable(usize),
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = v.iter().map(|x| x.is_finite().then_some(*x)).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(opt.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}
