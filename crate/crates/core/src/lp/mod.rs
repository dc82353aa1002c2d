//! Set-covering restricted master problem: LP relaxation by revised simplex
//! and the integer phase by branch-and-bound.

mod branch;
mod dump;
mod simplex;

use thiserror::Error;

pub use branch::{solve_ip, solve_ip_with_incumbent, IpSolution, DEFAULT_NODE_BUDGET};
pub use dump::{read_instance, write_instance};
pub use simplex::solve_lp;

/// Primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Relative optimality tolerance on reduced costs and objective comparisons.
pub const OPTIMALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("set cover is infeasible: {} flight(s) covered by no column, first {}", .uncovered.len(), .uncovered[0])]
    Infeasible { uncovered: Vec<usize> },
    #[error("column {column} covers flight {row} outside 0..{num_rows}")]
    RowOutOfRange { column: usize, row: usize, num_rows: usize },
    #[error("column {0} has a negative or non-finite cost")]
    BadCost(usize),
    #[error("simplex failed: {0}")]
    Numerical(String),
    #[error("instance dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One column of the cover matrix: the rows (flights) it covers and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverColumn {
    pub rows: Vec<usize>,
    pub cost: f64,
}

impl CoverColumn {
    pub fn new(mut rows: Vec<usize>, cost: f64) -> Self {
        rows.sort_unstable();
        rows.dedup();
        Self { rows, cost }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SetCoverInstance {
    pub num_flights: usize,
    pub columns: Vec<CoverColumn>,
}

impl SetCoverInstance {
    pub fn new(num_flights: usize, columns: Vec<CoverColumn>) -> Self {
        Self { num_flights, columns }
    }

    /// Checks row indices and costs, then reports the flights no column covers.
    pub fn validate(&self) -> Result<(), LpError> {
        let mut covered = vec![false; self.num_flights];
        for (k, col) in self.columns.iter().enumerate() {
            if !(col.cost.is_finite() && col.cost >= 0.0) {
                return Err(LpError::BadCost(k));
            }
            for &r in &col.rows {
                if r >= self.num_flights {
                    return Err(LpError::RowOutOfRange {
                        column: k,
                        row: r,
                        num_rows: self.num_flights,
                    });
                }
                covered[r] = true;
            }
        }
        let uncovered: Vec<usize> = (0..self.num_flights).filter(|&r| !covered[r]).collect();
        if uncovered.is_empty() {
            Ok(())
        } else {
            Err(LpError::Infeasible { uncovered })
        }
    }

    /// Cost of a selection, and whether it covers every row.
    pub fn evaluate(&self, selected: &[usize]) -> (f64, bool) {
        let mut covered = vec![false; self.num_flights];
        let mut cost = 0.0;
        for &k in selected {
            cost += self.columns[k].cost;
            for &r in &self.columns[k].rows {
                covered[r] = true;
            }
        }
        (cost, covered.iter().all(|&c| c))
    }
}

/// Per-flight shadow prices of the cover rows; all entries are non-negative.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualVector(Vec<f64>);

impl DualVector {
    /// Negative entries (round-off from the solver) are clamped to zero.
    pub fn new(values: Vec<f64>) -> Self {
        Self(values.into_iter().map(|v| v.max(0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn get(&self, flight: usize) -> Option<f64> {
        self.0.get(flight).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Optimal LP relaxation of a set-cover instance.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// One value per column, clamped to `[0, 1]`.
    pub primal: Vec<f64>,
    pub duals: DualVector,
    pub cost: f64,
    pub iterations: usize,
}

impl LpSolution {
    /// Columns with a strictly positive primal value.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.primal
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > FEASIBILITY_TOL)
            .map(|(k, &x)| (k, x))
    }

    pub fn is_integral(&self) -> bool {
        self.primal
            .iter()
            .all(|&x| x <= FEASIBILITY_TOL || x >= 1.0 - FEASIBILITY_TOL)
    }
}

/// `true` when `a` and `b` agree within the relative optimality tolerance.
pub fn costs_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= OPTIMALITY_TOL * a.abs().max(b.abs()).max(1.0)
}
