//! Two-phase revised simplex with Bland's rule.
//!
//! The basis inverse is kept dense and updated by elementary row operations
//! after each pivot, with a full re-inversion every `refactor_every` pivots.
//! Phase I starts from an all-artificial basis. Artificials that cannot be
//! pivoted out afterwards sit on redundant rows and stay basic at zero;
//! artificial columns never re-enter in phase II.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{invert, norm_inf, Matrix};
use crate::lp_model::StandardLp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverTag {
    Simplex,
    Ipm,
}

impl fmt::Display for SolverTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverTag::Simplex => "simplex",
            SolverTag::Ipm => "ipm",
        })
    }
}

impl std::str::FromStr for SolverTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simplex" => Ok(SolverTag::Simplex),
            "ipm" | "interior-point" => Ok(SolverTag::Ipm),
            other => Err(Error::Planning(format!("unknown solver `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Solution over the LP columns; meaningful when `status` is optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub solver_tag: SolverTag,
    pub max_primal_residual: f64,
    /// Interior-point only; zero for simplex.
    pub max_dual_residual: f64,
    /// Simplex: sum of artificials at the end of phase I.
    pub phase_one_value: f64,
    /// Simplex: entering column whose direction is an unbounded ray.
    pub unbounded_column: Option<usize>,
    /// Simplex: smallest reduced cost over eligible columns at termination.
    pub min_reduced_cost: f64,
    /// Interior-point: complementarity measure per iteration.
    pub mu_history: Vec<f64>,
    /// Interior-point: equality rows dropped as linearly dependent.
    pub dropped_rows: Vec<usize>,
}

impl SolveReport {
    fn empty(tag: SolverTag, status: SolveStatus) -> Self {
        SolveReport {
            status,
            x: Vec::new(),
            objective: f64::NAN,
            iterations: 0,
            solver_tag: tag,
            max_primal_residual: 0.0,
            max_dual_residual: 0.0,
            phase_one_value: 0.0,
            unbounded_column: None,
            min_reduced_cost: 0.0,
            mu_history: Vec::new(),
            dropped_rows: Vec::new(),
        }
    }

    /// Number of entries above `tol`.
    pub fn support(&self, tol: f64) -> usize {
        self.x.iter().filter(|v| v.abs() > tol).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Optimality threshold on reduced costs.
    pub tolerance: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot_tolerance: f64,
    pub max_iterations: usize,
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            tolerance: 1e-9,
            pivot_tolerance: 1e-7,
            max_iterations: 1_000_000,
            refactor_every: 64,
        }
    }
}

/// Direction entries at or below this are treated as zero.
const ROUND_OFF: f64 = 1e-11;

/// Pivots below this trigger a refactorization before they are taken.
const SMALL_PIVOT: f64 = 1e-4;

struct Tableau<'a> {
    columns: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    n: usize,
    m: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Matrix,
    x_b: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    opts: &'a SimplexOptions,
}

enum Outcome {
    Optimal { min_reduced_cost: f64 },
    Unbounded { column: usize },
}

impl<'a> Tableau<'a> {
    fn new(lp: &StandardLp, opts: &'a SimplexOptions) -> Self {
        let m = lp.rows();
        let n = lp.cols();
        let mut columns = lp.a_eq.sparse_columns();
        let mut b = lp.b_eq.clone();
        for (i, bi) in b.iter_mut().enumerate() {
            if *bi < 0.0 {
                *bi = -*bi;
                for col in &mut columns {
                    for entry in col.iter_mut().filter(|e| e.0 == i) {
                        entry.1 = -entry.1;
                    }
                }
            }
        }
        for i in 0..m {
            columns.push(vec![(i, 1.0)]);
        }
        // Crash basis: a structural unit column with a positive entry covers
        // its row; the remaining rows start on their artificial.
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut binv = Matrix::identity(m);
        let mut x_b = b.clone();
        for (j, col) in columns[..n].iter().enumerate() {
            if let [(i, v)] = col[..] {
                if v > 0.0 && basis[i] >= n {
                    basis[i] = j;
                    binv[(i, i)] = 1.0 / v;
                    x_b[i] = b[i] / v;
                }
            }
        }
        let mut is_basic = vec![false; n + m];
        for &j in &basis {
            is_basic[j] = true;
        }
        Tableau {
            columns,
            x_b,
            b,
            n,
            m,
            basis,
            is_basic,
            binv,
            iterations: 0,
            since_refactor: 0,
            opts,
        }
    }

    fn dual(&self, cost: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (r, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                crate::linalg::axpy(cb, self.binv.row(r), &mut y);
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.columns[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>()
    }

    fn direction(&self, q: usize) -> Vec<f64> {
        let col = &self.columns[q];
        (0..self.m)
            .map(|r| {
                let row = self.binv.row(r);
                col.iter().map(|&(i, v)| row[i] * v).sum()
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, q: usize, u: &[f64]) -> Result<()> {
        let theta = self.x_b[r] / u[r];
        for (i, x) in self.x_b.iter_mut().enumerate() {
            if i != r {
                *x -= theta * u[i];
            }
        }
        self.x_b[r] = theta;

        let pr = u[r];
        for v in self.binv.row_mut(r) {
            *v /= pr;
        }
        let pivot_row = self.binv.row(r).to_vec();
        for (i, &ui) in u.iter().enumerate() {
            if i != r && ui != 0.0 {
                crate::linalg::axpy(-ui, &pivot_row, self.binv.row_mut(i));
            }
        }

        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.opts.refactor_every {
            self.refactor()?;
        }
        Ok(())
    }

    fn refactor(&mut self) -> Result<()> {
        let mut bmat = Matrix::zeros(self.m, self.m);
        for (r, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.columns[j] {
                bmat[(i, r)] = v;
            }
        }
        self.binv = invert(&bmat).ok_or_else(|| Error::Solver {
            solver: SolverTag::Simplex,
            iterations: self.iterations,
            message: "basis matrix became numerically singular".into(),
        })?;
        self.x_b = self.binv.mul_vec(&self.b);
        self.since_refactor = 0;
        Ok(())
    }

    /// Runs Bland-rule pivots over columns `0..eligible` until optimal or
    /// unbounded.
    ///
    /// A candidate whose positive direction entries are all below the pivot
    /// tolerance is passed over for this iteration; pivoting on it would
    /// leave a numerically singular basis.
    fn optimize(&mut self, cost: &[f64], eligible: usize) -> Result<Outcome> {
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::IterationCap {
                    solver: SolverTag::Simplex,
                    iterations: self.iterations,
                    gap: f64::NAN,
                });
            }
            let y = self.dual(cost);
            let mut min_d = f64::INFINITY;
            let mut chosen = None;
            for j in 0..eligible {
                if self.is_basic[j] {
                    continue;
                }
                let d = self.reduced_cost(cost, &y, j);
                if d >= -self.opts.tolerance {
                    min_d = min_d.min(d);
                    continue;
                }
                let u = self.direction(j);
                let largest = u.iter().cloned().fold(0.0, f64::max);
                if largest > self.opts.pivot_tolerance {
                    chosen = Some((j, u));
                    break;
                }
                if largest <= ROUND_OFF {
                    return Ok(Outcome::Unbounded { column: j });
                }
                min_d = min_d.min(d);
            }
            let Some((q, u)) = chosen else {
                return Ok(Outcome::Optimal {
                    min_reduced_cost: if min_d.is_finite() { min_d } else { 0.0 },
                });
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if u[r] <= self.opts.pivot_tolerance {
                    continue;
                }
                let ratio = self.x_b[r].max(0.0) / u[r];
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((best, best_ratio)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio);
                        if ratio < best_ratio && !tie || tie && self.basis[r] < self.basis[best] {
                            Some((r, ratio.min(best_ratio)))
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let (r, _) = leave.expect("a pivot above tolerance exists");
            if u[r] < SMALL_PIVOT && self.since_refactor > 0 {
                // confirm small pivots against a fresh inverse
                self.refactor()?;
                continue;
            }
            self.pivot(r, q, &u)?;
        }
    }

    /// Pivots basic artificials out on any usable structural column.
    fn expel_artificials(&mut self) -> Result<()> {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let row = self.binv.row(r).to_vec();
            let candidate = (0..self.n).find(|&j| {
                !self.is_basic[j]
                    && self.columns[j]
                        .iter()
                        .map(|&(i, v)| row[i] * v)
                        .sum::<f64>()
                        .abs()
                        > 1e-7
            });
            if let Some(q) = candidate {
                let u = self.direction(q);
                self.pivot(r, q, &u)?;
            }
        }
        Ok(())
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                // round-off below the feasibility tolerance
                x[j] = if self.x_b[r].abs() < 1e-12 {
                    0.0
                } else {
                    self.x_b[r].max(0.0)
                };
            }
        }
        x
    }
}

/// Solves `lp` to an optimal basic feasible solution.
pub fn simplex_solve(lp: &StandardLp, opts: &SimplexOptions) -> Result<SolveReport> {
    let mut t = Tableau::new(lp, opts);
    let (n, m) = (t.n, t.m);

    let phase_one_cost: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    if m > 0 {
        match t.optimize(&phase_one_cost, n)? {
            Outcome::Optimal { .. } => {}
            Outcome::Unbounded { column } => {
                return Err(Error::Solver {
                    solver: SolverTag::Simplex,
                    iterations: t.iterations,
                    message: format!("phase I reported an unbounded ray on column {column}"),
                })
            }
        }
        t.refactor()?;
    }
    let infeasibility: f64 = t
        .basis
        .iter()
        .zip(&t.x_b)
        .filter(|(&j, _)| j >= n)
        .map(|(_, &v)| v.max(0.0))
        .sum();
    if infeasibility > 1e-9 * (1.0 + norm_inf(&t.b)) {
        let mut report = SolveReport::empty(SolverTag::Simplex, SolveStatus::Infeasible);
        report.iterations = t.iterations;
        report.phase_one_value = infeasibility;
        return Ok(report);
    }
    t.expel_artificials()?;

    let mut cost = lp.c.clone();
    cost.extend(std::iter::repeat(0.0).take(m));
    let outcome = t.optimize(&cost, n)?;
    t.refactor()?;

    let mut report = SolveReport::empty(SolverTag::Simplex, SolveStatus::Optimal);
    report.iterations = t.iterations;
    report.phase_one_value = infeasibility;
    match outcome {
        Outcome::Unbounded { column } => {
            report.status = SolveStatus::Unbounded;
            report.unbounded_column = Some(column);
        }
        Outcome::Optimal { min_reduced_cost } => {
            let x = t.primal();
            report.objective = lp.objective(&x);
            report.max_primal_residual = lp.primal_residual(&x);
            report.min_reduced_cost = min_reduced_cost;
            report.x = x;
        }
    }
    Ok(report)
}
