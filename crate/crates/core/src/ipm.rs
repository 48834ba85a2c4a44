//! Mehrotra predictor-corrector interior-point method.
//!
//! Works on the normal equations `A D A^T` with a dense Cholesky factor.
//! Linearly dependent equality rows are dropped before the first
//! iteration. There is no crossover: the returned point is the last
//! interior iterate, which approaches the analytic center of the optimal
//! face rather than a vertex.

use crate::error::{Error, Result};
use crate::linalg::{
    axpy, cholesky_semidefinite, cholesky_solve, dot, independent_rows, norm_inf, Matrix,
};
use crate::lp_model::StandardLp;
use crate::simplex::{SolveReport, SolveStatus, SolverTag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmOptions {
    /// Relative duality gap at termination.
    pub gap_tolerance: f64,
    /// Relative primal and dual residuals at termination.
    pub feasibility_tolerance: f64,
    pub max_iterations: usize,
    /// Fraction of the step to the boundary.
    pub step_fraction: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions {
            gap_tolerance: 1e-9,
            feasibility_tolerance: 1e-9,
            max_iterations: 200,
            step_fraction: 0.99,
        }
    }
}

/// Iterates are declared divergent once they exceed this.
const DIVERGENCE: f64 = 1e12;

struct Normal {
    a: Matrix,
    columns: Vec<Vec<(usize, f64)>>,
    factor: Matrix,
    d: Vec<f64>,
}

impl Normal {
    fn new(a: Matrix) -> Self {
        let columns = a.sparse_columns();
        let m = a.rows();
        Normal {
            a,
            columns,
            factor: Matrix::zeros(m, m),
            d: Vec::new(),
        }
    }

    /// Factors `A diag(d) A^T`. Pivots that vanish relative to the largest
    /// diagonal entry are dropped; they belong to rows whose every column is
    /// being driven to zero.
    fn factor(&mut self, d: &[f64]) {
        let m = self.a.rows();
        let mut f = Matrix::zeros(m, m);
        for (col, &dj) in self.columns.iter().zip(d) {
            for &(i, vi) in col {
                let w = vi * dj;
                for &(k, vk) in col {
                    if k <= i {
                        f[(i, k)] += w * vk;
                    }
                }
            }
        }
        cholesky_semidefinite(&mut f, 1e-30);
        self.factor = f;
        self.d = d.to_vec();
    }

    /// Solves the normal equations with two steps of iterative refinement
    /// against the unfactored product.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut v = cholesky_solve(&self.factor, rhs);
        for _ in 0..2 {
            let atv = self.at_mul(&v);
            let datv: Vec<f64> = atv.iter().zip(&self.d).map(|(a, d)| a * d).collect();
            let mv = self.a_mul(&datv);
            let res: Vec<f64> = rhs.iter().zip(&mv).map(|(r, m)| r - m).collect();
            if norm_inf(&res) <= 1e-15 * (1.0 + norm_inf(rhs)) {
                break;
            }
            let dv = cholesky_solve(&self.factor, &res);
            axpy(1.0, &dv, &mut v);
        }
        v
    }

    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.a.rows()];
        for (col, &xj) in self.columns.iter().zip(x) {
            if xj != 0.0 {
                for &(i, v) in col {
                    out[i] += v * xj;
                }
            }
        }
        out
    }

    fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(i, v)| v * y[i]).sum())
            .collect()
    }
}

fn max_step(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

/// Solves `lp` with a primal-dual path-following method.
pub fn ipm_solve(lp: &StandardLp, opts: &IpmOptions) -> Result<SolveReport> {
    let n = lp.cols();
    let keep = independent_rows(&lp.a_eq, 1e-10);
    let dropped: Vec<usize> = (0..lp.rows()).filter(|r| !keep.contains(r)).collect();
    let a = lp.a_eq.select_rows(&keep);
    let b: Vec<f64> = keep.iter().map(|&r| lp.b_eq[r]).collect();
    let c = &lp.c;
    let m = a.rows();
    let mut sys = Normal::new(a);

    let report = |status, x: Vec<f64>, iterations, mu_history| {
        let mut r = SolveReport {
            status,
            objective: if status == SolveStatus::Optimal {
                lp.objective(&x)
            } else {
                f64::NAN
            },
            iterations,
            solver_tag: SolverTag::Ipm,
            max_primal_residual: 0.0,
            max_dual_residual: 0.0,
            phase_one_value: 0.0,
            unbounded_column: None,
            min_reduced_cost: 0.0,
            mu_history,
            dropped_rows: dropped.clone(),
            x: Vec::new(),
        };
        if status == SolveStatus::Optimal {
            r.max_primal_residual = lp.primal_residual(&x);
            r.x = x;
        }
        r
    };

    if n == 0 {
        let status = if norm_inf(&b) == 0.0 {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        };
        return Ok(report(status, Vec::new(), 0, Vec::new()));
    }

    // Starting point: least-squares solutions shifted into the interior.
    sys.factor(&vec![1.0; n]);
    let mut x = sys.at_mul(&sys.solve(&b));
    let mut y = sys.solve(&sys.a_mul(c));
    let aty = sys.at_mul(&y);
    let mut s: Vec<f64> = c.iter().zip(&aty).map(|(ci, ai)| ci - ai).collect();
    let shift_x = (-1.5 * x.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    let shift_s = (-1.5 * s.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    x.iter_mut().for_each(|v| *v += shift_x);
    s.iter_mut().for_each(|v| *v += shift_s);
    let xs = dot(&x, &s);
    let (sum_x, sum_s) = (x.iter().sum::<f64>(), s.iter().sum::<f64>());
    let dx0 = if sum_s > 0.0 { 0.5 * xs / sum_s } else { 0.0 };
    let ds0 = if sum_x > 0.0 { 0.5 * xs / sum_x } else { 0.0 };
    x.iter_mut().for_each(|v| *v += dx0);
    s.iter_mut().for_each(|v| *v += ds0);
    for v in x.iter_mut().chain(s.iter_mut()) {
        if !(*v > 0.0) {
            *v = 1.0;
        }
    }

    let b_scale = 1.0 + norm_inf(&b);
    let c_scale = 1.0 + norm_inf(c);
    let mut mu_history = Vec::new();

    for iteration in 0..=opts.max_iterations {
        let ax = sys.a_mul(&x);
        let r_b: Vec<f64> = ax.iter().zip(&b).map(|(l, r)| l - r).collect();
        let aty = sys.at_mul(&y);
        let r_c: Vec<f64> = (0..n).map(|j| aty[j] + s[j] - c[j]).collect();
        let mu = dot(&x, &s) / n as f64;
        mu_history.push(mu);

        let primal_obj = dot(c, &x);
        let dual_obj = dot(&b, &y);
        let gap = (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs());
        let p_res = norm_inf(&r_b) / b_scale;
        let d_res = norm_inf(&r_c) / c_scale;
        if gap <= opts.gap_tolerance
            && p_res <= opts.feasibility_tolerance
            && d_res <= opts.feasibility_tolerance
        {
            let full_residual = lp.primal_residual(&x);
            let status = if full_residual <= 1e-8 * (1.0 + norm_inf(&lp.b_eq)) {
                SolveStatus::Optimal
            } else {
                // a dropped row is inconsistent with the kept ones
                SolveStatus::Infeasible
            };
            let mut r = report(status, x, iteration, mu_history);
            r.max_dual_residual = norm_inf(&r_c);
            return Ok(r);
        }

        // Divergence of the dual iterates certifies primal infeasibility;
        // divergence of the primal ones certifies an unbounded objective.
        if norm_inf(&y).max(norm_inf(&s)) > DIVERGENCE && dual_obj > DIVERGENCE.sqrt() {
            return Ok(report(SolveStatus::Infeasible, x, iteration, mu_history));
        }
        if norm_inf(&x) > DIVERGENCE && primal_obj < -DIVERGENCE.sqrt() {
            return Ok(report(SolveStatus::Unbounded, x, iteration, mu_history));
        }
        if iteration == opts.max_iterations {
            return Err(Error::IterationCap {
                solver: SolverTag::Ipm,
                iterations: iteration,
                gap,
            });
        }

        let d: Vec<f64> = x.iter().zip(&s).map(|(xi, si)| xi / si).collect();
        sys.factor(&d);

        // A dx = -r_b, A^T dy + ds = -r_c, S dx + X ds = r_xs
        let direction = |r_xs: &[f64]| {
            let t: Vec<f64> = (0..n).map(|j| r_xs[j] / s[j] + d[j] * r_c[j]).collect();
            let at = sys.a_mul(&t);
            let rhs: Vec<f64> = (0..m).map(|i| -r_b[i] - at[i]).collect();
            let dy = sys.solve(&rhs);
            let atdy = sys.at_mul(&dy);
            let ds: Vec<f64> = (0..n).map(|j| -r_c[j] - atdy[j]).collect();
            let dx: Vec<f64> = (0..n).map(|j| (r_xs[j] - x[j] * ds[j]) / s[j]).collect();
            (dx, dy, ds)
        };

        let r_aff: Vec<f64> = (0..n).map(|j| -x[j] * s[j]).collect();
        let (dx_a, _, ds_a) = direction(&r_aff);
        let ap = max_step(&x, &dx_a).min(1.0);
        let ad = max_step(&s, &ds_a).min(1.0);
        let mu_aff = (0..n)
            .map(|j| (x[j] + ap * dx_a[j]) * (s[j] + ad * ds_a[j]))
            .sum::<f64>()
            / n as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        let r_cor: Vec<f64> = (0..n)
            .map(|j| -x[j] * s[j] - dx_a[j] * ds_a[j] + sigma * mu)
            .collect();
        let (dx, dy, ds) = direction(&r_cor);
        let ap = (opts.step_fraction * max_step(&x, &dx)).min(1.0);
        let ad = (opts.step_fraction * max_step(&s, &ds)).min(1.0);
        for j in 0..n {
            x[j] += ap * dx[j];
            s[j] += ad * ds[j];
        }
        for i in 0..m {
            y[i] += ad * dy[i];
        }
        debug_assert!(x.iter().chain(&s).all(|&v| v > 0.0));
    }
    unreachable!("loop returns on the final iteration")
}
