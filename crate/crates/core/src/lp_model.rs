//! The minimax game as a linear program, and the equality standard form
//! both solvers consume.
//!
//! Variables are the edge probabilities `p` followed by the game value `z`:
//!
//! ```text
//! minimize   (1 - w) z + w * sum_k l_k p_k
//! subject to D p - 1 z <= 0
//!            A p       = b
//!            p, z      >= 0
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Matrix};
use crate::netgen::Network;

/// Node x edge outcome matrix: entry `(j, k)` is the risk of node `j` when
/// edge `k` enters it.
pub fn build_outcome_matrix(net: &Network) -> Matrix {
    let mut d = Matrix::zeros(net.node_count(), net.edge_count());
    for e in net.edges() {
        d[(e.head, e.id)] = net.alpha(e.head);
    }
    d
}

/// Flow conservation rows, one per node in node order. Internal nodes read
/// `inflow - outflow = 0`, the origin row sums its outflow to 1 and the
/// destination row sums its inflow to 1.
pub fn build_flow_constraints(net: &Network) -> (Matrix, Vec<f64>) {
    let n = net.node_count();
    let mut a = Matrix::zeros(n, net.edge_count());
    let mut b = vec![0.0; n];
    for j in 0..n {
        if j == net.origin() {
            for &k in net.out_edges(j) {
                a[(j, k)] = 1.0;
            }
            b[j] = 1.0;
        } else if j == net.destination() {
            for &k in net.in_edges(j) {
                a[(j, k)] = 1.0;
            }
            b[j] = 1.0;
        } else {
            for &k in net.in_edges(j) {
                a[(j, k)] += 1.0;
            }
            for &k in net.out_edges(j) {
                a[(j, k)] -= 1.0;
            }
        }
    }
    (a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameProgram {
    pub outcome: Matrix,
    pub flow: Matrix,
    pub rhs: Vec<f64>,
    /// Column `k` of `outcome`/`flow` is edge `edge_ids[k]`.
    pub edge_ids: Vec<usize>,
    /// Row `j` of `outcome`/`flow` is node `node_ids[j]`.
    pub node_ids: Vec<usize>,
    pub origin_row: usize,
    pub destination_row: usize,
    pub lengths: Vec<f64>,
}

impl GameProgram {
    pub fn edge_count(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    /// Column index of `z` in the `(p, z)` variable vector.
    pub fn z_column(&self) -> usize {
        self.edge_count()
    }

    /// Largest violation of any constraint at `(p, z)`.
    pub fn max_violation(&self, p: &[f64], z: f64) -> f64 {
        let dp = self.outcome.mul_vec(p);
        let ap = self.flow.mul_vec(p);
        let ineq = dp.iter().map(|v| (v - z).max(0.0)).fold(0.0, f64::max);
        let eq = ap
            .iter()
            .zip(&self.rhs)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max);
        let neg = p
            .iter()
            .chain(std::iter::once(&z))
            .map(|v| (-v).max(0.0))
            .fold(0.0, f64::max);
        ineq.max(eq).max(neg)
    }

    /// Internal balance rows plus the destination row reproduce the origin
    /// row; holds whenever no edge enters the origin or leaves the
    /// destination.
    pub fn bookkeeping_residual(&self) -> f64 {
        let m = self.edge_count();
        let mut sum = vec![0.0; m];
        for j in 0..self.node_count() {
            if j == self.origin_row {
                continue;
            }
            for (s, v) in sum.iter_mut().zip(self.flow.row(j)) {
                *s += v;
            }
        }
        let diff: Vec<f64> = sum
            .iter()
            .zip(self.flow.row(self.origin_row))
            .map(|(s, o)| s - o)
            .collect();
        norm_inf(&diff)
    }
}

/// Debug dump, one constraint per line.
impl fmt::Display for GameProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = |row: &[f64]| {
            let mut s = String::new();
            for (k, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    let sign = if v < 0.0 { '-' } else { '+' };
                    s.push_str(&format!(" {sign} {}*p{}", v.abs(), self.edge_ids[k]));
                }
            }
            s
        };
        for (j, &node) in self.node_ids.iter().enumerate() {
            writeln!(f, "risk n{node}:{} - z <= 0", terms(self.outcome.row(j)))?;
        }
        for (j, &node) in self.node_ids.iter().enumerate() {
            writeln!(
                f,
                "flow n{node}:{} = {}",
                terms(self.flow.row(j)),
                self.rhs[j]
            )?;
        }
        Ok(())
    }
}

/// Assembles the game LP with objective `(1 - w) z + w * sum(l p)`.
/// Returns the program and the cost vector over `(p, z)`.
pub fn assemble_game_lp(net: &Network, length_weight: f64) -> Result<(GameProgram, Vec<f64>)> {
    if !(0.0..1.0).contains(&length_weight) {
        return Err(Error::Planning(format!(
            "length weight {length_weight} must lie in [0, 1)"
        )));
    }
    let outcome = build_outcome_matrix(net);
    let (flow, rhs) = build_flow_constraints(net);
    let lengths: Vec<f64> = net.edges().iter().map(|e| e.length).collect();
    let mut cost: Vec<f64> = lengths.iter().map(|l| length_weight * l).collect();
    cost.push(1.0 - length_weight);
    let gp = GameProgram {
        outcome,
        flow,
        rhs,
        edge_ids: (0..net.edge_count()).collect(),
        node_ids: (0..net.node_count()).collect(),
        origin_row: net.origin(),
        destination_row: net.destination(),
        lengths,
    };
    debug_assert!(gp.bookkeeping_residual() == 0.0);
    Ok((gp, cost))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Probability of the edge in this `GameProgram` column.
    Edge(usize),
    Z,
    /// Slack of the risk row of this `GameProgram` node row.
    Slack(usize),
    /// Slack of the passage cap of this `GameProgram` node row.
    CapSlack(usize),
    /// Column of an LP that did not come from a game.
    Plain(usize),
}

/// `minimize c.x  s.t.  A x = b, x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardLp {
    pub c: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
    pub column_meta: Vec<ColumnKind>,
}

impl StandardLp {
    /// A plain standard-form LP. Rejects shape mismatches, non-finite data and
    /// all-zero rows.
    pub fn new(c: Vec<f64>, a_eq: Matrix, b_eq: Vec<f64>) -> Result<Self> {
        if c.len() != a_eq.cols() || b_eq.len() != a_eq.rows() {
            return Err(Error::Planning(format!(
                "LP shape mismatch: c has {}, A is {}x{}, b has {}",
                c.len(),
                a_eq.rows(),
                a_eq.cols(),
                b_eq.len()
            )));
        }
        if c.iter().chain(&b_eq).any(|v| !v.is_finite())
            || (0..a_eq.rows()).any(|r| a_eq.row(r).iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Planning("LP data must be finite".into()));
        }
        if let Some(r) = (0..a_eq.rows()).find(|&r| a_eq.row(r).iter().all(|&v| v == 0.0)) {
            return Err(Error::Planning(format!("LP row {r} is all zeros")));
        }
        let column_meta = (0..c.len()).map(ColumnKind::Plain).collect();
        Ok(StandardLp {
            c,
            a_eq,
            b_eq,
            column_meta,
        })
    }

    pub fn rows(&self) -> usize {
        self.a_eq.rows()
    }

    pub fn cols(&self) -> usize {
        self.a_eq.cols()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        crate::linalg::dot(&self.c, x)
    }

    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let ax = self.a_eq.mul_vec(x);
        ax.iter()
            .zip(&self.b_eq)
            .map(|(l, r)| (l - r).abs())
            .fold(0.0, f64::max)
    }

    /// Maps a standard-form point back to the game variables `(p, z)`.
    pub fn recover(&self, x: &[f64]) -> (Vec<f64>, f64) {
        let edges = self
            .column_meta
            .iter()
            .filter(|k| matches!(k, ColumnKind::Edge(_)))
            .count();
        let mut p = vec![0.0; edges];
        let mut z = 0.0;
        for (kind, &v) in self.column_meta.iter().zip(x) {
            match *kind {
                ColumnKind::Edge(k) => p[k] = v,
                ColumnKind::Z => z = v,
                _ => {}
            }
        }
        (p, z)
    }

    /// Lifts game variables to a standard-form point, filling slacks.
    pub fn lift(&self, gp: &GameProgram, p: &[f64], z: f64) -> Vec<f64> {
        let dp = gp.outcome.mul_vec(p);
        self.column_meta
            .iter()
            .map(|kind| match *kind {
                ColumnKind::Edge(k) => p[k],
                ColumnKind::Z => z,
                ColumnKind::Slack(j) => z - dp[j],
                ColumnKind::CapSlack(j) => 1.0 - dp_in(gp, p, j),
                ColumnKind::Plain(_) => 0.0,
            })
            .collect()
    }
}

fn dp_in(gp: &GameProgram, p: &[f64], node: usize) -> f64 {
    gp.flow
        .row(node)
        .iter()
        .zip(p)
        .filter(|(&a, _)| a > 0.0)
        .map(|(_, &v)| v)
        .sum()
}

/// Appends `inflow(j) + t_j = 1` for each listed node. Zero-risk nodes put no
/// bound on circulation through them; the cap keeps the feasible set bounded
/// without changing the game value, since every optimum can be made acyclic.
pub fn with_passage_caps(lp: &StandardLp, gp: &GameProgram, nodes: &[usize]) -> StandardLp {
    let (m, n) = (lp.rows(), lp.cols());
    let edges = gp.edge_count();
    let mut a = Matrix::zeros(m + nodes.len(), n + nodes.len());
    for r in 0..m {
        a.row_mut(r)[..n].copy_from_slice(lp.a_eq.row(r));
    }
    for (i, &j) in nodes.iter().enumerate() {
        let row = a.row_mut(m + i);
        for (k, &v) in gp.flow.row(j).iter().enumerate().take(edges) {
            if v > 0.0 {
                row[k] = 1.0;
            }
        }
        row[n + i] = 1.0;
    }
    let mut c = lp.c.clone();
    c.resize(n + nodes.len(), 0.0);
    let mut b = lp.b_eq.clone();
    b.resize(m + nodes.len(), 1.0);
    let mut column_meta = lp.column_meta.clone();
    column_meta.extend(nodes.iter().map(|&j| ColumnKind::CapSlack(j)));
    StandardLp {
        c,
        a_eq: a,
        b_eq: b,
        column_meta,
    }
}

/// Adds one slack per risk row and stacks the flow rows underneath.
/// Flow rows with no coefficients (isolated nodes) carry no information and
/// are left out.
pub fn to_standard_form(gp: &GameProgram, cost: &[f64]) -> StandardLp {
    let edges = gp.edge_count();
    let nodes = gp.node_count();
    let cols = edges + 1 + nodes;
    let flow_rows: Vec<usize> = (0..nodes)
        .filter(|&j| gp.flow.row(j).iter().any(|&v| v != 0.0) || gp.rhs[j] != 0.0)
        .collect();
    let mut a = Matrix::zeros(nodes + flow_rows.len(), cols);
    let mut b = vec![0.0; nodes + flow_rows.len()];
    for j in 0..nodes {
        let row = a.row_mut(j);
        row[..edges].copy_from_slice(gp.outcome.row(j));
        row[edges] = -1.0;
        row[edges + 1 + j] = 1.0;
    }
    for (i, &j) in flow_rows.iter().enumerate() {
        a.row_mut(nodes + i)[..edges].copy_from_slice(gp.flow.row(j));
        b[nodes + i] = gp.rhs[j];
    }
    let mut c = vec![0.0; cols];
    c[..=edges].copy_from_slice(&cost[..=edges]);
    let column_meta = (0..edges)
        .map(ColumnKind::Edge)
        .chain(std::iter::once(ColumnKind::Z))
        .chain((0..nodes).map(ColumnKind::Slack))
        .collect();
    StandardLp {
        c,
        a_eq: a,
        b_eq: b,
        column_meta,
    }
}
