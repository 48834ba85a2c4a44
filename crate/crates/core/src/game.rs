//! The ambush game: equilibrium computation, best responses and strategy
//! metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::ipm::{ipm_solve, IpmOptions};
use crate::lp_model::{assemble_game_lp, to_standard_form, with_passage_caps};
use crate::netgen::Network;
use crate::simplex::{simplex_solve, SimplexOptions, SolveStatus, SolverTag};

/// Relative tolerance under which two node products count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GameOptions {
    pub simplex: SimplexOptions,
    pub ipm: IpmOptions,
}

/// Player 2's best response to a fixed edge strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    /// Ambush node.
    pub node: usize,
    /// Pure node strategy, one entry per node.
    pub q: Vec<f64>,
    /// Expected loss `q^T D p`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub solver_tag: SolverTag,
    pub length_weight: f64,
    /// Edge probabilities after cycle cancellation, indexed by edge id.
    pub p: Vec<f64>,
    /// Largest node product of `p`.
    pub z_star: f64,
    pub entropy: f64,
    pub expected_length: f64,
    /// Per-node passage probabilities of `p`.
    pub passage: Vec<f64>,
    pub q_star: Vec<f64>,
    pub ambush_node: usize,
    #[serde(rename = "V")]
    pub value: f64,
    pub lp_objective: f64,
    pub lp_z: f64,
    pub iterations: usize,
    pub max_primal_residual: f64,
    /// Edge probabilities as returned by the solver.
    pub p_uncancelled: Vec<f64>,
}

impl Equilibrium {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Solves the minimax routing game with default solver options.
pub fn solve_minimax(net: &Network, solver: SolverTag, length_weight: f64) -> Result<Equilibrium> {
    solve_minimax_with(net, solver, length_weight, &GameOptions::default())
}

pub fn solve_minimax_with(
    net: &Network,
    solver: SolverTag,
    length_weight: f64,
    opts: &GameOptions,
) -> Result<Equilibrium> {
    if !net.connects_origin_to_destination() {
        return Err(Error::Planning(
            "no directed path from origin to destination".into(),
        ));
    }
    let (gp, cost) = assemble_game_lp(net, length_weight)?;
    let mut lp = to_standard_form(&gp, &cost);
    let free_nodes: Vec<usize> = (0..net.node_count())
        .filter(|&j| {
            j != net.origin()
                && j != net.destination()
                && net.alpha(j) == 0.0
                && !net.in_edges(j).is_empty()
        })
        .collect();
    if !free_nodes.is_empty() {
        lp = with_passage_caps(&lp, &gp, &free_nodes);
    }

    let report = match solver {
        SolverTag::Simplex => simplex_solve(&lp, &opts.simplex)?,
        SolverTag::Ipm => ipm_solve(&lp, &opts.ipm)?,
    };
    match report.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            return Err(Error::Planning(format!(
                "{solver} solver reports the game program infeasible"
            )))
        }
        status => return Err(Error::NotOptimal { solver, status }),
    }

    let (raw, lp_z) = lp.recover(&report.x);
    let raw: Vec<f64> = raw.into_iter().map(|v| v.max(0.0)).collect();
    let p = cancel_cycles(net, &raw);
    let passage = passage_probabilities(net, &p);
    let br = best_response(net, &p);
    Ok(Equilibrium {
        solver_tag: solver,
        length_weight,
        z_star: max_node_product(net, &p),
        entropy: entropy(&p),
        expected_length: expected_length(net, &p),
        passage,
        q_star: br.q,
        ambush_node: br.node,
        value: br.value,
        lp_objective: report.objective,
        lp_z,
        iterations: report.iterations,
        max_primal_residual: report.max_primal_residual,
        p_uncancelled: raw,
        p,
    })
}

/// Probability of passing through each node: the inflow for every node.
pub fn passage_probabilities(net: &Network, p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; net.node_count()];
    for e in net.edges() {
        out[e.head] += p[e.id];
    }
    out
}

pub fn max_node_product(net: &Network, p: &[f64]) -> f64 {
    passage_probabilities(net, p)
        .iter()
        .zip(net.nodes())
        .map(|(pi, n)| pi * n.alpha)
        .fold(0.0, f64::max)
}

pub fn expected_length(net: &Network, p: &[f64]) -> f64 {
    net.edges().iter().map(|e| p[e.id] * e.length).sum()
}

/// Removes directed cycles from the support of `p` by flow decomposition.
/// Each pass finds one cycle, lowest node id first, and subtracts its
/// bottleneck; flow on cycle-free parts is untouched.
pub fn cancel_cycles(net: &Network, p: &[f64]) -> Vec<f64> {
    let mut p = p.to_vec();
    while let Some(cycle) = find_cycle(net, &p) {
        let theta = cycle.iter().map(|&k| p[k]).fold(f64::INFINITY, f64::min);
        for &k in &cycle {
            p[k] = if p[k] == theta { 0.0 } else { p[k] - theta };
        }
    }
    p
}

/// Edge ids of one directed cycle among edges with positive flow.
pub fn find_cycle(net: &Network, p: &[f64]) -> Option<Vec<usize>> {
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let n = net.node_count();
    let mut color = vec![WHITE; n];
    let mut via = vec![usize::MAX; n];
    for root in 0..n {
        if color[root] != WHITE {
            continue;
        }
        // stack of (node, next out-edge position)
        let mut stack = vec![(root, 0usize)];
        color[root] = GREY;
        while let Some(top) = stack.last_mut() {
            let (j, pos) = *top;
            let outs = net.out_edges(j);
            if pos == outs.len() {
                color[j] = BLACK;
                stack.pop();
                continue;
            }
            top.1 += 1;
            let k = outs[pos];
            if p[k] <= 0.0 {
                continue;
            }
            let h = net.edges()[k].head;
            match color[h] {
                WHITE => {
                    color[h] = GREY;
                    via[h] = k;
                    stack.push((h, 0));
                }
                GREY => {
                    let mut cycle = vec![k];
                    let mut at = j;
                    while at != h {
                        let e = via[at];
                        cycle.push(e);
                        at = net.edges()[e].tail;
                    }
                    cycle.reverse();
                    return Some(cycle);
                }
                _ => {}
            }
        }
    }
    None
}

/// Pure best response of the ambusher: the node with the largest passage
/// probability times risk, lowest id among ties.
pub fn best_response(net: &Network, p: &[f64]) -> BestResponse {
    let products: Vec<f64> = passage_probabilities(net, p)
        .iter()
        .zip(net.nodes())
        .map(|(pi, n)| pi * n.alpha)
        .collect();
    let best = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let node = products
        .iter()
        .position(|&v| v >= best - TIE_TOLERANCE * best.abs().max(1.0))
        .unwrap_or(0);
    let mut q = vec![0.0; net.node_count()];
    if !q.is_empty() {
        q[node] = 1.0;
    }
    BestResponse {
        node,
        value: game_value(net, p, &q),
        q,
    }
}

/// `q^T D p`.
pub fn game_value(net: &Network, p: &[f64], q: &[f64]) -> f64 {
    net.edges()
        .iter()
        .map(|e| q[e.head] * net.alpha(e.head) * p[e.id])
        .sum()
}

/// Probability that the convoy meets the ambush.
pub fn ambush_probability(net: &Network, p: &[f64], q: &[f64]) -> f64 {
    net.edges().iter().map(|e| p[e.id] * q[e.head]).sum()
}

/// Unnormalized edge-mass entropy `-sum p ln p` in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// Probability-weighted sum of unit vectors along the outgoing edges.
pub fn mean_direction(net: &Network, p: &[f64], node: usize) -> Result<Point> {
    let from = net.node(node)?.position();
    let (mut x, mut y) = (0.0, 0.0);
    for &k in net.out_edges(node) {
        let e = &net.edges()[k];
        let to = net.position(e.head);
        x += p[k] * (to.x - from.x) / e.length;
        y += p[k] * (to.y - from.y) / e.length;
    }
    Ok(Point::new(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(points: &[(f64, f64)], alpha: &[f64], links: &[(usize, usize)], d: usize) -> Network {
        let pts: Vec<Point> = points.iter().map(|&(x, y)| Point::new(x, y)).collect();
        Network::from_parts(&pts, alpha, links, 0, d).unwrap()
    }

    fn chain() -> Network {
        net(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
            &[0.0, 1.0, 2.0, 0.0],
            &[(0, 1), (1, 2), (2, 3)],
            3,
        )
    }

    fn two_paths() -> Network {
        net(
            &[(0.0, 0.0), (1.0, 1.0), (1.0, -1.0), (2.0, 0.0)],
            &[0.0, 1.0, 1.0, 0.0],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
            3,
        )
    }

    #[test]
    fn chain_value_is_max_risk() {
        for solver in [SolverTag::Simplex, SolverTag::Ipm] {
            let eq = solve_minimax(&chain(), solver, 0.0).unwrap();
            for v in &eq.p {
                assert!((v - 1.0).abs() < 1e-8);
            }
            assert!((eq.z_star - 2.0).abs() < 1e-7);
            assert!((eq.lp_objective - 2.0).abs() < 1e-7);
            assert_eq!(eq.ambush_node, 2);
        }
    }

    #[test]
    fn two_disjoint_paths_split_evenly() {
        let eq = solve_minimax(&two_paths(), SolverTag::Ipm, 0.0).unwrap();
        for v in &eq.p {
            assert!((v - 0.5).abs() < 1e-6, "{:?}", eq.p);
        }
        assert!((eq.z_star - 0.5).abs() < 1e-7);
        assert!((eq.value - eq.z_star).abs() < 1e-7);
        assert!((eq.entropy - 2.0 * 2.0f64.ln()).abs() < 1e-5);
        let s = solve_minimax(&two_paths(), SolverTag::Simplex, 0.0).unwrap();
        assert!((s.z_star - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cycles_are_cancelled() {
        // path 0 -> 1 -> 4 plus a 3-cycle 1 -> 2 -> 3 -> 1 carrying 0.3
        let n = net(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (2.0, -1.0), (3.0, 0.0)],
            &[0.0, 1.0, 1.0, 1.0, 0.0],
            &[(0, 1), (1, 2), (2, 3), (3, 1), (1, 4)],
            4,
        );
        let p = [1.0, 0.3, 0.3, 0.3, 1.0];
        assert!(find_cycle(&n, &p).is_some());
        let q = cancel_cycles(&n, &p);
        assert_eq!(q, vec![1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(find_cycle(&n, &q).is_none());
        assert_eq!(cancel_cycles(&n, &q), q);
    }

    #[test]
    fn best_response_ties_go_to_lowest_id() {
        let n = net(
            &[(0.0, 0.0), (1.0, 1.0), (1.0, -1.0), (2.0, 0.0), (3.0, 0.0)],
            &[0.0, 1.0, 1.0, 0.4, 0.0],
            &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)],
            4,
        );
        let p = [0.5, 0.5, 0.5, 0.5, 1.0];
        assert_eq!(passage_probabilities(&n, &p), vec![0.0, 0.5, 0.5, 1.0, 1.0]);
        let br = best_response(&n, &p);
        assert_eq!(br.node, 1);
        assert_eq!(br.value, 0.5);
        assert_eq!(br.q.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn ambush_probability_basics() {
        let n = two_paths();
        let p = [0.4, 0.6, 0.4, 0.6];
        assert_eq!(ambush_probability(&n, &p, &[0.0; 4]), 0.0);
        assert_eq!(ambush_probability(&n, &p, &[0.0, 1.0, 0.0, 0.0]), 0.4);
    }

    #[test]
    fn entropy_hand_values() {
        assert_eq!(entropy(&[1.0, 1.0, 0.0]), 0.0);
        let h = entropy(&[0.5, 0.5, 1.0, 1.0]);
        assert!((h - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn mean_direction_cases() {
        let east = net(&[(0.0, 0.0), (2.0, 0.0)], &[0.0, 0.0], &[(0, 1)], 1);
        assert_eq!(
            mean_direction(&east, &[1.0], 0).unwrap(),
            Point::new(1.0, 0.0)
        );
        let both = net(
            &[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.0, 3.0)],
            &[0.0, 1.0, 1.0, 0.0],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
            3,
        );
        assert_eq!(
            mean_direction(&both, &[0.5, 0.5, 0.5, 0.5], 0).unwrap(),
            Point::new(0.0, 0.0)
        );
        assert!(matches!(
            mean_direction(&both, &[0.0; 4], 9),
            Err(Error::UnknownNode(9))
        ));
    }

    #[test]
    fn zero_risk_network_has_zero_value() {
        // a zero-risk 2-cycle between the branches must not break either solver
        let n = net(
            &[(0.0, 0.0), (1.0, 1.0), (1.0, -1.0), (2.0, 0.0)],
            &[0.0, 0.0, 0.0, 0.0],
            &[(0, 1), (0, 2), (1, 2), (2, 1), (1, 3), (2, 3)],
            3,
        );
        for solver in [SolverTag::Simplex, SolverTag::Ipm] {
            let eq = solve_minimax(&n, solver, 0.0).unwrap();
            assert!(eq.z_star.abs() < 1e-9);
            assert!(find_cycle(&n, &eq.p).is_none());
            assert!(eq.passage.iter().all(|&v| v <= 1.0 + 1e-8));
        }
    }

    #[test]
    fn disconnected_is_a_planning_error() {
        let n = net(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            &[0.0, 1.0, 0.0],
            &[(0, 1)],
            2,
        );
        assert!(matches!(
            solve_minimax(&n, SolverTag::Ipm, 0.0),
            Err(Error::Planning(_))
        ));
    }

    #[test]
    fn equilibrium_json_round_trip() {
        let eq = solve_minimax(&two_paths(), SolverTag::Simplex, 0.0).unwrap();
        let text = eq.to_json().unwrap();
        assert!(text.contains("\"z_star\""));
        assert!(text.contains("\"V\""));
        assert_eq!(Equilibrium::from_json(&text).unwrap(), eq);
    }
}
