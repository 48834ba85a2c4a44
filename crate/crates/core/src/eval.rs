//! Deterministic baseline planners, path sampling from edge strategies and
//! the repeated-game comparison harness.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{ambush_probability, best_response, find_cycle, solve_minimax, Equilibrium};
use crate::netgen::Network;
use crate::simplex::SolverTag;

/// Relative slack when matching path costs during reconstruction.
const COST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub nodes: Vec<usize>,
    pub length: f64,
    pub max_alpha: f64,
    pub seed: Option<u64>,
}

impl PathSample {
    fn from_nodes(net: &Network, nodes: Vec<usize>, seed: Option<u64>) -> Result<Self> {
        let mut length = 0.0;
        for w in nodes.windows(2) {
            let k = net
                .find_edge(w[0], w[1])
                .ok_or_else(|| Error::Planning(format!("no edge {} -> {}", w[0], w[1])))?;
            length += net.edges()[k].length;
        }
        let max_alpha = nodes.iter().map(|&j| net.alpha(j)).fold(0.0, f64::max);
        Ok(PathSample {
            nodes,
            length,
            max_alpha,
            seed,
        })
    }

    /// Edge ids along the path.
    pub fn edges(&self, net: &Network) -> Vec<usize> {
        self.nodes
            .windows(2)
            .map(|w| {
                net.find_edge(w[0], w[1])
                    .expect("path follows network edges")
            })
            .collect()
    }

    /// Unit flow along the path.
    pub fn flow(&self, net: &Network) -> Vec<f64> {
        let mut p = vec![0.0; net.edge_count()];
        for k in self.edges(net) {
            p[k] = 1.0;
        }
        p
    }

    /// Highest-risk node on the path, lowest id among ties.
    pub fn riskiest_node(&self, net: &Network) -> usize {
        let mut best = self.nodes[0];
        for &j in &self.nodes {
            let (a, b) = (net.alpha(j), net.alpha(best));
            if a > b || a == b && j < best {
                best = j;
            }
        }
        best
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Label {
    cost: (f64, f64),
    node: usize,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then node id
        other
            .cost
            .0
            .total_cmp(&self.cost.0)
            .then(other.cost.1.total_cmp(&self.cost.1))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Lexicographic cost-to-destination for every node; `step(edge)` gives the
/// cost pair of traversing an edge.
fn costs_to_destination(
    net: &Network,
    step: &dyn Fn(usize) -> (f64, f64),
) -> Vec<Option<(f64, f64)>> {
    let mut best: Vec<Option<(f64, f64)>> = vec![None; net.node_count()];
    let mut done = vec![false; net.node_count()];
    let mut heap = BinaryHeap::new();
    best[net.destination()] = Some((0.0, 0.0));
    heap.push(Label {
        cost: (0.0, 0.0),
        node: net.destination(),
    });
    while let Some(Label { cost, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        for &k in net.in_edges(node) {
            let tail = net.edges()[k].tail;
            let (a, b) = step(k);
            let cand = (cost.0 + a, cost.1 + b);
            let better = match best[tail] {
                None => true,
                Some(cur) => {
                    cand.0 < cur.0 && !close(cand.0, cur.0)
                        || close(cand.0, cur.0) && cand.1 < cur.1
                }
            };
            if better && !done[tail] {
                best[tail] = Some(cand);
                heap.push(Label {
                    cost: cand,
                    node: tail,
                });
            }
        }
    }
    best
}

/// Walks from the origin taking the lowest-id successor that stays on an
/// optimal path, which yields the lexicographically smallest optimal node
/// sequence.
fn reconstruct(
    net: &Network,
    to_go: &[Option<(f64, f64)>],
    step: &dyn Fn(usize) -> (f64, f64),
) -> Result<PathSample> {
    let Some(_) = to_go[net.origin()] else {
        return Err(Error::Planning(
            "no directed path from origin to destination".into(),
        ));
    };
    let mut nodes = vec![net.origin()];
    let mut at = net.origin();
    while at != net.destination() {
        let here = to_go[at].expect("on an optimal path");
        let mut next: Option<usize> = None;
        for &k in net.out_edges(at) {
            let head = net.edges()[k].head;
            let Some(there) = to_go[head] else { continue };
            let (a, b) = step(k);
            if close(a + there.0, here.0)
                && close(b + there.1, here.1)
                && next.map_or(true, |n| head < n)
                && !nodes.contains(&head)
            {
                next = Some(head);
            }
        }
        at = next.ok_or_else(|| Error::Planning("path reconstruction stalled".into()))?;
        nodes.push(at);
    }
    PathSample::from_nodes(net, nodes, None)
}

/// Minimum total edge length path; ties by lexicographic node sequence.
pub fn shortest_path(net: &Network) -> Result<PathSample> {
    let step = |k: usize| (net.edges()[k].length, 0.0);
    let to_go = costs_to_destination(net, &step);
    reconstruct(net, &to_go, &step)
}

/// Minimum summed risk over visited nodes; ties by length, then by
/// lexicographic node sequence.
pub fn safest_path(net: &Network) -> Result<PathSample> {
    let step = |k: usize| {
        let e = &net.edges()[k];
        (net.alpha(e.head), e.length)
    };
    let to_go = costs_to_destination(net, &step);
    reconstruct(net, &to_go, &step)
}

/// Draws origin-to-destination walks from an acyclic edge strategy.
pub struct PathSampler<'a> {
    net: &'a Network,
    p: &'a [f64],
}

impl<'a> PathSampler<'a> {
    pub fn new(net: &'a Network, p: &'a [f64]) -> Result<Self> {
        if let Some(cycle) = find_cycle(net, p) {
            return Err(Error::CyclicFlow {
                node: net.edges()[cycle[0]].tail,
            });
        }
        Ok(PathSampler { net, p })
    }

    /// At each node the successor is drawn with probability proportional to
    /// its edge's mass.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PathSample> {
        let net = self.net;
        let mut nodes = vec![net.origin()];
        let mut at = net.origin();
        while at != net.destination() {
            let outs = net.out_edges(at);
            let total: f64 = outs.iter().map(|&k| self.p[k].max(0.0)).sum();
            if !(total > 0.0) {
                return Err(Error::Planning(format!(
                    "walk stranded at node {at}: no outgoing mass"
                )));
            }
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = None;
            for &k in outs {
                let w = self.p[k].max(0.0);
                if w <= 0.0 {
                    continue;
                }
                chosen = Some(k);
                if u < w {
                    break;
                }
                u -= w;
            }
            at = net.edges()[chosen.expect("positive mass")].head;
            nodes.push(at);
        }
        PathSample::from_nodes(net, nodes, None)
    }
}

/// One sampled path, reproducible from `seed`.
pub fn sample_path(net: &Network, p: &[f64], seed: u64) -> Result<PathSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = PathSampler::new(net, p)?.sample(&mut rng)?;
    path.seed = Some(seed);
    Ok(path)
}

/// `count` paths from one seeded stream.
pub fn sample_paths(net: &Network, p: &[f64], count: usize, seed: u64) -> Result<Vec<PathSample>> {
    let sampler = PathSampler::new(net, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sampler.sample(&mut rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Planner {
    Stochastic(SolverTag),
    Shortest,
    Safest,
}

impl fmt::Display for Planner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Planner::Stochastic(s) => write!(f, "stochastic-{s}"),
            Planner::Shortest => f.write_str("shortest"),
            Planner::Safest => f.write_str("safest"),
        }
    }
}

impl FromStr for Planner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shortest" => Ok(Planner::Shortest),
            "safest" => Ok(Planner::Safest),
            "stochastic" => Ok(Planner::Stochastic(SolverTag::Ipm)),
            other => match other.strip_prefix("stochastic-") {
                Some(tag) => Ok(Planner::Stochastic(tag.parse()?)),
                None => Err(Error::Planning(format!("unknown planner `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub planner: String,
    /// Expected path length.
    pub expected_length: f64,
    /// Ambush probability in the first round, when the ambusher best
    /// responds to the equilibrium strategy.
    pub p1: f64,
    /// Ambush probability once the ambusher has learned all it can.
    pub p_inf: f64,
    /// Expected loss once the ambusher has learned all it can.
    pub v_inf: f64,
    /// Ambush probability of the planner's own flow against the first-round
    /// ambush node.
    pub p1_realized: f64,
    /// Simulated hit rate in the first round.
    pub simulated_p1: f64,
    /// Simulated hit rate after learning.
    pub simulated_p_inf: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "planner,E,P1,P_inf,V_inf";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{:.6},{:.6}",
            self.planner, self.expected_length, self.p1, self.p_inf, self.v_inf
        )
    }
}

/// Runs the repeated game for `planner`. The first-round ambush is the best
/// response to the stochastic equilibrium (interior-point unless the planner
/// names a solver).
pub fn evaluate_planner(
    net: &Network,
    planner: Planner,
    iterations: usize,
    seed: u64,
) -> Result<EvalReport> {
    let solver = match planner {
        Planner::Stochastic(s) => s,
        _ => SolverTag::Ipm,
    };
    let reference = solve_minimax(net, solver, 0.0)?;
    evaluate_against(net, planner, &reference, iterations, seed)
}

/// As [`evaluate_planner`] with a precomputed equilibrium. A stochastic
/// planner plays `reference` itself.
pub fn evaluate_against(
    net: &Network,
    planner: Planner,
    reference: &Equilibrium,
    iterations: usize,
    seed: u64,
) -> Result<EvalReport> {
    let first = best_response(net, &reference.p);
    let p1 = ambush_probability(net, &reference.p, &first.q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (expected_length, p, p_inf, v_inf, learned_node, fixed_path) = match planner {
        Planner::Stochastic(_) => (
            reference.expected_length,
            reference.p.clone(),
            p1,
            reference.z_star,
            first.node,
            None,
        ),
        Planner::Shortest | Planner::Safest => {
            let path = if planner == Planner::Shortest {
                shortest_path(net)?
            } else {
                safest_path(net)?
            };
            let node = path.riskiest_node(net);
            (
                path.length,
                path.flow(net),
                1.0,
                path.max_alpha,
                node,
                Some(path),
            )
        }
    };
    let p1_realized = ambush_probability(net, &p, &first.q);

    let sampler = PathSampler::new(net, &p)?;
    let (mut hits_first, mut hits_learned) = (0usize, 0usize);
    for _ in 0..iterations {
        let path = match &fixed_path {
            Some(path) => path.nodes.clone(),
            None => sampler.sample(&mut rng)?.nodes,
        };
        hits_first += path.contains(&first.node) as usize;
        hits_learned += path.contains(&learned_node) as usize;
    }
    let rate = |hits: usize| {
        if iterations == 0 {
            f64::NAN
        } else {
            hits as f64 / iterations as f64
        }
    };

    Ok(EvalReport {
        planner: planner.to_string(),
        expected_length,
        p1,
        p_inf,
        v_inf,
        p1_realized,
        simulated_p1: rate(hits_first),
        simulated_p_inf: rate(hits_learned),
        iterations,
        seed,
    })
}
