use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
}

impl Node {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
}

/// Directed roadmap with per-node risk. Node and edge ids equal their
/// position in the respective lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    origin: usize,
    destination: usize,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    origin: usize,
    destination: usize,
}

impl Network {
    /// Validates every structural invariant and builds adjacency lists.
    pub fn new(
        nodes: Vec<Node>,
        edges: Vec<Edge>,
        origin: usize,
        destination: usize,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidNetwork(m));
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return bad(format!("node at position {i} has id {}", node.id));
            }
            if !(node.x.is_finite() && node.y.is_finite()) {
                return bad(format!("node {i} has a non-finite position"));
            }
            if !node.alpha.is_finite() || node.alpha < 0.0 {
                return bad(format!("node {i} has invalid risk {}", node.alpha));
            }
        }
        if origin >= n || destination >= n {
            return bad("origin or destination is not a node".into());
        }
        if origin == destination {
            return bad("origin equals destination".into());
        }
        if nodes[origin].alpha != 0.0 || nodes[destination].alpha != 0.0 {
            return bad("origin and destination must carry zero risk".into());
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (k, e) in edges.iter().enumerate() {
            if e.id != k {
                return bad(format!("edge at position {k} has id {}", e.id));
            }
            if e.tail >= n || e.head >= n {
                return bad(format!("edge {k} references a missing node"));
            }
            if e.tail == e.head {
                return bad(format!("edge {k} is a self-loop"));
            }
            if !seen.insert((e.tail, e.head)) {
                return bad(format!("duplicate edge {} -> {}", e.tail, e.head));
            }
            if e.head == origin {
                return bad(format!("edge {k} enters the origin"));
            }
            if e.tail == destination {
                return bad(format!("edge {k} leaves the destination"));
            }
            let d = nodes[e.tail].position().distance(nodes[e.head].position());
            if !(e.length > 0.0) || (e.length - d).abs() > 1e-9 * d.max(f64::MIN_POSITIVE) {
                return bad(format!(
                    "edge {k} length {} differs from endpoint distance {d}",
                    e.length
                ));
            }
            out_edges[e.tail].push(k);
            in_edges[e.head].push(k);
        }
        Ok(Network {
            nodes,
            edges,
            origin,
            destination,
            out_edges,
            in_edges,
        })
    }

    /// Builds a network from positions, risks and directed links, computing
    /// edge lengths. Origin and destination risks are forced to zero.
    pub fn from_parts(
        positions: &[Point],
        alphas: &[f64],
        links: &[(usize, usize)],
        origin: usize,
        destination: usize,
    ) -> Result<Self> {
        if positions.len() != alphas.len() {
            return Err(Error::InvalidNetwork(
                "positions and risks differ in length".into(),
            ));
        }
        let nodes = positions
            .iter()
            .zip(alphas)
            .enumerate()
            .map(|(id, (p, &a))| Node {
                id,
                x: p.x,
                y: p.y,
                alpha: if id == origin || id == destination {
                    0.0
                } else {
                    a
                },
            })
            .collect::<Vec<_>>();
        let edges = links
            .iter()
            .enumerate()
            .map(|(id, &(tail, head))| {
                let length = match (positions.get(tail), positions.get(head)) {
                    (Some(a), Some(b)) => a.distance(*b),
                    _ => f64::NAN,
                };
                Edge {
                    id,
                    tail,
                    head,
                    length,
                }
            })
            .collect();
        Network::new(nodes, edges, origin, destination)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn destination(&self) -> usize {
        self.destination
    }

    pub fn node(&self, id: usize) -> Result<&Node> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn alpha(&self, id: usize) -> f64 {
        self.nodes[id].alpha
    }

    pub fn position(&self, id: usize) -> Point {
        self.nodes[id].position()
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    pub fn find_edge(&self, tail: usize, head: usize) -> Option<usize> {
        self.out_edges
            .get(tail)?
            .iter()
            .copied()
            .find(|&k| self.edges[k].head == head)
    }

    pub fn max_alpha(&self) -> f64 {
        self.nodes.iter().map(|n| n.alpha).fold(0.0, f64::max)
    }

    /// Nodes reachable from the origin along directed edges.
    pub fn reachable_from_origin(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.origin];
        seen[self.origin] = true;
        while let Some(j) = stack.pop() {
            for &k in &self.out_edges[j] {
                let h = self.edges[k].head;
                if !seen[h] {
                    seen[h] = true;
                    stack.push(h);
                }
            }
        }
        seen
    }

    pub fn connects_origin_to_destination(&self) -> bool {
        self.reachable_from_origin()[self.destination]
    }

    /// Keeps the nodes flagged in `keep` (origin and destination are always
    /// kept), renumbering nodes and edges densely in their original order.
    pub fn induced(&self, keep: &[bool]) -> Result<Network> {
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if keep[i] || i == self.origin || i == self.destination {
                map[i] = nodes.len();
                nodes.push(Node {
                    id: nodes.len(),
                    ..node.clone()
                });
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| map[e.tail] != usize::MAX && map[e.head] != usize::MAX)
            .enumerate()
            .map(|(id, e)| Edge {
                id,
                tail: map[e.tail],
                head: map[e.head],
                length: e.length,
            })
            .collect();
        Network::new(nodes, edges, map[self.origin], map[self.destination])
    }

    /// Same topology with every risk multiplied by `factor`.
    pub fn scaled_alpha(&self, factor: f64) -> Result<Network> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| Node {
                alpha: n.alpha * factor,
                ..n.clone()
            })
            .collect();
        Network::new(nodes, self.edges.clone(), self.origin, self.destination)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = NetworkFile {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            origin: self.origin,
            destination: self.destination,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Network> {
        let file: NetworkFile = serde_json::from_str(text)?;
        Network::new(file.nodes, file.edges, file.origin, file.destination)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Network> {
        Network::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        Ok(crate::io::write_atomic(path.as_ref(), text.as_bytes())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Network {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(3.0, 0.0),
        ];
        Network::from_parts(&pts, &[0.0, 1.0, 0.0], &[(0, 1), (1, 2)], 0, 2).unwrap()
    }

    #[test]
    fn lengths_are_euclidean() {
        let net = chain();
        assert_eq!(net.edges()[1].length, 2.0);
        assert_eq!(net.out_edges(1), &[1]);
        assert_eq!(net.in_edges(1), &[0]);
        assert_eq!(net.find_edge(0, 1), Some(0));
        assert_eq!(net.find_edge(1, 0), None);
    }

    #[test]
    fn rejects_invariant_violations() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ];
        let a = [0.0, 1.0, 0.0];
        assert!(Network::from_parts(&pts, &a, &[(1, 1)], 0, 2).is_err());
        assert!(Network::from_parts(&pts, &a, &[(0, 1), (0, 1)], 0, 2).is_err());
        assert!(Network::from_parts(&pts, &a, &[(1, 0)], 0, 2).is_err());
        assert!(Network::from_parts(&pts, &a, &[(2, 1)], 0, 2).is_err());
        assert!(Network::from_parts(&pts, &a, &[(0, 5)], 0, 2).is_err());
        assert!(Network::from_parts(&pts, &a, &[], 1, 1).is_err());

        let mut bad_len = chain().to_json().unwrap();
        bad_len = bad_len.replace("\"length\": 2.0", "\"length\": 2.5");
        assert!(matches!(
            Network::from_json(&bad_len),
            Err(Error::InvalidNetwork(_))
        ));

        let nodes = vec![
            Node {
                id: 0,
                x: 0.0,
                y: 0.0,
                alpha: 0.5,
            },
            Node {
                id: 1,
                x: 1.0,
                y: 0.0,
                alpha: 0.0,
            },
        ];
        assert!(Network::new(nodes, vec![], 0, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let net = chain();
        let back = Network::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn induced_subnetwork_renumbers() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, -1.0),
            Point::new(2.0, 0.0),
        ];
        let net = Network::from_parts(
            &pts,
            &[0.0, 1.0, 2.0, 0.0],
            &[(0, 1), (0, 2), (1, 3), (2, 3)],
            0,
            3,
        )
        .unwrap();
        let sub = net.induced(&[true, false, true, true]).unwrap();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 2);
        assert_eq!(sub.destination(), 2);
        assert_eq!(sub.alpha(1), 2.0);
        assert!(sub.connects_origin_to_destination());
    }
}
