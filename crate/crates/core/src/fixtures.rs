//! Reference environments shared by tests, benchmarks and the CLI.

use crate::error::Result;
use crate::geometry::{Point, Rect};
use crate::netgen::{build_network, Method, Network};
use crate::riskmap::RiskField;

/// Symmetric 8-node, 13-edge double diamond with unit risk on every
/// internal node. Mirror image across `y = 1`.
///
/// ```text
///        1 ---------> 5
///      / | \        ^ | \
///     0  |  3 -> 4    |  7
///      \ | /        v | /
///        2 ---------> 6
/// ```
/// plus the cross edges `1 -> 6` and `2 -> 5`.
pub fn diamond() -> Network {
    let positions = [
        Point::new(0.0, 1.0),
        Point::new(1.0, 2.0),
        Point::new(1.0, 0.0),
        Point::new(1.5, 1.0),
        Point::new(2.5, 1.0),
        Point::new(3.0, 2.0),
        Point::new(3.0, 0.0),
        Point::new(4.0, 1.0),
    ];
    let alpha = [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0];
    Network::from_parts(&positions, &alpha, &DIAMOND_LINKS, 0, 7).expect("diamond is valid")
}

const DIAMOND_LINKS: [(usize, usize); 13] = [
    (0, 1),
    (0, 2),
    (1, 5),
    (2, 6),
    (1, 3),
    (2, 3),
    (3, 4),
    (4, 5),
    (4, 6),
    (5, 7),
    (6, 7),
    (1, 6),
    (2, 5),
];

/// Node permutation of the diamond's mirror symmetry.
pub const DIAMOND_NODE_MIRROR: [usize; 8] = [0, 2, 1, 3, 4, 6, 5, 7];

/// Edge permutation induced by [`DIAMOND_NODE_MIRROR`].
pub fn diamond_edge_mirror(net: &Network) -> Vec<usize> {
    net.edges()
        .iter()
        .map(|e| {
            net.find_edge(DIAMOND_NODE_MIRROR[e.tail], DIAMOND_NODE_MIRROR[e.head])
                .expect("mirror edge exists")
        })
        .collect()
}

pub const HILL_ORIGIN: Point = Point { x: 10.0, y: 90.0 };
pub const HILL_DESTINATION: Point = Point { x: 90.0, y: 10.0 };

/// Square domain of side 100 with a large obstacle shifted north-east of
/// the route's diagonal. The short corridor around it passes a high-risk
/// hill to the south-west; the long corridor to the north-east is nearly
/// flat.
pub fn hill_field() -> RiskField {
    let bounds = Rect::new(0.0, 0.0, 100.0, 100.0);
    let n = 21;
    let step = 100.0 / n as f64;
    let mut cells = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let x = (col as f64 + 0.5) * step;
            let y = (row as f64 + 0.5) * step;
            let hill =
                5.0 * (-((x - 32.0).powi(2) + (y - 32.0).powi(2)) / (2.0 * 11.0f64.powi(2))).exp();
            let ridge =
                0.4 * (-((x - 80.0).powi(2) + (y - 80.0).powi(2)) / (2.0 * 15.0f64.powi(2))).exp();
            cells.push(round6(1.0 + hill + ridge));
        }
    }
    let obstacle = Rect::new(40.0, 40.0, 74.0, 74.0);
    RiskField::new(bounds, n, n, cells, vec![obstacle]).expect("hill field is valid")
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Roadmap over [`hill_field`] between the standard endpoints.
pub fn hill_network(method: Method, node_budget: usize, seed: u64) -> Result<Network> {
    build_network(
        &hill_field(),
        method,
        node_budget,
        HILL_ORIGIN,
        HILL_DESTINATION,
        seed,
    )
}
