//! Independent reference computations for the integration tests. Nothing
//! here calls into the crate's solvers.

#![allow(dead_code)]

use std::collections::VecDeque;

use ambush_core::geometry::{Point, Rect};
use ambush_core::netgen::{build_network, Method, Network};
use ambush_core::riskmap::RiskField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves a square system by Gaussian elimination with partial pivoting.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Minimizes `c.y` over `{G y <= h, E y = f}` by enumerating every vertex.
/// Returns the optimal value and all optimal vertices. The problem must be
/// bounded and `E` must have full row rank.
pub fn vertex_enumeration(
    c: &[f64],
    g: &[Vec<f64>],
    h: &[f64],
    e: &[Vec<f64>],
    f: &[f64],
) -> Option<(f64, Vec<Vec<f64>>)> {
    let n = c.len();
    let k = n - e.len();
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    combinations(g.len(), k, &mut |active| {
        let mut rows: Vec<Vec<f64>> = e.to_vec();
        let mut rhs: Vec<f64> = f.to_vec();
        for &i in active {
            rows.push(g[i].clone());
            rhs.push(h[i]);
        }
        let Some(y) = solve_square(rows, rhs) else {
            return;
        };
        let feasible = g
            .iter()
            .zip(h)
            .all(|(row, &hi)| row.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() <= hi + 1e-9);
        if !feasible {
            return;
        }
        let val: f64 = c.iter().zip(&y).map(|(a, b)| a * b).sum();
        match &mut best {
            Some((v, verts)) if (val - *v).abs() <= 1e-10 * (1.0 + v.abs()) => verts.push(y),
            Some((v, _)) if val > *v => {}
            _ => best = Some((val, vec![y])),
        }
    });
    best
}

/// Standard-form LP `min c.x, A x = b, x >= 0` through [`vertex_enumeration`].
pub fn standard_form_optimum(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<(f64, Vec<Vec<f64>>)> {
    let n = c.len();
    let g: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { -1.0 } else { 0.0 }).collect())
        .collect();
    vertex_enumeration(c, &g, &vec![0.0; n], a, b)
}

/// Random feasible, bounded standard-form LP: `b = A x0` with `x0 >= 0`
/// and `c = A^T y + s` with `s > 0`.
pub fn random_lp(seed: u64, m: usize, n: usize) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect())
        .collect();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=2) as f64).collect();
    let b: Vec<f64> = a
        .iter()
        .map(|row| row.iter().zip(&x0).map(|(p, q)| p * q).sum())
        .collect();
    let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-2..=2) as f64).collect();
    let c: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| a[i][j] * y[i]).sum::<f64>() + rng.gen_range(1..=4) as f64 * 0.5)
        .collect();
    (c, a, b)
}

/// Maximum number of internally vertex-disjoint origin-destination paths,
/// by Edmonds-Karp on the node-split graph. `None` when a direct edge makes
/// the count unbounded.
pub fn vertex_disjoint_paths(net: &Network) -> Option<usize> {
    let n = net.node_count();
    let inf = n + 1;
    // node v splits into 2v (in) and 2v + 1 (out)
    let size = 2 * n;
    let mut cap = vec![vec![0usize; size]; size];
    for v in 0..n {
        let through = if v == net.origin() || v == net.destination() {
            inf
        } else {
            1
        };
        cap[2 * v][2 * v + 1] = through;
    }
    for e in net.edges() {
        cap[2 * e.tail + 1][2 * e.head] = inf;
    }
    let (s, t) = (2 * net.origin() + 1, 2 * net.destination());
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; size];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            break;
        }
        let mut bottleneck = usize::MAX;
        let mut v = t;
        while v != s {
            bottleneck = bottleneck.min(cap[prev[v]][v]);
            v = prev[v];
        }
        if bottleneck >= inf {
            return None;
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= bottleneck;
            cap[v][prev[v]] += bottleneck;
            v = prev[v];
        }
        flow += bottleneck;
    }
    Some(flow)
}

/// Every simple origin-destination path as a node list, or `None` once
/// more than `limit` exist.
pub fn simple_paths(net: &Network, limit: usize) -> Option<Vec<Vec<usize>>> {
    fn rec(net: &Network, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, limit: usize) -> bool {
        let at = *path.last().unwrap();
        if at == net.destination() {
            out.push(path.clone());
            return out.len() <= limit;
        }
        for &k in net.out_edges(at) {
            let head = net.edges()[k].head;
            if !path.contains(&head) {
                path.push(head);
                let ok = rec(net, path, out, limit);
                path.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    let mut out = Vec::new();
    rec(net, &mut vec![net.origin()], &mut out, limit).then_some(out)
}

pub fn path_length(net: &Network, path: &[usize]) -> f64 {
    path.windows(2)
        .map(|w| net.position(w[0]).distance(net.position(w[1])))
        .sum()
}

/// Value of the explicit game where Player 1 picks a path and Player 2 a
/// node, with loss `alpha_j` if the path visits `j`.
pub fn path_game_value(net: &Network, paths: &[Vec<usize>]) -> f64 {
    let np = paths.len();
    let nodes: Vec<usize> = (0..net.node_count())
        .filter(|&j| net.alpha(j) > 0.0 && paths.iter().any(|p| p.contains(&j)))
        .collect();
    if nodes.is_empty() {
        return 0.0;
    }
    // variables (x_1..x_np, t): minimize t
    let mut c = vec![0.0; np + 1];
    c[np] = 1.0;
    let mut g = Vec::new();
    let mut h = Vec::new();
    for &j in &nodes {
        let mut row: Vec<f64> = paths
            .iter()
            .map(|p| if p.contains(&j) { net.alpha(j) } else { 0.0 })
            .collect();
        row.push(-1.0);
        g.push(row);
        h.push(0.0);
    }
    for i in 0..np {
        let mut row = vec![0.0; np + 1];
        row[i] = -1.0;
        g.push(row);
        h.push(0.0);
    }
    let mut e = vec![1.0; np + 1];
    e[np] = 0.0;
    vertex_enumeration(&c, &g, &h, &[e], &[1.0])
        .expect("path game is feasible")
        .0
}

/// Small random directed network: mostly forward links with a few back
/// links, risks in [0.5, 2] with the occasional zero-risk node.
pub fn random_small_network(rng: &mut ChaCha8Rng) -> Network {
    loop {
        let n = rng.gen_range(5..=8);
        let positions: Vec<Point> = (0..n)
            .map(|i| {
                Point::new(
                    i as f64 + rng.gen_range(-0.3..0.3),
                    rng.gen_range(-2.0..2.0),
                )
            })
            .collect();
        let alphas: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    0.0
                } else {
                    (rng.gen_range(0.5..2.0f64) * 4.0).round() / 4.0
                }
            })
            .collect();
        let mut links = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if i != n - 1 && j != 0 && !(i == 0 && j == n - 1) && rng.gen_bool(0.45) {
                    links.push((i, j));
                }
                if i != 0 && j != n - 1 && rng.gen_bool(0.12) {
                    links.push((j, i));
                }
            }
        }
        let Ok(net) = Network::from_parts(&positions, &alphas, &links, 0, n - 1) else {
            continue;
        };
        if net.connects_origin_to_destination() {
            return net;
        }
    }
}

/// Method 3 roadmap over a uniform unit-risk field with a few random
/// rectangular obstacles. Endpoints sit away from the boundary so their
/// degree does not trivially bound the disjoint-path count.
pub fn uniform_network(seed: u64, budget: usize) -> Network {
    uniform_network_by(Method::GridDelaunay, seed, budget)
}

pub fn uniform_network_by(method: Method, seed: u64, budget: usize) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let obstacles: Vec<Rect> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let (x, y) = (rng.gen_range(30.0..60.0), rng.gen_range(30.0..60.0));
                Rect::new(
                    x,
                    y,
                    x + rng.gen_range(5.0..20.0),
                    y + rng.gen_range(5.0..20.0),
                )
            })
            .collect();
        let field = RiskField::constant(Rect::new(0.0, 0.0, 100.0, 100.0), 1.0, obstacles)
            .expect("valid field");
        if let Ok(net) = build_network(
            &field,
            method,
            budget,
            Point::new(rng.gen_range(10.0..35.0), rng.gen_range(10.0..35.0)),
            Point::new(rng.gen_range(65.0..90.0), rng.gen_range(65.0..90.0)),
            seed,
        ) {
            return net;
        }
    }
}

/// Largest relative amount by which any point lies strictly inside the
/// circumcircle of a triangle it is not a vertex of.
pub fn circumcircle_violation(points: &[Point], tris: &[[usize; 3]]) -> f64 {
    let mut worst: f64 = 0.0;
    for t in tris {
        let [a, b, c] = t.map(|i| points[i]);
        let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        let sa = a.x * a.x + a.y * a.y;
        let sb = b.x * b.x + b.y * b.y;
        let sc = c.x * c.x + c.y * c.y;
        let ux = (sa * (b.y - c.y) + sb * (c.y - a.y) + sc * (a.y - b.y)) / d;
        let uy = (sa * (c.x - b.x) + sb * (a.x - c.x) + sc * (b.x - a.x)) / d;
        let center = Point::new(ux, uy);
        let r2 = center.distance_sq(a);
        for (i, p) in points.iter().enumerate() {
            if t.contains(&i) {
                continue;
            }
            let inside = (r2 - center.distance_sq(*p)) / r2;
            worst = worst.max(inside);
        }
    }
    worst
}

/// Number of points on the convex hull boundary, collinear ones included.
pub fn hull_point_count(points: &[Point]) -> usize {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let cross =
        |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) < 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull.len()
}
