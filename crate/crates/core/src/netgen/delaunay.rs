//! Bowyer-Watson triangulation with a super-triangle.
//!
//! Orientation and in-circle tests use exact adaptive predicates. A point
//! lying exactly on a circumcircle does not invalidate that triangle, so
//! cocircular configurations resolve by insertion order (point index) and
//! the output is a function of the input ordering alone.

use std::collections::HashMap;

use robust::{incircle, orient2d, Coord};

use crate::error::{Error, Result};
use crate::geometry::Point;

fn coord(p: Point) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Counter-clockwise index triples over `points`.
pub fn delaunay(points: &[Point]) -> Result<Vec<[usize; 3]>> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "triangulation needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::Degenerate("non-finite point coordinate".into()));
    }
    if all_collinear(points) {
        return Err(Error::Degenerate("all points are collinear".into()));
    }

    let n = points.len();
    let (mut xmin, mut ymin, mut xmax, mut ymax) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in points {
        xmin = xmin.min(p.x);
        ymin = ymin.min(p.y);
        xmax = xmax.max(p.x);
        ymax = ymax.max(p.y);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let (cx, cy) = ((xmin + xmax) / 2.0, (ymin + ymax) / 2.0);
    // Far enough that hull triangles are not distorted for desk-scale inputs;
    // predicates are exact so the magnitude costs nothing in accuracy.
    let big = span * 1.0e5;
    let mut verts: Vec<Point> = points.to_vec();
    verts.push(Point::new(cx - 2.0 * big, cy - big));
    verts.push(Point::new(cx + 2.0 * big, cy - big));
    verts.push(Point::new(cx, cy + 2.0 * big));

    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    let mut bad = Vec::new();
    let mut boundary: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();

    for i in 0..n {
        let p = coord(verts[i]);
        bad.clear();
        for (t, tri) in tris.iter().enumerate() {
            let [a, b, c] = *tri;
            if incircle(coord(verts[a]), coord(verts[b]), coord(verts[c]), p) > 0.0 {
                bad.push(t);
            }
        }
        if bad.is_empty() {
            // duplicate of an inserted point
            continue;
        }

        boundary.clear();
        for &t in &bad {
            let [a, b, c] = tris[t];
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let key = (u.min(v), u.max(v));
                boundary
                    .entry(key)
                    .and_modify(|e| e.2 += 1)
                    .or_insert((u, v, 1));
            }
        }
        let mut rim: Vec<(usize, usize)> = boundary
            .values()
            .filter(|&&(_, _, count)| count == 1)
            .map(|&(u, v, _)| (u, v))
            .collect();
        rim.sort_unstable();

        for &t in bad.iter().rev() {
            tris.swap_remove(t);
        }
        for (u, v) in rim {
            tris.push([u, v, i]);
        }
    }

    let mut out: Vec<[usize; 3]> = tris
        .into_iter()
        .filter(|t| t.iter().all(|&v| v < n))
        .collect();
    out.sort_unstable();
    Ok(out)
}

fn all_collinear(points: &[Point]) -> bool {
    let a = points[0];
    let Some(b) = points.iter().copied().find(|p| *p != a) else {
        return true;
    };
    points
        .iter()
        .all(|&p| orient2d(coord(a), coord(b), coord(p)) == 0.0)
}

/// Undirected edges of a triangulation, as sorted index pairs.
pub fn triangulation_edges(tris: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = tris
        .iter()
        .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive check, independent of the predicates used above.
    fn violates_empty_circle(points: &[Point], tri: [usize; 3], tol: f64) -> Option<usize> {
        let [a, b, c] = tri.map(|i| points[i]);
        let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
        let sa = a.x * a.x + a.y * a.y;
        let sb = b.x * b.x + b.y * b.y;
        let sc = c.x * c.x + c.y * c.y;
        let ux = (sa * (b.y - c.y) + sb * (c.y - a.y) + sc * (a.y - b.y)) / d;
        let uy = (sa * (c.x - b.x) + sb * (a.x - c.x) + sc * (b.x - a.x)) / d;
        let center = Point::new(ux, uy);
        let r = center.distance(a);
        (0..points.len())
            .filter(|i| !tri.contains(i))
            .find(|&i| center.distance(points[i]) < r - tol * r.max(1.0))
    }

    #[test]
    fn single_triangle() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let tris = delaunay(&pts).unwrap();
        assert_eq!(tris.len(), 1);
        let mut t = tris[0];
        t.sort_unstable();
        assert_eq!(t, [0, 1, 2]);
    }

    #[test]
    fn unit_square_two_triangles() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let tris = delaunay(&pts).unwrap();
        assert_eq!(tris.len(), 2);
        let edges = triangulation_edges(&tris);
        assert_eq!(edges.len(), 5);
        let diagonals = edges
            .iter()
            .filter(|e| **e == (0, 2) || **e == (1, 3))
            .count();
        assert_eq!(diagonals, 1);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            delaunay(&[Point::new(0.0, 0.0), Point::new(1.0, 1.0)]),
            Err(Error::Degenerate(_))
        ));
        let line: Vec<Point> = (0..5)
            .map(|i| Point::new(i as f64, 2.0 * i as f64))
            .collect();
        assert!(matches!(delaunay(&line), Err(Error::Degenerate(_))));
    }

    #[test]
    fn random_points_empty_circumcircle() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let pts: Vec<Point> = (0..50)
            .map(|_| Point::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0)))
            .collect();
        let tris = delaunay(&pts).unwrap();
        for &t in &tris {
            assert_eq!(violates_empty_circle(&pts, t, 1e-9), None, "triangle {t:?}");
        }
        // general position: every point must be a vertex
        let used: std::collections::HashSet<usize> = tris.iter().flatten().copied().collect();
        assert_eq!(used.len(), pts.len());
    }

    #[test]
    fn lattice_is_planar_triangulation() {
        let pts: Vec<Point> = (0..6)
            .flat_map(|r| (0..7).map(move |c| Point::new(c as f64 * 0.3, r as f64 * 0.3)))
            .collect();
        let tris = delaunay(&pts).unwrap();
        // rectangular lattice: 2 triangles per cell
        assert_eq!(tris.len(), 2 * 5 * 6);
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for &[a, b, c] in &tris {
            for (u, v) in [(a, b), (b, c), (c, a)] {
                *count.entry((u.min(v), u.max(v))).or_default() += 1;
            }
        }
        let boundary = count.values().filter(|&&c| c == 1).count();
        assert!(count.values().all(|&c| c == 1 || c == 2));
        // perimeter of a 7x6 lattice has 2*(6+5) unit segments
        assert_eq!(boundary, 22);
        for &t in &tris {
            assert_eq!(violates_empty_circle(&pts, t, 1e-9), None);
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point> = (0..40)
            .map(|_| Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        assert_eq!(delaunay(&pts).unwrap(), delaunay(&pts).unwrap());
    }
}
