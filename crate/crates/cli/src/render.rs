//! Hand-written SVG and Graphviz output.

use std::fmt::Write;

use ambush_core::game::mean_direction;
use ambush_core::{Network, Rect, RiskField};

const WIDTH: f64 = 800.0;
const MASS_EPS: f64 = 1e-9;

struct Frame {
    world: Rect,
    scale: f64,
}

impl Frame {
    fn new(net: &Network, field: Option<&RiskField>) -> Frame {
        let world = match field {
            Some(f) => f.bounds(),
            None => {
                let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) =
                    (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
                for n in net.nodes() {
                    lo_x = lo_x.min(n.x);
                    lo_y = lo_y.min(n.y);
                    hi_x = hi_x.max(n.x);
                    hi_y = hi_y.max(n.y);
                }
                let pad = 0.05 * (hi_x - lo_x).max(hi_y - lo_y).max(1.0);
                Rect::new(lo_x - pad, lo_y - pad, hi_x + pad, hi_y + pad)
            }
        };
        Frame {
            world,
            scale: WIDTH / world.width(),
        }
    }

    fn height(&self) -> f64 {
        self.world.height() * self.scale
    }

    fn x(&self, x: f64) -> f64 {
        (x - self.world.xmin) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        (self.world.ymax - y) * self.scale
    }

    fn open(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {WIDTH:.0} {h:.2}\">\n",
            h = self.height()
        )
    }

    /// Grayscale risk cells, darker is riskier, and obstacles in black.
    fn background(&self, out: &mut String, field: Option<&RiskField>) {
        let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let Some(f) = field else { return };
        let (lo, hi) = f
            .cells()
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        let (cw, ch) = f.cell_size();
        for row in 0..f.rows() {
            for col in 0..f.cols() {
                let t = if hi > lo {
                    (f.sample(row, col) - lo) / (hi - lo)
                } else {
                    0.0
                };
                let g = (255.0 - 160.0 * t).round() as u8;
                let x0 = f.bounds().xmin + col as f64 * cw;
                let y1 = f.bounds().ymin + (row + 1) as f64 * ch;
                let _ = writeln!(
                    out,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({g},{g},{g})\"/>",
                    self.x(x0),
                    self.y(y1),
                    cw * self.scale,
                    ch * self.scale
                );
            }
        }
        for o in f.obstacles() {
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#202020\"/>",
                self.x(o.xmin),
                self.y(o.ymax),
                o.width() * self.scale,
                o.height() * self.scale
            );
        }
    }

    fn nodes(&self, out: &mut String, net: &Network) {
        for n in net.nodes() {
            let (r, fill) = if n.id == net.origin() {
                (5.0, "#1a9850")
            } else if n.id == net.destination() {
                (5.0, "#2166ac")
            } else {
                (1.5, "#555555")
            };
            let _ = writeln!(
                out,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r}\" fill=\"{fill}\"/>",
                self.x(n.x),
                self.y(n.y)
            );
        }
    }
}

/// Edge strategy plot: one line per edge carrying mass, width proportional
/// to its probability.
pub fn strategy_svg(net: &Network, p: &[f64], field: Option<&RiskField>) -> String {
    let frame = Frame::new(net, field);
    let mut out = frame.open();
    frame.background(&mut out, field);
    for e in net.edges() {
        if p[e.id] <= MASS_EPS {
            continue;
        }
        let (a, b) = (net.position(e.tail), net.position(e.head));
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#d73027\" stroke-opacity=\"0.85\" stroke-width=\"{:.3}\"/>",
            frame.x(a.x),
            frame.y(a.y),
            frame.x(b.x),
            frame.y(b.y),
            0.4 + 8.0 * p[e.id]
        );
    }
    frame.nodes(&mut out, net);
    out.push_str("</svg>\n");
    out
}

/// One arrow per node along its probability-weighted mean direction.
pub fn direction_svg(net: &Network, p: &[f64], field: Option<&RiskField>) -> String {
    let frame = Frame::new(net, field);
    let mut out = frame.open();
    frame.background(&mut out, field);
    let mut lengths: Vec<f64> = net.edges().iter().map(|e| e.length).collect();
    lengths.sort_by(f64::total_cmp);
    let reach = 0.8 * lengths.get(lengths.len() / 2).copied().unwrap_or(1.0) * frame.scale;
    let dirs: Vec<_> = net
        .nodes()
        .iter()
        .filter_map(|n| mean_direction(net, p, n.id).ok().map(|d| (n, d)))
        .collect();
    // arrow length relative to the strongest node
    let top = dirs.iter().map(|(_, d)| d.x.hypot(d.y)).fold(0.0, f64::max);
    for (n, d) in dirs {
        let norm = d.x.hypot(d.y);
        if norm <= MASS_EPS {
            continue;
        }
        let (x0, y0) = (frame.x(n.x), frame.y(n.y));
        let (ux, uy) = (d.x / norm, -d.y / norm);
        let len = reach * norm / top;
        let (x1, y1) = (x0 + ux * len, y0 + uy * len);
        let head = (len * 0.35).min(8.0);
        let (bx, by) = (x1 - ux * head, y1 - uy * head);
        let (px, py) = (-uy * head * 0.5, ux * head * 0.5);
        let _ = writeln!(
            out,
            "<path d=\"M{x0:.2} {y0:.2}L{bx:.2} {by:.2}\" stroke=\"#b2182b\" stroke-width=\"1.2\"/>"
        );
        let _ = writeln!(
            out,
            "<polygon points=\"{x1:.2},{y1:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"#b2182b\"/>",
            bx + px,
            by + py,
            bx - px,
            by - py
        );
    }
    frame.nodes(&mut out, net);
    out.push_str("</svg>\n");
    out
}

/// Graphviz digraph with `p` on every edge label.
pub fn strategy_dot(net: &Network, p: &[f64]) -> String {
    let mut out = String::from("digraph strategy {\n  node [shape=circle, fontsize=9];\n");
    for n in net.nodes() {
        let _ = writeln!(
            out,
            "  {} [pos=\"{},{}!\", label=\"{}\\nα={}\"];",
            n.id, n.x, n.y, n.id, n.alpha
        );
    }
    for e in net.edges() {
        let v = p[e.id];
        let style = if v > MASS_EPS {
            format!("penwidth={:.3}", 0.5 + 6.0 * v)
        } else {
            "style=dotted".to_string()
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label=\"{v:.6}\", {style}];",
            e.tail, e.head
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ambush_core::fixtures::diamond;

    #[test]
    fn one_line_per_loaded_edge() {
        let net = diamond();
        let mut p = vec![0.0; net.edge_count()];
        for k in [0, 2, 9] {
            p[k] = 1.0;
        }
        let svg = strategy_svg(&net, &p, None);
        assert_eq!(svg.matches("<line").count(), 3);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn dot_labels_every_edge() {
        let net = diamond();
        let p = vec![0.25; net.edge_count()];
        let dot = strategy_dot(&net, &p);
        assert_eq!(dot.matches("label=\"0.250000\"").count(), net.edge_count());
    }

    #[test]
    fn arrows_skip_sinks() {
        let net = diamond();
        let p = vec![0.5; net.edge_count()];
        let svg = direction_svg(&net, &p, None);
        // every node but the destination has outgoing mass
        assert_eq!(svg.matches("<polygon").count(), net.node_count() - 1);
    }
}
