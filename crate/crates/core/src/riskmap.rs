//! Rectangular environment carrying a scalar risk field and rectangular
//! obstacles.
//!
//! Risk samples sit at cell centers of a regular grid covering the bounds.
//! Between centers the field is bilinear; outside the outermost ring of
//! centers it is held constant, so `risk_at` is continuous on the whole
//! closed domain.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};

const MAGIC: &str = "riskfield v1";

#[derive(Debug, Clone, PartialEq)]
pub struct RiskField {
    bounds: Rect,
    rows: usize,
    cols: usize,
    /// Row-major, row 0 at minimum y.
    cells: Vec<f64>,
    obstacles: Vec<Rect>,
}

impl RiskField {
    pub fn new(
        bounds: Rect,
        rows: usize,
        cols: usize,
        cells: Vec<f64>,
        obstacles: Vec<Rect>,
    ) -> Result<Self> {
        if !(bounds.xmin < bounds.xmax && bounds.ymin < bounds.ymax)
            || ![bounds.xmin, bounds.ymin, bounds.xmax, bounds.ymax]
                .iter()
                .all(|v| v.is_finite())
        {
            return Err(Error::InvalidField(format!("degenerate bounds {bounds:?}")));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidField("grid must be at least 1x1".into()));
        }
        if cells.len() != rows * cols {
            return Err(Error::InvalidField(format!(
                "expected {} samples for a {rows}x{cols} grid, got {}",
                rows * cols,
                cells.len()
            )));
        }
        if let Some(i) = cells.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidField(format!(
                "sample at row {}, column {} is {} (must be finite and non-negative)",
                i / cols,
                i % cols,
                cells[i]
            )));
        }
        for o in &obstacles {
            if !(o.xmin <= o.xmax && o.ymin <= o.ymax) || !o.intersects(&bounds) {
                return Err(Error::InvalidField(format!(
                    "obstacle {o:?} is empty or does not intersect the bounds"
                )));
            }
        }
        Ok(RiskField {
            bounds,
            rows,
            cols,
            cells,
            obstacles,
        })
    }

    /// A field holding `value` everywhere.
    pub fn constant(bounds: Rect, value: f64, obstacles: Vec<Rect>) -> Result<Self> {
        RiskField::new(bounds, 1, 1, vec![value], obstacles)
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn obstacles(&self) -> &[Rect] {
        &self.obstacles
    }

    pub fn sample(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    /// Cell extent along x and y.
    pub fn cell_size(&self) -> (f64, f64) {
        (
            self.bounds.width() / self.cols as f64,
            self.bounds.height() / self.rows as f64,
        )
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Point {
        let (dx, dy) = self.cell_size();
        Point::new(
            self.bounds.xmin + (col as f64 + 0.5) * dx,
            self.bounds.ymin + (row as f64 + 0.5) * dy,
        )
    }

    pub fn in_obstacle(&self, p: Point) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    fn check_inside(&self, p: Point) -> Result<()> {
        if self.bounds.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { x: p.x, y: p.y })
        }
    }

    /// Continuous grid coordinate along one axis, clamped to the span of cell
    /// centers. Returns the lower interpolation index and the weight.
    fn axis_coord(offset: f64, step: f64, n: usize) -> (usize, f64) {
        if n == 1 {
            return (0, 0.0);
        }
        let u = (offset / step - 0.5).clamp(0.0, (n - 1) as f64);
        let i = (u.floor() as usize).min(n - 2);
        (i, u - i as f64)
    }

    /// Bilinear interpolation of the field at `p`.
    pub fn risk_at(&self, p: Point) -> Result<f64> {
        self.check_inside(p)?;
        let (dx, dy) = self.cell_size();
        let (c0, tx) = Self::axis_coord(p.x - self.bounds.xmin, dx, self.cols);
        let (r0, ty) = Self::axis_coord(p.y - self.bounds.ymin, dy, self.rows);
        Ok(self.blend(r0, c0, tx, ty))
    }

    /// Interpolates with the patch whose lower-left center is `(row, col)`,
    /// without choosing the patch from `p`. Used to check agreement across
    /// patch boundaries.
    #[cfg(test)]
    pub(crate) fn interpolate_in_patch(&self, row: usize, col: usize, p: Point) -> f64 {
        let (dx, dy) = self.cell_size();
        let weight = |offset: f64, step: f64, i: usize, n: usize| {
            if n == 1 {
                0.0
            } else {
                ((offset / step - 0.5).clamp(0.0, (n - 1) as f64)) - i as f64
            }
        };
        let tx = weight(p.x - self.bounds.xmin, dx, col, self.cols);
        let ty = weight(p.y - self.bounds.ymin, dy, row, self.rows);
        self.blend(row, col, tx, ty)
    }

    fn blend(&self, r0: usize, c0: usize, tx: f64, ty: f64) -> f64 {
        let r1 = (r0 + 1).min(self.rows - 1);
        let c1 = (c0 + 1).min(self.cols - 1);
        let v00 = self.sample(r0, c0);
        let v01 = self.sample(r0, c1);
        let v10 = self.sample(r1, c0);
        let v11 = self.sample(r1, c1);
        let bottom = v00 + (v01 - v00) * tx;
        let top = v10 + (v11 - v10) * tx;
        bottom + (top - bottom) * ty
    }

    /// True iff the closed segment `[a, b]` misses every obstacle.
    pub fn segment_clear(&self, a: Point, b: Point) -> Result<bool> {
        self.check_inside(a)?;
        self.check_inside(b)?;
        // Fixed endpoint order keeps the answer symmetric under rounding.
        let (a, b) = if (a.x, a.y) <= (b.x, b.y) {
            (a, b)
        } else {
            (b, a)
        };
        Ok(!self.obstacles.iter().any(|o| o.hits_segment(a, b)))
    }

    /// Area of the bounds not covered by obstacles. Overlapping obstacles are
    /// counted once per obstacle, so this is a lower bound in that case.
    pub fn free_area(&self) -> f64 {
        let blocked: f64 = self
            .obstacles
            .iter()
            .filter_map(|o| o.clip(&self.bounds))
            .map(|o| o.area())
            .sum();
        (self.bounds.area() - blocked).max(0.0)
    }

    pub fn to_text(&self) -> String {
        let b = self.bounds;
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "bounds {} {} {} {}", b.xmin, b.ymin, b.xmax, b.ymax);
        let _ = writeln!(out, "grid {} {}", self.rows, self.cols);
        for row in self.cells.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        for o in &self.obstacles {
            let _ = writeln!(out, "obstacle {} {} {} {}", o.xmin, o.ymin, o.xmax, o.ymax);
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let err = |line: usize, column: usize, msg: String| Error::parse(path, line, column, msg);

        let (ln, header) = lines.next().ok_or_else(|| err(1, 1, "empty file".into()))?;
        if header.trim() != MAGIC {
            return Err(err(ln, 1, format!("expected header `{MAGIC}`")));
        }

        let (ln, line) = lines
            .next()
            .ok_or_else(|| err(2, 1, "missing bounds line".into()))?;
        let v = keyword_numbers(line, "bounds", 4).map_err(|(c, m)| err(ln, c, m))?;
        let bounds = Rect::new(v[0], v[1], v[2], v[3]);

        let (ln, line) = lines
            .next()
            .ok_or_else(|| err(3, 1, "missing grid line".into()))?;
        let v = keyword_numbers(line, "grid", 2).map_err(|(c, m)| err(ln, c, m))?;
        if v.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
            return Err(err(
                ln,
                1,
                "grid dimensions must be positive integers".into(),
            ));
        }
        let (rows, cols) = (v[0] as usize, v[1] as usize);

        let mut cells = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| err(4 + r, 1, format!("missing grid row {r}")))?;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(err(
                    ln,
                    1,
                    format!("row {r} has {} values, expected {cols}", fields.len()),
                ));
            }
            for (c, field) in fields.iter().enumerate() {
                let value: f64 = field.trim().parse().map_err(|_| {
                    err(
                        ln,
                        c + 1,
                        format!("non-numeric risk value `{}`", field.trim()),
                    )
                })?;
                if !value.is_finite() || value < 0.0 {
                    return Err(err(
                        ln,
                        c + 1,
                        format!("risk value {value} at row {r}, column {c} must be finite and non-negative"),
                    ));
                }
                cells.push(value);
            }
        }

        let mut obstacles = Vec::new();
        for (ln, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let v = keyword_numbers(line, "obstacle", 4).map_err(|(c, m)| err(ln, c, m))?;
            obstacles.push(Rect::new(v[0], v[1], v[2], v[3]));
        }

        RiskField::new(bounds, rows, cols, cells, obstacles)
    }
}

/// Parses `keyword n1 n2 ...`; errors carry the 1-based token column.
fn keyword_numbers(line: &str, keyword: &str, count: usize) -> Result<Vec<f64>, (usize, String)> {
    let mut tokens = line.split_whitespace();
    match tokens.next() {
        Some(k) if k == keyword => {}
        _ => return Err((1, format!("expected `{keyword}` line"))),
    }
    let values: Vec<&str> = tokens.collect();
    if values.len() != count {
        return Err((
            1,
            format!("`{keyword}` takes {count} numbers, got {}", values.len()),
        ));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, t)| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or((i + 2, format!("`{t}` is not a number")))
        })
        .collect()
}

pub fn load_risk_field(path: impl AsRef<Path>) -> Result<RiskField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    RiskField::parse(&text, path)
}

pub fn save_risk_field(field: &RiskField, path: impl AsRef<Path>) -> Result<()> {
    Ok(crate::io::write_atomic(
        path.as_ref(),
        field.to_text().as_bytes(),
    )?)
}
