//! Small dense linear algebra used by the LP solvers.

use std::fmt;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr != 0.0 {
                axpy(yr, self.row(r), &mut out);
            }
        }
        out
    }

    /// Nonzero pattern by column.
    pub fn sparse_columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for (c, &v) in self.row(r).iter().enumerate() {
                if v != 0.0 {
                    cols[c].push((r, v));
                }
            }
        }
        cols
    }

    /// Keeps the listed rows, in order.
    pub fn select_rows(&self, keep: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(keep.len() * self.cols);
        for &r in keep {
            data.extend_from_slice(self.row(r));
        }
        Matrix {
            rows: keep.len(),
            cols: self.cols,
            data,
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// In-place lower Cholesky factor of a symmetric positive definite matrix.
/// Returns the failing pivot index when the matrix is not numerically PD.
pub fn cholesky_in_place(m: &mut Matrix) -> Result<(), usize> {
    let n = m.rows();
    for j in 0..n {
        let (head, tail) = m.data.split_at_mut(j * n);
        let row_j = &mut tail[..n];
        for k in 0..j {
            let row_k = &head[k * n..k * n + n];
            let s = row_j[k] - dot(&row_j[..k], &row_k[..k]);
            row_j[k] = s / row_k[k];
        }
        let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if !(d > 0.0) || !d.is_finite() {
            return Err(j);
        }
        row_j[j] = d.sqrt();
        for v in &mut row_j[j + 1..] {
            *v = 0.0;
        }
    }
    Ok(())
}

/// Cholesky factor that tolerates semidefinite input: a pivot at or below
/// `tiny` times the largest diagonal entry is replaced by a huge value, so
/// the matching solution component comes out as zero. Returns the number of
/// pivots replaced.
pub fn cholesky_semidefinite(m: &mut Matrix, tiny: f64) -> usize {
    const HUGE: f64 = 1e64;
    let n = m.rows();
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let mut skipped = 0;
    for j in 0..n {
        let (head, tail) = m.data.split_at_mut(j * n);
        let row_j = &mut tail[..n];
        for k in 0..j {
            let row_k = &head[k * n..k * n + n];
            let s = row_j[k] - dot(&row_j[..k], &row_k[..k]);
            row_j[k] = s / row_k[k];
        }
        let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if d > tiny * scale && d.is_finite() {
            row_j[j] = d.sqrt();
        } else {
            row_j[j] = HUGE;
            skipped += 1;
        }
        for v in &mut row_j[j + 1..] {
            *v = 0.0;
        }
    }
    skipped
}

/// Solves `L L^T x = b` given the factor from [`cholesky_in_place`].
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let s = y[i] - dot(&row[..i], &y[..i]);
        y[i] = s / row[i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn invert(m: &Matrix) -> Option<Matrix> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut a = m.clone();
    let mut inv = Matrix::identity(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))?;
        if a[(pivot, col)].abs() < 1e-13 {
            return None;
        }
        if pivot != col {
            swap_rows(&mut a, pivot, col);
            swap_rows(&mut inv, pivot, col);
        }
        let p = a[(col, col)];
        for v in a.row_mut(col) {
            *v /= p;
        }
        for v in inv.row_mut(col) {
            *v /= p;
        }
        let a_col = a.row(col).to_vec();
        let inv_col = inv.row(col).to_vec();
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f != 0.0 {
                axpy(-f, &a_col, a.row_mut(r));
                axpy(-f, &inv_col, inv.row_mut(r));
            }
        }
    }
    Some(inv)
}

fn swap_rows(m: &mut Matrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    let cols = m.cols;
    let (lo, hi) = (i.min(j), i.max(j));
    let (a, b) = m.data.split_at_mut(hi * cols);
    a[lo * cols..lo * cols + cols].swap_with_slice(&mut b[..cols]);
}

/// Indices of a maximal linearly independent subset of rows, scanning in
/// order. Works on the Gram matrix `M M^T` with a Cholesky that skips
/// pivots below `tol` times the row's squared norm.
pub fn independent_rows(m: &Matrix, tol: f64) -> Vec<usize> {
    let n = m.rows();
    let mut gram = Matrix::zeros(n, n);
    for col in m.sparse_columns() {
        for &(i, vi) in &col {
            for &(k, vk) in &col {
                gram[(i, k)] += vi * vk;
            }
        }
    }
    let mut keep = Vec::new();
    let mut kept = vec![false; n];
    for j in 0..n {
        let g_jj = gram[(j, j)];
        let (head, tail) = gram.data.split_at_mut(j * n);
        let row_j = &mut tail[..n];
        for k in 0..j {
            if !kept[k] {
                row_j[k] = 0.0;
                continue;
            }
            let row_k = &head[k * n..k * n + n];
            let s = row_j[k] - dot(&row_j[..k], &row_k[..k]);
            row_j[k] = s / row_k[k];
        }
        let d = row_j[j] - dot(&row_j[..j], &row_j[..j]);
        if g_jj > 0.0 && d > tol * g_jj {
            row_j[j] = d.sqrt();
            kept[j] = true;
            keep.push(j);
        } else {
            row_j[j] = 0.0;
        }
    }
    keep
}
