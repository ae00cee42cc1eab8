//! Small dense linear algebra: determinants, minors, cofactors and the
//! Cauchy–Binet minor sum.
//!
//! Matrices are row-major and, when they hold a Jacobian, row `i` is the
//! gradient of component `i`. Indices are zero-based throughout.

use crate::error::{Error, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// Square matrix of dimension `2..=MAX_DIM` with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::Argument(format!("square matrix dimension {n} outside 2..={MAX_DIM}")));
        }
        if data.len() != n * n {
            return Err(Error::Argument(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("matrix entries must be finite".into()));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Argument("rows must all have length equal to the row count".into()));
        }
        Self::new(n, rows.concat())
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::new(n, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self { n, data }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n {
            self.data.swap(a * self.n + j, b * self.n + j);
        }
    }
}

/// Rectangular matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RectMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Argument("rectangular matrix needs at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Argument(format!("expected {} entries, got {}", rows * cols, data.len())));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Argument("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    /// Drops one column. The result is empty when `cols == 1`.
    fn without_col(&self, col: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows * (self.cols - 1));
        for i in 0..self.rows {
            for j in (0..self.cols).filter(|&j| j != col) {
                out.push(self.get(i, j));
            }
        }
        out
    }

    fn without_row(&self, row: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity((self.rows - 1) * self.cols);
        for i in (0..self.rows).filter(|&i| i != row) {
            out.extend_from_slice(&self.data[i * self.cols..(i + 1) * self.cols]);
        }
        out
    }

    pub fn matmul(&self, rhs: &RectMatrix) -> Result<RectMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Argument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut data = vec![0.0; self.rows * rhs.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..rhs.cols {
                    data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        RectMatrix::new(self.rows, rhs.cols, data)
    }
}

/// Determinant of an `n × n` row-major block, `n` in `0..=MAX_DIM`.
///
/// Laplace expansion along the first row for `n <= 4`, partial-pivot LU above.
/// The empty matrix has determinant 1.
pub fn det_row_major(n: usize, a: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => 1.0,
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        4 => {
            let mut acc = 0.0;
            let mut sub = [0.0; 9];
            for col in 0..4 {
                let mut k = 0;
                for i in 1..4 {
                    for j in (0..4).filter(|&j| j != col) {
                        sub[k] = a[i * 4 + j];
                        k += 1;
                    }
                }
                let term = a[col] * det_row_major(3, &sub);
                if col % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
        _ => det_lu_row_major(n, a),
    }
}

/// Determinant by LU with partial pivoting, for any size.
///
/// Returns exactly 0 when a pivot column is exactly zero.
pub fn det_lu_row_major(n: usize, a: &[f64]) -> f64 {
    let mut m = a.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs())).unwrap_or(k);
        let pivot = m[p * n + k];
        if pivot == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                m.swap(p * n + j, k * n + j);
            }
            det = -det;
        }
        det *= pivot;
        for i in k + 1..n {
            let factor = m[i * n + k] / pivot;
            if factor != 0.0 {
                for j in k + 1..n {
                    m[i * n + j] -= factor * m[k * n + j];
                }
            }
        }
    }
    det
}

/// Row-major submatrix of an `n × n` block with one row and one column removed.
pub fn submatrix(n: usize, a: &[f64], drop_row: usize, drop_col: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != drop_row) {
        for j in (0..n).filter(|&j| j != drop_col) {
            out.push(a[i * n + j]);
        }
    }
    out
}

/// Full cofactor matrix `C[i][j] = (-1)^{i+j} det(a without row i, col j)`.
pub fn cofactor_matrix_row_major(n: usize, a: &[f64]) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let minor = det_row_major(n - 1, &submatrix(n, a, i, j));
            out[i * n + j] = if (i + j) % 2 == 0 { minor } else { -minor };
        }
    }
    out
}

pub fn determinant(m: &SquareMatrix) -> f64 {
    det_row_major(m.n, &m.data)
}

/// LU route regardless of size; used where an independent path is wanted.
pub fn determinant_lu(m: &SquareMatrix) -> f64 {
    det_lu_row_major(m.n, &m.data)
}

/// Determinant of `m` with row `drop_row` and column `drop_col` removed.
pub fn minor_det(m: &SquareMatrix, drop_row: usize, drop_col: usize) -> Result<f64> {
    if drop_row >= m.n || drop_col >= m.n {
        return Err(Error::Argument(format!(
            "minor index ({drop_row}, {drop_col}) out of range for dimension {}",
            m.n
        )));
    }
    Ok(det_row_major(m.n - 1, &submatrix(m.n, &m.data, drop_row, drop_col)))
}

/// Signed cofactors of the first row: `c[i] = (-1)^i minor(0, i)`.
pub fn first_row_cofactors(m: &SquareMatrix) -> Vec<f64> {
    (0..m.n)
        .map(|i| {
            let minor = det_row_major(m.n - 1, &submatrix(m.n, &m.data, 0, i));
            if i % 2 == 0 {
                minor
            } else {
                -minor
            }
        })
        .collect()
}

/// Both sides of the Cauchy–Binet identity for a `(n-1) × n` by `n × (n-1)` product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyBinet {
    /// `Σ_i (-1)^i det(wide \ col i) · (-1)^i det(tall \ row i)`.
    pub minor_sum: f64,
    /// `det(wide · tall)`.
    pub product_det: f64,
}

impl CauchyBinet {
    pub fn gap(&self) -> f64 {
        (self.minor_sum - self.product_det).abs()
    }
}

pub fn cauchy_binet_product(wide: &RectMatrix, tall: &RectMatrix) -> Result<CauchyBinet> {
    let n = wide.cols;
    if wide.rows + 1 != n || tall.rows != n || tall.cols + 1 != n {
        return Err(Error::Argument(format!(
            "Cauchy–Binet needs (n-1)x n and n x(n-1) factors, got {}x{} and {}x{}",
            wide.rows, wide.cols, tall.rows, tall.cols
        )));
    }
    let k = n - 1;
    let mut minor_sum = 0.0;
    for i in 0..n {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let a = sign * det_row_major(k, &wide.without_col(i));
        let b = sign * det_row_major(k, &tall.without_row(i));
        minor_sum += a * b;
    }
    let product = wide.matmul(tall)?;
    let product_det = det_row_major(k, &product.data);
    Ok(CauchyBinet { minor_sum, product_det })
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(n: usize, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != n * n || b.len() != n {
        return Err(Error::Argument("solve: shape mismatch".into()));
    }
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs())).unwrap_or(k);
        if m[p * n + k] == 0.0 {
            return Err(Error::Argument("solve: singular matrix".into()));
        }
        if p != k {
            for j in 0..n {
                m.swap(p * n + j, k * n + j);
            }
            x.swap(p, k);
        }
        for i in k + 1..n {
            let factor = m[i * n + k] / m[k * n + k];
            for j in k..n {
                m[i * n + j] -= factor * m[k * n + j];
            }
            x[i] -= factor * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut acc = x[k];
        for j in k + 1..n {
            acc -= m[k * n + j] * x[j];
        }
        x[k] = acc / m[k * n + k];
    }
    Ok(x)
}

/// Numerical rank by Gaussian elimination with complete pivoting.
///
/// A pivot counts when its magnitude exceeds `rel_tol` times the largest entry.
pub fn rank(m: &SquareMatrix, rel_tol: f64) -> usize {
    let n = m.n;
    let mut a = m.data.clone();
    let scale = a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut r = 0;
    for k in 0..n {
        let (mut bi, mut bj, mut best) = (k, k, 0.0);
        for i in k..n {
            for j in k..n {
                if a[i * n + j].abs() > best {
                    best = a[i * n + j].abs();
                    bi = i;
                    bj = j;
                }
            }
        }
        if best <= rel_tol * scale {
            break;
        }
        for j in 0..n {
            a.swap(bi * n + j, k * n + j);
        }
        for i in 0..n {
            a.swap(i * n + bj, i * n + k);
        }
        for i in k + 1..n {
            let factor = a[i * n + k] / a[k * n + k];
            for j in k..n {
                a[i * n + j] -= factor * a[k * n + j];
            }
        }
        r += 1;
    }
    r
}
