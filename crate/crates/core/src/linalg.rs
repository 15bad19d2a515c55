//! Dense linear-algebra kernels used by the interpolation algorithms.
//!
//! Everything here works on [`DenseMatrix`], a column-major `f64` matrix. The
//! routines are small and self-contained: LU with partial pivoting, Householder
//! QR, back-substitution, and a one-sided Jacobi SVD used for condition numbers.

use std::fmt;

use thiserror::Error;

/// Relative pivot threshold for [`solve_linear`], scaled by the largest column norm.
pub const SINGULAR_PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("expected a {expected} matrix, got {rows}x{cols}")]
    Shape {
        expected: String,
        rows: usize,
        cols: usize,
    },
    #[error("data length {len} does not match {rows}x{cols}")]
    DataLength {
        len: usize,
        rows: usize,
        cols: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular to working precision: pivot {pivot:e} at step {index}")]
    Singular { pivot: f64, index: usize },
    #[error("triangular factor has a zero diagonal entry at index {index}")]
    SingularTriangular { index: usize },
}

/// Column-major dense matrix of finite `f64` values.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.5e} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Builds a matrix from column-major data, rejecting non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DataLength {
                len: data.len(),
                rows,
                cols,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: pos % rows.max(1),
                col: pos / rows.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self, LinalgError> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i + i * n] = d;
        }
        Self::new(n, n, data)
    }

    /// Builds a matrix from row-major nested slices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::Shape {
                expected: format!("rectangular {r}x{c}"),
                rows: r,
                cols: c,
            });
        }
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, LinalgError> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// A single-column matrix.
    pub fn column(values: &[f64]) -> Result<Self, LinalgError> {
        Self::new(values.len(), 1, values.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major backing storage.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.rows] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub(crate) fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.data[j + i * self.cols] = self.data[i + j * self.rows];
            }
        }
        t
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.cols);
        Self::from_raw(
            self.rows,
            end - start,
            self.data[start * self.rows..end * self.rows].to_vec(),
        )
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape {
                expected: format!("{}xK", self.cols),
                rows: other.rows,
                cols: other.cols,
            });
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = Self::zeros(m, n);
        for j in 0..n {
            let dst = &mut out.data[j * m..(j + 1) * m];
            for p in 0..k {
                let b = other.data[p + j * k];
                if b == 0.0 {
                    continue;
                }
                let src = &self.data[p * m..(p + 1) * m];
                for (d, &a) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::Shape {
                expected: format!("vector of length {}", self.cols),
                rows: x.len(),
                cols: 1,
            });
        }
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.col(j)) {
                *o += a * xj;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * c).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        Ok(Self::from_raw(
            self.rows,
            self.cols,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::Shape {
                expected: format!("{}x{}", self.rows, self.cols),
                rows: other.rows,
                cols: other.cols,
            });
        }
        Ok(())
    }
}

/// Result of [`qr_decompose`]: `q` is `m x m` orthogonal, `r` is `m x n`.
#[derive(Debug, Clone)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Solves `a x = b` by LU factorization with partial pivoting.
pub fn solve_linear(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let n = a.rows;
    if !a.is_square() {
        return Err(LinalgError::Shape {
            expected: "square".into(),
            rows: a.rows,
            cols: a.cols,
        });
    }
    if b.rows != n {
        return Err(LinalgError::Shape {
            expected: format!("{n}xM right-hand side"),
            rows: b.rows,
            cols: b.cols,
        });
    }
    let max_col_norm = (0..n)
        .map(|j| a.col(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let threshold = SINGULAR_PIVOT_TOL * max_col_norm;

    let mut lu = a.data.clone();
    let mut x = b.data.clone();
    let m = b.cols;

    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lu[i + k * n]))
            .fold((k, 0.0_f64), |best, (i, v)| {
                if v.abs() > best.1.abs() {
                    (i, v)
                } else {
                    best
                }
            });
        if pivot.abs() <= threshold || pivot == 0.0 {
            return Err(LinalgError::Singular {
                pivot: pivot.abs(),
                index: k,
            });
        }
        if p != k {
            for j in 0..n {
                lu.swap(k + j * n, p + j * n);
            }
            for j in 0..m {
                x.swap(k + j * n, p + j * n);
            }
        }
        for i in k + 1..n {
            let l = lu[i + k * n] / pivot;
            lu[i + k * n] = l;
            if l == 0.0 {
                continue;
            }
            for j in k + 1..n {
                lu[i + j * n] -= l * lu[k + j * n];
            }
        }
    }

    for j in 0..m {
        let col = &mut x[j * n..(j + 1) * n];
        for k in 0..n {
            let v = col[k];
            if v != 0.0 {
                for i in k + 1..n {
                    col[i] -= lu[i + k * n] * v;
                }
            }
        }
        for k in (0..n).rev() {
            col[k] /= lu[k + k * n];
            let v = col[k];
            for i in 0..k {
                col[i] -= lu[i + k * n] * v;
            }
        }
    }
    Ok(DenseMatrix::from_raw(n, m, x))
}

/// Householder QR with a nonnegative diagonal in `r`. Works for wide and tall input.
pub fn qr_decompose(a: &DenseMatrix) -> Result<QrFactors, LinalgError> {
    let (m, n) = a.shape();
    if let Some(pos) = a.data.iter().position(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite {
            row: pos % m.max(1),
            col: pos / m.max(1),
        });
    }
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m);
    let steps = m.min(n);
    let mut v = vec![0.0; m];

    for k in 0..steps {
        let norm = (k..m).map(|i| r.get(i, k).powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r.get(k, k);
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        v[k] = x0 - alpha;
        for (i, vi) in v.iter_mut().enumerate().take(m).skip(k + 1) {
            *vi = r.get(i, k);
        }
        let vnorm2: f64 = (k..m).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        for j in k..n {
            let col = r.col_mut(j);
            let dot: f64 = (k..m).map(|i| v[i] * col[i]).sum();
            let s = beta * dot;
            for i in k..m {
                col[i] -= s * v[i];
            }
        }
        // Q <- Q H_k, acting on columns k..m of every row.
        for i in 0..m {
            let dot: f64 = (k..m).map(|p| q.get(i, p) * v[p]).sum();
            let s = beta * dot;
            for (p, &vp) in v.iter().enumerate().take(m).skip(k) {
                let val = q.get(i, p) - s * vp;
                q.set(i, p, val);
            }
        }
        for i in k + 1..m {
            r.set(i, k, 0.0);
        }
    }

    for k in 0..steps {
        if r.get(k, k) < 0.0 {
            for j in 0..n {
                let val = -r.get(k, j);
                r.set(k, j, val);
            }
            for val in q.col_mut(k) {
                *val = -*val;
            }
        }
    }
    Ok(QrFactors { q, r })
}

/// Back-substitution for `r1 x = b` with `r1` upper triangular.
pub fn solve_upper_triangular(
    r1: &DenseMatrix,
    b: &DenseMatrix,
) -> Result<DenseMatrix, LinalgError> {
    let n = r1.rows;
    if !r1.is_square() {
        return Err(LinalgError::Shape {
            expected: "square upper-triangular".into(),
            rows: r1.rows,
            cols: r1.cols,
        });
    }
    if b.rows != n {
        return Err(LinalgError::Shape {
            expected: format!("{n}xM right-hand side"),
            rows: b.rows,
            cols: b.cols,
        });
    }
    if let Some(index) = (0..n).find(|&i| r1.get(i, i) == 0.0) {
        return Err(LinalgError::SingularTriangular { index });
    }
    let mut x = b.clone();
    for j in 0..b.cols {
        let col = x.col_mut(j);
        for k in (0..n).rev() {
            col[k] /= r1.get(k, k);
            let v = col[k];
            for (i, ci) in col.iter_mut().enumerate().take(k) {
                *ci -= r1.get(i, k) * v;
            }
        }
    }
    Ok(x)
}

/// Singular values in descending order via one-sided Jacobi rotations.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    singular_values_with(a, 80, f64::EPSILON)
}

pub(crate) fn singular_values_with(a: &DenseMatrix, max_sweeps: usize, tol: f64) -> Vec<f64> {
    // Work on whichever orientation has fewer columns.
    let mut u = if a.rows >= a.cols {
        a.clone()
    } else {
        a.transpose()
    };
    let (m, n) = u.shape();
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (u.data[i + p * m], u.data[i + q * m]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (u.data[i + p * m], u.data[i + q * m]);
                    u.data[i + p * m] = c * x - s * y;
                    u.data[i + q * m] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| u.col(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// 2-norm condition number `sigma_max / sigma_min`; `+inf` when `sigma_min` vanishes.
pub fn condition_number(a: &DenseMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > f64::MIN_POSITIVE => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn hadamard(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    a.check_same_shape(b)?;
    Ok(DenseMatrix::from_raw(
        a.rows,
        a.cols,
        a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    ))
}
