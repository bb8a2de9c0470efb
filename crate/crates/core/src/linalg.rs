//! Dense complex matrices and the few factorizations the crate needs.

use num_complex::Complex64;

use crate::{Error, Result};

/// Dense row-major complex matrix. `normalization` records the scalar the
/// constructing ensemble applied to every entry (1 for generic matrices).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
    normalization: f64,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
            normalization: 1.0,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data, normalization: 1.0 }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data, normalization: 1.0 })
    }

    pub fn with_normalization(mut self, normalization: f64) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
            normalization: self.normalization * s,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Complex Hermitian matrix, stored in full with `H(i,j) = conj(H(j,i))`
/// holding exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Build from the upper triangle; `f(i, j)` is called for `i <= j` only
    /// and the imaginary part of diagonal values is dropped.
    pub fn from_upper<F: FnMut(usize, usize) -> Complex64>(n: usize, mut f: F) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(f(i, i).re, 0.0);
            for j in i + 1..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v.conj();
            }
        }
        Self { n, data }
    }

    /// Symmetrize a square matrix from its upper triangle.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape("Hermitian matrix must be square".into()));
        }
        Ok(Self::from_upper(m.rows(), |i, j| m[(i, j)]))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_upper(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub(crate) fn data(&self) -> &[Complex64] {
        &self.data
    }
}

/// Real symmetric matrix stored in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_upper(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    pub fn to_hermitian(&self) -> HermitianMatrix {
        HermitianMatrix::from_upper(self.n, |i, j| Complex64::new(self.get(i, j), 0.0))
    }

    pub(crate) fn data(&self) -> &[f64] {
        &self.data
    }
}

/// `log |det M|` by LU with partial pivoting; `-inf` for an exactly
/// singular pivot.
pub fn log_abs_det(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Shape("determinant of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let mut logdet = 0.0;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
        }
        let pivot = a[k * n + k];
        logdet += pivot.norm().ln();
        for i in k + 1..n {
            let factor = a[i * n + k] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                let akj = a[k * n + j];
                a[i * n + j] -= factor * akj;
            }
        }
    }
    Ok(logdet)
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Shape("inverse of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut a = m.as_slice().to_vec();
    let mut inv = ComplexMatrix::identity(n);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
            .unwrap_or(k);
        if a[p * n + k].norm() == 0.0 {
            return Err(Error::Singular(format!("zero pivot in column {k}")));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
                let t = inv[(k, j)];
                inv[(k, j)] = inv[(p, j)];
                inv[(p, j)] = t;
            }
        }
        let piv = a[k * n + k].inv();
        for j in 0..n {
            a[k * n + j] *= piv;
            inv[(k, j)] *= piv;
        }
        for i in 0..n {
            let f = a[i * n + k];
            if i == k || f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let akj = a[k * n + j];
                a[i * n + j] -= f * akj;
                let ikj = inv[(k, j)];
                inv[(i, j)] -= f * ikj;
            }
        }
    }
    Ok(inv)
}

/// Euclidean distance from `x` to the span of the listed columns of `a`,
/// via Householder QR of those columns.
pub fn distance_to_column_span(a: &ComplexMatrix, cols: &[usize], x: &[Complex64]) -> Result<f64> {
    let n = a.rows();
    if x.len() != n {
        return Err(Error::Shape("vector length differs from row count".into()));
    }
    let k = cols.len();
    // column-major working copy
    let mut b: Vec<Vec<Complex64>> = cols.iter().map(|&c| a.column(c)).collect();
    let mut y = x.to_vec();
    for j in 0..k.min(n) {
        let norm: f64 = b[j][j..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Singular("basis columns are linearly dependent".into()));
        }
        let x0 = b[j][j];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        // v = b_j[j..] + phase*norm*e_1, reflector H = I - 2 v v*/(v*v)
        let mut v: Vec<Complex64> = b[j][j..].to_vec();
        v[0] += phase * norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let apply = |col: &mut [Complex64]| {
            let dot: Complex64 = v.iter().zip(col.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
            let f = dot * (2.0 / vnorm2);
            for (ci, vi) in col.iter_mut().zip(&v) {
                *ci -= f * vi;
            }
        };
        for col in b.iter_mut().skip(j) {
            apply(&mut col[j..]);
        }
        apply(&mut y[j..]);
    }
    Ok(y[k.min(n)..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}
