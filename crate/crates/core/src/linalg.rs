//! Small dense linear algebra: row-major matrices, symmetric spectra, Cholesky solves.

use nalgebra::DMatrix;

use crate::error::{Result, UotError};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(UotError::dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(UotError::dimension(format!(
                    "row {r} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
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
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(self.row(i), v))
            .collect()
    }

    /// `vᵀ M v` for square `M`.
    pub fn quad_form(&self, v: &[T]) -> T {
        dot(v, &self.mul_vec(v))
    }

    pub fn max_entry(&self) -> Option<T> {
        self.data.iter().copied().reduce(T::max)
    }

    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// The decomposition runs in `f64` through nalgebra regardless of `T`.
pub fn symmetric_eigenvalues<T: Scalar>(m: &DenseMatrix<T>) -> Result<Vec<T>> {
    if m.rows() != m.cols() {
        return Err(UotError::dimension("eigenvalues need a square matrix"));
    }
    let n = m.rows();
    let mat = DMatrix::<f64>::from_fn(n, n, |i, j| m.get(i, j).to_f64_lossy());
    let eig = mat.symmetric_eigenvalues();
    let mut vals: Vec<f64> = eig.iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(UotError::numerical("non-finite eigenvalue"));
    }
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals.into_iter().map(T::lit).collect())
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    lower: Vec<T>,
    /// Diagonal shift that was needed for the factorization to succeed.
    pub jitter: T,
}

impl<T: Scalar> Cholesky<T> {
    /// Plain factorization of `m + shift·I`; `None` if a pivot is not strictly positive.
    pub fn factor_shifted(m: &DenseMatrix<T>, shift: T) -> Option<Self> {
        let n = m.rows();
        let mut l = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = m.get(i, j);
                if i == j {
                    sum += shift;
                }
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(sum > T::zero()) || !sum.is_finite() {
                        return None;
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(Cholesky {
            n,
            lower: l,
            jitter: shift,
        })
    }

    /// Factorization with diagonal jitter escalation: none, then 1e-10, ×10 up to 1e-6.
    pub fn factor_with_jitter(m: &DenseMatrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(UotError::dimension("Cholesky needs a square matrix"));
        }
        if let Some(c) = Self::factor_shifted(m, T::zero()) {
            return Ok(c);
        }
        let mut shift = 1e-10;
        while shift <= 1e-6 * 1.000_001 {
            if let Some(c) = Self::factor_shifted(m, T::lit(shift)) {
                return Ok(c);
            }
            shift *= 10.0;
        }
        Err(UotError::numerical(
            "matrix is not positive definite even with 1e-6 diagonal jitter",
        ))
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        y
    }

    /// `bᵀ M⁻¹ b` via a triangular solve, without forming the inverse.
    pub fn inverse_quad_form(&self, b: &[T]) -> T {
        let n = self.n;
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        dot(&y, &y)
    }
}
