//! Dense vectors and column-major matrices.
//!
//! Vectors are plain `Vec<f64>`; the helpers here operate on slices so that
//! columns of a [`DenseMatrix`] can be used directly.

use crate::error::{Error, Result};

/// A dense real vector.
pub type DenseVector = Vec<f64>;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    // scaled to avoid overflow on large entries
    let scale = x.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ssq: f64 = x.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * ssq.sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

pub fn sub(x: &[f64], y: &[f64]) -> DenseVector {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from column-major storage.
    pub fn from_col_major(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                context: "dense matrix storage",
                expected: n_rows * n_cols,
                found: data.len(),
            });
        }
        if !all_finite(&data) {
            return Err(Error::NonFinite("dense matrix"));
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
        })
    }

    /// Builds a matrix from a slice of rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n_cols, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn from_columns(n_rows: usize, cols: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(n_rows * cols.len());
        for c in cols {
            assert_eq!(c.len(), n_rows, "column length");
            data.extend_from_slice(c);
        }
        Self {
            n_rows,
            n_cols: cols.len(),
            data,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n_rows..(j + 1) * self.n_rows]
    }

    pub fn row(&self, i: usize) -> DenseVector {
        (0..self.n_cols).map(|j| self[(i, j)]).collect()
    }

    /// Appends a column; the length must equal `n_rows`.
    pub fn push_col(&mut self, col: &[f64]) {
        assert_eq!(col.len(), self.n_rows, "column length");
        self.data.extend_from_slice(col);
        self.n_cols += 1;
    }

    /// Keeps the first `n_cols` columns.
    pub fn truncate_cols(&mut self, n_cols: usize) {
        if n_cols < self.n_cols {
            self.data.truncate(n_cols * self.n_rows);
            self.n_cols = n_cols;
        }
    }

    /// Leading `rows x cols` block.
    pub fn submatrix(&self, rows: usize, cols: usize) -> DenseMatrix {
        assert!(rows <= self.n_rows && cols <= self.n_cols);
        let mut out = DenseMatrix::zeros(rows, cols);
        for j in 0..cols {
            out.col_mut(j).copy_from_slice(&self.col(j)[..rows]);
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.n_cols, self.n_rows);
        for j in 0..self.n_cols {
            for i in 0..self.n_rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Result<DenseVector> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                context: "dense matvec",
                expected: self.n_cols,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), &mut y);
            }
        }
        Ok(y)
    }

    /// `A^T x`
    pub fn matvec_t(&self, x: &[f64]) -> Result<DenseVector> {
        if x.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                context: "dense transposed matvec",
                expected: self.n_rows,
                found: x.len(),
            });
        }
        Ok((0..self.n_cols).map(|j| dot(self.col(j), x)).collect())
    }

    /// `A B`
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if other.n_rows != self.n_cols {
            return Err(Error::DimensionMismatch {
                context: "dense matmul",
                expected: self.n_cols,
                found: other.n_rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_cols);
        for j in 0..other.n_cols {
            let c = self.matvec(other.col(j))?;
            out.col_mut(j).copy_from_slice(&c);
        }
        Ok(out)
    }

    /// `A^T B`
    pub fn t_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if other.n_rows != self.n_rows {
            return Err(Error::DimensionMismatch {
                context: "dense transposed matmul",
                expected: self.n_rows,
                found: other.n_rows,
            });
        }
        let mut out = DenseMatrix::zeros(self.n_cols, other.n_cols);
        for j in 0..other.n_cols {
            for i in 0..self.n_cols {
                out[(i, j)] = dot(self.col(i), other.col(j));
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: sub(&self.data, &other.data),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        &self.data[j * self.n_rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        &mut self.data[j * self.n_rows + i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_handles_extremes() {
        assert_eq!(norm2(&[]), 0.0);
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        let big = [1e200, 1e200];
        assert!((norm2(&big) / (1e200 * 2f64.sqrt()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matmul_and_transpose_agree() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let ata = a.t_matmul(&a).unwrap();
        let ata2 = a.transpose().matmul(&a).unwrap();
        assert_eq!(ata, ata2);
        assert_eq!(ata[(0, 0)], 35.0);
        assert_eq!(ata[(0, 1)], 44.0);
    }

    #[test]
    fn matvec_dimension_checked() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            a.matvec(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
