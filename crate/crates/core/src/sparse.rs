//! Compressed sparse row storage and the generated test matrices.

use crate::dense::{all_finite, DenseMatrix, DenseVector};
use crate::error::{Error, Result};

/// Real sparse matrix in compressed-row form.
///
/// Every constructor checks that `row_ptr` is a valid offset array, that
/// column indices are strictly increasing within each row and in range,
/// and that all stored values are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn try_new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidStructure("row_ptr[0] must be 0".into()));
        }
        if col_idx.len() != values.len() || row_ptr[n_rows] != values.len() {
            return Err(Error::InvalidStructure(format!(
                "row_ptr ends at {} but there are {} column indices and {} values",
                row_ptr[n_rows],
                col_idx.len(),
                values.len()
            )));
        }
        for (i, w) in row_ptr.windows(2).enumerate() {
            if w[0] > w[1] {
                return Err(Error::InvalidStructure(format!(
                    "row_ptr decreases at row {i}"
                )));
            }
            let cols = &col_idx[w[0]..w[1]];
            if let Some(&c) = cols.iter().find(|&&c| c >= n_cols) {
                return Err(Error::InvalidStructure(format!(
                    "column index {c} in row {i} exceeds {n_cols} columns"
                )));
            }
            if cols.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::InvalidStructure(format!(
                    "column indices in row {i} are not strictly increasing"
                )));
            }
        }
        if !all_finite(&values) {
            return Err(Error::NonFinite("CSR values"));
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Assembles a matrix from `(row, col, value)` triples, summing duplicates.
    pub fn from_coo(triples: &[(usize, usize, f64)], n_rows: usize, n_cols: usize) -> Result<Self> {
        for &(row, col, value) in triples {
            if row >= n_rows || col >= n_cols {
                return Err(Error::IndexOutOfBounds {
                    row,
                    col,
                    value,
                    n_rows,
                    n_cols,
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFinite("COO triple"));
            }
        }
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, _, _) in triples {
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut entries = vec![(0usize, 0.0f64); triples.len()];
        for &(r, c, v) in triples {
            entries[next[r]] = (c, v);
            next[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::with_capacity(triples.len());
        let mut values = Vec::with_capacity(triples.len());
        row_ptr.push(0);
        for r in 0..n_rows {
            let row = &mut entries[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::try_new(n_rows, n_cols, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Stores every nonzero of a dense matrix.
    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut triples = Vec::new();
        for i in 0..a.n_rows() {
            for j in 0..a.n_cols() {
                if a[(i, j)] != 0.0 {
                    triples.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_coo(&triples, a.n_rows(), a.n_cols()).expect("dense input is well formed")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// Stored value at `(i, j)`, zero when absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |p| vals[p])
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::dense::norm2(&self.values)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                a[(i, j)] = v;
            }
        }
        a
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut triples = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            triples.extend(cols.iter().zip(vals).map(|(&j, &v)| (j, i, v)));
        }
        Self::from_coo(&triples, self.n_cols, self.n_rows).expect("transpose of valid CSR")
    }

    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols && *self == self.transpose()
    }

    /// `y = A x`
    pub fn spmv(&self, x: &[f64]) -> Result<DenseVector> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x` into caller-provided storage.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                context: "spmv input",
                expected: self.n_cols,
                found: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                context: "spmv output",
                expected: self.n_rows,
                found: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
        Ok(())
    }
}

/// Tridiagonal `(-1, 2, -1)` matrix of order `n`: the 1-D Laplacian.
pub fn gen_laplacian_1d(n: usize) -> Result<CsrMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "laplacian order must be at least 1".into(),
        ));
    }
    let mut triples = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            triples.push((i, i - 1, -1.0));
        }
        triples.push((i, i, 2.0));
        if i + 1 < n {
            triples.push((i, i + 1, -1.0));
        }
    }
    CsrMatrix::from_coo(&triples, n, n)
}

/// Upper bidiagonal matrix with diagonal `1, 2, ..., n` and a constant
/// superdiagonal.
pub fn gen_bidiagonal(n: usize, superdiag: f64) -> Result<CsrMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "bidiagonal order must be at least 1".into(),
        ));
    }
    let mut triples = Vec::with_capacity(2 * n);
    for i in 0..n {
        triples.push((i, i, (i + 1) as f64));
        if i + 1 < n {
            triples.push((i, i + 1, superdiag));
        }
    }
    CsrMatrix::from_coo(&triples, n, n)
}
