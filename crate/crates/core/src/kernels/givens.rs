use crate::dense::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};

/// Plane rotation acting on coordinates `plane` and `plane + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub plane: usize,
    pub c: f64,
    pub s: f64,
}

impl Rotation {
    /// Rotation that maps `(a, b)` to `(r, 0)`; the identity when `b == 0`.
    pub fn zeroing(plane: usize, a: f64, b: f64) -> (Self, f64) {
        if b == 0.0 {
            return (
                Self {
                    plane,
                    c: 1.0,
                    s: 0.0,
                },
                a,
            );
        }
        let r = a.hypot(b);
        (
            Self {
                plane,
                c: a / r,
                s: b / r,
            },
            r,
        )
    }

    #[inline]
    pub fn apply(&self, v: &mut [f64]) {
        let (x, y) = (v[self.plane], v[self.plane + 1]);
        v[self.plane] = self.c * x + self.s * y;
        v[self.plane + 1] = -self.s * x + self.c * y;
    }
}

/// Ordered product of Givens rotations; applied first to last.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GivensChain {
    rotations: Vec<Rotation>,
}

impl GivensChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn push(&mut self, rot: Rotation) {
        self.rotations.push(rot);
    }

    /// Smallest vector length the chain can act on.
    pub fn min_len(&self) -> usize {
        self.rotations
            .iter()
            .map(|r| r.plane + 2)
            .max()
            .unwrap_or(0)
    }

    pub fn apply_in_place(&self, v: &mut [f64]) -> Result<()> {
        if v.len() < self.min_len() {
            return Err(Error::DimensionMismatch {
                context: "Givens chain application",
                expected: self.min_len(),
                found: v.len(),
            });
        }
        for rot in &self.rotations {
            rot.apply(v);
        }
        Ok(())
    }
}

/// Applies every rotation of `chain` to a copy of `v`.
pub fn apply_chain(chain: &GivensChain, v: &[f64]) -> Result<DenseVector> {
    let mut out = v.to_vec();
    chain.apply_in_place(&mut out)?;
    Ok(out)
}

/// The `(m+1) x m` triangular factor of a Hessenberg matrix; its last row is
/// zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangularFactor {
    r: DenseMatrix,
}

impl UpperTriangularFactor {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.r
    }

    /// Number of columns `m`.
    pub fn dim(&self) -> usize {
        self.r.n_cols()
    }

    /// The square leading `m x m` block.
    pub fn square(&self) -> DenseMatrix {
        self.r.submatrix(self.dim(), self.dim())
    }

    /// `R^T R` over the leading `m x m` block.
    pub fn gram(&self) -> DenseMatrix {
        let r = self.square();
        r.t_matmul(&r).expect("square factor")
    }
}

/// QR factorization of a Hessenberg matrix that grows one column at a time,
/// rotating the right-hand side `beta * e_1` along with it.
#[derive(Debug, Clone)]
pub struct IncrementalQr {
    chain: GivensChain,
    r_cols: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl IncrementalQr {
    pub fn new(beta: f64) -> Self {
        Self {
            chain: GivensChain::new(),
            r_cols: Vec::new(),
            rhs: vec![beta],
        }
    }

    pub fn n_cols(&self) -> usize {
        self.r_cols.len()
    }

    /// Appends Hessenberg column `j` (length `j + 2`, entries `h_{0..=j+1, j}`)
    /// and returns the new diagonal entry of `R`.
    pub fn push_column(&mut self, h: &[f64]) -> f64 {
        let j = self.r_cols.len();
        assert_eq!(h.len(), j + 2, "Hessenberg column length");
        let mut col = h.to_vec();
        for rot in self.chain.rotations() {
            rot.apply(&mut col);
        }
        let (rot, r) = Rotation::zeroing(j, col[j], col[j + 1]);
        col[j] = r;
        col[j + 1] = 0.0;
        self.chain.push(rot);
        self.rhs.push(0.0);
        rot.apply(&mut self.rhs);
        self.r_cols.push(col);
        r
    }

    /// Drops the most recently pushed column.
    pub fn pop_column(&mut self) {
        if self.r_cols.pop().is_some() {
            let rot = self.chain.rotations.pop().expect("one rotation per column");
            let inv = Rotation {
                plane: rot.plane,
                c: rot.c,
                s: -rot.s,
            };
            inv.apply(&mut self.rhs);
            self.rhs.pop();
        }
    }

    /// Least-squares residual norm of the current system.
    pub fn residual(&self) -> f64 {
        self.rhs.last().copied().unwrap_or(0.0).abs()
    }

    pub fn rotated_rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn chain(&self) -> &GivensChain {
        &self.chain
    }

    pub fn factor(&self) -> UpperTriangularFactor {
        let m = self.r_cols.len();
        let mut r = DenseMatrix::zeros(m + 1, m);
        for (j, c) in self.r_cols.iter().enumerate() {
            r.col_mut(j)[..c.len()].copy_from_slice(c);
        }
        UpperTriangularFactor { r }
    }

    pub fn into_parts(self) -> (GivensChain, UpperTriangularFactor, DenseVector) {
        let factor = self.factor();
        (self.chain, factor, self.rhs)
    }
}

/// Factors an `(m+1) x m` upper Hessenberg matrix as `P H = R`.
pub fn givens_qr_hessenberg(h: &DenseMatrix) -> Result<(GivensChain, UpperTriangularFactor)> {
    let m = h.n_cols();
    if h.n_rows() != m + 1 {
        return Err(Error::DimensionMismatch {
            context: "Hessenberg rows",
            expected: m + 1,
            found: h.n_rows(),
        });
    }
    for j in 0..m {
        for i in j + 2..=m {
            if h[(i, j)] != 0.0 {
                return Err(Error::NotHessenberg {
                    row: i,
                    col: j,
                    value: h[(i, j)],
                });
            }
        }
    }
    let mut qr = IncrementalQr::new(0.0);
    for j in 0..m {
        qr.push_column(&h.col(j)[..j + 2]);
    }
    let (chain, r, _) = qr.into_parts();
    Ok((chain, r))
}

/// Solves `R[0..m, 0..m] d = g` by back substitution.
pub fn back_substitute(r: &UpperTriangularFactor, g: &[f64]) -> Result<DenseVector> {
    let m = r.dim();
    if g.len() != m {
        return Err(Error::DimensionMismatch {
            context: "back substitution",
            expected: m,
            found: g.len(),
        });
    }
    let rm = r.matrix();
    let tiny = 1e-14 * rm.frobenius_norm();
    let mut d = g.to_vec();
    for i in (0..m).rev() {
        let diag = rm[(i, i)];
        if diag.abs() <= tiny {
            return Err(Error::Singular {
                index: i,
                magnitude: diag.abs(),
            });
        }
        let s: f64 = (i + 1..m).map(|j| rm[(i, j)] * d[j]).sum();
        d[i] = (d[i] - s) / diag;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five() {
        let h = DenseMatrix::from_rows(&[vec![3.0], vec![4.0]]);
        let (chain, r) = givens_qr_hessenberg(&h).unwrap();
        assert_eq!(chain.len(), 1);
        let rot = chain.rotations()[0];
        assert!((rot.c - 0.6).abs() < 1e-15 && (rot.s - 0.8).abs() < 1e-15);
        assert!((r.matrix()[(0, 0)] - 5.0).abs() < 1e-15);
        assert_eq!(r.matrix()[(1, 0)], 0.0);
        let v = apply_chain(&chain, &[3.0, 4.0]).unwrap();
        assert!((v[0] - 5.0).abs() < 1e-15 && v[1].abs() < 1e-15);
    }

    #[test]
    fn zero_column_gives_identity_rotation() {
        let h = DenseMatrix::zeros(2, 1);
        let (chain, r) = givens_qr_hessenberg(&h).unwrap();
        assert_eq!(
            chain.rotations()[0],
            Rotation {
                plane: 0,
                c: 1.0,
                s: 0.0
            }
        );
        assert_eq!(r.matrix().max_abs(), 0.0);
    }

    #[test]
    fn rejects_non_hessenberg() {
        let mut h = DenseMatrix::zeros(4, 3);
        h[(3, 0)] = 1.0;
        assert!(matches!(
            givens_qr_hessenberg(&h),
            Err(Error::NotHessenberg { row: 3, col: 0, .. })
        ));
        assert!(givens_qr_hessenberg(&DenseMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn empty_chain_is_identity() {
        let v = vec![1.0, 2.0, 3.0];
        assert_eq!(apply_chain(&GivensChain::new(), &v).unwrap(), v);
    }

    #[test]
    fn chain_length_checked() {
        let h = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 3.0], vec![0.0, 1.0]]);
        let (chain, _) = givens_qr_hessenberg(&h).unwrap();
        assert!(apply_chain(&chain, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn back_substitution() {
        let mut qr = IncrementalQr::new(0.0);
        qr.push_column(&[1.0, 0.0]);
        qr.push_column(&[0.0, 1.0, 0.0]);
        let d = back_substitute(&qr.factor(), &[3.0, -4.0]).unwrap();
        assert_eq!(d, vec![3.0, -4.0]);

        let r = UpperTriangularFactor {
            r: DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 4.0], vec![0.0, 0.0]]),
        };
        let d = back_substitute(&r, &[4.0, 8.0]).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-15 && (d[1] - 2.0).abs() < 1e-15);

        let singular = UpperTriangularFactor {
            r: DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0]]),
        };
        assert!(matches!(
            back_substitute(&singular, &[1.0, 1.0]),
            Err(Error::Singular { index: 1, .. })
        ));
    }

    #[test]
    fn pop_column_restores_state() {
        let mut qr = IncrementalQr::new(2.0);
        qr.push_column(&[1.0, 0.5]);
        let rhs = qr.rotated_rhs().to_vec();
        qr.push_column(&[0.3, 2.0, 0.7]);
        qr.pop_column();
        assert_eq!(qr.n_cols(), 1);
        for (a, b) in qr.rotated_rhs().iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
