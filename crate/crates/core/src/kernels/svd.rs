//! One-sided (Hestenes) Jacobi SVD for small dense matrices.

use super::normalize_sign;
use crate::dense::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Singular values ascending, with matching right singular vectors as the
/// columns of `v`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub values: Vec<f64>,
    pub v: DenseMatrix,
}

impl Svd {
    pub fn right_vector(&self, i: usize) -> &[f64] {
        self.v.col(i)
    }
}

/// Singular values and right singular vectors of an `n x p` matrix, `n >= p`.
pub fn jacobi_svd(a: &DenseMatrix) -> Result<Svd> {
    let (n, p) = (a.n_rows(), a.n_cols());
    if n < p {
        return Err(Error::InvalidArgument(format!(
            "one-sided Jacobi SVD needs rows >= cols, got {n}x{p}"
        )));
    }
    let mut u = a.clone();
    let mut v = DenseMatrix::identity(p);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotations = 0;
        for i in 0..p {
            for j in i + 1..p {
                let alpha = dot(u.col(i), u.col(i));
                let beta = dot(u.col(j), u.col(j));
                let gamma = dot(u.col(i), u.col(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotations += 1;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut u, i, j, c, s);
                rotate_cols(&mut v, i, j, c, s);
            }
        }
        if rotations == 0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let sigma: Vec<f64> = (0..p).map(|i| norm2(u.col(i))).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| sigma[i].total_cmp(&sigma[j]));
    let mut vs = DenseMatrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        let col = vs.col_mut(dst);
        col.copy_from_slice(v.col(src));
        normalize_sign(col);
    }
    Ok(Svd {
        values: order.iter().map(|&i| sigma[i]).collect(),
        v: vs,
    })
}

fn rotate_cols(m: &mut DenseMatrix, i: usize, j: usize, c: f64, s: f64) {
    for k in 0..m.n_rows() {
        let (x, y) = (m[(k, i)], m[(k, j)]);
        m[(k, i)] = c * x - s * y;
        m[(k, j)] = s * x + c * y;
    }
}
