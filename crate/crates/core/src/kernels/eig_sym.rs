//! Cyclic Jacobi eigensolver for small symmetric matrices.

use super::normalize_sign;
use crate::dense::{norm2, DenseMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by ascending eigenvalue; `vectors` column `i` belongs to
/// `values[i]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.n_rows();
    let mut off = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            if i != j {
                off.push(a[(i, j)]);
            }
        }
    }
    norm2(&off)
}

fn check_symmetric(g: &DenseMatrix) -> Result<f64> {
    let n = g.n_rows();
    if g.n_cols() != n {
        return Err(Error::DimensionMismatch {
            context: "symmetric eigenproblem",
            expected: n,
            found: g.n_cols(),
        });
    }
    let norm = g.frobenius_norm();
    let asym = g.sub(&g.transpose()).frobenius_norm();
    if asym > 1e-12 * norm {
        return Err(Error::NotSymmetric {
            asymmetry: asym,
            norm,
        });
    }
    Ok(norm)
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Sweeps continue until a full sweep performs no rotation; a pair is
/// rotated whenever its off-diagonal entry is not negligible against the
/// geometric mean of the two diagonal entries. This reaches the
/// `1e-12 ||G||_F` off-diagonal target and keeps small eigenvalues
/// accurate relative to their own size.
pub fn sym_eig(g: &DenseMatrix) -> Result<SymEigen> {
    let norm = check_symmetric(g)?;
    let n = g.n_rows();
    // work on the exactly symmetric part
    let mut a = g.clone();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = DenseMatrix::identity(n);
    let mut converged = n <= 1 || norm == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotations = 0;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                let threshold = f64::EPSILON * (app.abs() * aqq.abs()).sqrt();
                if apq.abs() <= threshold.max(f64::MIN_POSITIVE) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotations += 1;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if rotations == 0 {
            converged = true;
        }
    }
    if !converged && off_diagonal_norm(&a) > 1e-12 * norm {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = vectors.col_mut(dst);
        col.copy_from_slice(v.col(src));
        normalize_sign(col);
    }
    Ok(SymEigen { values, vectors })
}

/// The `k` algebraically smallest eigenpairs of a symmetric matrix.
pub fn sym_eig_smallest(g: &DenseMatrix, k: usize) -> Result<SymEigen> {
    let n = g.n_rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let full = sym_eig(g)?;
    Ok(SymEigen {
        values: full.values[..k].to_vec(),
        vectors: full.vectors.submatrix(n, k),
    })
}
