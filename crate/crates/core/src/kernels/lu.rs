use crate::dense::{DenseMatrix, DenseVector};
use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Fails only on an exactly zero pivot.
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch {
                context: "LU of non-square matrix",
                expected: n,
                found: a.n_cols(),
            });
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if pmax == 0.0 {
                return Err(Error::Singular {
                    index: k,
                    magnitude: 0.0,
                });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = t;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj != 0.0 {
                    for i in k + 1..n {
                        let lik = lu[(i, k)];
                        lu[(i, j)] -= lik * ukj;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<DenseVector> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                context: "LU solve",
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                let col = self.lu.col(j);
                for i in j + 1..n {
                    x[i] -= col[i] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = self.lu.col(j);
            x[j] /= col[j];
            let xj = x[j];
            if xj != 0.0 {
                for i in 0..j {
                    x[i] -= col[i] * xj;
                }
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.solve(&e).expect("square system");
            inv.col_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        inv
    }
}

/// 1-norm: largest absolute column sum.
pub(crate) fn norm_1(a: &DenseMatrix) -> f64 {
    (0..a.n_cols())
        .map(|j| a.col(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `||A||_1 ||A^{-1}||_1` using an explicit inverse; infinite when singular.
pub(crate) fn condition_1(a: &DenseMatrix) -> f64 {
    match LuFactors::factor(a) {
        Ok(lu) => {
            let c = norm_1(a) * norm_1(&lu.inverse());
            if c.is_finite() {
                c
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// Dense reference solve of `A x = b`.
pub fn dense_lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    if b.len() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "dense LU right-hand side",
            expected: a.n_rows(),
            found: b.len(),
        });
    }
    LuFactors::factor(a)?.solve(b)
}
