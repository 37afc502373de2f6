//! One restart cycle: the augmented Arnoldi factorization `A W = Q H` and the
//! projected least-squares solve.
//!
//! The search space `W` holds `m - k` Krylov columns followed by `k`
//! augmentation columns `y_i`. Krylov columns cost one matrix-vector product
//! each; augmentation columns reuse the cached products `A y_i`, so a cycle
//! performs exactly `m - k` products inside the Arnoldi loop.

use crate::dense::{axpy, dot, norm2, scale, DenseMatrix, DenseVector};
use crate::error::{Error, Result};
use crate::kernels::{back_substitute, GivensChain, IncrementalQr, UpperTriangularFactor};
use crate::solvers::AugmentationSet;
use crate::sparse::CsrMatrix;

/// Relative size of the orthogonalized remainder below which a step is
/// treated as a breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-12;

/// A reorthogonalization pass runs when the remainder loses more than this
/// fraction of the direction's norm.
const REORTH_RATIO: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Outcome of one Arnoldi expansion step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    /// A new orthonormal column `q_{j+1}` was appended.
    Extended,
    /// The remainder vanished; `h_{j+1,j}` is stored as zero and no column was
    /// appended.
    Breakdown,
}

/// Bases and Hessenberg matrix for one cycle.
#[derive(Debug, Clone)]
pub struct CycleWorkspace {
    w: DenseMatrix,
    q: DenseMatrix,
    /// Hessenberg columns; column `j` has `j + 2` entries.
    h_cols: Vec<Vec<f64>>,
    m: usize,
    k: usize,
    beta: f64,
    breakdown: bool,
}

impl CycleWorkspace {
    /// Starts a cycle from the residual `r0`; `q_1 = r0 / ||r0||`.
    pub fn new(r0: &[f64], m: usize, k: usize) -> Result<Self> {
        let beta = norm2(r0);
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "initial residual norm must be positive and finite, got {beta}"
            )));
        }
        let n = r0.len();
        let mut q = DenseMatrix::zeros(n, 0);
        let mut q1 = r0.to_vec();
        scale(1.0 / beta, &mut q1);
        q.push_col(&q1);
        Ok(Self {
            w: DenseMatrix::zeros(n, 0),
            q,
            h_cols: Vec::with_capacity(m),
            m,
            k,
            beta,
            breakdown: false,
        })
    }

    /// Search-space basis `W` (n x j).
    pub fn w(&self) -> &DenseMatrix {
        &self.w
    }

    /// Orthonormal basis `Q` (n x (j+1), or n x j after a breakdown).
    pub fn q(&self) -> &DenseMatrix {
        &self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Nominal cycle dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of augmentation columns planned for this cycle.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of columns built so far.
    pub fn n_cols(&self) -> usize {
        self.h_cols.len()
    }

    pub fn broke_down(&self) -> bool {
        self.breakdown
    }

    /// The `(j+1) x j` Hessenberg matrix.
    pub fn hessenberg(&self) -> DenseMatrix {
        let j = self.h_cols.len();
        let mut h = DenseMatrix::zeros(j + 1, j);
        for (c, col) in self.h_cols.iter().enumerate() {
            h.col_mut(c)[..col.len()].copy_from_slice(col);
        }
        h
    }

    /// `Q H u` for a coefficient vector `u` of length `j`.
    pub fn q_times_h(&self, u: &[f64]) -> Result<DenseVector> {
        let h = self.hessenberg();
        let hu = h.matvec(u)?;
        let rows = self.q.n_cols();
        // after a breakdown the last Hessenberg row is zero and has no q column
        self.q.matvec(&hu[..rows])
    }

    pub(crate) fn last_h_column(&self) -> Option<&[f64]> {
        self.h_cols.last().map(Vec::as_slice)
    }

    /// Orthogonalizes `direction` (the image `A w_j` of the new search column
    /// `w_j`) against the current `Q`, storing the Hessenberg column and, unless
    /// the remainder vanishes, the next orthonormal vector.
    pub fn arnoldi_expand(
        &mut self,
        w_col: &[f64],
        mut direction: DenseVector,
    ) -> Result<Expansion> {
        if self.breakdown {
            return Err(Error::InvalidArgument(
                "cannot expand a workspace after breakdown".into(),
            ));
        }
        let n = self.q.n_rows();
        if w_col.len() != n || direction.len() != n {
            return Err(Error::DimensionMismatch {
                context: "Arnoldi expansion",
                expected: n,
                found: direction.len().min(w_col.len()),
            });
        }
        let j = self.h_cols.len();
        let dir_norm = norm2(&direction);
        let mut h = vec![0.0; j + 2];
        // modified Gram-Schmidt
        for (i, hi) in h.iter_mut().take(j + 1).enumerate() {
            let qi = self.q.col(i);
            let c = dot(&direction, qi);
            axpy(-c, qi, &mut direction);
            *hi = c;
        }
        let mut rem = norm2(&direction);
        if rem < REORTH_RATIO * dir_norm {
            for (i, hi) in h.iter_mut().take(j + 1).enumerate() {
                let qi = self.q.col(i);
                let c = dot(&direction, qi);
                axpy(-c, qi, &mut direction);
                *hi += c;
            }
            rem = norm2(&direction);
        }
        self.w.push_col(w_col);
        if rem <= BREAKDOWN_TOL * dir_norm {
            h[j + 1] = 0.0;
            self.h_cols.push(h);
            self.breakdown = true;
            return Ok(Expansion::Breakdown);
        }
        h[j + 1] = rem;
        scale(1.0 / rem, &mut direction);
        self.q.push_col(&direction);
        self.h_cols.push(h);
        Ok(Expansion::Extended)
    }

    /// Removes the most recent column.
    pub(crate) fn pop_column(&mut self) {
        if self.h_cols.pop().is_some() {
            self.w.truncate_cols(self.w.n_cols() - 1);
            if self.breakdown {
                self.breakdown = false;
            } else {
                self.q.truncate_cols(self.q.n_cols() - 1);
            }
        }
    }
}

/// Everything produced by one restart cycle.
#[derive(Debug, Clone)]
pub struct CycleResult {
    pub x_new: DenseVector,
    /// `||r|| / ||b||` read off the rotated right-hand side.
    pub relres: f64,
    pub workspace: CycleWorkspace,
    pub rfactor: UpperTriangularFactor,
    pub chain: GivensChain,
    /// `P Q^T r0`.
    pub rotated_rhs: DenseVector,
    /// Least-squares coefficients, `x_new = x0 + W d`.
    pub d: DenseVector,
    /// Residual `b - A x0` the cycle started from.
    pub r0: DenseVector,
    /// Matrix-vector products spent on Krylov columns.
    pub krylov_steps: usize,
    /// Augmentation columns that entered the basis.
    pub augmented: usize,
    /// Augmentation columns rejected as (numerically) dependent.
    pub rejected_augmentations: usize,
}

impl CycleResult {
    pub fn n_cols(&self) -> usize {
        self.d.len()
    }
}

/// Runs one cycle of dimension `m` without early exit.
pub fn run_cycle(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    aug: Option<&AugmentationSet>,
    m: usize,
) -> Result<CycleResult> {
    run_cycle_with_target(a, b, x0, aug, m, None)
}

/// Runs one cycle of dimension `m`. When `target_residual` is set the cycle
/// stops as soon as the least-squares residual norm drops to it.
pub fn run_cycle_with_target(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    aug: Option<&AugmentationSet>,
    m: usize,
    target_residual: Option<f64>,
) -> Result<CycleResult> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::InvalidArgument(
            "coefficient matrix must be square".into(),
        ));
    }
    for (len, context) in [(b.len(), "right-hand side"), (x0.len(), "initial guess")] {
        if len != n {
            return Err(Error::DimensionMismatch {
                context,
                expected: n,
                found: len,
            });
        }
    }
    if m == 0 {
        return Err(Error::InvalidArgument(
            "cycle dimension must be positive".into(),
        ));
    }
    let k = aug.map_or(0, AugmentationSet::len);
    if k >= m {
        return Err(Error::InvalidArgument(format!(
            "augmentation count {k} must be below the cycle dimension {m}"
        )));
    }
    if let Some(set) = aug {
        if set.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "augmentation vectors",
                expected: n,
                found: set.dim(),
            });
        }
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Err(Error::InvalidArgument("right-hand side is zero".into()));
    }

    let ax0 = a.spmv(x0)?;
    let r0: DenseVector = b.iter().zip(&ax0).map(|(bi, ai)| bi - ai).collect();
    let mut ws = CycleWorkspace::new(&r0, m, k)?;
    let mut qr = IncrementalQr::new(ws.beta());
    let reached = |qr: &IncrementalQr| target_residual.is_some_and(|t| qr.residual() <= t);

    let mut krylov_steps = 0;
    let mut direction = vec![0.0; n];
    let mut stopped = false;
    for j in 0..m - k {
        let qj = ws.q().col(j).to_vec();
        a.spmv_into(&qj, &mut direction)?;
        krylov_steps += 1;
        let outcome = ws.arnoldi_expand(&qj, direction.clone())?;
        qr.push_column(ws.last_h_column().expect("column just pushed"));
        if outcome == Expansion::Breakdown || reached(&qr) {
            stopped = true;
            break;
        }
    }

    let mut augmented = 0;
    let mut rejected = 0;
    if let (false, Some(set)) = (stopped, aug) {
        for i in 0..set.len() {
            let outcome = ws.arnoldi_expand(set.y().col(i), set.ay().col(i).to_vec())?;
            let diag = qr.push_column(ws.last_h_column().expect("column just pushed"));
            let r_norm = qr.factor().matrix().frobenius_norm();
            if outcome == Expansion::Breakdown || diag.abs() <= 1e-13 * r_norm {
                // the direction adds nothing to the search space
                qr.pop_column();
                ws.pop_column();
                rejected += 1;
                continue;
            }
            augmented += 1;
            if reached(&qr) {
                break;
            }
        }
    }

    let (chain, rfactor, rotated_rhs) = qr.into_parts();
    let cols = rfactor.dim();
    let d = back_substitute(&rfactor, &rotated_rhs[..cols])?;
    let mut x_new = x0.to_vec();
    for (c, &dc) in d.iter().enumerate() {
        axpy(dc, ws.w().col(c), &mut x_new);
    }
    let relres = rotated_rhs[cols].abs() / b_norm;
    Ok(CycleResult {
        x_new,
        relres,
        workspace: ws,
        rfactor,
        chain,
        rotated_rhs,
        d,
        r0,
        krylov_steps,
        augmented,
        rejected_augmentations: rejected,
    })
}
