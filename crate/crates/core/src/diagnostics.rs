//! Executable checks of the identities behind singular-vector augmentation,
//! and of the per-cycle factorization invariants.
//!
//! With `e = x - x0` and a unit search direction `u`, the residual-minimizing
//! step along `A u` is `alpha_1 = <A e, A u> / ||A u||^2` and the
//! error-minimizing step along `u` is `alpha_2 = <e, u>`. The two coincide
//! when `u` is a right singular vector of `A`, or `u = V z` with `z` a right
//! singular vector of `A V` and `e` in the range of `V`. In general their
//! squared-error gap equals `<e, (A^T A - sigma^2 I) V z>^2 / sigma^4`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dense::{axpy, dot, norm2, scale, sub, DenseMatrix, DenseVector};
use crate::error::{Error, Result};
use crate::kernels::jacobi_svd;
use crate::krylov::CycleResult;
use crate::solvers::AugmentationSet;
use crate::sparse::CsrMatrix;

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Residual- and error-minimizing steps `(alpha_1, alpha_2)` along a unit
/// direction `u`, with the residual formed as `A (x - x0)`.
pub fn step_pair(a: &DenseMatrix, x: &[f64], x0: &[f64], u: &[f64]) -> Result<(f64, f64)> {
    let e = sub(x, x0);
    let r0 = a.matvec(&e)?;
    let au = a.matvec(u)?;
    let au2 = dot(&au, &au);
    if au2 == 0.0 {
        return Err(Error::InvalidArgument(
            "direction is in the null space of A".into(),
        ));
    }
    Ok((dot(&r0, &au) / au2, dot(&e, u) / dot(u, u)))
}

/// Step deviation for `z` a right singular vector of `A`.
pub fn singular_step_deviation(a: &DenseMatrix, x: &[f64], x0: &[f64], z: &[f64]) -> Result<f64> {
    let (a1, a2) = step_pair(a, x, x0, z)?;
    Ok(relative_deviation(a1, a2))
}

/// Subspace check: `V` orthonormal with `x - x0` in its range and `z` a
/// right singular vector of `A V`.
pub fn subspace_step_deviation(
    a: &DenseMatrix,
    x: &[f64],
    x0: &[f64],
    v: &DenseMatrix,
    z: &[f64],
) -> Result<f64> {
    let u = v.matvec(z)?;
    let (a1, a2) = step_pair(a, x, x0, &u)?;
    Ok(relative_deviation(a1, a2))
}

/// Both sides of the error-gap identity for `u = V z` with singular value
/// `sigma` of `A V`:
/// `||e - alpha_1 u||^2 - ||e - alpha_2 u||^2` and
/// `<e, (A^T A - sigma^2 I) u>^2 / sigma^4`.
pub fn error_gap_sides(
    a: &DenseMatrix,
    x: &[f64],
    x0: &[f64],
    v: &DenseMatrix,
    z: &[f64],
    sigma: f64,
) -> Result<(f64, f64)> {
    let u = v.matvec(z)?;
    let (a1, a2) = step_pair(a, x, x0, &u)?;
    let e = sub(x, x0);
    // ||p||^2 - ||q||^2 = <p - q, p + q>, which avoids cancellation
    let mut sum = e.clone();
    scale(2.0, &mut sum);
    axpy(-(a1 + a2), &u, &mut sum);
    let lhs = (a2 - a1) * dot(&u, &sum);
    let mut t = a.matvec_t(&a.matvec(&u)?)?;
    axpy(-sigma * sigma, &u, &mut t);
    let rhs = dot(&e, &t).powi(2) / sigma.powi(4);
    Ok((lhs, rhs))
}

pub fn error_gap_deviation(
    a: &DenseMatrix,
    x: &[f64],
    x0: &[f64],
    v: &DenseMatrix,
    z: &[f64],
    sigma: f64,
) -> Result<f64> {
    let (lhs, rhs) = error_gap_sides(a, x, x0, v, z, sigma)?;
    // both sides are squared-error gaps; below eps ||e||^2 they are rounding
    let e = sub(x, x0);
    let floor = f64::EPSILON * dot(&e, &e);
    let scale = lhs.abs().max(rhs.abs()).max(floor);
    Ok(if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    })
}

/// Orthonormal basis of the span of `cols` by modified Gram-Schmidt with one
/// reorthogonalization pass; (numerically) dependent columns are dropped.
pub fn orthonormal_basis(n: usize, cols: &[DenseVector]) -> DenseMatrix {
    let mut q = DenseMatrix::zeros(n, 0);
    for c in cols {
        let mut v = c.clone();
        let before = norm2(&v);
        for _ in 0..2 {
            for j in 0..q.n_cols() {
                let qj = q.col(j);
                axpy(-dot(&v, qj), qj, &mut v);
            }
        }
        let after = norm2(&v);
        if after > 1e-12 * before && after > 0.0 {
            scale(1.0 / after, &mut v);
            q.push_col(&v);
        }
    }
    q
}

/// `(I - Q Q^T) r` for orthonormal `Q`, applied twice for stability.
fn project_out(q: &DenseMatrix, r: &[f64]) -> DenseVector {
    let mut v = r.to_vec();
    for _ in 0..2 {
        for j in 0..q.n_cols() {
            let qj = q.col(j);
            axpy(-dot(&v, qj), qj, &mut v);
        }
    }
    v
}

/// Largest 2-norm condition number accepted for random instances. The
/// brute-force residual step `<A e, A z> / ||A z||^2` weighs an error `delta`
/// in `z` by `sigma_j^2 / sigma^2`, so even a correctly rounded singular
/// vector perturbs it by about `eps * kappa^2`; beyond this bound the check
/// measures rounding rather than the identity.
pub const MAX_INSTANCE_CONDITION: f64 = 1e3;

/// Dense random instance for the identity suites.
#[derive(Debug, Clone)]
pub struct IdentityInstance {
    pub a: DenseMatrix,
    pub x: DenseVector,
    pub x0: DenseVector,
}

impl IdentityInstance {
    pub fn random<R: Rng>(rng: &mut R, n: usize) -> Self {
        let mut gauss =
            |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };
        let a = DenseMatrix::from_col_major(n, n, gauss(n * n)).expect("finite gaussian entries");
        Self {
            a,
            x: gauss(n),
            x0: gauss(n),
        }
    }
}

/// Largest deviation observed per identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdentitySummary {
    pub trials: usize,
    /// Draws discarded for exceeding [`MAX_INSTANCE_CONDITION`].
    pub rejected: usize,
    pub singular_step: f64,
    pub subspace_step: f64,
    pub error_gap: f64,
}

impl IdentitySummary {
    pub fn passes(&self, tol: f64) -> bool {
        self.singular_step <= tol && self.subspace_step <= tol && self.error_gap <= tol
    }
}

/// Per-trial deviations for one instance. Singular vectors come from the
/// one-sided Jacobi SVD; the singular index and subspace sizes are drawn from
/// `rng`.
pub fn identity_trial<R: Rng>(rng: &mut R, inst: &IdentityInstance) -> Result<(f64, f64, f64)> {
    let n = inst.a.n_rows();
    let mut gauss =
        |len: usize| -> Vec<f64> { (0..len).map(|_| rng.sample(StandardNormal)).collect() };

    let svd = jacobi_svd(&inst.a)?;
    let idx = (gauss(1)[0].abs() * 1e6) as usize % n;
    let single = singular_step_deviation(&inst.a, &inst.x, &inst.x0, svd.right_vector(idx))?;

    // V containing e = x - x0
    let e = sub(&inst.x, &inst.x0);
    let p = 1 + (gauss(1)[0].abs() * 1e6) as usize % n;
    let mut cols = vec![e];
    cols.extend((1..p).map(|_| gauss(n)));
    let v = orthonormal_basis(n, &cols);
    let av = inst.a.matmul(&v)?;
    let svd_v = jacobi_svd(&av)?;
    let j = (gauss(1)[0].abs() * 1e6) as usize % v.n_cols();
    let subspace = subspace_step_deviation(&inst.a, &inst.x, &inst.x0, &v, svd_v.right_vector(j))?;

    // general V, e not in its range
    let p = 1 + (gauss(1)[0].abs() * 1e6) as usize % n;
    let cols: Vec<_> = (0..p).map(|_| gauss(n)).collect();
    let v = orthonormal_basis(n, &cols);
    let av = inst.a.matmul(&v)?;
    let svd_v = jacobi_svd(&av)?;
    let j = (gauss(1)[0].abs() * 1e6) as usize % v.n_cols();
    let gap = error_gap_deviation(
        &inst.a,
        &inst.x,
        &inst.x0,
        &v,
        svd_v.right_vector(j),
        svd_v.values[j],
    )?;
    Ok((single, subspace, gap))
}

/// Runs `trials` random dense instances of order `n` from `seed`, drawing
/// Gaussian matrices until `trials` of them are within
/// [`MAX_INSTANCE_CONDITION`].
pub fn run_identity_suite(seed: u64, n: usize, trials: usize) -> Result<IdentitySummary> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = IdentitySummary {
        trials,
        ..Default::default()
    };
    let mut accepted = 0;
    while accepted < trials {
        let inst = IdentityInstance::random(&mut rng, n);
        let sv = jacobi_svd(&inst.a)?.values;
        if sv[n - 1] > MAX_INSTANCE_CONDITION * sv[0] {
            summary.rejected += 1;
            continue;
        }
        accepted += 1;
        let (l, t1, t2) = identity_trial(&mut rng, &inst)?;
        summary.singular_step = summary.singular_step.max(l);
        summary.subspace_step = summary.subspace_step.max(t1);
        summary.error_gap = summary.error_gap.max(t2);
    }
    Ok(summary)
}

/// `A W` formed column by column with explicit products.
pub fn explicit_aw(a: &CsrMatrix, cycle: &CycleResult) -> Result<DenseMatrix> {
    let w = cycle.workspace.w();
    let mut aw = DenseMatrix::zeros(w.n_rows(), 0);
    for j in 0..w.n_cols() {
        aw.push_col(&a.spmv(w.col(j))?);
    }
    Ok(aw)
}

/// `max_u ||A (W u) - Q (H u)|| / ||u||` over the given probe vectors.
pub fn factorization_residual(
    a: &CsrMatrix,
    cycle: &CycleResult,
    probes: &[DenseVector],
) -> Result<f64> {
    let w = cycle.workspace.w();
    let mut worst: f64 = 0.0;
    for u in probes {
        let lhs = a.spmv(&w.matvec(u)?)?;
        let rhs = cycle.workspace.q_times_h(u)?;
        worst = worst.max(norm2(&sub(&lhs, &rhs)) / norm2(u));
    }
    Ok(worst)
}

/// `||R^T R - (A W)^T (A W)||_F / ||R^T R||_F` with `A W` formed explicitly.
pub fn gram_shortcut_deviation(a: &CsrMatrix, cycle: &CycleResult) -> Result<f64> {
    let aw = explicit_aw(a, cycle)?;
    let explicit = aw.t_matmul(&aw)?;
    let shortcut = cycle.rfactor.gram();
    Ok(shortcut.sub(&explicit).frobenius_norm() / shortcut.frobenius_norm())
}

/// `max |Q^T Q - I|`.
pub fn orthogonality_loss(cycle: &CycleResult) -> Result<f64> {
    let q = cycle.workspace.q();
    let qtq = q.t_matmul(q)?;
    Ok(qtq.sub(&DenseMatrix::identity(q.n_cols())).max_abs())
}

/// `||b - A x|| / ||b||` computed from scratch.
pub fn explicit_relres(a: &CsrMatrix, b: &[f64], x: &[f64]) -> Result<f64> {
    Ok(norm2(&sub(b, &a.spmv(x)?)) / norm2(b))
}

/// `max_i ||A y_i - (AY)_i|| / (||A||_F ||y_i||)`.
pub fn augmentation_consistency(a: &CsrMatrix, set: &AugmentationSet) -> Result<f64> {
    let fro = a.frobenius_norm();
    let mut worst: f64 = 0.0;
    for i in 0..set.len() {
        let y = set.y().col(i);
        let ay = a.spmv(y)?;
        worst = worst.max(norm2(&sub(&ay, set.ay().col(i))) / (fro * norm2(y)));
    }
    Ok(worst)
}

/// Residual norms for the projection bound on an augmented cycle:
/// `(||r_s||, ||(I - P) r0||)` where `r_s = r0 - A W d` is the cycle's
/// optimal residual and `P` projects onto `span(A V c, A y_1, ..., A y_k)`
/// for the Krylov block `V` of `W` and coefficients `c` (a polynomial
/// `q(A) r0` with `q(0) = 0`). All products are formed explicitly.
pub fn projection_bound(a: &CsrMatrix, cycle: &CycleResult, coeffs: &[f64]) -> Result<(f64, f64)> {
    let w = cycle.workspace.w();
    let krylov = cycle.krylov_steps.min(w.n_cols());
    if coeffs.len() != krylov {
        return Err(Error::DimensionMismatch {
            context: "polynomial coefficients",
            expected: krylov,
            found: coeffs.len(),
        });
    }
    let aw = explicit_aw(a, cycle)?;
    let mut rs = cycle.r0.clone();
    for (j, &dj) in cycle.d.iter().enumerate() {
        axpy(-dj, aw.col(j), &mut rs);
    }
    let n = w.n_rows();
    let mut qv = vec![0.0; n];
    for (j, &c) in coeffs.iter().enumerate() {
        axpy(c, aw.col(j), &mut qv);
    }
    let mut cols = vec![qv];
    cols.extend((krylov..w.n_cols()).map(|j| aw.col(j).to_vec()));
    let u = orthonormal_basis(n, &cols);
    Ok((norm2(&rs), norm2(&project_out(&u, &cycle.r0))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case_is_exact() {
        let s = run_identity_suite(3, 1, 20).unwrap();
        assert!(s.passes(1e-12), "{s:?}");
    }

    #[test]
    fn zero_error_vector_gives_zero_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut inst = IdentityInstance::random(&mut rng, 6);
        inst.x0 = inst.x.clone();
        let svd = jacobi_svd(&inst.a).unwrap();
        let (a1, a2) = step_pair(&inst.a, &inst.x, &inst.x0, svd.right_vector(2)).unwrap();
        assert_eq!((a1, a2), (0.0, 0.0));
        let v = orthonormal_basis(
            6,
            &[
                vec![1.0, 2.0, 0.0, 0.0, 1.0, 0.0],
                vec![0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            ],
        );
        let svd_v = jacobi_svd(&inst.a.matmul(&v).unwrap()).unwrap();
        let (l, r) = error_gap_sides(
            &inst.a,
            &inst.x,
            &inst.x0,
            &v,
            svd_v.right_vector(0),
            svd_v.values[0],
        )
        .unwrap();
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn generic_direction_gives_different_steps() {
        // a generic direction does not make the two steps agree
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]);
        let (a1, a2) = step_pair(&a, &[1.0, 1.0], &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(relative_deviation(a1, a2) > 0.1);
    }

    #[test]
    fn orthonormal_basis_drops_dependent_columns() {
        let q = orthonormal_basis(
            3,
            &[
                vec![1.0, 0.0, 0.0],
                vec![2.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0],
            ],
        );
        assert_eq!(q.n_cols(), 2);
    }
}
