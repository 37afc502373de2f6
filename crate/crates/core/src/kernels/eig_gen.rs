//! Real eigenvalues of small nonsymmetric matrices and the harmonic pencil
//! `G g = theta F g`.
//!
//! The pencil is reduced to the standard problem for `F^{-1} G`. Eigenvalues
//! come from a Hessenberg reduction (Gaussian elimination with pivoting)
//! followed by the Francis double-shift QR iteration; eigenvectors for the
//! selected real eigenvalues are recovered by inverse iteration on the
//! pencil.

// the reduction and QR sweeps index a 1-based scratch array directly
#![allow(clippy::needless_range_loop)]

use super::lu::{condition_1, LuFactors};
use super::normalize_sign;
use crate::dense::{norm2, DenseMatrix};
use crate::error::{Error, Result};

const MAX_QR_ITERATIONS: usize = 60;
const MAX_CONDITION: f64 = 1e12;
const IMAG_TOLERANCE: f64 = 1e-10;

/// Which end of the spectrum (by `|theta|`) a pencil solve keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MagnitudeOrder {
    Smallest,
    Largest,
}

/// Selected real eigenpairs of a pencil, in the requested magnitude order.
#[derive(Debug, Clone)]
pub struct PencilEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
    /// Eigenvalues skipped because they were genuinely complex.
    pub discarded_complex: usize,
}

/// Reduces `a` (1-based scratch copy, `a[i][j]`) to upper Hessenberg form in
/// place.
fn elimination_hessenberg(a: &mut [Vec<f64>], n: usize) {
    for m in 2..n {
        let mut x = 0.0_f64;
        let mut i = m;
        for j in m..=n {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                i = j;
            }
        }
        if i != m {
            for j in (m - 1)..=n {
                let t = a[i][j];
                a[i][j] = a[m][j];
                a[m][j] = t;
            }
            for row in a.iter_mut().take(n + 1).skip(1) {
                row.swap(i, m);
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a[i][m - 1];
                if y != 0.0 {
                    y /= x;
                    a[i][m - 1] = y;
                    for j in m..=n {
                        a[i][j] -= y * a[m][j];
                    }
                    for j in 1..=n {
                        a[j][m] += y * a[j][i];
                    }
                }
            }
        }
    }
    for i in 3..=n {
        for j in 1..i - 1 {
            a[i][j] = 0.0;
        }
    }
}

/// Francis double-shift QR on a 1-based upper Hessenberg matrix. Returns
/// `(re, im)` pairs.
fn hessenberg_qr(a: &mut [Vec<f64>], n: usize) -> Result<Vec<(f64, f64)>> {
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w);
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                y = a[nn - 1][nn - 1];
                w = a[nn][nn - 1] * a[nn - 1][nn];
                if l == nn - 1 {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if its == MAX_QR_ITERATIONS {
                        return Err(Error::NoConvergence(MAX_QR_ITERATIONS));
                    }
                    if its == 10 || its == 20 || its == 40 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            a[i][i] -= x;
                        }
                        let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    let mut m = nn - 2;
                    loop {
                        z = a[m][m];
                        r = x - z;
                        let s0 = y - z;
                        p = (r * s0 - w) / a[m + 1][m] + a[m][m + 1];
                        q = a[m + 1][m + 1] - z - r - s0;
                        r = a[m + 2][m + 1];
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                        let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in (m + 2)..=nn {
                        a[i][i - 2] = 0.0;
                        if i != m + 2 {
                            a[i][i - 3] = 0.0;
                        }
                    }
                    let mut k = m;
                    while k < nn {
                        if k != m {
                            p = a[k][k - 1];
                            q = a[k + 1][k - 1];
                            r = 0.0;
                            if k != nn - 1 {
                                r = a[k + 2][k - 1];
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    a[k][k - 1] = -a[k][k - 1];
                                }
                            } else {
                                a[k][k - 1] = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nn {
                                let mut pp = a[k][j] + q * a[k + 1][j];
                                if k != nn - 1 {
                                    pp += r * a[k + 2][j];
                                    a[k + 2][j] -= pp * z;
                                }
                                a[k + 1][j] -= pp * y;
                                a[k][j] -= pp * x;
                            }
                            let mmin = if nn < k + 3 { nn } else { k + 3 };
                            for i in l..=mmin {
                                let mut pp = x * a[i][k] + y * a[i][k + 1];
                                if k != nn - 1 {
                                    pp += z * a[i][k + 2];
                                    a[i][k + 2] -= pp * r;
                                }
                                a[i][k + 1] -= pp * q;
                                a[i][k] -= pp;
                            }
                        }
                        k += 1;
                    }
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| (wr[i], wi[i])).collect())
}

/// All eigenvalues of a real square matrix as `(re, im)` pairs, unordered.
pub fn nonsymmetric_eigenvalues(m: &DenseMatrix) -> Result<Vec<(f64, f64)>> {
    let n = m.n_rows();
    if m.n_cols() != n {
        return Err(Error::DimensionMismatch {
            context: "nonsymmetric eigenproblem",
            expected: n,
            found: m.n_cols(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = m[(i, j)];
        }
    }
    elimination_hessenberg(&mut a, n);
    hessenberg_qr(&mut a, n)
}

/// Eigenvector of the pencil for a (real) eigenvalue by inverse iteration on
/// `G - mu F` with `mu` slightly off `theta`.
fn pencil_vector(g: &DenseMatrix, f: &DenseMatrix, theta: f64) -> Result<Vec<f64>> {
    let n = g.n_rows();
    let scale = g.frobenius_norm() + theta.abs() * f.frobenius_norm();
    let mut shift = 1e-10
        * theta
            .abs()
            .max(1e-3 * scale / f.frobenius_norm().max(f64::MIN_POSITIVE));
    let mut last_err = None;
    for _ in 0..4 {
        let mu = theta + shift;
        let mut shifted = g.clone();
        for j in 0..n {
            for i in 0..n {
                shifted[(i, j)] -= mu * f[(i, j)];
            }
        }
        match LuFactors::factor(&shifted) {
            Ok(lu) => {
                let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64 + 1.0).sin()).collect();
                for _ in 0..4 {
                    let rhs = f.matvec(&v)?;
                    let mut next = lu.solve(&rhs)?;
                    let nrm = norm2(&next);
                    if !nrm.is_finite() || nrm == 0.0 {
                        break;
                    }
                    next.iter_mut().for_each(|x| *x /= nrm);
                    v = next;
                }
                normalize_sign(&mut v);
                return Ok(v);
            }
            Err(e) => {
                last_err = Some(e);
                shift *= 10.0;
            }
        }
    }
    Err(last_err.unwrap_or(Error::NoConvergence(0)))
}

/// The `k` real eigenpairs of `G g = theta F g` with smallest `|theta|`.
///
/// Fails with [`Error::IllConditioned`] when `F` has a 1-norm condition
/// estimate of `1e12` or more; callers treat that as "skip augmentation".
/// Complex eigenvalues are kept (by real part) only when their imaginary part
/// is below `1e-10 |re|`, and are otherwise discarded, so fewer than `k`
/// pairs may come back.
pub fn gen_eig_smallest_magnitude(
    g: &DenseMatrix,
    f: &DenseMatrix,
    k: usize,
) -> Result<PencilEigen> {
    gen_eig_by_magnitude(g, f, k, MagnitudeOrder::Smallest)
}

/// Like [`gen_eig_smallest_magnitude`], keeping either end of the spectrum.
pub fn gen_eig_by_magnitude(
    g: &DenseMatrix,
    f: &DenseMatrix,
    k: usize,
    order: MagnitudeOrder,
) -> Result<PencilEigen> {
    let n = g.n_rows();
    for (mat, name) in [(g, "G"), (f, "F")] {
        if mat.n_rows() != n || mat.n_cols() != n {
            return Err(Error::InvalidArgument(format!(
                "pencil matrix {name} is {}x{}, expected {n}x{n}",
                mat.n_rows(),
                mat.n_cols()
            )));
        }
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "requested {k} eigenpairs of an order-{n} pencil"
        )));
    }
    let cond = condition_1(f);
    if cond >= MAX_CONDITION {
        return Err(Error::IllConditioned(cond));
    }
    let finv_g = LuFactors::factor(f)?.inverse().matmul(g)?;
    let eigenvalues = nonsymmetric_eigenvalues(&finv_g)?;

    let mut real = Vec::with_capacity(n);
    let mut discarded_complex = 0;
    for (re, im) in eigenvalues {
        if im.abs() <= IMAG_TOLERANCE * re.abs() {
            real.push(re);
        } else {
            discarded_complex += 1;
        }
    }
    real.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    if order == MagnitudeOrder::Largest {
        real.reverse();
    }
    real.truncate(k);

    let mut vectors = DenseMatrix::zeros(n, 0);
    for &theta in &real {
        vectors.push_col(&pencil_vector(g, f, theta)?);
    }
    Ok(PencilEigen {
        values: real,
        vectors,
        discarded_complex,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        v
    }

    #[test]
    fn triangular_eigenvalues() {
        let m = DenseMatrix::from_rows(&[
            vec![1.0, 5.0, -3.0],
            vec![0.0, 4.0, 2.0],
            vec![0.0, 0.0, -2.0],
        ]);
        let ev = sorted(nonsymmetric_eigenvalues(&m).unwrap());
        let expect = [-2.0, 1.0, 4.0];
        for (got, want) in ev.iter().zip(expect) {
            assert!((got.0 - want).abs() < 1e-12 && got.1 == 0.0);
        }
    }

    #[test]
    fn rotation_has_complex_pair() {
        let m = DenseMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]);
        let ev = sorted(nonsymmetric_eigenvalues(&m).unwrap());
        assert!(ev[0].0.abs() < 1e-14 && (ev[0].1 + 1.0).abs() < 1e-14);
        assert!((ev[1].1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn companion_matrix_roots() {
        // x^4 - 10x^3 + 35x^2 - 50x + 24 = (x-1)(x-2)(x-3)(x-4)
        let m = DenseMatrix::from_rows(&[
            vec![10.0, -35.0, 50.0, -24.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ]);
        let ev = sorted(nonsymmetric_eigenvalues(&m).unwrap());
        for (got, want) in ev.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((got.0 - want).abs() < 1e-9, "{got:?}");
            assert!(got.1.abs() < 1e-9);
        }
    }

    #[test]
    fn diagonal_pencil() {
        let g = DenseMatrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 9.0]]);
        let f = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]);
        let e = gen_eig_smallest_magnitude(&g, &f, 2).unwrap();
        assert!((e.values[0] - 2.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        assert!((e.vectors[(0, 0)] - 1.0).abs() < 1e-9 && e.vectors[(1, 0)].abs() < 1e-9);
        assert!((e.vectors[(1, 1)] - 1.0).abs() < 1e-9 && e.vectors[(0, 1)].abs() < 1e-9);
    }

    #[test]
    fn identity_f_reduces_to_symmetric() {
        let g = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = gen_eig_smallest_magnitude(&g, &DenseMatrix::identity(2), 1).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[(0, 0)] - h).abs() < 1e-9 && (e.vectors[(1, 0)] + h).abs() < 1e-9);
    }

    #[test]
    fn largest_magnitude_order() {
        let g = DenseMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, -7.0, 0.0],
            vec![0.0, 0.0, 3.0],
        ]);
        let e = gen_eig_by_magnitude(&g, &DenseMatrix::identity(3), 2, MagnitudeOrder::Largest)
            .unwrap();
        assert!((e.values[0] + 7.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        assert!((e.vectors[(1, 0)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn singular_f_is_ill_conditioned() {
        let g = DenseMatrix::identity(2);
        let f = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(
            gen_eig_smallest_magnitude(&g, &f, 1),
            Err(Error::IllConditioned(_))
        ));
        let f = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-14]]);
        assert!(matches!(
            gen_eig_smallest_magnitude(&g, &f, 1),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn complex_pairs_discarded() {
        let f = DenseMatrix::identity(3);
        let g = DenseMatrix::from_rows(&[
            vec![0.0, -1.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, 5.0],
        ]);
        let e = gen_eig_smallest_magnitude(&g, &f, 2).unwrap();
        assert_eq!(e.discarded_complex, 2);
        assert_eq!(e.values.len(), 1);
        assert!((e.values[0] - 5.0).abs() < 1e-12);
    }
}
