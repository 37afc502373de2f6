//! Small dense factorizations used on the projected `(m+1) x m` systems.

mod eig_gen;
mod eig_sym;
mod givens;
mod lu;
mod svd;

pub use eig_gen::{
    gen_eig_by_magnitude, gen_eig_smallest_magnitude, nonsymmetric_eigenvalues, MagnitudeOrder,
    PencilEigen,
};
pub use eig_sym::{sym_eig, sym_eig_smallest, SymEigen};
pub use givens::{
    apply_chain, back_substitute, givens_qr_hessenberg, GivensChain, IncrementalQr, Rotation,
    UpperTriangularFactor,
};
pub use lu::{dense_lu_solve, LuFactors};
pub use svd::{jacobi_svd, Svd};

/// Flips `v` so that its first significant component is positive.
pub(crate) fn normalize_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}
