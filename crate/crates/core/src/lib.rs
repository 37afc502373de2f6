//! Restarted GMRES whose search space is augmented with approximate right
//! singular vectors of the coefficient matrix (GMRES-SV), together with plain
//! restarted GMRES and harmonic-Ritz augmentation (GMRES-HR) as baselines.
//!
//! ```
//! use svgmres::{gen_laplacian_1d, solve, SolverConfig};
//!
//! let a = gen_laplacian_1d(100).unwrap();
//! let b = vec![1.0; 100];
//! let report = solve(&a, &b, &vec![0.0; 100], &SolverConfig::sv(20, 4), None).unwrap();
//! assert!(report.converged);
//! ```

pub mod bench;
pub mod dense;
pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod krylov;
pub mod mm;
pub mod solvers;
pub mod sparse;

pub use dense::{DenseMatrix, DenseVector};
pub use error::{Error, Result};
pub use kernels::MagnitudeOrder;
pub use krylov::{run_cycle, run_cycle_with_target, CycleResult, CycleWorkspace, Expansion};
pub use mm::{
    read_matrix_market, read_matrix_market_file, read_matrix_market_rhs,
    read_matrix_market_rhs_file,
};
pub use solvers::{
    extract_harmonic_directions, extract_singular_directions, paper_mvp_increment, solve,
    solve_observed, AugmentationScaling, AugmentationSet, ConvergenceRecord, CycleEntry,
    SolveReport, SolverConfig, StopReason, Variant,
};
pub use sparse::{gen_bidiagonal, gen_laplacian_1d, CsrMatrix};
