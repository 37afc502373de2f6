//! Restart drivers for GMRES(m), GMRES-SV(m, k) and GMRES-HR(m, k).
//!
//! After each cycle the augmented variants extract `k` directions from the
//! cycle's search space `W`:
//!
//! * **SV** takes the eigenvectors `g_i` of `G = W^T A^T A W = R^T R` for the
//!   smallest eigenvalues, i.e. approximate right singular vectors
//!   `y_i = W g_i` of `A` for its smallest singular values.
//! * **HR** solves the harmonic pencil `G g = theta F g` with
//!   `F = W^T A^T W = H^T (Q^T W)` and keeps the smallest `|theta|`.
//!
//! Both cache `A y_i = Q H g_i`, so the next cycle needs no products for them.
//!
//! `G` carries no mass matrix `W^T W`, and `W` is not orthonormal once it
//! holds earlier augmentation columns, so the scale of each `y_i` feeds into
//! the next extraction. By default `y_i = W g_i` is used exactly as formed
//! (with `||g_i|| = 1`); [`AugmentationScaling::UnitNorm`] rescales instead.

use std::fmt;
use std::str::FromStr;

use crate::dense::{norm2, sub, DenseMatrix, DenseVector};
use crate::error::{Error, Result};
use crate::kernels::{gen_eig_by_magnitude, sym_eig_smallest, MagnitudeOrder};
use crate::krylov::{run_cycle_with_target, CycleResult};
use crate::sparse::CsrMatrix;

/// Eigenvalues of `G` at or below this fraction of `||G||_F` are discarded.
const SIGMA_FLOOR: f64 = 1e-14;

/// Number of consecutive cycles over which the stagnation guard looks.
pub const STAGNATION_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Plain,
    Sv,
    Hr,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Sv => "sv",
            Variant::Hr => "hr",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" | "gmres" => Ok(Variant::Plain),
            "sv" => Ok(Variant::Sv),
            "hr" => Ok(Variant::Hr),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

/// How extracted directions are scaled before they enter the next basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AugmentationScaling {
    /// `y_i = W g_i` with unit `g_i`, as formed.
    #[default]
    AsComputed,
    /// `y_i` rescaled to unit norm, `A y_i` scaled to match.
    UnitNorm,
}

/// Directions carried into the next cycle, with their cached images.
#[derive(Debug, Clone)]
pub struct AugmentationSet {
    y: DenseMatrix,
    ay: DenseMatrix,
    sigma_sq: Vec<f64>,
}

impl AugmentationSet {
    pub fn empty(n: usize) -> Self {
        Self {
            y: DenseMatrix::zeros(n, 0),
            ay: DenseMatrix::zeros(n, 0),
            sigma_sq: Vec::new(),
        }
    }

    /// Builds a set from unit directions and their products with `A`.
    pub fn new(y: DenseMatrix, ay: DenseMatrix, sigma_sq: Vec<f64>) -> Result<Self> {
        if y.n_rows() != ay.n_rows() || y.n_cols() != ay.n_cols() || y.n_cols() != sigma_sq.len() {
            return Err(Error::InvalidArgument(
                "augmentation directions, images and values disagree in shape".into(),
            ));
        }
        Ok(Self { y, ay, sigma_sq })
    }

    pub fn len(&self) -> usize {
        self.sigma_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_sq.is_empty()
    }

    /// Vector length `n`.
    pub fn dim(&self) -> usize {
        self.y.n_rows()
    }

    pub fn y(&self) -> &DenseMatrix {
        &self.y
    }

    pub fn ay(&self) -> &DenseMatrix {
        &self.ay
    }

    /// Ritz values `sigma_i^2` (SV) or harmonic values `theta_i` (HR).
    pub fn sigma_sq(&self) -> &[f64] {
        &self.sigma_sq
    }

    fn push(
        &mut self,
        mut y: DenseVector,
        mut ay: DenseVector,
        value: f64,
        scaling: AugmentationScaling,
    ) {
        if scaling == AugmentationScaling::UnitNorm {
            let ny = norm2(&y);
            y.iter_mut().for_each(|v| *v /= ny);
            ay.iter_mut().for_each(|v| *v /= ny);
        }
        self.y.push_col(&y);
        self.ay.push_col(&ay);
        self.sigma_sq.push(value);
    }
}

/// Maps coefficient vectors `g` (columns of `coeffs`) to `y = W g` and
/// `A y = Q H g`.
fn lift(cycle: &CycleResult, g: &[f64]) -> Result<(DenseVector, DenseVector)> {
    let y = cycle.workspace.w().matvec(g)?;
    let ay = cycle.workspace.q_times_h(g)?;
    Ok((y, ay))
}

/// Approximate right singular vectors for the `k` smallest singular values of
/// `A W`, from `G = R^T R`.
pub fn extract_singular_directions(
    cycle: &CycleResult,
    k: usize,
    scaling: AugmentationScaling,
) -> Result<AugmentationSet> {
    let n = cycle.x_new.len();
    let mut set = AugmentationSet::empty(n);
    let cols = cycle.n_cols();
    if k == 0 || cols == 0 {
        return Ok(set);
    }
    let g = cycle.rfactor.gram();
    let floor = SIGMA_FLOOR * g.frobenius_norm();
    let eig = sym_eig_smallest(&g, k.min(cols))?;
    for (i, &s2) in eig.values.iter().enumerate() {
        if s2 <= floor {
            continue;
        }
        let (y, ay) = lift(cycle, eig.vectors.col(i))?;
        set.push(y, ay, s2, scaling);
    }
    Ok(set)
}

/// Harmonic extraction result; `skipped` is set when `F` was too close to
/// singular and the next cycle should run without augmentation.
#[derive(Debug, Clone)]
pub struct HarmonicExtraction {
    pub set: AugmentationSet,
    pub skipped: bool,
}

/// `F = W^T A^T W`, computed as `H^T (Q^T W)`.
pub fn harmonic_f(cycle: &CycleResult) -> Result<DenseMatrix> {
    let ws = &cycle.workspace;
    let h = ws.hessenberg();
    let rows = ws.q().n_cols();
    let qtw = ws.q().t_matmul(ws.w())?;
    h.submatrix(rows, h.n_cols()).t_matmul(&qtw)
}

/// Harmonic Ritz directions for `k` eigenvalues of `G g = theta F g`, taken
/// from the small or the large end of `|theta|`.
pub fn extract_harmonic_directions(
    cycle: &CycleResult,
    k: usize,
    order: MagnitudeOrder,
    scaling: AugmentationScaling,
) -> Result<HarmonicExtraction> {
    let n = cycle.x_new.len();
    let mut set = AugmentationSet::empty(n);
    let cols = cycle.n_cols();
    if k == 0 || cols == 0 {
        return Ok(HarmonicExtraction {
            set,
            skipped: false,
        });
    }
    let g = cycle.rfactor.gram();
    let f = harmonic_f(cycle)?;
    let pencil = match gen_eig_by_magnitude(&g, &f, k.min(cols), order) {
        Ok(p) => p,
        Err(Error::IllConditioned(_)) => return Ok(HarmonicExtraction { set, skipped: true }),
        Err(e) => return Err(e),
    };
    for (i, &theta) in pencil.values.iter().enumerate() {
        let (y, ay) = lift(cycle, pencil.vectors.col(i))?;
        set.push(y, ay, theta, scaling);
    }
    Ok(HarmonicExtraction {
        set,
        skipped: false,
    })
}

/// Nominal Krylov-step products for one cycle: `m` for the first cycle
/// and for plain GMRES, `m - k` for later augmented cycles.
pub fn paper_mvp_increment(variant: Variant, m: usize, k: usize, first_cycle: bool) -> usize {
    match variant {
        Variant::Plain => m,
        _ if first_cycle => m,
        _ => m - k,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub variant: Variant,
    /// Cycle (search space) dimension.
    pub m: usize,
    /// Augmentation count, ignored for [`Variant::Plain`].
    pub k: usize,
    /// Target for `||b - A x|| / ||b||`.
    pub tol: f64,
    pub max_cycles: usize,
    pub max_true_matvecs: usize,
    pub scaling: AugmentationScaling,
    /// End of the harmonic spectrum kept by [`Variant::Hr`]. Defaults to
    /// [`MagnitudeOrder::Largest`], the default of common `eigs` front ends,
    /// which is what the published HR convergence histories correspond to;
    /// [`MagnitudeOrder::Smallest`] is the textbook harmonic Ritz choice.
    pub harmonic_order: MagnitudeOrder,
    /// Stop when the residual improves by less than `1e-14` relative over
    /// [`STAGNATION_WINDOW`] cycles.
    pub stop_on_stagnation: bool,
}

impl SolverConfig {
    pub fn new(variant: Variant, m: usize, k: usize) -> Self {
        Self {
            variant,
            m,
            k: if variant == Variant::Plain { 0 } else { k },
            tol: 1e-8,
            max_cycles: 300,
            max_true_matvecs: usize::MAX,
            scaling: AugmentationScaling::AsComputed,
            harmonic_order: MagnitudeOrder::Largest,
            stop_on_stagnation: true,
        }
    }

    pub fn plain(m: usize) -> Self {
        Self::new(Variant::Plain, m, 0)
    }

    pub fn sv(m: usize, k: usize) -> Self {
        Self::new(Variant::Sv, m, k)
    }

    pub fn hr(m: usize, k: usize) -> Self {
        Self::new(Variant::Hr, m, k)
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_cycles(mut self, max_cycles: usize) -> Self {
        self.max_cycles = max_cycles;
        self
    }

    pub fn with_max_true_matvecs(mut self, max: usize) -> Self {
        self.max_true_matvecs = max;
        self
    }

    pub fn with_scaling(mut self, scaling: AugmentationScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn with_harmonic_order(mut self, order: MagnitudeOrder) -> Self {
        self.harmonic_order = order;
        self
    }

    pub fn with_stagnation_stop(mut self, enabled: bool) -> Self {
        self.stop_on_stagnation = enabled;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        if self.k >= self.m {
            return Err(Error::InvalidArgument(format!(
                "k = {} must be smaller than m = {}",
                self.k, self.m
            )));
        }
        if self.variant == Variant::Plain && self.k != 0 {
            return Err(Error::InvalidArgument("plain GMRES takes k = 0".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// One row of the convergence history.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleEntry {
    /// 1-based cycle index.
    pub cycle: usize,
    pub relres: f64,
    pub error_norm: Option<f64>,
    /// Cumulative Arnoldi expansion steps.
    pub paper_mvp: usize,
    /// Cumulative products including each cycle's explicit residual.
    pub true_mvp: usize,
    /// Augmentation columns used in this cycle.
    pub augmented: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceRecord {
    pub entries: Vec<CycleEntry>,
}

impl ConvergenceRecord {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&CycleEntry> {
        self.entries.last()
    }

    /// Last entry whose cumulative Krylov-step count is within `budget`.
    pub fn at_paper_mvp(&self, budget: usize) -> Option<&CycleEntry> {
        self.entries
            .iter()
            .take_while(|e| e.paper_mvp <= budget)
            .last()
    }

    /// First cycle whose relative residual is at or below `tol`.
    pub fn cycles_to(&self, tol: f64) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.relres <= tol)
            .map(|e| e.cycle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxCycles,
    MatvecBudget,
    Stagnation,
    /// The Krylov space became invariant; the iterate is exact up to rounding.
    Breakdown,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: DenseVector,
    pub converged: bool,
    pub record: ConvergenceRecord,
    pub final_relres: f64,
    pub final_error_norm: Option<f64>,
    pub stop_reason: StopReason,
}

/// Runs the restart loop; see [`solve_observed`].
pub fn solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    config: &SolverConfig,
    x_ref: Option<&[f64]>,
) -> Result<SolveReport> {
    solve_observed(a, b, x0, config, x_ref, |_| {})
}

/// Runs the restart loop, handing every completed cycle to `observer` before
/// the next one starts.
///
/// Each cycle minimizes the residual over `m - k` Krylov columns plus the
/// `k` directions extracted from the previous cycle (the first cycle, and
/// every plain GMRES cycle, is purely Krylov). The loop ends when the
/// relative residual reaches `config.tol`, a budget runs out, or the residual
/// has improved by less than `1e-14` relative over ten cycles.
pub fn solve_observed<F>(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    config: &SolverConfig,
    x_ref: Option<&[f64]>,
    mut observer: F,
) -> Result<SolveReport>
where
    F: FnMut(&CycleResult),
{
    config.validate()?;
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
    if let Some(r) = x_ref {
        if r.len() != n {
            return Err(Error::DimensionMismatch {
                context: "reference solution",
                expected: n,
                found: r.len(),
            });
        }
    }
    let error_of = |x: &[f64]| x_ref.map(|r| norm2(&sub(x, r)));

    let b_norm = norm2(b);
    let mut x = x0.to_vec();
    let initial_relres = if b_norm == 0.0 {
        0.0
    } else {
        norm2(&sub(b, &a.spmv(&x)?)) / b_norm
    };
    if b_norm == 0.0 || initial_relres <= config.tol {
        if b_norm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
        }
        return Ok(SolveReport {
            final_error_norm: error_of(&x),
            x,
            converged: true,
            record: ConvergenceRecord::default(),
            final_relres: initial_relres,
            stop_reason: StopReason::Converged,
        });
    }

    let target = config.tol * b_norm;
    let mut record = ConvergenceRecord::default();
    let mut aug: Option<AugmentationSet> = None;
    let (mut paper_mvp, mut true_mvp) = (0, 0);
    let mut relres;
    let stop_reason = loop {
        let cycle = run_cycle_with_target(a, b, &x, aug.as_ref(), config.m, Some(target))?;
        paper_mvp += cycle.krylov_steps;
        true_mvp += cycle.krylov_steps + 1;
        observer(&cycle);
        x.clone_from(&cycle.x_new);
        relres = cycle.relres;
        record.entries.push(CycleEntry {
            cycle: record.len() + 1,
            relres,
            error_norm: error_of(&x),
            paper_mvp,
            true_mvp,
            augmented: cycle.augmented,
        });

        if relres <= config.tol {
            break StopReason::Converged;
        }
        if cycle.workspace.broke_down() {
            break StopReason::Breakdown;
        }
        if record.len() >= config.max_cycles {
            break StopReason::MaxCycles;
        }
        if true_mvp >= config.max_true_matvecs {
            break StopReason::MatvecBudget;
        }
        if config.stop_on_stagnation && record.len() > STAGNATION_WINDOW {
            let then = record.entries[record.len() - 1 - STAGNATION_WINDOW].relres;
            if then - relres < 1e-14 * then {
                break StopReason::Stagnation;
            }
        }

        aug = match config.variant {
            Variant::Plain => None,
            Variant::Sv => Some(extract_singular_directions(
                &cycle,
                config.k,
                config.scaling,
            )?),
            Variant::Hr => {
                let h = extract_harmonic_directions(
                    &cycle,
                    config.k,
                    config.harmonic_order,
                    config.scaling,
                )?;
                (!h.skipped).then_some(h.set)
            }
        }
        .filter(|s| !s.is_empty());
    };

    Ok(SolveReport {
        final_error_norm: error_of(&x),
        x,
        converged: relres <= config.tol,
        record,
        final_relres: relres,
        stop_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::run_cycle;
    use crate::sparse::{gen_bidiagonal, gen_laplacian_1d};

    #[test]
    fn mvp_increments() {
        assert_eq!(paper_mvp_increment(Variant::Sv, 30, 4, false), 26);
        assert_eq!(paper_mvp_increment(Variant::Plain, 30, 0, false), 30);
        assert_eq!(paper_mvp_increment(Variant::Sv, 20, 0, false), 20);
        assert_eq!(paper_mvp_increment(Variant::Hr, 20, 4, true), 20);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::sv(20, 4).validate().is_ok());
        assert!(SolverConfig::sv(4, 4).validate().is_err());
        assert!(SolverConfig::plain(0).validate().is_err());
        assert!(SolverConfig::plain(5).with_tol(0.0).validate().is_err());
        assert!(SolverConfig::plain(5)
            .with_tol(f64::NAN)
            .validate()
            .is_err());
        let mut c = SolverConfig::plain(5);
        c.k = 1;
        assert!(c.validate().is_err());
        assert_eq!("HR".parse::<Variant>().unwrap(), Variant::Hr);
        assert!("foo".parse::<Variant>().is_err());
    }

    #[test]
    fn identity_converges_in_one_cycle() {
        let a = CsrMatrix::identity(6);
        let b: Vec<f64> = (1..=6).map(f64::from).collect();
        for cfg in [
            SolverConfig::plain(3),
            SolverConfig::sv(3, 1),
            SolverConfig::hr(3, 1),
        ] {
            let rep = solve(&a, &b, &[0.0; 6], &cfg, Some(&b)).unwrap();
            assert!(rep.converged);
            assert_eq!(rep.record.len(), 1);
            assert!(rep.final_error_norm.unwrap() < 1e-14);
            assert_eq!(rep.record.entries[0].paper_mvp, 1);
        }
    }

    #[test]
    fn identity_singular_values_are_one() {
        let a = CsrMatrix::identity(8);
        let b: Vec<f64> = (0..8).map(|i| (i as f64).cos() + 2.0).collect();
        let mut x0 = vec![0.0; 8];
        x0[0] = 1.0;
        // breakdown happens after one step; use a diagonal with a repeated
        // eigenvalue so the basis has a few columns
        let cycle = run_cycle(&a, &b, &x0, None, 3).unwrap();
        let set = extract_singular_directions(&cycle, 1, AugmentationScaling::UnitNorm).unwrap();
        for (i, s2) in set.sigma_sq().iter().enumerate() {
            assert!((s2 - 1.0).abs() < 1e-12);
            let y = set.y().col(i);
            let ay = a.spmv(y).unwrap();
            assert!(norm2(&sub(&ay, y)) <= 1e-10);
        }
    }

    #[test]
    fn zero_rhs_and_converged_start() {
        let a = gen_laplacian_1d(5).unwrap();
        let rep = solve(&a, &[0.0; 5], &[1.0; 5], &SolverConfig::plain(3), None).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.x, vec![0.0; 5]);
        let x = vec![1.0; 5];
        let b = a.spmv(&x).unwrap();
        let rep = solve(&a, &b, &x, &SolverConfig::sv(3, 1), None).unwrap();
        assert!(rep.converged && rep.record.is_empty());
    }

    #[test]
    fn budgets_stop_the_loop() {
        let a = gen_laplacian_1d(200).unwrap();
        let b = vec![1.0; 200];
        let rep = solve(
            &a,
            &b,
            &[0.0; 200],
            &SolverConfig::plain(5).with_max_cycles(3),
            None,
        )
        .unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.stop_reason, StopReason::MaxCycles);
        assert_eq!(rep.record.len(), 3);
        let rep = solve(
            &a,
            &b,
            &[0.0; 200],
            &SolverConfig::plain(5).with_max_true_matvecs(13),
            None,
        )
        .unwrap();
        assert_eq!(rep.stop_reason, StopReason::MatvecBudget);
        assert_eq!(rep.record.last().unwrap().true_mvp, 18);
    }

    #[test]
    fn counters_and_augmentation_counts() {
        let a = gen_bidiagonal(300, 0.1).unwrap();
        let b = vec![1.0; 300];
        let rep = solve(
            &a,
            &b,
            &[0.0; 300],
            &SolverConfig::sv(10, 2).with_max_cycles(5),
            None,
        )
        .unwrap();
        let e = &rep.record.entries;
        assert_eq!(e[0].paper_mvp, 10);
        assert_eq!(e[0].augmented, 0);
        assert_eq!(e[1].paper_mvp - e[0].paper_mvp, 8);
        assert_eq!(e[1].augmented, 2);
        assert_eq!(e[1].true_mvp - e[0].true_mvp, 9);
    }

    #[test]
    fn dimension_errors() {
        let a = CsrMatrix::identity(3);
        assert!(solve(&a, &[1.0; 2], &[0.0; 3], &SolverConfig::plain(2), None).is_err());
        assert!(solve(
            &a,
            &[1.0; 3],
            &[0.0; 3],
            &SolverConfig::plain(2),
            Some(&[0.0])
        )
        .is_err());
    }
}
