mod common;

use common::*;
use proptest::prelude::*;
use svgmres::diagnostics::{augmentation_consistency, explicit_relres, factorization_residual};
use svgmres::{
    extract_harmonic_directions, extract_singular_directions, gen_bidiagonal, gen_laplacian_1d,
    run_cycle, solve, solve_observed, AugmentationScaling, CsrMatrix, MagnitudeOrder, SolverConfig,
};

fn random_system(seed: u64, n: usize) -> (CsrMatrix, Vec<f64>) {
    let mut r = rng(seed);
    let mut a = to_na(&gaussian_matrix(&mut r, n, n));
    a += nalgebra::DMatrix::identity(n, n) * (n as f64).sqrt() * 2.0;
    (CsrMatrix::from_dense(&from_na(&a)), gaussian(&mut r, n))
}

#[test]
fn full_cycle_solves_dense_system() {
    for seed in 0..5 {
        let (a, b) = random_system(seed, 20);
        let cycle = run_cycle(&a, &b, &[0.0; 20], None, 20).unwrap();
        let oracle = to_na(&a.to_dense()).lu().solve(&vec_na(&b)).unwrap();
        assert!(max_abs_diff(&cycle.x_new, oracle.as_slice()) <= 1e-10 * oracle.amax());
        assert!(cycle.relres <= 1e-12);
    }
}

#[test]
fn singular_extraction_at_full_dimension() {
    let (a, b) = random_system(7, 30);
    let cycle = run_cycle(&a, &b, &vec![0.0; 30], None, 30).unwrap();
    let set = extract_singular_directions(&cycle, 3, AugmentationScaling::UnitNorm).unwrap();
    let mut sv: Vec<f64> = to_na(&a.to_dense())
        .singular_values()
        .iter()
        .copied()
        .collect();
    sv.sort_by(f64::total_cmp);
    assert_eq!(set.len(), 3);
    let an = to_na(&a.to_dense());
    for i in 0..3 {
        assert!(
            (set.sigma_sq()[i].sqrt() - sv[i]).abs() <= 1e-6 * sv[i],
            "{i}"
        );
        let y = vec_na(set.y().col(i));
        // A^T A y = sigma^2 y
        let res = an.transpose() * (&an * &y) - &y * set.sigma_sq()[i];
        assert!(res.norm() <= 1e-6 * sv[29] * sv[29]);
    }
    assert!(augmentation_consistency(&a, &set).unwrap() <= 1e-10);
}

#[test]
fn harmonic_extraction_at_full_dimension_finds_smallest_eigenvalue() {
    let mut r = rng(12);
    let a = CsrMatrix::from_dense(&spd(&mut r, 30));
    let b = gaussian(&mut r, 30);
    let cycle = run_cycle(&a, &b, &vec![0.0; 30], None, 30).unwrap();
    let hr = extract_harmonic_directions(
        &cycle,
        2,
        MagnitudeOrder::Smallest,
        AugmentationScaling::UnitNorm,
    )
    .unwrap();
    assert!(!hr.skipped);
    let mut eig: Vec<f64> = to_na(&a.to_dense())
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eig.sort_by(f64::total_cmp);
    assert!((hr.set.sigma_sq()[0] - eig[0]).abs() <= 1e-6 * eig[0]);
    assert!(augmentation_consistency(&a, &hr.set).unwrap() <= 1e-10);
}

#[test]
fn cycle_is_optimal_over_its_search_space() {
    let a = gen_bidiagonal(300, 0.1).unwrap();
    let b = vec![1.0; 300];
    let x0 = vec![0.0; 300];
    let first = run_cycle(&a, &b, &x0, None, 12).unwrap();
    let aug = extract_singular_directions(&first, 3, AugmentationScaling::AsComputed).unwrap();
    let cycle = run_cycle(&a, &b, &first.x_new, Some(&aug), 12).unwrap();
    assert_eq!(cycle.augmented, 3);
    let best = explicit_relres(&a, &b, &cycle.x_new).unwrap();
    let mut r = rng(1);
    let w = cycle.workspace.w();
    for _ in 0..50 {
        let mut d = cycle.d.clone();
        let delta = gaussian(&mut r, d.len());
        for (di, e) in d.iter_mut().zip(&delta) {
            *di += 1e-3 * e;
        }
        let mut x = first.x_new.clone();
        let step = w.matvec(&d).unwrap();
        x.iter_mut().zip(&step).for_each(|(xi, s)| *xi += s);
        assert!(explicit_relres(&a, &b, &x).unwrap() >= best * (1.0 - 1e-12));
    }
}

#[test]
fn augmented_products_track_explicit_products() {
    let a = gen_laplacian_1d(400).unwrap();
    let mut b = vec![0.0; 400];
    b[0] = 1.0;
    b[399] = 1.0;
    let mut worst: f64 = 0.0;
    let mut r = rng(5);
    solve_observed(
        &a,
        &b,
        &vec![0.0; 400],
        &SolverConfig::sv(16, 4).with_max_cycles(30),
        None,
        |c| {
            let probes: Vec<Vec<f64>> = (0..3).map(|_| gaussian(&mut r, c.n_cols())).collect();
            worst = worst.max(factorization_residual(&a, c, &probes).unwrap() / a.frobenius_norm());
            let set = extract_singular_directions(c, 4, AugmentationScaling::AsComputed).unwrap();
            worst = worst.max(augmentation_consistency(&a, &set).unwrap());
        },
    )
    .unwrap();
    assert!(worst <= 1e-10, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn residual_history_is_nonincreasing(
        seed in any::<u64>(),
        variant in prop_oneof![Just(0u8), Just(1), Just(2)],
        m in 6usize..14,
    ) {
        let (a, b) = random_system(seed, 40);
        let config = match variant {
            0 => SolverConfig::plain(m),
            1 => SolverConfig::sv(m, 2),
            _ => SolverConfig::hr(m, 2),
        }
        .with_max_cycles(15);
        let rep = solve(&a, &b, &vec![0.0; 40], &config, None).unwrap();
        let mut prev = 1.0;
        for e in &rep.record.entries {
            prop_assert!(e.relres <= prev * (1.0 + 1e-10), "{} > {}", e.relres, prev);
            prev = e.relres;
        }
        // the explicit residual itself is only good to about eps * ||b||
        let explicit = explicit_relres(&a, &b, &rep.x).unwrap();
        prop_assert!((explicit - rep.final_relres).abs() <= 1e-8 * explicit + 1e-13);
    }
}
