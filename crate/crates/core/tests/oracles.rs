mod common;

use common::*;
use jsr_core::bounds::{bounds_table, refine_bounds, rho_hat_n, rho_n};
use jsr_core::families::random_family;
use jsr_core::{eigenvalues, evaluate_word, Matrix, MatrixSet, NormKind, Word, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, d: usize, complex: bool) -> Matrix {
    let entries: Vec<C64> = (0..d * d)
        .map(|_| {
            let re = rng.gen::<f64>() * 2.0 - 1.0;
            let im = if complex { rng.gen::<f64>() * 2.0 - 1.0 } else { 0.0 };
            C64::new(re, im)
        })
        .collect();
    if complex {
        Matrix::complex(d, entries).unwrap()
    } else {
        Matrix::real(d, &entries.iter().map(|z| z.re).collect::<Vec<_>>()).unwrap()
    }
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..120 {
        let d = 2 + trial % 5;
        let a = random_matrix(&mut rng, d, trial % 3 == 0);
        let got = eigenvalues(&a).unwrap().eigenvalues;
        let mut want = oracle_eigenvalues(&dense(&a));
        assert_eq!(got.len(), d);
        // greedy matching
        for g in &got {
            let (idx, dist) = want
                .iter()
                .enumerate()
                .map(|(i, w)| (i, (w - g).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            assert!(dist < 1e-7, "trial {trial}: {g} vs {:?}", want);
            want.remove(idx);
        }
    }
}

#[test]
fn norms_and_spectral_radius_match() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..60 {
        let d = 2 + trial % 4;
        let a = random_matrix(&mut rng, d, trial % 2 == 1);
        let da = dense(&a);
        for kind in NormKind::ALL {
            let want = oracle_norm(&da, kind);
            assert!((a.norm(kind) - want).abs() <= 1e-9 * want, "{kind}");
        }
        let rho = jsr_core::spectral_radius(&a).unwrap();
        assert!((rho - oracle_rho(&da)).abs() <= 1e-8 * rho.max(1.0));
    }
}

#[test]
fn five_by_five_determinant_matches_cofactor_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for complex in [false, true] {
        for d in [5, 6] {
            let a = random_matrix(&mut rng, d, complex);
            let want = cofactor_det(&dense(&a));
            assert!((a.determinant() - want).norm() <= 1e-12 * want.norm().max(1.0));
        }
    }
    let a = Matrix::from_rows(&[
        [2.0, 0.0, 1.0, 0.0, 3.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [0.0, 4.0, 1.0, 2.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 1.0],
        [1.0, 0.0, 0.0, 0.0, 2.0],
    ])
    .unwrap();
    assert!((a.determinant().re - cofactor_det(&dense(&a)).re).abs() < 1e-12);
}

#[test]
fn products_match_naive_multiplication() {
    let set = random_family(3, 3, 3, 1.0).unwrap();
    for w in all_words(3, 4) {
        let got = evaluate_word(&set, &Word::new(w.clone()).unwrap()).unwrap().to_matrix();
        let want = word_product(&set, &w);
        for i in 0..3 {
            for j in 0..3 {
                assert!((got.get(i, j) - want[i][j]).norm() < 1e-13);
            }
        }
    }
}

fn check_against_brute_force(set: &MatrixSet, depth: usize) {
    for n in 1..=depth {
        let (want, _) = brute_rho_n(set, n);
        let got = rho_n(set, n).unwrap();
        assert!((got.value() - want).abs() <= 1e-9 * want.max(1e-300), "rho_{n}: {} vs {want}", got.value());
        let achieved = oracle_rho(&word_product(set, got.word.indices()));
        assert!((achieved - want).abs() <= 1e-9 * want.max(1e-300));
        for kind in NormKind::ALL {
            let want = brute_rho_hat_n(set, n, kind);
            let got = rho_hat_n(set, n, kind).unwrap();
            assert!((got.value() - want).abs() <= 1e-9 * want, "hat rho_{n} ({kind}) {:?}: {} vs {want}", set.name(), got.value());
        }
    }
}

#[test]
fn depth_extrema_match_brute_force() {
    for set in corpus() {
        check_against_brute_force(&set, 6);
    }
    check_against_brute_force(&random_family(21, 3, 3, 1.0).unwrap(), 4);
}

#[test]
fn refined_bounds_never_lose_the_maximum() {
    for seed in 0..6 {
        let set = random_family(100 + seed, 2, 3, 1.0).unwrap();
        let full = bounds_table(&set, 6, NormKind::Two).unwrap();
        let pruned = refine_bounds(&set, 6, 10_000_000, NormKind::Two).unwrap();
        for (a, b) in full.rows.iter().zip(&pruned.rows) {
            assert_eq!(a.lo_word, b.lo_word);
            assert_eq!(a.lo, b.lo);
            assert!(b.hi >= a.hi * (1.0 - 1e-12));
        }
        assert!(pruned.nodes <= full.nodes);
    }
}
