mod common;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use vrd_core::numcore::{
    hermitian_eig, partial_trace_matrix, partial_transpose, partial_transpose_matrix, trace_norm,
    ComplexMatrix,
};

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigenvalues_match_nalgebra(seed in any::<u64>(), n in 1usize..=8) {
        let m = common::random_hermitian(&mut common::rng(seed), n);
        let ours = hermitian_eig(&m).unwrap();
        let mut theirs: Vec<f64> = to_nalgebra(&m).symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ours.values.iter().zip(&theirs) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        prop_assert!(ours.reconstruct().max_abs_diff(&m) <= 1e-9);
    }

    #[test]
    fn partial_transpose_is_trace_preserving_involution(seed in any::<u64>()) {
        let rho = common::random_density(&mut common::rng(seed), vec![2, 2]);
        let pt = partial_transpose(&rho, 0).unwrap();
        prop_assert!((pt.trace() - rho.matrix().trace()).norm() < 1e-12);
        let back = partial_transpose_matrix(&pt, &[2, 2], 0).unwrap();
        prop_assert!(back.max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn trace_norm_bounds_trace(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = common::rng(seed);
        let h = common::random_hermitian(&mut r, n);
        prop_assert!(trace_norm(&h).unwrap() >= h.trace().re.abs() - 1e-12);
        let rho = common::random_density(&mut r, vec![n]);
        prop_assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let a = common::random_density(&mut r, vec![2]);
        let b = common::random_density(&mut r, vec![3]);
        let ab = a.tensor(&b);
        let (kept, dims) = partial_trace_matrix(ab.matrix(), &[2, 3], &[1]).unwrap();
        prop_assert_eq!(dims, vec![3]);
        prop_assert!(kept.max_abs_diff(b.matrix()) < 1e-12);
        let (kept, _) = partial_trace_matrix(ab.matrix(), &[2, 3], &[0]).unwrap();
        prop_assert!(kept.max_abs_diff(a.matrix()) < 1e-12);
    }
}

#[test]
fn trace_norm_of_non_hermitian_matches_singular_values() {
    let m = common::random_matrix(&mut common::rng(5), 4);
    let svd = to_nalgebra(&m).svd(false, false);
    let expected: f64 = svd.singular_values.iter().sum();
    assert!((trace_norm(&m).unwrap() - expected).abs() < 1e-9);
}
