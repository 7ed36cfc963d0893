mod common;

use common::*;
use proptest::prelude::*;
use qsslab_core::linalg::{
    haar_unitary, hermitian_eig, kron, parameterized_unitary, partial_trace, partial_transpose, permutation_matrix,
    permute_subsystems, restart_rng, takagi, CMatrix, Side,
};

fn seeded_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
    random_complex_matrix(rows, cols, &mut restart_rng(seed, 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_matches_sandwich_oracle(da in 1usize..4, db in 1usize..4, seed in any::<u64>()) {
        let m = seeded_matrix(da * db, da * db, seed);
        let a = partial_trace(&m, &[da, db], &[0]).unwrap();
        let b = partial_trace(&m, &[da, db], &[1]).unwrap();
        prop_assert!(a.max_abs_diff(&partial_trace_oracle(&m, da, db, true)) < 1e-12);
        prop_assert!(b.max_abs_diff(&partial_trace_oracle(&m, da, db, false)) < 1e-12);
        prop_assert!((a.trace() - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_matches_oracle(da in 1usize..4, db in 1usize..4, seed in any::<u64>()) {
        let m = seeded_matrix(da * db, da * db, seed);
        let pb = partial_transpose(&m, da, db, Side::B).unwrap();
        prop_assert!(pb.max_abs_diff(&partial_transpose_b_oracle(&m, da, db)) < 1e-12);
        let pa = partial_transpose(&m, da, db, Side::A).unwrap();
        prop_assert!(pa.max_abs_diff(&pb.transpose()) < 1e-12);
    }

    #[test]
    fn haar_and_parameterized_unitaries(d in 1usize..7, seed in any::<u64>(), scale in 0.0f64..10.0) {
        prop_assert!(haar_unitary(d, seed).unitarity_error() < 1e-12);
        let theta: Vec<f64> = (0..d * d).map(|k| scale * ((k as f64 * 1.7 + seed as f64).sin())).collect();
        prop_assert!(parameterized_unitary(&theta, d).unwrap().unitarity_error() < 1e-12);
    }

    #[test]
    fn eigendecomposition_reconstructs(d in 1usize..9, seed in any::<u64>()) {
        let h = seeded_matrix(d, d, seed).hermitian_part();
        let e = hermitian_eig(&h).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&h) < 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        for (i, u) in e.vectors.iter().enumerate() {
            for (j, v) in e.vectors.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((u.inner(v).norm() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn takagi_reconstructs(n in 1usize..7, rank in 1usize..7, seed in any::<u64>()) {
        let r = rank.min(n);
        let f = seeded_matrix(n, r, seed);
        let s = &f * &f.transpose();
        let t = takagi(&s).unwrap();
        prop_assert!(t.reconstruct().max_abs_diff(&s) < 1e-11);
        prop_assert!(t.u.unitarity_error() < 1e-11);
        prop_assert!(t.d.iter().all(|&x| x >= 0.0));
        prop_assert!(t.d.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn permutation_conjugation_matches_matrix(seed in any::<u64>()) {
        let dims = [2, 3, 2];
        let perm = [2, 0, 1];
        let m = seeded_matrix(12, 12, seed);
        let p = permutation_matrix(&dims, &perm).unwrap();
        let direct = permute_subsystems(&m, &dims, &perm).unwrap();
        prop_assert!(direct.max_abs_diff(&(&(&p * &m) * &p.transpose())) < 1e-14);
        prop_assert!(p.unitarity_error() < 1e-15);
    }
}

#[test]
fn kron_of_products_factorizes() {
    let a = seeded_matrix(2, 2, 1);
    let b = seeded_matrix(3, 3, 2);
    let c = seeded_matrix(2, 2, 3);
    let d = seeded_matrix(3, 3, 4);
    let lhs = &kron(&a, &b) * &kron(&c, &d);
    let rhs = kron(&(&a * &c), &(&b * &d));
    assert!(lhs.max_abs_diff(&rhs) < 1e-13);
}

#[test]
fn characteristic_polynomial_oracle_sanity() {
    let m = CMatrix::diag_real(&[0.5, 0.25, 0.125, 0.125]);
    let mut roots: Vec<f64> = poly_roots(&char_poly(&m)).iter().map(|z| z.re).collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    for (r, e) in roots.iter().zip([0.5, 0.25, 0.125, 0.125]) {
        assert!((r - e).abs() < 1e-7);
    }
}
