//! Tensor-factor bookkeeping: partial trace, partial transpose and subsystem
//! permutations on matrices over `d_0 ⊗ d_1 ⊗ …` (first factor most
//! significant).

use super::{c64, CMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    A,
    B,
}

fn check_square(m: &CMatrix, dims: &[usize]) -> Result<usize> {
    let d: usize = dims.iter().product();
    if !m.is_square() || m.rows() != d {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} (product {d}) vs {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(d)
}

/// Splits a flat index into per-factor digits.
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn flat(digits: &[usize], dims: &[usize], factors: &[usize]) -> usize {
    factors.iter().fold(0, |acc, &k| acc * dims[k] + digits[k])
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their
/// original relative order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let d = check_square(m, dims)?;
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::DimensionMismatch(format!("keep {keep:?} out of range for {} factors", dims.len())));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let mut out = CMatrix::zeros(dk, dk);
    let mut di = vec![0; dims.len()];
    let mut dj = vec![0; dims.len()];
    for i in 0..d {
        digits(i, dims, &mut di);
        let ri = flat(&di, dims, &keep);
        for j in 0..d {
            digits(j, dims, &mut dj);
            if traced.iter().all(|&k| di[k] == dj[k]) {
                out[(ri, flat(&dj, dims, &keep))] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Transposes the indices of one party of a `d_A ⊗ d_B` matrix.
pub fn partial_transpose(m: &CMatrix, d_a: usize, d_b: usize, side: Side) -> Result<CMatrix> {
    check_square(m, &[d_a, d_b])?;
    Ok(CMatrix::from_fn(d_a * d_b, d_a * d_b, |i, j| {
        let (a, b) = (i / d_b, i % d_b);
        let (a2, b2) = (j / d_b, j % d_b);
        match side {
            Side::A => m[(a2 * d_b + b, a * d_b + b2)],
            Side::B => m[(a * d_b + b2, a2 * d_b + b)],
        }
    }))
}

fn check_perm(dims: &[usize], perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!("permutation {perm:?} for {} factors", dims.len())));
    }
    for &p in perm {
        if p >= dims.len() || seen[p] {
            return Err(Error::DimensionMismatch(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Maps each old flat index to its flat index after reordering factors so that
/// new factor `k` is old factor `perm[k]`.
fn index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let d: usize = dims.iter().product();
    let mut dig = vec![0; dims.len()];
    (0..d)
        .map(|i| {
            digits(i, dims, &mut dig);
            flat(&dig, dims, perm)
        })
        .collect()
}

/// Permutation matrix `P` with `P |i_0 … i_n⟩ = |i_{perm[0]} … i_{perm[n]}⟩`.
pub fn permutation_matrix(dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    check_perm(dims, perm)?;
    let map = index_map(dims, perm);
    let d = map.len();
    let mut p = CMatrix::zeros(d, d);
    for (old, &new) in map.iter().enumerate() {
        p[(new, old)] = c64(1.0, 0.0);
    }
    Ok(p)
}

/// `P m Pᵀ` for the permutation of [`permutation_matrix`], computed by index
/// relabelling.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    check_square(m, dims)?;
    check_perm(dims, perm)?;
    let map = index_map(dims, perm);
    let d = map.len();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, CVector};

    fn phi_plus() -> CMatrix {
        CVector::from_real(&[1.0, 0.0, 0.0, 1.0]).normalized().projector()
    }

    #[test]
    fn product_state_factorizes() {
        let rho = CMatrix::from_real(2, 2, &[0.7, 0.1, 0.1, 0.3]);
        let sigma = CMatrix::from_real(3, 3, &[0.5, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25]).scale_real(2.0);
        let joint = rho.kron(&sigma);
        let keep_a = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(keep_a.max_abs_diff(&rho.scale_real(2.0)) < 1e-15);
        let keep_b = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(keep_b.max_abs_diff(&sigma) < 1e-15);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = partial_trace(&phi_plus(), &[2, 2], &[0]).unwrap();
        assert!(r.max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        assert!(partial_trace(&CMatrix::identity(4), &[2, 3], &[0]).is_err());
        assert!(partial_trace(&CMatrix::identity(4), &[2, 2], &[2]).is_err());
    }

    #[test]
    fn partial_transpose_of_product() {
        let a = pauli::y().scale_real(0.2);
        let a = &a + &CMatrix::identity(2).scale_real(0.5);
        let b = CMatrix::identity(2).scale_real(0.5);
        let pt = partial_transpose(&a.kron(&b), 2, 2, Side::A).unwrap();
        assert!(pt.max_abs_diff(&a.transpose().kron(&b)) < 1e-15);
    }

    #[test]
    fn partial_transpose_bell_spectrum() {
        let pt = partial_transpose(&phi_plus(), 2, 2, Side::B).unwrap();
        let e = crate::linalg::hermitian_eig(&pt).unwrap();
        assert!((e.values[3] + 0.5).abs() < 1e-14);
        assert!((e.values[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn swap_permutation() {
        let p = permutation_matrix(&[2, 2], &[1, 0]).unwrap();
        let swap = CMatrix::from_real(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        assert_eq!(p, swap);
    }

    #[test]
    fn storage_to_action_order_moves_kets() {
        // [SS_A, SS_B, AS_A, AS_B] -> [SS_A, AS_A, SS_B, AS_B]
        let dims = [2, 2, 2, 2];
        let perm = [0, 2, 1, 3];
        let p = permutation_matrix(&dims, &perm).unwrap();
        // |s_A=1, s_B=0, a_A=0, a_B=1⟩ = index 0b1001 -> |1,0,0,1⟩ in action order
        // whose digits read (s_A, a_A, s_B, a_B) = (1, 0, 0, 1) = 0b1001.
        let v = p.apply(&CVector::basis(16, 0b1001));
        assert_eq!(v, CVector::basis(16, 0b1001));
        // |s_A=0, s_B=1, a_A=0, a_B=0⟩ = 0b0100 -> (0, 0, 1, 0) = 0b0010
        let v = p.apply(&CVector::basis(16, 0b0100));
        assert_eq!(v, CVector::basis(16, 0b0010));
        let m = CMatrix::from_fn(16, 16, |i, j| c64(i as f64, j as f64));
        let direct = permute_subsystems(&m, &dims, &perm).unwrap();
        assert_eq!(direct, &(&p * &m) * &p.transpose());
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(permutation_matrix(&[2, 2], &[0, 0]).is_err());
        assert!(permutation_matrix(&[2, 2], &[0]).is_err());
    }
}
