//! Cyclic Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64;

use super::{CMatrix, CVector};
use crate::error::{Error, Result};
use crate::tolerance::HERMITIAN_TOL;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
}

impl HermitianEigen {
    /// `Σ λ_i v_i v_i†`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.vectors.first().map_or(0, CVector::dim);
        let mut out = CMatrix::zeros(n, n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            out = &out + &v.projector().scale_real(*lambda);
        }
        out
    }

    /// Applies `f` to the spectrum: `Σ f(λ_i) v_i v_i†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.first().map_or(0, CVector::dim);
        let mut out = CMatrix::zeros(n, n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w != 0.0 {
                for i in 0..n {
                    for j in 0..n {
                        out[(i, j)] += v[i] * v[j].conj() * w;
                    }
                }
            }
        }
        out
    }
}

/// Diagonalizes a Hermitian matrix.
///
/// Fails with [`Error::NotHermitian`] when `max |h - h†|` exceeds 1e-10.
pub fn hermitian_eig(h: &CMatrix) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", h.rows(), h.cols())));
    }
    let err = h.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    Ok(eigh_unchecked(h))
}

/// Jacobi sweeps on the Hermitian part of `h`, no precondition check.
pub(crate) fn eigh_unchecked(h: &CMatrix) -> HermitianEigen {
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();

    if n > 1 && scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 =
                (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).map(|(p, q)| a[(p, q)].norm_sqr()).sum();
            if off.sqrt() <= 1e-16 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    HermitianEigen {
        values: order.iter().map(|&i| a[(i, i)].re).collect(),
        vectors: order.iter().map(|&i| v.column(i)).collect(),
    }
}

/// One Jacobi rotation zeroing `a[p][q]`.
///
/// The block `[[a_pp, b e^{iφ}], [b e^{-iφ}, a_qq]]` is brought to real form by
/// `diag(1, e^{-iφ})`, then diagonalized by a real plane rotation. The
/// combined unitary is
/// `J = [[c, s], [-s e^{-iφ}, c e^{-iφ}]]` and `a ← J† a J`, `v ← v J`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if b < 1e-300 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let theta = (aqq - app) / (2.0 * b);
    let t =
        if theta.abs() > 1e150 { 0.5 / theta } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = apq / b;
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = a.rows();
    // a ← a J (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * jqp;
        a[(k, q)] = akp * s + akq * jqq;
    }
    // a ← J† a (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * jqp.conj();
        a[(q, k)] = apk * s + aqk * jqq.conj();
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * jqp;
        v[(k, q)] = vkp * s + vkq * jqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, pauli};

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eig(&CMatrix::identity(4)).unwrap();
        assert_eq!(e.values, vec![1.0; 4]);
    }

    #[test]
    fn sigma_z_spectrum_and_vectors() {
        let e = hermitian_eig(&pauli::z()).unwrap();
        assert_eq!(e.values, vec![1.0, -1.0]);
        assert!((e.vectors[0].inner(&CVector::basis(2, 0)).norm() - 1.0).abs() < 1e-15);
        assert!((e.vectors[1].inner(&CVector::basis(2, 1)).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_y_has_complex_eigenvectors() {
        let e = hermitian_eig(&pauli::y()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let y = pauli::y();
        for (l, v) in e.values.iter().zip(&e.vectors) {
            assert!(y.apply(v).max_abs_diff(&v.scale_real(*l)) < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_rows(&[vec![c64(1.0, 0.0), c64(1.0, 0.0)], vec![c64(0.0, 0.0), c64(1.0, 0.0)]]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn degenerate_block_stays_orthonormal() {
        let m = CMatrix::diag_real(&[2.0, 2.0, 2.0, -1.0]);
        let u = crate::linalg::haar_unitary(4, 3);
        let h = u.conjugate(&m);
        let e = hermitian_eig(&h).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((e.vectors[i].inner(&e.vectors[j]) - c64(expected, 0.0)).norm() < 1e-12);
            }
        }
        assert!(e.reconstruct().max_abs_diff(&h) < 1e-12);
    }
}
