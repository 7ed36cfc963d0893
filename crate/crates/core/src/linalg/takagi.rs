//! Takagi (Autonne–Takagi) factorization `s = u · diag(d) · uᵀ` of a complex
//! symmetric matrix.
//!
//! With `s = a + ib`, a column `u = x + iy` with `s ū = σ u` is exactly an
//! eigenvector `(x; y)` of the real symmetric matrix `[[a, b], [b, -a]]` with
//! eigenvalue `σ`. That matrix has spectrum `±σ_i`, so its top half yields the
//! factorization. Columns belonging to (numerically) zero `σ` are completed
//! to an orthonormal basis by Gram–Schmidt.

use super::{c64, eigh_unchecked, CMatrix, CVector};
use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const NULL_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Takagi {
    /// Unitary with `s = u · diag(d) · uᵀ`.
    pub u: CMatrix,
    /// Non-negative Takagi values, descending.
    pub d: Vec<f64>,
}

impl Takagi {
    pub fn reconstruct(&self) -> CMatrix {
        let scaled = CMatrix::from_fn(self.u.rows(), self.u.cols(), |i, j| self.u[(i, j)] * self.d[j]);
        &scaled * &self.u.transpose()
    }
}

pub fn takagi(s: &CMatrix) -> Result<Takagi> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", s.rows(), s.cols())));
    }
    let err = s.symmetry_error();
    if err > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(err));
    }
    let n = s.rows();
    if n == 0 {
        return Ok(Takagi { u: CMatrix::zeros(0, 0), d: Vec::new() });
    }
    let sym = CMatrix::from_fn(n, n, |i, j| (s[(i, j)] + s[(j, i)]) * 0.5);

    let embed = CMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, ii) = (i / n, i % n);
        let (bj, jj) = (j / n, j % n);
        let z = sym[(ii, jj)];
        let v = match (bi, bj) {
            (0, 0) => z.re,
            (1, 1) => -z.re,
            _ => z.im,
        };
        c64(v, 0.0)
    });
    let eig = eigh_unchecked(&embed);

    let top = eig.values[0].max(0.0);
    let cutoff = NULL_CUTOFF * top.max(f64::MIN_POSITIVE);
    let mut columns: Vec<CVector> = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    for (sigma, vec) in eig.values.iter().zip(&eig.vectors).take(n) {
        if *sigma <= cutoff {
            break;
        }
        let mut u = CVector::from_vec((0..n).map(|k| c64(vec[k].re, vec[n + k].re)).collect());
        // Small σ pairs with -σ can mix at the 1e-16/σ level; re-orthogonalize.
        for c in &columns {
            let proj = c.inner(&u);
            u = &u - &c.scale(proj);
        }
        columns.push(u.normalized());
        d.push(*sigma);
    }
    // Complete the null block.
    let mut candidate = 0;
    while columns.len() < n {
        let mut w = CVector::basis(n, candidate % n);
        if candidate >= n {
            // Fallback direction if the standard basis was exhausted numerically.
            w = CVector::from_vec((0..n).map(|k| c64(1.0 + k as f64, (candidate + k) as f64)).collect());
        }
        candidate += 1;
        for _ in 0..2 {
            for c in &columns {
                let proj = c.inner(&w);
                w = &w - &c.scale(proj);
            }
        }
        let norm = w.norm();
        if norm > 1e-6 {
            columns.push(w.scale_real(1.0 / norm));
            d.push(0.0);
        }
    }
    Ok(Takagi { u: CMatrix::from_columns(&columns), d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ginibre;
    use rand::SeedableRng;

    #[test]
    fn identity_factorizes_trivially() {
        let t = takagi(&CMatrix::identity(3)).unwrap();
        for x in &t.d {
            assert!((x - 1.0).abs() < 1e-12);
        }
        assert!(t.reconstruct().max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn phases_go_into_u() {
        let phases: Vec<_> = [0.3, 1.7, -2.2].iter().map(|t: &f64| c64(t.cos(), t.sin())).collect();
        let s = CMatrix::diag(&phases);
        let t = takagi(&s).unwrap();
        for x in &t.d {
            assert!((x - 1.0).abs() < 1e-12);
        }
        assert!(t.reconstruct().max_abs_diff(&s) < 1e-12);
        assert!(t.u.unitarity_error() < 1e-12);
    }

    #[test]
    fn rank_deficient_symmetric() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = ginibre(4, 2, &mut rng);
        let s = &g * &g.transpose();
        let t = takagi(&s).unwrap();
        assert!(t.d[2] < 1e-10 && t.d[3] < 1e-10);
        assert!(t.reconstruct().max_abs_diff(&s) < 1e-10);
        assert!(t.u.unitarity_error() < 1e-10);
    }

    #[test]
    fn rejects_asymmetric() {
        let s = CMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(takagi(&s), Err(Error::NotSymmetric(_))));
    }
}
