//! Smooth coordinates on U(d).
//!
//! A parameter vector of length `d²` is laid out as `d` diagonal phases
//! followed by one `(angle, phase)` pair per index pair `p < q` in
//! lexicographic order. The unitary is
//!
//! ```text
//! U = diag(e^{iα_0}, …, e^{iα_{d-1}}) · G_{01}(θ, φ) · G_{02}(θ, φ) · … · G_{d-2,d-1}(θ, φ)
//! ```
//!
//! where `G_pq` is the identity except on the `(p, q)` block
//! `[[cos(θ/2), -e^{iφ} sin(θ/2)], [e^{-iφ} sin(θ/2), cos(θ/2)]]`.
//! All-zero parameters give the identity.

use super::{c64, CMatrix};
use crate::error::{Error, Result};

pub fn parameter_count(dim: usize) -> usize {
    dim * dim
}

/// Index of the rotation angle for the `k`-th pair in lexicographic order.
pub fn rotation_angle_index(dim: usize, pair: usize) -> usize {
    dim + 2 * pair
}

pub fn parameterized_unitary(theta: &[f64], dim: usize) -> Result<CMatrix> {
    if theta.len() != parameter_count(dim) {
        return Err(Error::BadParameterCount { expected: parameter_count(dim), got: theta.len() });
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    let phases: Vec<_> = theta[..dim].iter().map(|a| c64(a.cos(), a.sin())).collect();
    let mut u = CMatrix::diag(&phases);

    let mut k = dim;
    for p in 0..dim {
        for q in p + 1..dim {
            let (angle, phi) = (theta[k], theta[k + 1]);
            k += 2;
            if angle == 0.0 {
                continue;
            }
            let (s, c) = (angle / 2.0).sin_cos();
            let e = c64(phi.cos(), phi.sin());
            let g_pq = -e * s;
            let g_qp = e.conj() * s;
            // u ← u · G (touches columns p and q only)
            for r in 0..dim {
                let up = u[(r, p)];
                let uq = u[(r, q)];
                u[(r, p)] = up * c + uq * g_qp;
                u[(r, q)] = up * g_pq + uq * c;
            }
        }
    }
    Ok(u)
}
