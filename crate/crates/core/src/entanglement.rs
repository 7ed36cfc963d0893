//! Two-qubit entanglement: spin flip, the λ′ spectrum, concurrence and the
//! decomposition `{|z_i⟩}` with `⟨z_i|z̃_j⟩ = λ′_i δ_ij`; plus PPT and Schmidt
//! tools for general bipartite dimensions.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, eigh_unchecked, partial_transpose, takagi, CMatrix, CVector, Side};
use crate::states::{spectral_ensemble, Ensemble, QuantumState};
use crate::tolerance::{LAMBDA_ZERO, PPT_TOL, RANK_CUTOFF};

fn require_two_qubit(rho: &QuantumState) -> Result<()> {
    if rho.is_two_qubit() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("two-qubit state required, got dims {:?}", rho.dims())))
    }
}

/// `σ_y ⊗ σ_y` applied to the entrywise conjugate of `v`.
pub fn spin_flip(v: &CVector) -> Result<CVector> {
    if v.dim() != 4 {
        return Err(Error::DimensionMismatch(format!("spin flip needs a 4-vector, got {}", v.dim())));
    }
    let s = v.as_slice();
    Ok(CVector::from_vec(vec![-s[3].conj(), s[2].conj(), s[1].conj(), -s[0].conj()]))
}

/// `⟨a|b̃⟩ = Σ conj(a_k) (σ_y⊗σ_y)_{kl} conj(b_l)`; symmetric in `a`, `b`.
fn tilde_overlap(a: &CVector, b: &CVector) -> num_complex::Complex64 {
    let (a, b) = (a.as_slice(), b.as_slice());
    (-(a[0] * b[3]) + a[1] * b[2] + a[2] * b[1] - a[3] * b[0]).conj()
}

/// λ′ spectrum, descending: square roots of the eigenvalues of `ρ ρ̃`.
///
/// Computed as the singular values of `√ρ (σ_y⊗σ_y) √ρ*`, whose Gram matrix
/// is `√ρ ρ̃ √ρ`, read off the Hermitian dilation `[[0, M], [M†, 0]]` so that
/// small values keep absolute accuracy. Eigenvalues of `ρ` below the rank
/// cutoff are treated as zero, as in [`magic_decomposition`].
pub fn lambda_primes(rho: &QuantumState) -> Result<[f64; 4]> {
    require_two_qubit(rho)?;
    Ok(lambda_primes_of(rho.matrix()))
}

pub(crate) fn lambda_primes_of(rho: &CMatrix) -> [f64; 4] {
    const SIGN: [f64; 4] = [-1.0, 1.0, 1.0, -1.0];
    let eig = eigh_unchecked(rho);
    let top = eig.values[0].max(0.0);
    let s = eig.map_spectrum(|l| if l > RANK_CUTOFF * top { l.sqrt() } else { 0.0 });
    let m = CMatrix::from_fn(4, 4, |i, j| (0..4).map(|k| s[(i, k)] * s[(3 - k, j)].conj() * SIGN[k]).sum());
    let dilation = CMatrix::from_fn(8, 8, |i, j| match (i < 4, j < 4) {
        (true, false) => m[(i, j - 4)],
        (false, true) => m[(j, i - 4)].conj(),
        _ => c64(0.0, 0.0),
    });
    let values = eigh_unchecked(&dilation).values;
    let mut out = [0.0; 4];
    for (o, v) in out.iter_mut().zip(&values) {
        *o = v.max(0.0);
    }
    out
}

/// `λ′_1 - λ′_2 - λ′_3 - λ′_4` without clipping at zero.
pub fn concurrence_margin(rho: &QuantumState) -> Result<f64> {
    let l = lambda_primes(rho)?;
    Ok(l[0] - l[1] - l[2] - l[3])
}

/// `max(0, λ′_1 - λ′_2 - λ′_3 - λ′_4)`.
pub fn concurrence(rho: &QuantumState) -> Result<f64> {
    Ok(concurrence_margin(rho)?.clamp(0.0, 1.0))
}

pub(crate) fn concurrence_of(rho: &CMatrix) -> f64 {
    let l = lambda_primes_of(rho);
    (l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0)
}

/// Decomposition `|z_i⟩ = Σ_j u_ij |x_j⟩` of a two-qubit state with
/// `⟨z_i|z̃_j⟩ = λ′_i δ_ij`.
#[derive(Debug, Clone, Serialize)]
pub struct MagicDecomposition {
    /// Unnormalized `|z_i⟩`; `⟨z_i|z_i⟩` is the member weight.
    pub z_states: Vec<CVector>,
    /// `λ′_i = ⟨z_i|z̃_i⟩`, descending, one per `|z_i⟩`.
    pub lambda_primes: Vec<f64>,
    /// The unitary taking the subnormalized eigenvectors to the `|z_i⟩`.
    pub transform: CMatrix,
    /// `{|z_i⟩}` as a normalized ensemble.
    pub ensemble: Ensemble,
}

impl MagicDecomposition {
    /// `λ′` padded with zeros to length 4, for comparison with
    /// [`lambda_primes`].
    pub fn padded_lambda_primes(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, l) in out.iter_mut().zip(&self.lambda_primes) {
            *o = *l;
        }
        out
    }

    /// `Σ |z_i⟩⟨z_i|`.
    pub fn reconstruct(&self) -> CMatrix {
        self.z_states.iter().fold(CMatrix::zeros(4, 4), |acc, z| &acc + &z.projector())
    }

    /// Table of `⟨z_i|z̃_j⟩`.
    pub fn tilde_gram(&self) -> CMatrix {
        let n = self.z_states.len();
        CMatrix::from_fn(n, n, |i, j| tilde_overlap(&self.z_states[i], &self.z_states[j]))
    }
}

/// Builds `τ_ij = ⟨x_i|x̃_j⟩` over the subnormalized eigenvectors, Takagi
/// factors `τ = U D Uᵀ` and sets `|z_i⟩ = Σ_j U_ji |x_j⟩`, which turns the
/// table into `D`.
pub fn magic_decomposition(rho: &QuantumState) -> Result<MagicDecomposition> {
    require_two_qubit(rho)?;
    let spectral = spectral_ensemble(rho);
    let xs = spectral.subnormalized();
    let l = xs.len();
    let tau = CMatrix::from_fn(l, l, |i, j| tilde_overlap(&xs[i], &xs[j]));
    let tk = takagi(&tau)?;
    let transform = tk.u.transpose();

    let mut entries: Vec<(f64, CVector)> = (0..l)
        .map(|i| {
            let mut z = CVector::zeros(4);
            for (j, x) in xs.iter().enumerate() {
                let t = transform[(i, j)];
                for (zk, xk) in z.as_mut_slice().iter_mut().zip(x.as_slice()) {
                    *zk += t * xk;
                }
            }
            // ⟨z|z̃⟩ picks up e^{-2iα} under z → e^{iα} z; rotate it onto the
            // non-negative real axis.
            let c = tilde_overlap(&z, &z);
            if c.norm() > 0.0 {
                let alpha = c.arg() / 2.0;
                z = z.scale(c64(alpha.cos(), alpha.sin()));
            }
            (tilde_overlap(&z, &z).re.max(0.0), z)
        })
        .collect();
    sort_descending_with_ties(&mut entries);

    let rows: Vec<Vec<_>> = entries
        .iter()
        .map(|(_, z)| {
            // Recover the transform row for the reordered, rephased z.
            xs.iter().map(|x| x.inner(z) / x.norm_sqr()).collect()
        })
        .collect();
    let transform = CMatrix::from_rows(&rows);

    let weight_total: f64 = entries.iter().map(|(_, z)| z.norm_sqr()).sum();
    let members = entries
        .iter()
        .filter(|(_, z)| z.norm_sqr() > 1e-300)
        .map(|(_, z)| (z.norm_sqr() / weight_total, z.normalized()))
        .collect();
    Ok(MagicDecomposition {
        lambda_primes: entries.iter().map(|(l, _)| *l).collect(),
        z_states: entries.into_iter().map(|(_, z)| z).collect(),
        transform,
        ensemble: Ensemble::from_pairs(members, vec![2, 2])?,
    })
}

/// Sorts by value descending; values within `LAMBDA_ZERO` of a group's first
/// value are ordered lexicographically by vector entries.
fn sort_descending_with_ties(entries: &mut [(f64, CVector)]) {
    entries.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut start = 0;
    while start < entries.len() {
        let head = entries[start].0;
        let mut end = start + 1;
        while end < entries.len() && head - entries[end].0 <= LAMBDA_ZERO {
            end += 1;
        }
        entries[start..end].sort_by(|a, b| lexicographic(&a.1, &b.1));
        start = end;
    }
}

fn lexicographic(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Smallest eigenvalue of the partial transpose over Bob's factor.
pub fn min_pt_eigenvalue(rho: &QuantumState) -> Result<f64> {
    let (a, b) = rho.bipartite_dims()?;
    Ok(min_pt_eigenvalue_of(rho.matrix(), a, b))
}

pub(crate) fn min_pt_eigenvalue_of(m: &CMatrix, d_a: usize, d_b: usize) -> f64 {
    let pt = partial_transpose(m, d_a, d_b, Side::B).expect("dims checked by caller");
    eigh_unchecked(&pt).values.last().copied().unwrap_or(0.0)
}

/// Positive-partial-transpose test at tolerance `PPT_TOL`. Decides
/// separability exactly only when `d_A · d_B ≤ 6`.
pub fn ppt_separable(rho: &QuantumState) -> Result<bool> {
    Ok(min_pt_eigenvalue(rho)? >= -PPT_TOL)
}

/// Whether [`ppt_separable`] is a complete separability test for these dims.
pub fn ppt_is_exact(d_a: usize, d_b: usize) -> bool {
    d_a * d_b <= 6
}

/// Schmidt coefficients of a pure bipartite state, descending, with
/// coefficients whose square falls under the rank cutoff dropped.
pub fn schmidt_coefficients(psi: &CVector, d_a: usize, d_b: usize) -> Result<Vec<f64>> {
    if psi.dim() != d_a * d_b {
        return Err(Error::DimensionMismatch(format!("{}-vector on {d_a}x{d_b}", psi.dim())));
    }
    let m = CMatrix::from_fn(d_a, d_b, |i, j| psi[i * d_b + j]);
    let gram = &m * &m.adjoint();
    let values = eigh_unchecked(&gram).values;
    let top = values.first().copied().unwrap_or(0.0).max(0.0);
    Ok(values.into_iter().filter(|&v| v > RANK_CUTOFF * top).map(f64::sqrt).collect())
}

/// `√(2 (1 - tr ρ_A²))` for a pure bipartite state; equals the concurrence
/// for two qubits.
pub fn pure_state_concurrence(psi: &CVector, d_a: usize, d_b: usize) -> Result<f64> {
    let s = schmidt_coefficients(psi, d_a, d_b)?;
    let norm2: f64 = s.iter().map(|x| x * x).sum();
    let reduced_purity: f64 = s.iter().map(|x| (x * x / norm2).powi(2)).sum();
    Ok((2.0 * (1.0 - reduced_purity)).max(0.0).sqrt())
}
