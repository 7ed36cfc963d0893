//! Density matrices, pure-state ensembles and their reweightings.
//!
//! A reweighting keeps the pure states of an ensemble and changes only their
//! probabilities; the resulting density matrix is what [`NewState`] realizes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, eigh_unchecked, CMatrix, CVector};
use crate::tolerance::{ENSEMBLE_TOL, HERMITIAN_TOL, PSD_TOL, PURE_TOL, RANK_CUTOFF, TRACE_TOL, UNITARY_TOL};

/// Validated density matrix over a product of subsystems.
///
/// `dims` lists the factor dimensions, most significant first. Two factors
/// are `[SS_A, SS_B]`; four factors follow `[SS_A, AS_A, SS_B, AS_B]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::RawState")]
pub struct QuantumState {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl QuantumState {
    /// Checks shape, Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        validate_dims(&dims, matrix.rows())?;
        if !matrix.is_square() {
            return Err(Error::invalid("shape", format!("{}x{} is not square", matrix.rows(), matrix.cols())));
        }
        if !matrix.is_finite() {
            return Err(Error::invalid("finite", "matrix has non-finite entries"));
        }
        let herm = matrix.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::invalid("hermitian", format!("max |ρ - ρ†| = {herm:e}")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::invalid("trace", format!("trace = {}{:+}i", tr.re, tr.im)));
        }
        let min_eig = eigh_unchecked(&matrix).values.last().copied().unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(Error::invalid("positivity", format!("minimum eigenvalue {min_eig:e}")));
        }
        Ok(Self { dims, matrix })
    }

    /// Normalizes a positive operator by its trace and symmetrizes round-off.
    /// Used for states that are valid by construction.
    pub(crate) fn from_positive(matrix: CMatrix, dims: Vec<usize>) -> Self {
        let tr = matrix.trace().re;
        Self { dims, matrix: matrix.hermitian_part().scale_real(1.0 / tr) }
    }

    pub fn pure(psi: &CVector, dims: Vec<usize>) -> Result<Self> {
        validate_dims(&dims, psi.dim())?;
        if (psi.norm() - 1.0).abs() > ENSEMBLE_TOL {
            return Err(Error::invalid("unit-norm", format!("|ψ| = {}", psi.norm())));
        }
        Ok(Self::from_positive(psi.projector(), dims))
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self { matrix: CMatrix::identity(d).scale_real(1.0 / d as f64), dims }
    }

    /// `p |Φ⁺⟩⟨Φ⁺| + (1 - p) I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&p) {
            return Err(Error::BadParameters(format!("Werner parameter {p} outside [-1/3, 1]")));
        }
        let bell = bell::phi_plus().projector().scale_real(p);
        let noise = CMatrix::identity(4).scale_real((1.0 - p) / 4.0);
        Ok(Self::from_positive(&bell + &noise, vec![2, 2]))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `(d_A, d_B)` for a two-factor state.
    pub fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims.as_slice() {
            &[a, b] => Ok((a, b)),
            other => Err(Error::DimensionMismatch(format!("expected two factors, got {other:?}"))),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.dims == [2, 2]
    }

    /// `self ⊗ other`, factors concatenated.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, matrix: self.matrix.kron(&other.matrix) }
    }

    /// Number of eigenvalues above `RANK_CUTOFF · λ_max`.
    pub fn rank(&self) -> usize {
        numerical_rank(&eigh_unchecked(&self.matrix).values)
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

fn validate_dims(dims: &[usize], d: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::invalid("dims", format!("{dims:?} must be non-empty and positive")));
    }
    let product: usize = dims.iter().product();
    if product != d {
        return Err(Error::invalid("dims", format!("product of {dims:?} is {product}, matrix dimension {d}")));
    }
    Ok(())
}

pub(crate) fn numerical_rank(values: &[f64]) -> usize {
    let top = values.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0;
    }
    values.iter().filter(|&&v| v > RANK_CUTOFF * top).count()
}

/// One weighted pure state of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub weight: f64,
    pub vector: CVector,
}

/// Weighted list of unit-norm pure states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::RawEnsemble")]
pub struct Ensemble {
    dims: Vec<usize>,
    members: Vec<Member>,
}

impl Ensemble {
    pub fn new(members: Vec<Member>, dims: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("members", "ensemble has no members"));
        }
        let d = members[0].vector.dim();
        validate_dims(&dims, d)?;
        for (k, m) in members.iter().enumerate() {
            if m.vector.dim() != d {
                return Err(Error::invalid("dims", format!("member {k} has dimension {}", m.vector.dim())));
            }
            if !m.vector.is_finite() || !m.weight.is_finite() {
                return Err(Error::invalid("finite", format!("member {k} has non-finite data")));
            }
            if !(m.weight > 0.0 && m.weight <= 1.0 + ENSEMBLE_TOL) {
                return Err(Error::invalid("weights", format!("member {k} weight {} outside (0, 1]", m.weight)));
            }
            if (m.vector.norm() - 1.0).abs() > ENSEMBLE_TOL {
                return Err(Error::invalid("unit-norm", format!("member {k} has norm {}", m.vector.norm())));
            }
        }
        let total: f64 = members.iter().map(|m| m.weight).sum();
        if (total - 1.0).abs() > ENSEMBLE_TOL {
            return Err(Error::invalid("weights", format!("weights sum to {total}")));
        }
        Ok(Self { dims, members })
    }

    /// Builds an ensemble from `(weight, vector)` pairs.
    pub fn from_pairs(pairs: Vec<(f64, CVector)>, dims: Vec<usize>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|(weight, vector)| Member { weight, vector }).collect(), dims)
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.weight).collect()
    }

    /// Subnormalized vectors `√w_i |ψ_i⟩`.
    pub fn subnormalized(&self) -> Vec<CVector> {
        self.members.iter().map(|m| m.vector.scale_real(m.weight.sqrt())).collect()
    }
}

/// A reweighting of an ensemble: same pure states, new probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewState {
    pub base: Ensemble,
    pub weights: Vec<f64>,
}

impl NewState {
    pub fn new(base: Ensemble, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, base.len())?;
        Ok(Self { base, weights })
    }

    pub fn state(&self) -> QuantumState {
        weighted_sum(&self.base, &self.weights)
    }
}

fn check_weights(w: &[f64], len: usize) -> Result<()> {
    if w.len() != len {
        return Err(Error::BadWeights(format!("{} weights for {len} members", w.len())));
    }
    if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::BadWeights(format!("weight {bad} outside (0, 1]")));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > ENSEMBLE_TOL {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    Ok(())
}

fn weighted_sum(e: &Ensemble, w: &[f64]) -> QuantumState {
    let d = e.members[0].vector.dim();
    let mut rho = CMatrix::zeros(d, d);
    for (m, &wi) in e.members.iter().zip(w) {
        let v = m.vector.as_slice();
        for i in 0..d {
            let vi = v[i] * wi;
            for j in 0..d {
                rho[(i, j)] += vi * v[j].conj();
            }
        }
    }
    QuantumState::from_positive(rho, e.dims.clone())
}

/// `Σ w_i |ψ_i⟩⟨ψ_i|`.
pub fn from_ensemble(e: &Ensemble) -> QuantumState {
    weighted_sum(e, &e.weights())
}

/// Eigen-ensemble: eigenvectors with eigenvalues above the rank cutoff,
/// weights renormalized over the kept part of the spectrum.
pub fn spectral_ensemble(rho: &QuantumState) -> Ensemble {
    let eig = eigh_unchecked(rho.matrix());
    let rank = numerical_rank(&eig.values);
    let kept: f64 = eig.values[..rank].iter().sum();
    let members =
        eig.values.iter().zip(eig.vectors).take(rank).map(|(&l, v)| Member { weight: l / kept, vector: v }).collect();
    Ensemble { dims: rho.dims.clone(), members }
}

/// Density matrix of the ensemble with its probabilities replaced by `w`.
pub fn reweight(e: &Ensemble, w: &[f64]) -> Result<QuantumState> {
    check_weights(w, e.len())?;
    Ok(weighted_sum(e, w))
}

/// New decomposition `|z_i⟩ = Σ_j u_ij √w_j |ψ_j⟩` of the same density matrix.
///
/// `u` is `k × l` with orthonormal columns, `l` the ensemble size. Members
/// whose subnormalized vector vanishes are dropped.
pub fn transform_ensemble(e: &Ensemble, u: &CMatrix) -> Result<Ensemble> {
    if u.cols() != e.len() {
        return Err(Error::DimensionMismatch(format!("{} columns for {} members", u.cols(), e.len())));
    }
    let err = u.isometry_error();
    if err > UNITARY_TOL {
        return Err(Error::NotIsometry(err));
    }
    let xs = e.subnormalized();
    let d = xs[0].dim();
    let mut members = Vec::with_capacity(u.rows());
    for i in 0..u.rows() {
        let mut z = CVector::zeros(d);
        for (j, x) in xs.iter().enumerate() {
            let uij = u[(i, j)];
            for (zk, xk) in z.as_mut_slice().iter_mut().zip(x.as_slice()) {
                *zk += uij * xk;
            }
        }
        let w = z.norm_sqr();
        if w > 1e-300 {
            members.push(Member { weight: w, vector: z.scale_real(1.0 / w.sqrt()) });
        }
    }
    // Renormalize round-off so the ensemble invariants hold exactly.
    let total: f64 = members.iter().map(|m| m.weight).sum();
    for m in &mut members {
        m.weight /= total;
    }
    Ok(Ensemble { dims: e.dims.clone(), members })
}

/// `Σ_i w_i |ψ_i⟩⟨ψ_i|` with Haar-random `|ψ_i⟩`.
pub fn random_mixture<R: Rng + ?Sized>(dims: Vec<usize>, weights: &[f64], rng: &mut R) -> Result<QuantumState> {
    let d: usize = dims.iter().product();
    let members: Vec<(f64, CVector)> = weights.iter().map(|&w| (w, crate::linalg::random_pure(d, rng))).collect();
    Ok(from_ensemble(&Ensemble::from_pairs(members, dims)?))
}

/// `tr ρ²`.
pub fn purity(rho: &QuantumState) -> f64 {
    rho.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum()
}

pub fn is_pure(rho: &QuantumState) -> bool {
    purity(rho) >= 1.0 - PURE_TOL
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(rho: &QuantumState, psi: &CVector) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(format!("state dimension {} vs vector {}", rho.dim(), psi.dim())));
    }
    Ok(psi.inner(&rho.matrix().apply(psi)).re.clamp(0.0, 1.0))
}

/// Bell states and other fixed two-qubit vectors.
pub mod bell {
    use super::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// `(|00⟩ + |11⟩)/√2`
    pub fn phi_plus() -> CVector {
        CVector::from_real(&[H, 0.0, 0.0, H])
    }

    /// `(|00⟩ - |11⟩)/√2`
    pub fn phi_minus() -> CVector {
        CVector::from_real(&[H, 0.0, 0.0, -H])
    }

    /// `(|01⟩ + |10⟩)/√2`
    pub fn psi_plus() -> CVector {
        CVector::from_real(&[0.0, H, H, 0.0])
    }

    /// `(|01⟩ - |10⟩)/√2`
    pub fn psi_minus() -> CVector {
        CVector::from_real(&[0.0, H, -H, 0.0])
    }

    /// Computational two-qubit basis state `|ab⟩`.
    pub fn ket(a: usize, b: usize) -> CVector {
        CVector::basis(4, 2 * a + b)
    }

    /// `a|00⟩ + b|11⟩`, normalized.
    pub fn schmidt_pair(a: f64, b: f64) -> CVector {
        CVector::from_vec(vec![c64(a, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(b, 0.0)]).normalized()
    }
}
