//! One round of the purification protocol class and its building blocks.
//!
//! A round attaches an ancilla pair `AS = (AS_A, AS_B)` to the source pair
//! `SS = (SS_A, SS_B)`, lets Alice apply `u_alice` to `(SS_A, AS_A)` and Bob
//! apply `u_bob` to `(SS_B, AS_B)`, and measures both ancillas in their
//! computational bases. Joint states are stored as `[SS_A, SS_B, AS_A, AS_B]`
//! and acted on in the order `[SS_A, AS_A, SS_B, AS_B]`.
//!
//! Two independent routes compute the outcomes: [`run_round`] conjugates the
//! full joint density matrix; [`run_round_branches`] pushes every pair of
//! spectral members through the round as amplitude matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, eigh_unchecked, permute_subsystems, CMatrix, CVector};
use crate::states::{bell, spectral_ensemble, QuantumState};
use crate::tolerance::{PROBABILITY_FLOOR, UNITARY_TOL};

/// Storage order `[SS_A, SS_B, AS_A, AS_B]` to action order
/// `[SS_A, AS_A, SS_B, AS_B]`; the permutation is its own inverse.
pub const STORAGE_TO_ACTION: [usize; 4] = [0, 2, 1, 3];

/// Local dimensions of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundDims {
    pub ss_a: usize,
    pub ss_b: usize,
    pub as_a: usize,
    pub as_b: usize,
}

impl RoundDims {
    pub fn from_states(rho_s: &QuantumState, rho_a: &QuantumState) -> Result<Self> {
        let (ss_a, ss_b) = rho_s.bipartite_dims()?;
        let (as_a, as_b) = rho_a.bipartite_dims()?;
        Ok(Self { ss_a, ss_b, as_a, as_b })
    }

    pub fn alice(&self) -> usize {
        self.ss_a * self.as_a
    }

    pub fn bob(&self) -> usize {
        self.ss_b * self.as_b
    }

    pub fn source(&self) -> usize {
        self.ss_a * self.ss_b
    }

    pub fn outcomes(&self) -> usize {
        self.as_a * self.as_b
    }

    fn storage(&self) -> [usize; 4] {
        [self.ss_a, self.ss_b, self.as_a, self.as_b]
    }

    fn action(&self) -> [usize; 4] {
        [self.ss_a, self.as_a, self.ss_b, self.as_b]
    }
}

/// Local unitaries of one round. `u_alice` acts on `SS_A ⊗ AS_A` and `u_bob`
/// on `SS_B ⊗ AS_B`, source factor most significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRound")]
pub struct ProtocolRound {
    u_alice: CMatrix,
    u_bob: CMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRound {
    u_alice: CMatrix,
    u_bob: CMatrix,
}

impl TryFrom<RawRound> for ProtocolRound {
    type Error = Error;

    fn try_from(raw: RawRound) -> Result<Self> {
        ProtocolRound::new(raw.u_alice, raw.u_bob)
    }
}

/// Built-in rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedRound {
    Identity,
    Swap,
    BilateralCnot,
}

impl NamedRound {
    pub const ALL: [NamedRound; 3] = [NamedRound::Identity, NamedRound::Swap, NamedRound::BilateralCnot];

    pub fn name(self) -> &'static str {
        match self {
            NamedRound::Identity => "identity",
            NamedRound::Swap => "swap",
            NamedRound::BilateralCnot => "bilateral-cnot",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name).ok_or_else(|| {
            Error::BadParameters(format!("unknown round {name:?}; expected identity, swap or bilateral-cnot"))
        })
    }

    /// Instantiates the round for the given dimensions.
    pub fn build(self, dims: RoundDims) -> Result<ProtocolRound> {
        let local = |s: usize, a: usize| -> Result<CMatrix> {
            match self {
                NamedRound::Identity => Ok(CMatrix::identity(s * a)),
                NamedRound::Swap => {
                    if s != a {
                        return Err(Error::DimensionMismatch(format!(
                            "swap needs equal source and ancilla dims, got {s} and {a}"
                        )));
                    }
                    Ok(permutation_unitary(s * a, |k| (k % a) * s + k / a))
                }
                NamedRound::BilateralCnot => Ok(permutation_unitary(s * a, |k| {
                    let (x, y) = (k / a, k % a);
                    x * a + (y + x) % a
                })),
            }
        };
        ProtocolRound::new(local(dims.ss_a, dims.as_a)?, local(dims.ss_b, dims.as_b)?)
    }
}

/// Unitary sending basis vector `k` to `image(k)`.
fn permutation_unitary(d: usize, image: impl Fn(usize) -> usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        m[(image(k), k)] = c64(1.0, 0.0);
    }
    m
}

impl ProtocolRound {
    pub fn new(u_alice: CMatrix, u_bob: CMatrix) -> Result<Self> {
        for u in [&u_alice, &u_bob] {
            if !u.is_square() {
                return Err(Error::DimensionMismatch(format!("{}x{} unitary", u.rows(), u.cols())));
            }
            let err = u.unitarity_error();
            if err > UNITARY_TOL {
                return Err(Error::NonUnitary(err));
            }
        }
        Ok(Self { u_alice, u_bob })
    }

    pub fn named(name: &str, dims: RoundDims) -> Result<Self> {
        NamedRound::parse(name)?.build(dims)
    }

    pub fn u_alice(&self) -> &CMatrix {
        &self.u_alice
    }

    pub fn u_bob(&self) -> &CMatrix {
        &self.u_bob
    }

    fn check(&self, dims: RoundDims) -> Result<()> {
        if self.u_alice.rows() != dims.alice() || self.u_bob.rows() != dims.bob() {
            return Err(Error::DimensionMismatch(format!(
                "round acts on {} ⊗ {}, states need {} ⊗ {}",
                self.u_alice.rows(),
                self.u_bob.rows(),
                dims.alice(),
                dims.bob()
            )));
        }
        Ok(())
    }
}

/// One measurement outcome of a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    /// Ancilla digits, Alice's first, e.g. `"01"`.
    pub label: String,
    pub outcome: [usize; 2],
    pub probability: f64,
    /// Normalized source state; absent when the probability is at most
    /// `1e-12`.
    pub post_state: Option<QuantumState>,
}

pub fn outcome_label(a: usize, b: usize) -> String {
    if a < 10 && b < 10 {
        format!("{a}{b}")
    } else {
        format!("{a},{b}")
    }
}

fn outcome_from_block(block: CMatrix, a: usize, b: usize, dims: RoundDims) -> RoundOutcome {
    let p = block.trace().re;
    let post_state = (p > PROBABILITY_FLOOR).then(|| QuantumState::from_positive(block, vec![dims.ss_a, dims.ss_b]));
    RoundOutcome { label: outcome_label(a, b), outcome: [a, b], probability: p.max(0.0), post_state }
}

/// Simulates a round on the joint density matrix.
///
/// Builds `ρ_s ⊗ ρ_a`, moves it to action order, conjugates by
/// `u_alice ⊗ u_bob`, moves back and reads off the ancilla blocks.
pub fn run_round(rho_s: &QuantumState, rho_a: &QuantumState, round: &ProtocolRound) -> Result<Vec<RoundOutcome>> {
    let dims = RoundDims::from_states(rho_s, rho_a)?;
    round.check(dims)?;
    let joint = rho_s.matrix().kron(rho_a.matrix());
    let acted = permute_subsystems(&joint, &dims.storage(), &STORAGE_TO_ACTION)?;
    let u = round.u_alice.kron(&round.u_bob);
    let evolved = u.conjugate(&acted);
    let back = permute_subsystems(&evolved, &dims.action(), &STORAGE_TO_ACTION)?;

    let n_anc = dims.outcomes();
    let ds = dims.source();
    let mut out = Vec::with_capacity(n_anc);
    for a in 0..dims.as_a {
        for b in 0..dims.as_b {
            let k = a * dims.as_b + b;
            let block = CMatrix::from_fn(ds, ds, |i, j| back[(i * n_anc + k, j * n_anc + k)]);
            out.push(outcome_from_block(block, a, b, dims));
        }
    }
    Ok(out)
}

/// Spectral members of a source and an ancilla state, prepared as amplitude
/// matrices in action order, for evaluating many rounds cheaply.
#[derive(Debug, Clone)]
pub struct PreparedPair {
    dims: RoundDims,
    /// `(p_i q_j, M_ij)` with `M[(s_A, a_A), (s_B, a_B)] = ψ_i[s_A, s_B] φ_j[a_A, a_B]`.
    terms: Vec<(f64, CMatrix)>,
}

impl PreparedPair {
    pub fn new(rho_s: &QuantumState, rho_a: &QuantumState) -> Result<Self> {
        let dims = RoundDims::from_states(rho_s, rho_a)?;
        let es = spectral_ensemble(rho_s);
        let ea = spectral_ensemble(rho_a);
        let mut terms = Vec::with_capacity(es.len() * ea.len());
        for ms in es.members() {
            for ma in ea.members() {
                let (psi, phi) = (ms.vector.as_slice(), ma.vector.as_slice());
                let m = CMatrix::from_fn(dims.alice(), dims.bob(), |r, c| {
                    let (sa, aa) = (r / dims.as_a, r % dims.as_a);
                    let (sb, ab) = (c / dims.as_b, c % dims.as_b);
                    psi[sa * dims.ss_b + sb] * phi[aa * dims.as_b + ab]
                });
                terms.push((ms.weight * ma.weight, m));
            }
        }
        Ok(Self { dims, terms })
    }

    pub fn dims(&self) -> RoundDims {
        self.dims
    }

    /// Unnormalized post-measurement source blocks, one per outcome in
    /// row-major `(a, b)` order. The trace of each block is its probability.
    pub fn blocks(&self, round: &ProtocolRound) -> Result<Vec<CMatrix>> {
        round.check(self.dims)?;
        let d = self.dims;
        let ds = d.source();
        let mut blocks = vec![CMatrix::zeros(ds, ds); d.outcomes()];
        let ub_t = round.u_bob.transpose();
        let mut v = vec![c64(0.0, 0.0); ds];
        for (w, m) in &self.terms {
            let evolved = &(&round.u_alice * m) * &ub_t;
            for a in 0..d.as_a {
                for b in 0..d.as_b {
                    for sa in 0..d.ss_a {
                        for sb in 0..d.ss_b {
                            v[sa * d.ss_b + sb] = evolved[(sa * d.as_a + a, sb * d.as_b + b)];
                        }
                    }
                    let block = &mut blocks[a * d.as_b + b];
                    for i in 0..ds {
                        let vi = v[i] * *w;
                        for j in 0..ds {
                            block[(i, j)] += vi * v[j].conj();
                        }
                    }
                }
            }
        }
        Ok(blocks)
    }

    pub fn outcomes(&self, round: &ProtocolRound) -> Result<Vec<RoundOutcome>> {
        let d = self.dims;
        Ok(self
            .blocks(round)?
            .into_iter()
            .enumerate()
            .map(|(k, block)| outcome_from_block(block, k / d.as_b, k % d.as_b, d))
            .collect())
    }
}

/// Same outcomes as [`run_round`], computed branch by branch from the
/// spectral ensembles of both inputs.
pub fn run_round_branches(
    rho_s: &QuantumState,
    rho_a: &QuantumState,
    round: &ProtocolRound,
) -> Result<Vec<RoundOutcome>> {
    PreparedPair::new(rho_s, rho_a)?.outcomes(round)
}

/// `(a ⊗ b) ρ (a ⊗ b)†` normalized, with the normalization as probability.
pub fn apply_local_filter(rho_s: &QuantumState, a: &CMatrix, b: &CMatrix) -> Result<(QuantumState, f64)> {
    let (d_a, d_b) = rho_s.bipartite_dims()?;
    if !a.is_square() || !b.is_square() || a.rows() != d_a || b.rows() != d_b {
        return Err(Error::DimensionMismatch(format!(
            "filters {}x{} and {}x{} for dims {:?}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            rho_s.dims()
        )));
    }
    apply_global_filter(rho_s, &a.kron(b))
}

/// `c ρ c†` normalized, with the normalization as probability.
pub fn apply_global_filter(rho_s: &QuantumState, c: &CMatrix) -> Result<(QuantumState, f64)> {
    if !c.is_square() || c.rows() != rho_s.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} filter for dimension {}",
            c.rows(),
            c.cols(),
            rho_s.dim()
        )));
    }
    if !c.is_finite() {
        return Err(Error::NonFinite);
    }
    let m = c.conjugate(rho_s.matrix());
    let p = m.trace().re;
    if p.is_nan() || p <= PROBABILITY_FLOOR {
        return Err(Error::ZeroProbability(p));
    }
    Ok((QuantumState::from_positive(m, rho_s.dims().to_vec()), p))
}

/// Unitary dilation of a contraction `a` on `system ⊗ qubit`: acting on
/// `|ψ⟩|0⟩` and postselecting the qubit on `|0⟩` applies `a`.
///
/// Built from the block unitary `[[A, √(I-AA†)], [√(I-A†A), -A†]]`, whose
/// block index is the qubit, then reordered so the system is the most
/// significant factor.
pub fn filter_dilation(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} filter", a.rows(), a.cols())));
    }
    let d = a.rows();
    let ad = a.adjoint();
    let id = CMatrix::identity(d);
    let defect = |g: CMatrix| -> Result<CMatrix> {
        let eig = eigh_unchecked(&(&id - &g).hermitian_part());
        if eig.values[d - 1] < -UNITARY_TOL {
            return Err(Error::BadParameters(format!(
                "filter norm exceeds 1 (defect eigenvalue {})",
                eig.values[d - 1]
            )));
        }
        Ok(eig.map_spectrum(|l| l.max(0.0).sqrt()))
    };
    let top_right = defect(a * &ad)?;
    let bottom_left = defect(&ad * a)?;
    let mut block = CMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            block[(i, j)] = a[(i, j)];
            block[(i, d + j)] = top_right[(i, j)];
            block[(d + i, j)] = bottom_left[(i, j)];
            block[(d + i, d + j)] = -ad[(i, j)];
        }
    }
    permute_subsystems(&block, &[2, d], &[1, 0])
}

/// The two-qubit example: source `p₁Φ⁺ + (1-p₁)|01⟩⟨01|`, ancilla
/// `(1-λ₂)|11⟩⟨11| + λ₂Ψ⁺`, bilateral CNOT with the source as control.
/// Outcome `"01"` leaves the source in `Φ⁺`.
pub fn cnot_example(p1: f64, lambda2: f64) -> Result<Vec<RoundOutcome>> {
    let (rho_s, rho_a, round) = cnot_example_inputs(p1, lambda2)?;
    run_round(&rho_s, &rho_a, &round)
}

pub fn cnot_example_inputs(p1: f64, lambda2: f64) -> Result<(QuantumState, QuantumState, ProtocolRound)> {
    for (name, x) in [("p1", p1), ("lambda2", lambda2)] {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::BadParameters(format!("{name} = {x} must lie in (0, 1)")));
        }
    }
    let mix = |w: f64, u: CVector, v: CVector| -> Result<QuantumState> {
        QuantumState::new(&u.projector().scale_real(w) + &v.projector().scale_real(1.0 - w), vec![2, 2])
    };
    let rho_s = mix(p1, bell::phi_plus(), bell::ket(0, 1))?;
    let rho_a = mix(lambda2, bell::psi_plus(), bell::ket(1, 1))?;
    let round = NamedRound::BilateralCnot.build(RoundDims { ss_a: 2, ss_b: 2, as_a: 2, as_b: 2 })?;
    Ok((rho_s, rho_a, round))
}

/// Which branches [`run_sequence`] follows after each round.
#[derive(Clone, Copy)]
pub enum BranchPolicy<'a> {
    AllBranches,
    /// Follow only the highest-scoring outcome; ties go to the lowest index.
    PostselectBest(&'a dyn Fn(&RoundOutcome) -> f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchNode {
    pub outcome: RoundOutcome,
    /// Product of outcome probabilities from the root to this node.
    pub cumulative_probability: f64,
    pub children: Vec<BranchNode>,
}

impl BranchNode {
    /// Leaves of the subtree rooted here.
    pub fn leaves(&self) -> Vec<&BranchNode> {
        if self.children.is_empty() {
            vec![self]
        } else {
            self.children.iter().flat_map(|c| c.leaves()).collect()
        }
    }
}

/// Chains rounds, each with a fresh ancilla, along the branches selected by
/// `policy`. Branches without a post state end where they vanish.
pub fn run_sequence(
    rho_s: &QuantumState,
    rounds: &[(QuantumState, ProtocolRound)],
    policy: BranchPolicy<'_>,
) -> Result<Vec<BranchNode>> {
    expand(rho_s, rounds, policy, 1.0)
}

fn expand(
    rho_s: &QuantumState,
    rounds: &[(QuantumState, ProtocolRound)],
    policy: BranchPolicy<'_>,
    prefix: f64,
) -> Result<Vec<BranchNode>> {
    let Some(((rho_a, round), rest)) = rounds.split_first() else {
        return Ok(Vec::new());
    };
    let mut outcomes = run_round(rho_s, rho_a, round)?;
    if let BranchPolicy::PostselectBest(score) = policy {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (k, o) in outcomes.iter().enumerate() {
            let s = score(o);
            if s > best_score {
                best = k;
                best_score = s;
            }
        }
        outcomes = vec![outcomes.swap_remove(best)];
    }
    outcomes
        .into_iter()
        .map(|o| {
            let cumulative_probability = prefix * o.probability;
            let children = match &o.post_state {
                Some(s) => expand(s, rest, policy, cumulative_probability)?,
                None => Vec::new(),
            };
            Ok(BranchNode { outcome: o, cumulative_probability, children })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::concurrence;
    use crate::states::{fidelity_pure, is_pure};

    const QUBITS: RoundDims = RoundDims { ss_a: 2, ss_b: 2, as_a: 2, as_b: 2 };

    fn pure(v: CVector) -> QuantumState {
        QuantumState::pure(&v, vec![2, 2]).unwrap()
    }

    #[test]
    fn identity_round_keeps_source() {
        let rho_s = QuantumState::werner(0.7).unwrap();
        let round = NamedRound::Identity.build(QUBITS).unwrap();
        let out = run_round(&rho_s, &pure(bell::ket(1, 1)), &round).unwrap();
        assert_eq!(out.len(), 4);
        let hit = out.iter().find(|o| o.label == "11").unwrap();
        assert!((hit.probability - 1.0).abs() < 1e-12);
        assert!(hit.post_state.as_ref().unwrap().matrix().max_abs_diff(rho_s.matrix()) < 1e-12);
        assert!(out.iter().filter(|o| o.label != "11").all(|o| o.post_state.is_none()));
    }

    #[test]
    fn swap_round_moves_ancilla_into_source() {
        let round = NamedRound::Swap.build(QUBITS).unwrap();
        let out = run_round(&pure(bell::ket(0, 0)), &pure(bell::phi_plus()), &round).unwrap();
        let total: f64 = out.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for o in out.iter().filter(|o| o.post_state.is_some()) {
            let f = fidelity_pure(o.post_state.as_ref().unwrap(), &bell::phi_plus()).unwrap();
            assert!(f > 1.0 - 1e-12);
        }
    }

    #[test]
    fn cnot_example_half_half() {
        let out = cnot_example(0.5, 0.5).unwrap();
        let total: f64 = out.iter().map(|o| o.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let hit = out.iter().find(|o| o.label == "01").unwrap();
        assert!((hit.probability - 0.125).abs() < 1e-12);
        let post = hit.post_state.as_ref().unwrap();
        assert!(fidelity_pure(post, &bell::phi_plus()).unwrap() > 1.0 - 1e-12);
        let eleven = out.iter().find(|o| o.label == "11").unwrap();
        assert!(concurrence(eleven.post_state.as_ref().unwrap()).unwrap() <= 1e-9);
    }

    #[test]
    fn cnot_example_corner_and_errors() {
        let out = cnot_example(1.0 - 1e-9, 1.0 - 1e-9).unwrap();
        assert!((out[1].probability - 0.5).abs() < 1e-8);
        assert!(matches!(cnot_example(0.0, 0.5), Err(Error::BadParameters(_))));
        assert!(matches!(cnot_example(0.5, 1.0), Err(Error::BadParameters(_))));
    }

    #[test]
    fn both_routes_agree() {
        let (rho_s, rho_a, round) = cnot_example_inputs(0.3, 0.8).unwrap();
        let a = run_round(&rho_s, &rho_a, &round).unwrap();
        let b = run_round_branches(&rho_s, &rho_a, &round).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.label, y.label);
            assert!((x.probability - y.probability).abs() < 1e-12);
            if let (Some(s), Some(t)) = (&x.post_state, &y.post_state) {
                assert!(s.matrix().max_abs_diff(t.matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn local_filters() {
        let rho = QuantumState::werner(0.4).unwrap();
        let (same, p) = apply_local_filter(&rho, &CMatrix::identity(2), &CMatrix::identity(2)).unwrap();
        assert!((p - 1.0).abs() < 1e-12 && same.matrix().max_abs_diff(rho.matrix()) < 1e-12);

        let (a, b) = (0.6, 0.8);
        let psi = pure(bell::schmidt_pair(a, b));
        let p0 = CMatrix::diag_real(&[1.0, 0.0]);
        let (s, p) = apply_local_filter(&psi, &p0, &CMatrix::identity(2)).unwrap();
        assert!((p - a * a).abs() < 1e-12);
        assert!(fidelity_pure(&s, &bell::ket(0, 0)).unwrap() > 1.0 - 1e-12);

        let balance = CMatrix::diag_real(&[1.0, a / b]);
        let (s, _) = apply_local_filter(&psi, &balance, &CMatrix::identity(2)).unwrap();
        assert!(fidelity_pure(&s, &bell::phi_plus()).unwrap() > 1.0 - 1e-12);

        let zero = CMatrix::zeros(2, 2);
        assert!(matches!(apply_local_filter(&psi, &zero, &zero), Err(Error::ZeroProbability(_))));
    }

    #[test]
    fn global_filter_projects_werner() {
        let p = 0.6;
        let rho = QuantumState::werner(p).unwrap();
        let (s, prob) = apply_global_filter(&rho, &bell::phi_plus().projector()).unwrap();
        assert!((prob - (p + (1.0 - p) / 4.0)).abs() < 1e-12);
        assert!(is_pure(&s));
    }

    #[test]
    fn dilation_realizes_filter() {
        let a = CMatrix::diag_real(&[1.0, 0.75]);
        let b = CMatrix::from_real(2, 2, &[0.5, 0.2, 0.1, 0.6]);
        let round = ProtocolRound::new(filter_dilation(&a).unwrap(), filter_dilation(&b).unwrap()).unwrap();
        let rho = QuantumState::werner(0.8).unwrap();
        let out = run_round(&rho, &pure(bell::ket(0, 0)), &round).unwrap();
        let (filtered, p) = apply_local_filter(&rho, &a, &b).unwrap();
        assert!((out[0].probability - p).abs() < 1e-12);
        assert!(out[0].post_state.as_ref().unwrap().matrix().max_abs_diff(filtered.matrix()) < 1e-12);
        assert!(filter_dilation(&CMatrix::identity(2).scale_real(1.5)).is_err());
    }

    #[test]
    fn sequences() {
        let rho = QuantumState::werner(0.5).unwrap();
        let id = NamedRound::Identity.build(QUBITS).unwrap();
        let anc = pure(bell::ket(0, 0));
        let tree = run_sequence(&rho, &[(anc.clone(), id.clone()), (anc, id)], BranchPolicy::AllBranches).unwrap();
        let live: Vec<_> = tree.iter().flat_map(|n| n.leaves()).filter(|n| n.outcome.post_state.is_some()).collect();
        assert_eq!(live.len(), 1);
        assert!((live[0].cumulative_probability - 1.0).abs() < 1e-12);
        assert!(live[0].outcome.post_state.as_ref().unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-12);

        let (rho_s, rho_a, cnot) = cnot_example_inputs(0.5, 0.5).unwrap();
        let one = run_sequence(&rho_s, &[(rho_a.clone(), cnot.clone())], BranchPolicy::AllBranches).unwrap();
        let direct = run_round(&rho_s, &rho_a, &cnot).unwrap();
        assert_eq!(one.iter().map(|n| n.outcome.clone()).collect::<Vec<_>>(), direct);

        let score =
            |o: &RoundOutcome| o.post_state.as_ref().map_or(0.0, |s| fidelity_pure(s, &bell::phi_plus()).unwrap());
        let best = run_sequence(&rho_s, &[(rho_a, cnot)], BranchPolicy::PostselectBest(&score)).unwrap();
        assert_eq!(best.len(), 1);
        assert_eq!(best[0].outcome.label, "01");
    }

    #[test]
    fn round_validation() {
        let bad = CMatrix::identity(4).scale_real(1.1);
        assert!(matches!(ProtocolRound::new(bad, CMatrix::identity(4)), Err(Error::NonUnitary(_))));
        let small = ProtocolRound::new(CMatrix::identity(2), CMatrix::identity(2)).unwrap();
        let rho = QuantumState::werner(0.5).unwrap();
        assert!(matches!(run_round(&rho, &rho, &small), Err(Error::DimensionMismatch(_))));
        assert!(NamedRound::Swap.build(RoundDims { ss_a: 2, ss_b: 2, as_a: 3, as_b: 2 }).is_err());
        assert!(NamedRound::parse("teleport").is_err());
    }

    #[test]
    fn round_json() {
        let round = NamedRound::Swap.build(QUBITS).unwrap();
        let text = serde_json::to_string(&round).unwrap();
        assert!(text.starts_with("{\"u_alice\":"));
        let back: ProtocolRound = serde_json::from_str(&text).unwrap();
        assert_eq!(back, round);
        let bad = text.replace("[1.0,0.0]", "[2.0,0.0]");
        assert!(serde_json::from_str::<ProtocolRound>(&bad).is_err());
    }
}
