//! Quasi-separability: does some reweighting of a pure-state decomposition of
//! `ρ` give a separable state?
//!
//! Three constructive routes produce certificates:
//!
//! * full rank: the spectral ensemble with uniform weights gives `I/d`;
//! * two qubits: shrinking the weight of `|z_1⟩` in the decomposition with a
//!   diagonal spin-flip table until the concurrence vanishes;
//! * anything else: a seeded pattern search over ensemble unitaries and
//!   weights that maximizes the smallest partial-transpose eigenvalue.
//!
//! Every certificate is re-verified before it is returned.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::entanglement::{concurrence_of, magic_decomposition, min_pt_eigenvalue_of, ppt_is_exact};
use crate::error::{Error, Result};
use crate::linalg::{parameter_count, parameterized_unitary, restart_rng, CMatrix};
use crate::optimize::{golden_section_min, PatternSearch};
use crate::states::{reweight, spectral_ensemble, transform_ensemble, Ensemble, Member, QuantumState};
use crate::tolerance::{CERT_WEIGHT_FLOOR, CONCURRENCE_ZERO, LAMBDA_ZERO, PPT_TOL, PROBABILITY_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QssStatus {
    #[serde(rename = "QSS")]
    Qss,
    #[serde(rename = "NOT_QSS_CANDIDATE")]
    NotQssCandidate,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

/// Which test vouches for separability of a certificate's new-state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparabilityTest {
    /// Two qubits: PPT and vanishing concurrence.
    PptConcurrence,
    /// `d_A·d_B ≤ 6`, where PPT is equivalent to separability.
    PptExact,
    /// Larger dimensions: PPT is only a necessary condition.
    PptSeparable,
}

impl SeparabilityTest {
    pub fn for_dims(d_a: usize, d_b: usize) -> Self {
        if d_a == 2 && d_b == 2 {
            Self::PptConcurrence
        } else if ppt_is_exact(d_a, d_b) {
            Self::PptExact
        } else {
            Self::PptSeparable
        }
    }
}

/// Stage of the pipeline that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Separable,
    FullRank,
    ZReweight,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub ensemble: Ensemble,
    pub weights: Vec<f64>,
    pub test: SeparabilityTest,
}

impl Certificate {
    /// The reweighted (new) state.
    pub fn new_state(&self) -> Result<QuantumState> {
        reweight(&self.ensemble, &self.weights)
    }

    /// Transports the certificate through the local filter `a ⊗ b`: each
    /// member becomes `(a⊗b)|ψ_i⟩` normalized, base weights and new weights
    /// both pick up the factor `‖(a⊗b)|ψ_i⟩‖²`. The new state of the result
    /// is the filtered new state.
    pub fn filtered(&self, a: &CMatrix, b: &CMatrix) -> Result<Certificate> {
        let ab = a.kron(b);
        if ab.cols() != self.ensemble.members()[0].vector.dim() || !ab.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "filter {}x{} for ensemble dimension {}",
                ab.rows(),
                ab.cols(),
                self.ensemble.members()[0].vector.dim()
            )));
        }
        let mut base = Vec::new();
        let mut weights = Vec::new();
        for (m, &w) in self.ensemble.members().iter().zip(&self.weights) {
            let v = ab.apply(&m.vector);
            let n = v.norm_sqr();
            if n > PROBABILITY_FLOOR {
                base.push((m.weight * n, v.scale_real(1.0 / n.sqrt())));
                weights.push(w * n);
            }
        }
        let total: f64 = base.iter().map(|(w, _)| w).sum();
        let wtotal: f64 = weights.iter().sum();
        if base.is_empty() || total <= PROBABILITY_FLOOR || wtotal <= PROBABILITY_FLOOR {
            return Err(Error::ZeroProbability(total));
        }
        let members = base.into_iter().map(|(w, vector)| Member { weight: w / total, vector }).collect();
        Ok(Certificate {
            ensemble: Ensemble::new(members, self.ensemble.dims().to_vec())?,
            weights: weights.iter().map(|w| w / wtotal).collect(),
            test: self.test,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub lambda_primes: Option<[f64; 4]>,
    pub rank: usize,
    pub best_pt_eigenvalue: Option<f64>,
    /// Objective evaluations spent by the heuristic search.
    pub evaluations: usize,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QssVerdict {
    pub status: QssStatus,
    pub certificate: Option<Certificate>,
    pub evidence: Evidence,
}

/// Outcome of checking a state against the separability test for its
/// dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub separable: bool,
    pub min_pt_eigenvalue: f64,
    pub concurrence: Option<f64>,
    pub test: SeparabilityTest,
}

pub fn check_separable(rho: &QuantumState) -> Result<Verification> {
    let (d_a, d_b) = rho.bipartite_dims()?;
    Ok(check_separable_matrix(rho.matrix(), d_a, d_b))
}

fn check_separable_matrix(m: &CMatrix, d_a: usize, d_b: usize) -> Verification {
    let min_pt = min_pt_eigenvalue_of(m, d_a, d_b);
    let test = SeparabilityTest::for_dims(d_a, d_b);
    let concurrence = (test == SeparabilityTest::PptConcurrence).then(|| concurrence_of(m));
    let separable = min_pt >= -PPT_TOL && concurrence.is_none_or(|c| c <= CONCURRENCE_ZERO);
    Verification { separable, min_pt_eigenvalue: min_pt, concurrence, test }
}

/// Independently recomputes the certificate's new state and checks it.
pub fn verify_certificate(cert: &Certificate) -> Result<Verification> {
    check_separable(&cert.new_state()?)
}

fn evidence(rho: &QuantumState, method: Method) -> Evidence {
    let lambda_primes = rho.is_two_qubit().then(|| crate::entanglement::lambda_primes_of(rho.matrix()));
    Evidence { lambda_primes, rank: rho.rank(), best_pt_eigenvalue: None, evaluations: 0, method }
}

fn unknown(ev: Evidence) -> QssVerdict {
    QssVerdict { status: QssStatus::Unknown, certificate: None, evidence: ev }
}

/// Builds a QSS verdict if the certificate verifies, else `None`.
fn certified(ensemble: Ensemble, weights: Vec<f64>, mut ev: Evidence) -> Result<Option<QssVerdict>> {
    let (d_a, d_b) = bipartite(ensemble.dims())?;
    let cert = Certificate { ensemble, weights, test: SeparabilityTest::for_dims(d_a, d_b) };
    let check = verify_certificate(&cert)?;
    ev.best_pt_eigenvalue = Some(check.min_pt_eigenvalue);
    Ok(check.separable.then_some(QssVerdict { status: QssStatus::Qss, certificate: Some(cert), evidence: ev }))
}

fn bipartite(dims: &[usize]) -> Result<(usize, usize)> {
    match dims {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::DimensionMismatch(format!("bipartite state required, got dims {dims:?}"))),
    }
}

/// A full-rank state is QSS: uniform weights on its spectral ensemble give
/// `I/d`. Rank-deficient input gives `UNKNOWN`.
pub fn full_rank_certificate(rho: &QuantumState) -> Result<QssVerdict> {
    bipartite(rho.dims())?;
    let ev = evidence(rho, Method::FullRank);
    if ev.rank < rho.dim() {
        return Ok(unknown(ev));
    }
    let ensemble = spectral_ensemble(rho);
    let d = ensemble.len();
    Ok(certified(ensemble, vec![1.0 / d as f64; d], ev.clone())?.unwrap_or_else(|| unknown(ev)))
}

/// Two-qubit route through the decomposition `{|z_i⟩}`.
///
/// Separable input is certified by its own spectral ensemble. If
/// `λ′_2 = λ′_3 = λ′_4 = 0` the state is reported as a non-QSS candidate.
/// Otherwise the weight `q` of `|z_1⟩` is lowered, the rest rescaled in
/// proportion, until the concurrence of the new state vanishes.
pub fn reweight_certificate_2q(rho: &QuantumState) -> Result<QssVerdict> {
    if !rho.is_two_qubit() {
        return Err(Error::DimensionMismatch(format!("two-qubit state required, got dims {:?}", rho.dims())));
    }
    let mut ev = evidence(rho, Method::ZReweight);
    if concurrence_of(rho.matrix()) <= CONCURRENCE_ZERO {
        let spectral = spectral_ensemble(rho);
        let w = spectral.weights();
        ev.method = Method::Separable;
        return Ok(certified(spectral, w, ev.clone())?.unwrap_or_else(|| unknown(ev)));
    }
    let lp = ev.lambda_primes.expect("two-qubit evidence");
    if lp[1..].iter().all(|&l| l <= LAMBDA_ZERO) {
        ev.best_pt_eigenvalue = Some(min_pt_eigenvalue_of(rho.matrix(), 2, 2));
        return Ok(QssVerdict { status: QssStatus::NotQssCandidate, certificate: None, evidence: ev });
    }

    let md = magic_decomposition(rho)?;
    let base = md.ensemble;
    let w = base.weights();
    let w1 = w[0];
    let rest = 1.0 - w1;
    let weights_for =
        |q: f64| -> Vec<f64> { std::iter::once(q).chain(w[1..].iter().map(|wi| wi * (1.0 - q) / rest)).collect() };
    let margin = |q: f64| -> f64 {
        match reweight(&base, &weights_for(q)) {
            Ok(s) => {
                let l = crate::entanglement::lambda_primes_of(s.matrix());
                l[0] - l[1] - l[2] - l[3]
            }
            Err(_) => f64::INFINITY,
        }
    };

    let lo = CERT_WEIGHT_FLOOR;
    let hi = w1.max(lo);
    let mut q = golden_section_min(margin, lo, hi, 200);
    if margin(q) > CONCURRENCE_ZERO {
        // The margin is expected to be convex in q; if the bracket search
        // missed, scan a grid.
        let grid = (0..1000).map(|k| lo + (hi - lo) * k as f64 / 999.0);
        q = grid.min_by(|a, b| margin(*a).total_cmp(&margin(*b))).unwrap_or(q);
    }
    let weights = weights_for(q);
    if margin(q) > CONCURRENCE_ZERO || weights.iter().any(|&x| x < CERT_WEIGHT_FLOOR) {
        ev.best_pt_eigenvalue = reweight(&base, &weights).ok().map(|s| min_pt_eigenvalue_of(s.matrix(), 2, 2));
        return Ok(unknown(ev));
    }
    Ok(certified(base, weights, ev.clone())?.unwrap_or_else(|| unknown(ev)))
}

/// Weights `floor + (1 - r·floor)·softmax(logits)`: every entry at least the
/// certificate floor, summing to one.
fn floored_softmax(logits: &[f64]) -> Vec<f64> {
    let r = logits.len() as f64;
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = e.iter().sum();
    let free = 1.0 - r * CERT_WEIGHT_FLOOR;
    let mut w: Vec<f64> = e.iter().map(|x| CERT_WEIGHT_FLOOR + free * x / s).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

/// Seeded search over square ensemble unitaries and floored weights.
///
/// The objective is the smallest partial-transpose eigenvalue of the new
/// state; for two qubits the concurrence is subtracted as well, since PPT
/// violations of weakly entangled two-qubit states are only quadratic in the
/// entangled weight. Restart 0 starts from the spectral ensemble with uniform
/// weights; later restarts draw their start from `(seed, restart)` streams.
/// `budget` caps objective evaluations.
pub fn heuristic_search(rho: &QuantumState, budget: usize, seed: u64) -> Result<QssVerdict> {
    let (d_a, d_b) = bipartite(rho.dims())?;
    let mut ev = evidence(rho, Method::Heuristic);
    let spectral = spectral_ensemble(rho);
    let r = spectral.len();

    if r == 1 {
        ev.evaluations = 1;
        let w = spectral.weights();
        return Ok(certified(spectral, w, ev.clone())?.unwrap_or_else(|| {
            ev.best_pt_eigenvalue = Some(min_pt_eigenvalue_of(rho.matrix(), d_a, d_b));
            unknown(ev)
        }));
    }

    let np = parameter_count(r);
    let two_qubit = d_a == 2 && d_b == 2;
    let candidate = |x: &[f64]| -> Option<(Ensemble, Vec<f64>)> {
        let u = parameterized_unitary(&x[..np], r).ok()?;
        let e = transform_ensemble(&spectral, &u).ok()?;
        let logits = &x[np..np + e.len()];
        Some((e, floored_softmax(logits)))
    };
    let objective = |x: &[f64]| -> f64 {
        let Some((e, w)) = candidate(x) else { return f64::NEG_INFINITY };
        let Ok(s) = reweight(&e, &w) else { return f64::NEG_INFINITY };
        let pt = min_pt_eigenvalue_of(s.matrix(), d_a, d_b);
        if two_qubit {
            pt - concurrence_of(s.matrix())
        } else {
            pt
        }
    };

    let mut used = 0usize;
    let mut best = f64::NEG_INFINITY;
    let mut restart = 0u64;
    while used < budget {
        let x0: Vec<f64> = if restart == 0 {
            vec![0.0; np + r]
        } else {
            let mut rng = restart_rng(seed, restart);
            (0..np + r).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
        };
        let remaining = budget - used;
        let search =
            PatternSearch { max_iters: remaining.saturating_sub(1) / 2, target: Some(-PPT_TOL), ..Default::default() };
        let res = search.maximize(objective, x0);
        used += res.evaluations;
        best = best.max(res.value);
        if res.value >= -PPT_TOL {
            if let Some((e, w)) = candidate(&res.x) {
                ev.evaluations = used;
                if let Some(v) = certified(e, w, ev.clone())? {
                    return Ok(v);
                }
            }
        }
        restart += 1;
    }
    ev.evaluations = used;
    ev.best_pt_eigenvalue = Some(best);
    Ok(unknown(ev))
}

/// Full pipeline: full rank, then separable, then the two-qubit route, then
/// the heuristic search.
pub fn classify(rho: &QuantumState, budget: usize, seed: u64) -> Result<QssVerdict> {
    let (d_a, d_b) = bipartite(rho.dims())?;
    let full = full_rank_certificate(rho)?;
    let verdict = if full.status == QssStatus::Qss {
        full
    } else if check_separable_matrix(rho.matrix(), d_a, d_b).separable {
        let spectral = spectral_ensemble(rho);
        let w = spectral.weights();
        let ev = evidence(rho, Method::Separable);
        certified(spectral, w, ev.clone())?.unwrap_or_else(|| unknown(ev))
    } else if rho.is_two_qubit() {
        reweight_certificate_2q(rho)?
    } else {
        heuristic_search(rho, budget, seed)?
    };
    reverify(verdict)
}

fn reverify(verdict: QssVerdict) -> Result<QssVerdict> {
    if let (QssStatus::Qss, Some(cert)) = (verdict.status, &verdict.certificate) {
        let check = verify_certificate(cert)?;
        debug_assert!(check.separable, "certificate failed re-verification: {check:?}");
        if !check.separable {
            return Ok(unknown(verdict.evidence));
        }
    }
    Ok(verdict)
}
