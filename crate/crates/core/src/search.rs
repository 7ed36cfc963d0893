//! Derivative-free search over protocol rounds for a pure entangled output.
//!
//! A round is scored by its best outcome. Each outcome contributes the
//! product of three ramps, each saturating at 1 on its success threshold:
//! probability, purity and entanglement. The search runs a coordinate
//! pattern search over the `d_A² + d_B²` parameters of
//! `u_alice = U₀ᴬ P(θᴬ)` and `u_bob = U₀ᴮ P(θᴮ)` from several starting
//! rounds `(U₀ᴬ, U₀ᴮ)`: the named rounds, any caller-supplied rounds, then
//! Haar-random ones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{concurrence_of, pure_state_concurrence};
use crate::error::Result;
use crate::linalg::{eigh_unchecked, haar_unitary_with, parameter_count, parameterized_unitary, restart_rng, CMatrix};
use crate::optimize::PatternSearch;
use crate::protocol::{NamedRound, PreparedPair, ProtocolRound, RoundDims, RoundOutcome};
use crate::qss::{classify, QssStatus, QssVerdict};
use crate::states::{purity, QuantumState};

/// Numerical witnesses for "pure entangled output with nonzero probability".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub probability: f64,
    pub purity: f64,
    pub entanglement: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { probability: 1e-6, purity: 1.0 - 1e-6, entanglement: 1e-3 }
    }
}

/// Probability, purity and entanglement of one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeMetrics {
    pub probability: f64,
    pub purity: f64,
    pub entanglement: f64,
}

/// Concurrence for two qubits; otherwise the pure-state concurrence of the
/// dominant eigenvector, which is nonzero exactly when its Schmidt rank is at
/// least two.
pub fn entanglement_of(rho: &QuantumState) -> f64 {
    let (d_a, d_b) = match rho.dims() {
        [a, b] => (*a, *b),
        _ => return 0.0,
    };
    if d_a == 2 && d_b == 2 {
        return concurrence_of(rho.matrix());
    }
    let eig = eigh_unchecked(rho.matrix());
    pure_state_concurrence(&eig.vectors[0], d_a, d_b).unwrap_or(0.0)
}

pub fn outcome_metrics(o: &RoundOutcome) -> Option<OutcomeMetrics> {
    let s = o.post_state.as_ref()?;
    Some(OutcomeMetrics { probability: o.probability, purity: purity(s), entanglement: entanglement_of(s) })
}

impl Thresholds {
    pub fn met_by(&self, m: &OutcomeMetrics) -> bool {
        m.probability > self.probability && m.purity >= self.purity && m.entanglement >= self.entanglement
    }

    fn probability_ramp(&self, p: f64) -> f64 {
        (p / self.probability).clamp(0.0, 1.0)
    }

    fn purity_ramp(&self, purity: f64, d: usize) -> f64 {
        let floor = 1.0 / d as f64;
        ((purity - floor) / (self.purity - floor)).clamp(0.0, 1.0)
    }

    fn entanglement_ramp(&self, e: f64) -> f64 {
        (e / self.entanglement).clamp(0.0, 1.0)
    }

    /// Score in `[0, 1]`; equals 1 exactly when every threshold is reached.
    pub fn score(&self, m: &OutcomeMetrics, d: usize) -> f64 {
        self.probability_ramp(m.probability) * self.purity_ramp(m.purity, d) * self.entanglement_ramp(m.entanglement)
    }

    /// Best outcome score and its index. Entanglement is only computed for
    /// outcomes whose other two factors could beat the running best.
    fn best_of(&self, outcomes: &[RoundOutcome]) -> (f64, usize) {
        let mut best = (0.0, 0);
        for (k, o) in outcomes.iter().enumerate() {
            let Some(s) = &o.post_state else { continue };
            let bound = self.probability_ramp(o.probability) * self.purity_ramp(purity(s), s.dim());
            if bound <= best.0 {
                continue;
            }
            let score = bound * self.entanglement_ramp(entanglement_of(s));
            if score > best.0 {
                best = (score, k);
            }
        }
        best
    }
}

/// Score of a round: the best outcome score.
pub fn score_round(
    rho_s: &QuantumState,
    rho_a: &QuantumState,
    round: &ProtocolRound,
    thresholds: &Thresholds,
) -> Result<f64> {
    let outcomes = PreparedPair::new(rho_s, rho_a)?.outcomes(round)?;
    Ok(thresholds.best_of(&outcomes).0)
}

/// Where a restart's starting round came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "name")]
pub enum StartKind {
    Named(NamedRound),
    Input(usize),
    Haar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
    pub thresholds: Thresholds,
    pub seeds_in: Vec<ProtocolRound>,
}

impl SearchConfig {
    pub fn new(restarts: usize, iters: usize, seed: u64) -> Self {
        Self { restarts, iters, seed, thresholds: Thresholds::default(), seeds_in: Vec::new() }
    }
}

/// Result of a single restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartResult {
    pub index: usize,
    pub start: StartKind,
    pub round: ProtocolRound,
    pub score: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Best score after each iteration.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub start: StartKind,
    pub score: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub best_score: f64,
    pub best_round: ProtocolRound,
    pub best_outcome: RoundOutcome,
    pub best_metrics: Option<OutcomeMetrics>,
    pub best_restart: usize,
    pub restarts_used: usize,
    pub success: bool,
    /// Best score of each restart, in restart order.
    pub trace: Vec<f64>,
    pub restarts: Vec<RestartSummary>,
    pub thresholds: Thresholds,
}

/// Starting rounds in restart order: named rounds (those that fit the
/// dimensions), then `seeds_in`, then Haar-random rounds up to `restarts`.
fn starts(dims: RoundDims, config: &SearchConfig) -> Vec<(StartKind, Option<ProtocolRound>)> {
    let mut out: Vec<(StartKind, Option<ProtocolRound>)> = Vec::new();
    for named in [NamedRound::Swap, NamedRound::BilateralCnot, NamedRound::Identity] {
        if let Ok(r) = named.build(dims) {
            out.push((StartKind::Named(named), Some(r)));
        }
    }
    for (k, r) in config.seeds_in.iter().enumerate() {
        out.push((StartKind::Input(k), Some(r.clone())));
    }
    while out.len() < config.restarts {
        out.push((StartKind::Haar, None));
    }
    out
}

/// Runs one restart from the given start.
pub fn run_restart(
    pair: &PreparedPair,
    index: usize,
    start: StartKind,
    initial: Option<ProtocolRound>,
    config: &SearchConfig,
) -> Result<RestartResult> {
    let dims = pair.dims();
    let (da, db) = (dims.alice(), dims.bob());
    let initial = match initial {
        Some(r) => r,
        None => {
            let mut rng = restart_rng(config.seed, index as u64);
            let ua = haar_unitary_with(da, &mut rng);
            let ub = haar_unitary_with(db, &mut rng);
            ProtocolRound::new(ua, ub)?
        }
    };
    let (na, nb) = (parameter_count(da), parameter_count(db));
    let build = |x: &[f64]| -> Option<ProtocolRound> {
        let pa = parameterized_unitary(&x[..na], da).ok()?;
        let pb = parameterized_unitary(&x[na..na + nb], db).ok()?;
        ProtocolRound::new(initial.u_alice() * &pa, initial.u_bob() * &pb).ok()
    };
    let thresholds = config.thresholds;
    let objective = |x: &[f64]| -> f64 {
        build(x).and_then(|r| pair.outcomes(&r).ok()).map_or(f64::NEG_INFINITY, |o| thresholds.best_of(&o).0)
    };
    let search = PatternSearch { max_iters: config.iters, target: Some(1.0), ..Default::default() };
    let res = search.maximize(objective, vec![0.0; na + nb]);
    let round = build(&res.x).unwrap_or(initial);
    Ok(RestartResult {
        index,
        start,
        round,
        score: res.value,
        iterations: res.iterations,
        evaluations: res.evaluations,
        history: res.history,
    })
}

/// Best round over all restarts.
///
/// Restarts run in parallel and are reduced in restart order. Ties on score
/// go to the restart that needed fewer iterations, then to the lower restart
/// index, so a starting round that already succeeds is reported as is.
pub fn optimize_protocol(rho_s: &QuantumState, rho_a: &QuantumState, config: &SearchConfig) -> Result<SearchReport> {
    let pair = PreparedPair::new(rho_s, rho_a)?;
    let starts = starts(pair.dims(), config);
    let results: Vec<RestartResult> = starts
        .into_par_iter()
        .enumerate()
        .map(|(k, (kind, initial))| run_restart(&pair, k, kind, initial, config))
        .collect::<Result<_>>()?;

    let best = results
        .iter()
        .min_by(|a, b| b.score.total_cmp(&a.score).then(a.iterations.cmp(&b.iterations)).then(a.index.cmp(&b.index)))
        .expect("at least one restart");
    let outcomes = pair.outcomes(&best.round)?;
    let (score, k) = config.thresholds.best_of(&outcomes);
    let best_outcome = outcomes[k].clone();
    let best_metrics = outcome_metrics(&best_outcome);
    let success = best_metrics.is_some_and(|m| config.thresholds.met_by(&m));
    Ok(SearchReport {
        best_score: score,
        best_round: best.round.clone(),
        best_outcome,
        best_metrics,
        best_restart: best.index,
        restarts_used: results.len(),
        success,
        trace: results.iter().map(|r| r.score).collect(),
        restarts: results
            .iter()
            .map(|r| RestartSummary {
                index: r.index,
                start: r.start.clone(),
                score: r.score,
                iterations: r.iterations,
                evaluations: r.evaluations,
            })
            .collect(),
        thresholds: config.thresholds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub source: QssVerdict,
    pub ancilla: QssVerdict,
    pub search: SearchReport,
    /// Both inputs certified QSS and the search succeeded. Never expected.
    pub violation: bool,
}

/// Classifies both inputs, then searches for a successful round.
pub fn impossibility_probe(
    rho_s: &QuantumState,
    rho_a: &QuantumState,
    qss_budget: usize,
    config: &SearchConfig,
) -> Result<ProbeReport> {
    let source = classify(rho_s, qss_budget, config.seed)?;
    let ancilla = classify(rho_a, qss_budget, config.seed)?;
    let search = optimize_protocol(rho_s, rho_a, config)?;
    let violation = source.status == QssStatus::Qss && ancilla.status == QssStatus::Qss && search.success;
    Ok(ProbeReport { source, ancilla, search, violation })
}

/// Identity round wrapped as a starting point, for callers that want to
/// seed a search with a local-unitary-free round.
pub fn identity_round(dims: RoundDims) -> ProtocolRound {
    ProtocolRound::new(CMatrix::identity(dims.alice()), CMatrix::identity(dims.bob())).expect("identity is unitary")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::cnot_example_inputs;
    use crate::states::bell;

    fn pure(v: crate::linalg::CVector) -> QuantumState {
        QuantumState::pure(&v, vec![2, 2]).unwrap()
    }

    #[test]
    fn scores_of_reference_rounds() {
        let t = Thresholds::default();
        let (rho_s, rho_a, cnot) = cnot_example_inputs(0.5, 0.5).unwrap();
        assert!((score_round(&rho_s, &rho_a, &cnot, &t).unwrap() - 1.0).abs() < 1e-9);

        let w = QuantumState::werner(0.9).unwrap();
        let dims = RoundDims::from_states(&w, &w).unwrap();
        assert!(score_round(&w, &w, &identity_round(dims), &t).unwrap() < 1.0);

        let swap = NamedRound::Swap.build(dims).unwrap();
        let s = score_round(&pure(bell::ket(0, 0)), &pure(bell::phi_plus()), &swap, &t).unwrap();
        assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn positive_controls_succeed_through_named_seeds() {
        let (rho_s, rho_a, _) = cnot_example_inputs(0.5, 0.5).unwrap();
        let report = optimize_protocol(&rho_s, &rho_a, &SearchConfig::new(4, 50, 0)).unwrap();
        assert!(report.success);
        assert!((report.best_outcome.probability - 0.125).abs() < 1e-9);
        assert_eq!(report.restarts[report.best_restart].start, StartKind::Named(NamedRound::BilateralCnot));

        let report =
            optimize_protocol(&pure(bell::ket(0, 0)), &pure(bell::phi_plus()), &SearchConfig::new(4, 50, 0)).unwrap();
        assert!(report.success);
        assert!((report.best_outcome.probability - 1.0).abs() < 1e-9);
    }

    #[test]
    fn werner_pair_does_not_succeed() {
        let w = QuantumState::werner(0.8).unwrap();
        let report = optimize_protocol(&w, &w, &SearchConfig::new(5, 200, 1)).unwrap();
        assert!(!report.success);
        assert!(report.best_score < 1.0);
        assert_eq!(report.restarts_used, 5);
    }

    #[test]
    fn restart_history_is_monotone() {
        let w = QuantumState::werner(0.7).unwrap();
        let pair = PreparedPair::new(&w, &w).unwrap();
        let r = run_restart(&pair, 5, StartKind::Haar, None, &SearchConfig::new(8, 100, 2)).unwrap();
        assert!(r.history.windows(2).all(|x| x[1] >= x[0]));
        assert!(r.iterations <= 100);
    }

    #[test]
    fn search_is_reproducible() {
        let w = QuantumState::werner(0.6).unwrap();
        let c = SearchConfig::new(4, 60, 9);
        assert_eq!(optimize_protocol(&w, &w, &c).unwrap(), optimize_protocol(&w, &w, &c).unwrap());
    }

    #[test]
    fn probe_flags() {
        let w = QuantumState::werner(0.9).unwrap();
        let p = impossibility_probe(&w, &w, 100, &SearchConfig::new(4, 100, 0)).unwrap();
        assert_eq!(
            (p.source.status, p.ancilla.status, p.search.success, p.violation),
            (QssStatus::Qss, QssStatus::Qss, false, false)
        );

        let (rho_s, rho_a, _) = cnot_example_inputs(0.5, 0.5).unwrap();
        let p = impossibility_probe(&rho_s, &rho_a, 100, &SearchConfig::new(4, 20, 0)).unwrap();
        assert_eq!(p.source.status, QssStatus::NotQssCandidate);
        assert_eq!(p.ancilla.status, QssStatus::NotQssCandidate);
        assert!(p.search.success && !p.violation);
    }

    #[test]
    fn entanglement_beyond_qubits() {
        let psi = crate::linalg::CVector::from_real(&[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).normalized();
        let rho = QuantumState::pure(&psi, vec![2, 3]).unwrap();
        assert!((entanglement_of(&rho) - 1.0).abs() < 1e-12);
        let prod = QuantumState::pure(&crate::linalg::CVector::basis(6, 2), vec![2, 3]).unwrap();
        assert!(entanglement_of(&prod) < 1e-12);
    }
}
