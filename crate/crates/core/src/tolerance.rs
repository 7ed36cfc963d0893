//! Numerical thresholds shared across the crate.

/// Maximum `|h - h†|` entry for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed deviation of a density matrix trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this fraction of the largest count as zero.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Weight-sum and unit-norm tolerance for ensembles.
pub const ENSEMBLE_TOL: f64 = 1e-10;
/// Isometry tolerance for ensemble transforms and unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;
/// `tr ρ² ≥ 1 - PURE_TOL` counts as pure.
pub const PURE_TOL: f64 = 1e-9;
/// Minimum partial-transpose eigenvalue still counted as positive.
pub const PPT_TOL: f64 = 1e-10;
/// Concurrence at or below this is treated as zero.
pub const CONCURRENCE_ZERO: f64 = 1e-9;
/// λ′ values at or below this are treated as zero.
pub const LAMBDA_ZERO: f64 = 1e-9;
/// Smallest weight a certificate may put on an ensemble member.
pub const CERT_WEIGHT_FLOOR: f64 = 1e-6;
/// Outcomes at or below this probability carry no post-measurement state.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Every named tolerance, for reports and config hashing.
pub fn all() -> Vec<(&'static str, f64)> {
    vec![
        ("hermitian", HERMITIAN_TOL),
        ("trace", TRACE_TOL),
        ("psd", PSD_TOL),
        ("rank_cutoff", RANK_CUTOFF),
        ("ensemble", ENSEMBLE_TOL),
        ("unitary", UNITARY_TOL),
        ("pure", PURE_TOL),
        ("ppt", PPT_TOL),
        ("concurrence_zero", CONCURRENCE_ZERO),
        ("lambda_zero", LAMBDA_ZERO),
        ("cert_weight_floor", CERT_WEIGHT_FLOOR),
        ("probability_floor", PROBABILITY_FLOOR),
    ]
}
