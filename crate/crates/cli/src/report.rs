//! Report documents written by every command.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use qsslab_core::search::Thresholds;
use qsslab_core::{tolerance, Error};

use crate::finite::check_finite;

/// Artifact version and the numerical configuration that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub version: String,
    /// SHA-256 over every tolerance and threshold, one `name=value` line each.
    pub config_hash: String,
    pub tolerances: BTreeMap<String, f64>,
}

impl Versions {
    pub fn new(thresholds: &Thresholds) -> Self {
        let mut tolerances: BTreeMap<String, f64> =
            tolerance::all().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        tolerances.insert("threshold_probability".into(), thresholds.probability);
        tolerances.insert("threshold_purity".into(), thresholds.purity);
        tolerances.insert("threshold_entanglement".into(), thresholds.entanglement);
        Self { version: env!("CARGO_PKG_VERSION").to_string(), config_hash: config_hash(&tolerances), tolerances }
    }
}

pub fn config_hash(tolerances: &BTreeMap<String, f64>) -> String {
    let mut hasher = Sha256::new();
    for (name, value) in tolerances {
        hasher.update(format!("{name}={value:?}\n").as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// One command's output. `inputs` echoes the resolved parameters and
/// `results` carries the command-specific payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument<I = Value, R = Value> {
    pub command: String,
    pub inputs: I,
    pub results: R,
    pub versions: Versions,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

/// Encodes a report: pretty JSON in declaration order plus a trailing
/// newline. Documents containing NaN or infinities are refused.
pub fn encode_report<I: Serialize, R: Serialize>(doc: &ReportDocument<I, R>) -> Result<String, Error> {
    check_finite(doc).map_err(|e| Error::InvalidState { invariant: "finite", detail: e.to_string() })?;
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes a report to `path`, or to stdout when `path` is `None`.
pub fn write_report<I: Serialize, R: Serialize>(
    doc: &ReportDocument<I, R>,
    path: Option<&Path>,
) -> Result<(), ReportError> {
    let text = encode_report(doc)?;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Reads a report back as untyped JSON.
pub fn load_report(path: &Path) -> Result<ReportDocument, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}
