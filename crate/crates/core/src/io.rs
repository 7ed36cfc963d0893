//! JSON file formats.
//!
//! Complex numbers are `[re, im]` pairs. A state file is
//! `{"dims": [..], "matrix": [[[re, im], ..], ..]}` (row-major); an ensemble
//! file is `{"dims": [..], "members": [{"weight": w, "vector": [[re, im], ..]}]}`.
//! Both are validated on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::states::{Ensemble, Member, QuantumState};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawState {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl TryFrom<RawState> for QuantumState {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        QuantumState::new(raw.matrix, raw.dims)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawEnsemble {
    dims: Vec<usize>,
    members: Vec<Member>,
}

impl TryFrom<RawEnsemble> for Ensemble {
    type Error = Error;

    fn try_from(raw: RawEnsemble) -> Result<Self> {
        Ensemble::new(raw.members, raw.dims)
    }
}

/// Contents of a state file: either a density matrix or an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum StateFile {
    State(QuantumState),
    Ensemble(Ensemble),
}

impl StateFile {
    /// Density matrix described by the file.
    pub fn to_state(&self) -> QuantumState {
        match self {
            StateFile::State(s) => s.clone(),
            StateFile::Ensemble(e) => crate::states::from_ensemble(e),
        }
    }
}

/// Parses a state or ensemble document. Malformed JSON is a
/// [`Error::Parse`]; well-formed JSON that violates a state invariant is an
/// [`Error::InvalidState`] naming the invariant.
pub fn parse_state(text: &str) -> Result<StateFile> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| Error::Parse("state file must be a JSON object".into()))?;
    if obj.contains_key("members") {
        let raw: RawEnsemble = serde_json::from_value(value).map_err(|e| classify(&e))?;
        Ok(StateFile::Ensemble(Ensemble::try_from(raw)?))
    } else if obj.contains_key("matrix") {
        let raw: RawState = serde_json::from_value(value).map_err(|e| classify(&e))?;
        Ok(StateFile::State(QuantumState::try_from(raw)?))
    } else {
        Err(Error::Parse("expected a \"matrix\" or \"members\" field".into()))
    }
}

fn classify(e: &serde_json::Error) -> Error {
    let msg = e.to_string();
    if msg.contains("non-finite") {
        Error::invalid("finite", msg)
    } else if msg.contains("ragged") || msg.contains("entries for a") {
        Error::invalid("shape", msg)
    } else {
        Error::Parse(msg)
    }
}

pub fn load_state(path: impl AsRef<Path>) -> Result<StateFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_state(&text)
}

/// Parses a bare complex matrix (nested rows of `[re, im]`).
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}
