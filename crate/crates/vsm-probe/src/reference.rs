//! Bundled human reference scores and ingestion of externally supplied MMLU
//! results.
//!
//! The human table is embedded at build time so every comparison and the
//! whole acceptance suite run offline. MMLU scores are never bundled; they
//! are user-supplied as a two-column CSV.

use std::collections::BTreeMap;
use std::path::Path;

use crate::protocol::Nation;
use crate::scoring::{Dimension, VsmScore};

const HUMAN_REFERENCE_CSV: &str = include_str!("../data/human_reference.csv");

const PROVENANCE: &str =
    "Hofstede national culture scores for the nine study nations (values survey publications)";

/// Published per-nation scores for the nine study nations.
#[derive(Debug, Clone, PartialEq)]
pub struct HumanReference {
    pub nationals: BTreeMap<Nation, VsmScore>,
    pub provenance: String,
}

/// Externally supplied MMLU scores, model name -> score in [0, 100].
#[derive(Debug, Clone, PartialEq)]
pub struct MmluTable {
    scores: BTreeMap<String, f64>,
}

impl MmluTable {
    pub fn get(&self, model: &str) -> Option<f64> {
        self.scores.get(model).copied()
    }

    pub fn models(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReferenceError {
    #[error("reference asset violates schema: {0}")]
    SchemaError(String),
    #[error("file not found: {0}")]
    MissingFile(String),
    #[error("csv parse failure: {0}")]
    Csv(#[from] csv::Error),
}

/// Load the bundled 9x6 human reference table.
pub fn load_human_reference() -> Result<HumanReference, ReferenceError> {
    let nationals = parse_national_csv(HUMAN_REFERENCE_CSV)?;
    if nationals.len() != Nation::ALL.len() {
        return Err(ReferenceError::SchemaError(format!(
            "expected {} nations, found {}",
            Nation::ALL.len(),
            nationals.len()
        )));
    }
    Ok(HumanReference {
        nationals,
        provenance: PROVENANCE.to_string(),
    })
}

fn parse_national_csv(data: &str) -> Result<BTreeMap<Nation, VsmScore>, ReferenceError> {
    let mut reader = csv::Reader::from_reader(data.as_bytes());
    let headers = reader.headers()?.clone();
    let expected: Vec<&str> = std::iter::once("nation")
        .chain(Dimension::ALL.iter().map(|d| d.label()))
        .collect();
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(ReferenceError::SchemaError(format!(
            "header {found:?}, expected {expected:?}"
        )));
    }

    let mut nationals = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let label = record
            .get(0)
            .ok_or_else(|| ReferenceError::SchemaError("missing nation column".into()))?;
        let nation = Nation::from_label(label)
            .ok_or_else(|| ReferenceError::SchemaError(format!("unknown nation {label:?}")))?;
        let mut values = [0.0; 6];
        for (i, value) in values.iter_mut().enumerate() {
            let field = record
                .get(i + 1)
                .ok_or_else(|| ReferenceError::SchemaError(format!("{label}: missing column")))?;
            *value = field.trim().parse::<f64>().map_err(|e| {
                ReferenceError::SchemaError(format!("{label}: bad value {field:?}: {e}"))
            })?;
        }
        if nationals.insert(nation, VsmScore::from_array(values)).is_some() {
            return Err(ReferenceError::SchemaError(format!(
                "duplicate nation {label:?}"
            )));
        }
    }
    Ok(nationals)
}

/// Parse a user-supplied MMLU CSV with header `model,score`.
pub fn load_mmlu(path: &Path) -> Result<MmluTable, ReferenceError> {
    if !path.is_file() {
        return Err(ReferenceError::MissingFile(path.display().to_string()));
    }
    let data = std::fs::read_to_string(path)
        .map_err(|e| ReferenceError::SchemaError(format!("{}: {e}", path.display())))?;
    parse_mmlu_str(&data)
}

fn parse_mmlu_str(data: &str) -> Result<MmluTable, ReferenceError> {
    let mut reader = csv::Reader::from_reader(data.as_bytes());
    let headers = reader.headers()?.clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != ["model", "score"] {
        return Err(ReferenceError::SchemaError(format!(
            "header {found:?}, expected [\"model\", \"score\"]"
        )));
    }
    let mut scores = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let model = record
            .get(0)
            .ok_or_else(|| ReferenceError::SchemaError("missing model column".into()))?
            .trim()
            .to_string();
        if model.is_empty() {
            return Err(ReferenceError::SchemaError("empty model name".into()));
        }
        let field = record
            .get(1)
            .ok_or_else(|| ReferenceError::SchemaError(format!("{model}: missing score")))?;
        let score: f64 = field.trim().parse().map_err(|e| {
            ReferenceError::SchemaError(format!("{model}: bad score {field:?}: {e}"))
        })?;
        if !score.is_finite() {
            return Err(ReferenceError::SchemaError(format!(
                "{model}: score must be finite"
            )));
        }
        if scores.insert(model.clone(), score).is_some() {
            return Err(ReferenceError::SchemaError(format!(
                "duplicate model {model:?}"
            )));
        }
    }
    if scores.is_empty() {
        return Err(ReferenceError::SchemaError(
            "MMLU table contains no rows".into(),
        ));
    }
    Ok(MmluTable { scores })
}
