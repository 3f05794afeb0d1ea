//! Response parsing, per-identity aggregation, and the experiment-set type.
//!
//! Raw model text is reduced to an option ID with two fallback rules: the
//! two health questions (15 and 18) are always scored as the neutral option
//! 3, and so is any response from which no option could be parsed.
//! Unparseable input is a value, not an error — it is counted against the
//! set's recognizability rate.

mod runner;
mod store;

pub use runner::{run_experiment, RunOptions};
pub use store::{read_manifest, read_records, write_manifest, write_records, Manifest, RawRecord};

use serde::{Deserialize, Serialize};

use crate::gateway::GatewayError;
use crate::protocol::{identity_grid, ExperimentConfig, Identity, ProtocolError};
use crate::questionnaire::{QuestionnaireError, HEALTH_QUESTION_IDS, QUESTION_COUNT};

/// Neutral raw score substituted for health questions and unrecognizable
/// responses.
pub const NEUTRAL_OPTION: u8 = 3;

/// Which substitution rule, if any, determines the effective score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackKind {
    None,
    Unrecognizable,
    HealthQuestion,
}

/// Outcome of parsing one raw response.
///
/// `option_id` is what the model actually selected (`None` when nothing
/// could be parsed); [`ParsedAnswer::effective_score`] applies the fallback
/// rules on top of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAnswer {
    pub question_id: u8,
    pub option_id: Option<u8>,
    pub rationale: String,
    pub fallback: FallbackKind,
}

impl ParsedAnswer {
    /// True when a valid option ID was extracted from the text.
    pub fn is_recognized(&self) -> bool {
        self.option_id.is_some()
    }

    /// The raw score that enters aggregation after fallback substitution.
    pub fn effective_score(&self) -> u8 {
        match self.fallback {
            FallbackKind::None => self.option_id.expect("no fallback implies a parsed option"),
            FallbackKind::Unrecognizable | FallbackKind::HealthQuestion => NEUTRAL_OPTION,
        }
    }
}

const OPTION_KEYS: [&str; 4] = ["option", "option_id", "choice", "answer"];
const RATIONALE_KEYS: [&str; 3] = ["rationale", "reason", "explanation"];

/// Extract the chosen option from raw model output.
///
/// The first substring that parses as a JSON object is examined (surrounding
/// prose and code fences are skipped by scanning brace positions with the
/// real parser). The option may appear under any of the keys `option`,
/// `option_id`, `choice`, or `answer` (case-insensitive), as an integer or a
/// numeric string, and must land in 1..=5. Anything else is unrecognized.
/// Health questions are parsed normally but flagged so their score is forced
/// to the neutral option.
pub fn parse_response(raw_text: &str, question_id: u8) -> ParsedAnswer {
    let mut option_id = None;
    let mut rationale = String::new();

    if let Some(object) = first_json_object(raw_text) {
        if let Some(map) = object.as_object() {
            for (key, value) in map {
                let key = key.to_ascii_lowercase();
                if option_id.is_none() && OPTION_KEYS.contains(&key.as_str()) {
                    option_id = extract_option(value);
                }
                if rationale.is_empty() && RATIONALE_KEYS.contains(&key.as_str()) {
                    if let Some(text) = value.as_str() {
                        rationale = text.to_string();
                    }
                }
            }
        }
    }

    let fallback = if HEALTH_QUESTION_IDS.contains(&question_id) {
        FallbackKind::HealthQuestion
    } else if option_id.is_none() {
        FallbackKind::Unrecognizable
    } else {
        FallbackKind::None
    };

    ParsedAnswer {
        question_id,
        option_id,
        rationale,
        fallback,
    }
}

/// First substring of `text` that parses as a JSON object.
fn first_json_object(text: &str) -> Option<serde_json::Value> {
    for (index, _) in text.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&text[index..])
            .into_iter::<serde_json::Value>();
        if let Some(Ok(value)) = stream.next() {
            if value.is_object() {
                return Some(value);
            }
        }
    }
    None
}

fn extract_option(value: &serde_json::Value) -> Option<u8> {
    let number = if let Some(n) = value.as_i64() {
        Some(n)
    } else if let Some(f) = value.as_f64() {
        (f.fract() == 0.0).then_some(f as i64)
    } else if let Some(s) = value.as_str() {
        s.trim().parse::<i64>().ok()
    } else {
        None
    };
    number.and_then(|n| (1..=5).contains(&n).then_some(n as u8))
}

/// Seed-averaged raw scores for one simulated identity: the 24-d data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseVector {
    pub identity: Identity,
    pub scores: Vec<f64>,
    pub seed_count: usize,
}

impl ResponseVector {
    /// Score of a question by its 1-based ID.
    pub fn score(&self, question_id: u8) -> f64 {
        self.scores[usize::from(question_id) - 1]
    }
}

/// Entrywise mean of one identity's per-seed effective score vectors.
pub fn aggregate_identity(
    identity: Identity,
    per_seed_scores: &[[u8; QUESTION_COUNT]],
) -> Result<ResponseVector, CollectionError> {
    if per_seed_scores.is_empty() {
        return Err(CollectionError::EmptyInput);
    }
    let n = per_seed_scores.len() as f64;
    let scores = (0..QUESTION_COUNT)
        .map(|q| per_seed_scores.iter().map(|v| f64::from(v[q])).sum::<f64>() / n)
        .collect();
    Ok(ResponseVector {
        identity,
        scores,
        seed_count: per_seed_scores.len(),
    })
}

/// A completed experiment set: its configuration, one [`ResponseVector`] per
/// grid identity (in grid order), and run metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSet {
    pub config: ExperimentConfig,
    pub label: String,
    pub vectors: Vec<ResponseVector>,
    pub recognizability_rate: f64,
    pub manifest: Manifest,
}

impl ExperimentSet {
    /// Vectors belonging to one nation, in grid order.
    pub fn nation_vectors(&self, nation: crate::protocol::Nation) -> Vec<&ResponseVector> {
        self.vectors
            .iter()
            .filter(|v| v.identity.nation == nation)
            .collect()
    }

    /// Check the set against its structural invariants.
    pub fn verify(&self) -> Result<(), CollectionError> {
        let grid = identity_grid();
        if self.vectors.len() != grid.len() {
            return Err(CollectionError::IntegrityError(format!(
                "expected {} vectors, found {}",
                grid.len(),
                self.vectors.len()
            )));
        }
        for (vector, identity) in self.vectors.iter().zip(&grid) {
            if vector.identity != *identity {
                return Err(CollectionError::IntegrityError(format!(
                    "vector for {} out of grid order",
                    vector.identity
                )));
            }
            if vector.scores.len() != QUESTION_COUNT {
                return Err(CollectionError::IntegrityError(format!(
                    "vector for {} has {} entries",
                    vector.identity,
                    vector.scores.len()
                )));
            }
            for (q, &score) in vector.scores.iter().enumerate() {
                if !(1.0..=5.0).contains(&score) {
                    return Err(CollectionError::IntegrityError(format!(
                        "score {} for question {} of {} outside [1, 5]",
                        score,
                        q + 1,
                        vector.identity
                    )));
                }
            }
            for health_id in HEALTH_QUESTION_IDS {
                if vector.score(health_id) != f64::from(NEUTRAL_OPTION) {
                    return Err(CollectionError::IntegrityError(format!(
                        "health question {} of {} not forced to {}",
                        health_id, vector.identity, NEUTRAL_OPTION
                    )));
                }
            }
        }
        Ok(())
    }

    /// Load a persisted set from its directory, re-aggregating from the raw
    /// records and cross-checking the manifest.
    pub fn load(dir: &std::path::Path) -> Result<Self, CollectionError> {
        let manifest = read_manifest(&dir.join("manifest.json"))?;
        let records = read_records(&dir.join("records.jsonl"))?;
        runner::assemble_set(manifest, records)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CollectionError {
    #[error("no per-seed scores to aggregate")]
    EmptyInput,
    #[error(transparent)]
    Transport(#[from] GatewayError),
    #[error("persisted records conflict with manifest: {0}")]
    IntegrityError(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Questionnaire(#[from] QuestionnaireError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("record serialization: {0}")]
    Json(#[from] serde_json::Error),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Gender, Nation};

    fn identity() -> Identity {
        Identity {
            nation: Nation::Germany,
            gender: Gender::Female,
            age: 35,
        }
    }

    #[test]
    fn direct_json_parse() {
        let parsed = parse_response(r#"{"option": 4, "reason": "fits my view"}"#, 3);
        assert_eq!(parsed.option_id, Some(4));
        assert_eq!(parsed.fallback, FallbackKind::None);
        assert_eq!(parsed.effective_score(), 4);
        assert_eq!(parsed.rationale, "fits my view");
    }

    #[test]
    fn prose_is_unrecognizable_and_scores_neutral() {
        let parsed = parse_response("I cannot answer that.", 3);
        assert_eq!(parsed.option_id, None);
        assert_eq!(parsed.fallback, FallbackKind::Unrecognizable);
        assert_eq!(parsed.effective_score(), 3);
    }

    #[test]
    fn health_question_is_parsed_but_forced_neutral() {
        let parsed = parse_response(r#"{"option": 5, "rationale": "great"}"#, 15);
        assert_eq!(parsed.option_id, Some(5));
        assert_eq!(parsed.fallback, FallbackKind::HealthQuestion);
        assert_eq!(parsed.effective_score(), 3);
    }

    #[test]
    fn unrecognizable_health_question_still_flags_health() {
        let parsed = parse_response("no comment", 18);
        assert_eq!(parsed.fallback, FallbackKind::HealthQuestion);
        assert_eq!(parsed.effective_score(), 3);
    }

    #[test]
    fn tolerates_code_fences_and_prose() {
        let raw = "Sure! Here is my answer:\n```json\n{\"option\": \"2\", \"rationale\": \"ok\"}\n```\nHope that helps.";
        let parsed = parse_response(raw, 1);
        assert_eq!(parsed.option_id, Some(2));
    }

    #[test]
    fn alias_keys_are_accepted() {
        for raw in [
            r#"{"option_id": 1}"#,
            r#"{"Choice": 1}"#,
            r#"{"ANSWER": "1"}"#,
        ] {
            assert_eq!(parse_response(raw, 2).option_id, Some(1), "{raw}");
        }
    }

    #[test]
    fn out_of_range_and_non_numeric_are_unrecognized() {
        for raw in [
            r#"{"option": 0}"#,
            r#"{"option": 6}"#,
            r#"{"option": "maybe 3"}"#,
            r#"{"option": 2.5}"#,
            r#"{"verdict": 3}"#,
            "[1, 2, 3]",
            "",
        ] {
            assert_eq!(parse_response(raw, 2).option_id, None, "{raw}");
        }
    }

    #[test]
    fn first_object_wins() {
        let raw = r#"{"option": 2} later {"option": 5}"#;
        assert_eq!(parse_response(raw, 1).option_id, Some(2));
    }

    #[test]
    fn unbalanced_prefix_is_skipped() {
        let raw = r#"weird { not json... but then {"option": 4} appears"#;
        assert_eq!(parse_response(raw, 1).option_id, Some(4));
    }

    #[test]
    fn aggregate_of_identical_vectors_is_identity() {
        let v = [[2u8; 24]; 10];
        let out = aggregate_identity(identity(), &v).unwrap();
        assert!(out.scores.iter().all(|&s| s == 2.0));
        assert_eq!(out.seed_count, 10);
    }

    #[test]
    fn aggregate_midpoint() {
        let out = aggregate_identity(identity(), &[[1u8; 24], [5u8; 24]]).unwrap();
        assert!(out.scores.iter().all(|&s| s == 3.0));
    }

    #[test]
    fn aggregate_hand_mean() {
        // Ten seeds scoring question 1 as (2,2,3,3,3,3,3,3,3,3) average to 2.8.
        let mut per_seed = [[3u8; 24]; 10];
        per_seed[0][0] = 2;
        per_seed[1][0] = 2;
        let out = aggregate_identity(identity(), &per_seed).unwrap();
        assert!((out.score(1) - 2.8).abs() < 1e-12);
        assert_eq!(out.score(2), 3.0);
    }

    #[test]
    fn aggregate_empty_is_an_error() {
        assert!(matches!(
            aggregate_identity(identity(), &[]),
            Err(CollectionError::EmptyInput)
        ));
    }
}
