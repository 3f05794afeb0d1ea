//! VSM 2013 dimension scoring: affine maps from per-question mean raw scores
//! to the six cultural-value indices.
//!
//! Because every formula is affine in the raw means, averaging raw vectors
//! first and scoring once equals scoring each vector and averaging the
//! results; the canonical path here is average-then-score.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::collection::{ExperimentSet, ResponseVector};
use crate::protocol::{Identity, Nation};
use crate::questionnaire::QUESTION_COUNT;

/// Per-question mean raw scores m_1..m_24, each within the option range.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRawScores([f64; QUESTION_COUNT]);

impl MeanRawScores {
    pub fn new(values: [f64; QUESTION_COUNT]) -> Result<Self, ScoringError> {
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(1.0..=5.0).contains(&v) {
                return Err(ScoringError::DomainError {
                    question_id: i as u8 + 1,
                    value: v,
                });
            }
        }
        Ok(Self(values))
    }

    /// Mean raw score of a question by its 1-based ID.
    pub fn get(&self, question_id: u8) -> f64 {
        self.0[usize::from(question_id) - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Entrywise mean of several 24-d vectors.
    pub fn mean_of(vectors: &[&ResponseVector]) -> Result<Self, ScoringError> {
        if vectors.is_empty() {
            return Err(ScoringError::IncompleteSet("no vectors to average".into()));
        }
        let n = vectors.len() as f64;
        let mut values = [0.0; QUESTION_COUNT];
        for (q, value) in values.iter_mut().enumerate() {
            *value = vectors.iter().map(|v| v.scores[q]).sum::<f64>() / n;
        }
        Self::new(values)
    }
}

/// The six VSM dimensions in fixed order; controls CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Dimension {
    Pdi,
    Idv,
    Mas,
    Uai,
    Lto,
    Ivr,
}

impl Dimension {
    pub const ALL: [Dimension; 6] = [
        Dimension::Pdi,
        Dimension::Idv,
        Dimension::Mas,
        Dimension::Uai,
        Dimension::Lto,
        Dimension::Ivr,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Dimension::Pdi => "PDI",
            Dimension::Idv => "IDV",
            Dimension::Mas => "MAS",
            Dimension::Uai => "UAI",
            Dimension::Lto => "LTO",
            Dimension::Ivr => "IVR",
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Additive constants, one per dimension. The instrument allows shifting
/// scores into a preferred range; all-zero reproduces the convention used
/// throughout the bundled reference data.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoringConstants {
    pub pdi: f64,
    pub idv: f64,
    pub mas: f64,
    pub uai: f64,
    pub lto: f64,
    pub ivr: f64,
}

impl ScoringConstants {
    pub fn get(&self, dimension: Dimension) -> f64 {
        match dimension {
            Dimension::Pdi => self.pdi,
            Dimension::Idv => self.idv,
            Dimension::Mas => self.mas,
            Dimension::Uai => self.uai,
            Dimension::Lto => self.lto,
            Dimension::Ivr => self.ivr,
        }
    }
}

/// A 6-d cultural-value score vector. Values are index points; no range
/// clamp is applied anywhere (model scores may be negative).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VsmScore {
    pub pdi: f64,
    pub idv: f64,
    pub mas: f64,
    pub uai: f64,
    pub lto: f64,
    pub ivr: f64,
}

impl VsmScore {
    pub fn get(&self, dimension: Dimension) -> f64 {
        match dimension {
            Dimension::Pdi => self.pdi,
            Dimension::Idv => self.idv,
            Dimension::Mas => self.mas,
            Dimension::Uai => self.uai,
            Dimension::Lto => self.lto,
            Dimension::Ivr => self.ivr,
        }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.pdi, self.idv, self.mas, self.uai, self.lto, self.ivr]
    }

    pub fn from_array(values: [f64; 6]) -> Self {
        Self {
            pdi: values[0],
            idv: values[1],
            mas: values[2],
            uai: values[3],
            lto: values[4],
            ivr: values[5],
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScoringError {
    #[error("mean raw score for question {question_id} is {value}, outside [1, 5]")]
    DomainError { question_id: u8, value: f64 },
    #[error("experiment set incomplete: {0}")]
    IncompleteSet(String),
}

/// Score a 24-d mean raw vector into the six dimensions.
pub fn vsm_score(m: &MeanRawScores, c: &ScoringConstants) -> VsmScore {
    VsmScore {
        pdi: 35.0 * (m.get(7) - m.get(2)) + 25.0 * (m.get(20) - m.get(23)) + c.pdi,
        idv: 35.0 * (m.get(4) - m.get(1)) + 35.0 * (m.get(9) - m.get(6)) + c.idv,
        mas: 35.0 * (m.get(5) - m.get(3)) + 35.0 * (m.get(8) - m.get(10)) + c.mas,
        uai: 40.0 * (m.get(18) - m.get(15)) + 25.0 * (m.get(21) - m.get(24)) + c.uai,
        lto: 40.0 * (m.get(13) - m.get(14)) + 25.0 * (m.get(19) - m.get(22)) + c.lto,
        ivr: 35.0 * (m.get(12) - m.get(11)) + 40.0 * (m.get(17) - m.get(16)) + c.ivr,
    }
}

fn require_complete(set: &ExperimentSet) -> Result<(), ScoringError> {
    set.verify()
        .map_err(|e| ScoringError::IncompleteSet(e.to_string()))
}

/// Per-nation VSM scores: each nation's six identity vectors are averaged
/// entrywise, then scored.
pub fn national_aggregate(
    set: &ExperimentSet,
    c: &ScoringConstants,
) -> Result<BTreeMap<Nation, VsmScore>, ScoringError> {
    require_complete(set)?;
    let mut nationals = BTreeMap::new();
    for nation in Nation::ALL {
        let vectors = set.nation_vectors(nation);
        let mean = MeanRawScores::mean_of(&vectors)?;
        nationals.insert(nation, vsm_score(&mean, c));
    }
    Ok(nationals)
}

/// Entrywise mean of all 54 response vectors: the set's 24-d centroid.
pub fn set_centroid(set: &ExperimentSet) -> Result<MeanRawScores, ScoringError> {
    require_complete(set)?;
    let refs: Vec<&ResponseVector> = set.vectors.iter().collect();
    MeanRawScores::mean_of(&refs)
}

/// Each identity's 24-d vector scored into 6-d: the set's point cloud for
/// clustering metrics and external plotting.
pub fn identity_scores(
    set: &ExperimentSet,
    c: &ScoringConstants,
) -> Result<Vec<(Identity, VsmScore)>, ScoringError> {
    require_complete(set)?;
    set.vectors
        .iter()
        .map(|v| {
            let mut values = [0.0; QUESTION_COUNT];
            values.copy_from_slice(&v.scores);
            Ok((v.identity, vsm_score(&MeanRawScores::new(values)?, c)))
        })
        .collect()
}
