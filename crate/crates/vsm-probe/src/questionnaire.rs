//! VSM 2013 question bank and option-presentation logic.
//!
//! The questionnaire content is a bundled data asset, one JSON file per
//! locale (`data/questionnaire.<locale>.json`). Each asset carries 24
//! questions with exactly five options whose IDs 1..=5 double as raw scores.
//! Presentation order may be shuffled per (question, seed), but the binding
//! between an option ID and its text never changes.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rng::{fisher_yates, mix_seed, SplitMix64};

/// Prompt/response locales supported by the bundled assets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Locale {
    #[serde(rename = "en")]
    English,
    #[serde(rename = "zh")]
    Chinese,
}

impl Locale {
    pub const ALL: [Locale; 2] = [Locale::English, Locale::Chinese];

    /// BCP 47-ish tag used in asset file names and CLI flags.
    pub fn tag(&self) -> &'static str {
        match self {
            Locale::English => "en",
            Locale::Chinese => "zh",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Locale> {
        match tag {
            "en" => Some(Locale::English),
            "zh" => Some(Locale::Chinese),
            _ => None,
        }
    }
}

impl fmt::Display for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Question category: two questionnaire items ask about the respondent's
/// recent mental and physical health and are scored as the neutral option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionKind {
    Content,
    Health,
}

/// Question IDs whose answers are always replaced by the neutral option.
pub const HEALTH_QUESTION_IDS: [u8; 2] = [15, 18];

/// Number of questions in the instrument.
pub const QUESTION_COUNT: usize = 24;

/// Number of options per question; option IDs double as raw scores.
pub const OPTION_COUNT: usize = 5;

/// One of the five answer options of a question.
///
/// `id` is both the display label and the raw score. The id-text binding is
/// immutable; shuffling only changes the position at which an option appears.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerOption {
    pub id: u8,
    text: BTreeMap<Locale, String>,
}

impl AnswerOption {
    pub fn text(&self, locale: Locale) -> Result<&str, QuestionnaireError> {
        self.text
            .get(&locale)
            .map(String::as_str)
            .ok_or(QuestionnaireError::MissingLocaleData(locale))
    }
}

/// A single questionnaire item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub id: u8,
    pub kind: QuestionKind,
    text: BTreeMap<Locale, String>,
    options: Vec<AnswerOption>,
}

impl Question {
    pub fn text(&self, locale: Locale) -> Result<&str, QuestionnaireError> {
        self.text
            .get(&locale)
            .map(String::as_str)
            .ok_or(QuestionnaireError::MissingLocaleData(locale))
    }

    /// Options in canonical ID order (1..=5).
    pub fn options(&self) -> &[AnswerOption] {
        &self.options
    }

    pub fn option(&self, id: u8) -> Option<&AnswerOption> {
        self.options.iter().find(|o| o.id == id)
    }

    pub fn is_health(&self) -> bool {
        self.kind == QuestionKind::Health
    }
}

/// The order in which a question's options are displayed.
///
/// `order` holds option IDs in display position; it is always a permutation
/// of {1,...,5} and is the identity when shuffling is disabled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionPresentation {
    pub question_id: u8,
    pub order: Vec<u8>,
}

/// The loaded 24-question instrument for one or more locales.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Questionnaire {
    questions: Vec<Question>,
    locales: Vec<Locale>,
}

#[derive(Debug, thiserror::Error)]
pub enum QuestionnaireError {
    #[error("no questionnaire data bundled for locale {0}")]
    MissingLocaleData(Locale),
    #[error("questionnaire asset violates schema: {0}")]
    SchemaError(String),
}

// Raw asset schema. Options are listed in ID order; position i holds the
// text of option i+1.
#[derive(Deserialize)]
struct RawAsset {
    locale: String,
    questions: Vec<RawQuestion>,
}

#[derive(Deserialize)]
struct RawQuestion {
    id: u8,
    kind: QuestionKind,
    text: String,
    options: Vec<String>,
}

fn bundled_asset(locale: Locale) -> &'static str {
    match locale {
        Locale::English => include_str!("../data/questionnaire.en.json"),
        Locale::Chinese => include_str!("../data/questionnaire.zh.json"),
    }
}

/// Raw bytes of the bundled questionnaire asset, exposed so run manifests can
/// record a content hash of everything that shaped a prompt.
pub fn asset_bytes(locale: Locale) -> &'static [u8] {
    bundled_asset(locale).as_bytes()
}

impl Questionnaire {
    /// Load the bundled question bank for one locale, validating the asset.
    pub fn load(locale: Locale) -> Result<Self, QuestionnaireError> {
        Self::from_asset_str(bundled_asset(locale), locale)
    }

    /// Load and merge the banks for several locales (question and option
    /// texts become available in each of them). Structural fields (ids,
    /// kinds) must agree across locales.
    pub fn load_merged(locales: &[Locale]) -> Result<Self, QuestionnaireError> {
        let mut iter = locales.iter();
        let first = iter
            .next()
            .ok_or_else(|| QuestionnaireError::SchemaError("no locales requested".into()))?;
        let mut merged = Self::load(*first)?;
        for locale in iter {
            let other = Self::load(*locale)?;
            merged.merge(other)?;
        }
        Ok(merged)
    }

    fn from_asset_str(data: &str, expected: Locale) -> Result<Self, QuestionnaireError> {
        let raw: RawAsset = serde_json::from_str(data)
            .map_err(|e| QuestionnaireError::SchemaError(e.to_string()))?;
        if raw.locale != expected.tag() {
            return Err(QuestionnaireError::SchemaError(format!(
                "asset declares locale {:?}, expected {:?}",
                raw.locale,
                expected.tag()
            )));
        }
        if raw.questions.len() != QUESTION_COUNT {
            return Err(QuestionnaireError::SchemaError(format!(
                "expected {} questions, found {}",
                QUESTION_COUNT,
                raw.questions.len()
            )));
        }

        let mut questions = Vec::with_capacity(QUESTION_COUNT);
        for (index, rq) in raw.questions.into_iter().enumerate() {
            let expected_id = index as u8 + 1;
            if rq.id != expected_id {
                return Err(QuestionnaireError::SchemaError(format!(
                    "question at position {} has id {}, expected {}",
                    index, rq.id, expected_id
                )));
            }
            let expect_health = HEALTH_QUESTION_IDS.contains(&rq.id);
            if (rq.kind == QuestionKind::Health) != expect_health {
                return Err(QuestionnaireError::SchemaError(format!(
                    "question {} kind mismatch: health questions are exactly {:?}",
                    rq.id, HEALTH_QUESTION_IDS
                )));
            }
            if rq.text.trim().is_empty() {
                return Err(QuestionnaireError::SchemaError(format!(
                    "question {} has empty text",
                    rq.id
                )));
            }
            if rq.options.len() != OPTION_COUNT {
                return Err(QuestionnaireError::SchemaError(format!(
                    "question {} has {} options, expected {}",
                    rq.id,
                    rq.options.len(),
                    OPTION_COUNT
                )));
            }
            let options = rq
                .options
                .into_iter()
                .enumerate()
                .map(|(i, text)| {
                    if text.trim().is_empty() {
                        return Err(QuestionnaireError::SchemaError(format!(
                            "question {} option {} has empty text",
                            rq.id,
                            i + 1
                        )));
                    }
                    Ok(AnswerOption {
                        id: i as u8 + 1,
                        text: BTreeMap::from([(expected, text)]),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            questions.push(Question {
                id: rq.id,
                kind: rq.kind,
                text: BTreeMap::from([(expected, rq.text)]),
                options,
            });
        }

        Ok(Self {
            questions,
            locales: vec![expected],
        })
    }

    fn merge(&mut self, other: Questionnaire) -> Result<(), QuestionnaireError> {
        for (mine, theirs) in self.questions.iter_mut().zip(other.questions) {
            if mine.id != theirs.id || mine.kind != theirs.kind {
                return Err(QuestionnaireError::SchemaError(format!(
                    "structural mismatch between locale assets at question {}",
                    mine.id
                )));
            }
            mine.text.extend(theirs.text);
            for (mo, to) in mine.options.iter_mut().zip(theirs.options) {
                mine_option_merge(mo, to);
            }
        }
        self.locales.extend(other.locales);
        self.locales.sort();
        self.locales.dedup();
        Ok(())
    }

    pub fn questions(&self) -> &[Question] {
        &self.questions
    }

    /// Question by its 1-based ID.
    pub fn question(&self, id: u8) -> Option<&Question> {
        usize::from(id)
            .checked_sub(1)
            .and_then(|i| self.questions.get(i))
    }

    pub fn locales(&self) -> &[Locale] {
        &self.locales
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }
}

fn mine_option_merge(mine: &mut AnswerOption, theirs: AnswerOption) {
    mine.text.extend(theirs.text);
}

/// Decide the display order of a question's options.
///
/// With `shuffle` off the order is the identity [1,2,3,4,5]. With it on, the
/// permutation is drawn by a Fisher-Yates pass over a SplitMix64 stream
/// seeded from `mix_seed(question.id, shuffle_seed)`, so the result depends
/// only on (question id, seed) and is identical on every platform.
pub fn present_options(question: &Question, shuffle: bool, shuffle_seed: u64) -> OptionPresentation {
    let mut order: Vec<u8> = (1..=OPTION_COUNT as u8).collect();
    if shuffle {
        let mut rng = SplitMix64::new(mix_seed(u64::from(question.id), shuffle_seed));
        fisher_yates(&mut order, &mut rng);
    }
    OptionPresentation {
        question_id: question.id,
        order,
    }
}
