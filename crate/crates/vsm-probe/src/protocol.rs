//! Simulated identities, experiment-set configuration, and prompt assembly.
//!
//! Prompts are rendered from bundled per-locale templates with named
//! placeholders ({format_instruction}, {identity}/{nation}/{age}/{gender},
//! {question}, {options}). Rendering is pure: identical inputs produce
//! byte-identical prompts, which the gateway relies on for cache keying.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::questionnaire::{self, OptionPresentation, Question, QuestionnaireError};

pub use crate::questionnaire::Locale;

/// The nine nationalities simulated in the identity grid, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Nation {
    #[serde(rename = "U.S.A.")]
    UnitedStates,
    China,
    France,
    Germany,
    Brazil,
    India,
    Singapore,
    Japan,
    #[serde(rename = "South Africa")]
    SouthAfrica,
}

impl Nation {
    pub const ALL: [Nation; 9] = [
        Nation::UnitedStates,
        Nation::China,
        Nation::France,
        Nation::Germany,
        Nation::Brazil,
        Nation::India,
        Nation::Singapore,
        Nation::Japan,
        Nation::SouthAfrica,
    ];

    /// Canonical label used in CSV output and persisted records.
    pub fn label(&self) -> &'static str {
        match self {
            Nation::UnitedStates => "U.S.A.",
            Nation::China => "China",
            Nation::France => "France",
            Nation::Germany => "Germany",
            Nation::Brazil => "Brazil",
            Nation::India => "India",
            Nation::Singapore => "Singapore",
            Nation::Japan => "Japan",
            Nation::SouthAfrica => "South Africa",
        }
    }

    pub fn from_label(label: &str) -> Option<Nation> {
        Nation::ALL.iter().copied().find(|n| n.label() == label)
    }

    /// How the nation is named inside a prompt for the given locale.
    fn prompt_name(&self, locale: Locale) -> &'static str {
        match locale {
            Locale::English => match self {
                Nation::UnitedStates => "the U.S.A.",
                Nation::China => "China",
                Nation::France => "France",
                Nation::Germany => "Germany",
                Nation::Brazil => "Brazil",
                Nation::India => "India",
                Nation::Singapore => "Singapore",
                Nation::Japan => "Japan",
                Nation::SouthAfrica => "South Africa",
            },
            Locale::Chinese => match self {
                Nation::UnitedStates => "美国",
                Nation::China => "中国",
                Nation::France => "法国",
                Nation::Germany => "德国",
                Nation::Brazil => "巴西",
                Nation::India => "印度",
                Nation::Singapore => "新加坡",
                Nation::Japan => "日本",
                Nation::SouthAfrica => "南非",
            },
        }
    }
}

impl fmt::Display for Nation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Female, Gender::Male];

    pub fn label(&self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }

    fn prompt_name(&self, locale: Locale) -> &'static str {
        match locale {
            Locale::English => self.label(),
            Locale::Chinese => match self {
                Gender::Female => "女性",
                Gender::Male => "男性",
            },
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Age groups simulated in the identity grid.
pub const AGES: [u8; 3] = [25, 35, 45];

/// A simulated respondent: nation x gender x age.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Identity {
    pub nation: Nation,
    pub gender: Gender,
    pub age: u8,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.nation, self.gender, self.age)
    }
}

/// The full 54-identity grid in deterministic order: nation-major, then
/// gender, then age.
pub fn identity_grid() -> Vec<Identity> {
    let mut grid = Vec::with_capacity(Nation::ALL.len() * Gender::ALL.len() * AGES.len());
    for nation in Nation::ALL {
        for gender in Gender::ALL {
            for age in AGES {
                grid.push(Identity { nation, gender, age });
            }
        }
    }
    grid
}

/// Default number of repetition seeds per (identity, question) pair.
pub const DEFAULT_SEED_COUNT: usize = 10;

/// Seeds 1..=n.
pub fn default_seeds(n: usize) -> Vec<u64> {
    (1..=n as u64).collect()
}

/// Sampling parameters forwarded to the chat endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
}

impl SamplingParams {
    /// Replies must fit a JSON object with a rationale.
    pub const MIN_MAX_TOKENS: u32 = 64;

    pub fn new(temperature: f64, top_p: f64, max_tokens: u32) -> Result<Self, ProtocolError> {
        if max_tokens < Self::MIN_MAX_TOKENS {
            return Err(ProtocolError::InvalidConfig(format!(
                "max_tokens must be at least {}, got {}",
                Self::MIN_MAX_TOKENS,
                max_tokens
            )));
        }
        Ok(Self {
            temperature,
            top_p,
            max_tokens,
        })
    }
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            top_p: 1.0,
            max_tokens: 512,
        }
    }
}

/// One experiment set's hyper-parameters: the tested model, the prompt
/// language, and whether options are shuffled, plus the repetition seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model_name: String,
    pub prompt_locale: Locale,
    /// Language the reply-format instruction demands. Defaults to the prompt
    /// locale; may differ (e.g. English replies to Chinese prompts).
    pub response_language: Locale,
    pub shuffle: bool,
    pub seeds: Vec<u64>,
    pub sampling: SamplingParams,
}

impl ExperimentConfig {
    pub fn new(model_name: impl Into<String>, prompt_locale: Locale) -> Self {
        Self {
            model_name: model_name.into(),
            prompt_locale,
            response_language: prompt_locale,
            shuffle: false,
            seeds: default_seeds(DEFAULT_SEED_COUNT),
            sampling: SamplingParams::default(),
        }
    }

    pub fn with_shuffle(mut self, shuffle: bool) -> Self {
        self.shuffle = shuffle;
        self
    }

    pub fn with_response_language(mut self, locale: Locale) -> Self {
        self.response_language = locale;
        self
    }

    pub fn with_seeds(mut self, seeds: Vec<u64>) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.model_name.is_empty() {
            return Err(ProtocolError::InvalidConfig("model_name is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(ProtocolError::InvalidConfig("seed list is empty".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(ProtocolError::InvalidConfig(
                "seed list contains duplicates".into(),
            ));
        }
        if self.sampling.max_tokens < SamplingParams::MIN_MAX_TOKENS {
            return Err(ProtocolError::InvalidConfig(format!(
                "max_tokens must be at least {}",
                SamplingParams::MIN_MAX_TOKENS
            )));
        }
        Ok(())
    }

    /// Default set label: `<model>-<locale>` plus `-shuffle` when enabled.
    pub fn default_label(&self) -> String {
        let mut label = format!("{}-{}", self.model_name, self.prompt_locale.tag());
        if self.shuffle {
            label.push_str("-shuffle");
        }
        label
    }

    /// Stable digest over everything that defines the set (excluding
    /// transport details), used to tie reports back to their run.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.model_name.as_bytes());
        hasher.update([0u8]);
        hasher.update(self.prompt_locale.tag().as_bytes());
        hasher.update([0u8]);
        hasher.update(self.response_language.tag().as_bytes());
        hasher.update([u8::from(self.shuffle)]);
        for seed in &self.seeds {
            hasher.update(seed.to_le_bytes());
        }
        hasher.update(self.sampling.temperature.to_le_bytes());
        hasher.update(self.sampling.top_p.to_le_bytes());
        hasher.update(self.sampling.max_tokens.to_le_bytes());
        hex::encode(hasher.finalize())
    }
}

/// Metadata carried alongside a rendered prompt. Scripted responders and
/// persisted records read the triple coordinates from here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptMetadata {
    pub question_id: u8,
    pub identity: Identity,
    pub seed: u64,
    pub presentation: Vec<u8>,
}

/// A fully rendered prompt plus the coordinates it was rendered for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptText {
    pub text: String,
    pub metadata: PromptMetadata,
}

impl PromptText {
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.text.as_bytes()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    MissingLocaleData(#[from] QuestionnaireError),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

fn template(locale: Locale) -> &'static str {
    match locale {
        Locale::English => include_str!("../data/template.en.txt"),
        Locale::Chinese => include_str!("../data/template.zh.txt"),
    }
}

fn format_instruction(locale: Locale) -> &'static str {
    match locale {
        Locale::English => include_str!("../data/format_instruction.en.txt"),
        Locale::Chinese => include_str!("../data/format_instruction.zh.txt"),
    }
}

/// Digest over every asset that shapes prompts for the given configuration:
/// the questionnaire bank, the prompt template, and the format instruction.
/// Recorded in run manifests so results cite the exact template version.
pub fn template_digest(prompt_locale: Locale, response_language: Locale) -> String {
    let mut hasher = Sha256::new();
    hasher.update(questionnaire::asset_bytes(prompt_locale));
    hasher.update([0u8]);
    hasher.update(template(prompt_locale).as_bytes());
    hasher.update([0u8]);
    hasher.update(format_instruction(response_language).as_bytes());
    hex::encode(hasher.finalize())
}

/// Render the prompt for one (question, presentation, identity) triple.
///
/// The output embeds, in order: the reply-format instruction (stated in
/// `response_language`), the identity context (phrased in `prompt_locale`),
/// and the question with its options listed in presentation order while
/// keeping their original IDs as labels.
pub fn build_prompt(
    question: &Question,
    presentation: &OptionPresentation,
    identity: Identity,
    prompt_locale: Locale,
    response_language: Locale,
    seed: u64,
) -> Result<PromptText, ProtocolError> {
    let question_text = question.text(prompt_locale)?;

    let mut options = String::new();
    for (i, &option_id) in presentation.order.iter().enumerate() {
        let option = question
            .option(option_id)
            .expect("presentation order is a permutation of option ids");
        if i > 0 {
            options.push('\n');
        }
        options.push_str(&format!("{}. {}", option_id, option.text(prompt_locale)?));
    }

    let text = template(prompt_locale)
        .trim_end()
        .replace("{format_instruction}", format_instruction(response_language).trim_end())
        .replace("{nation}", identity.nation.prompt_name(prompt_locale))
        .replace("{age}", &identity.age.to_string())
        .replace("{gender}", identity.gender.prompt_name(prompt_locale))
        .replace("{question}", question_text)
        .replace("{options}", &options);

    Ok(PromptText {
        text,
        metadata: PromptMetadata {
            question_id: question.id,
            identity,
            seed,
            presentation: presentation.order.clone(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::questionnaire::{present_options, Questionnaire};

    #[test]
    fn grid_has_54_distinct_identities() {
        let grid = identity_grid();
        assert_eq!(grid.len(), 54);
        let mut dedup = grid.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 54);
    }

    #[test]
    fn six_identities_per_nation() {
        let grid = identity_grid();
        let japan = grid.iter().filter(|i| i.nation == Nation::Japan).count();
        assert_eq!(japan, 6);
    }

    #[test]
    fn grid_order_is_nation_major() {
        let grid = identity_grid();
        assert_eq!(grid[0].nation, Nation::UnitedStates);
        assert_eq!(grid[0].gender, Gender::Female);
        assert_eq!(grid[0].age, 25);
        assert_eq!(grid[5].nation, Nation::UnitedStates);
        assert_eq!(grid[6].nation, Nation::China);
        assert_eq!(grid[53].nation, Nation::SouthAfrica);
    }

    #[test]
    fn english_prompt_contains_question_identity_and_format() {
        let bank = Questionnaire::load(Locale::English).unwrap();
        let q1 = bank.question(1).unwrap();
        let identity = Identity {
            nation: Nation::UnitedStates,
            gender: Gender::Female,
            age: 25,
        };
        let presentation = present_options(q1, false, 0);
        let prompt = build_prompt(
            q1,
            &presentation,
            identity,
            Locale::English,
            Locale::English,
            1,
        )
        .unwrap();
        assert!(prompt.text.contains(q1.text(Locale::English).unwrap()));
        assert!(prompt.text.contains("the U.S.A."));
        assert!(prompt.text.contains("25-year-old female"));
        assert!(prompt.text.contains("JSON"));
        assert!(prompt.text.contains("\"option\""));
    }

    #[test]
    fn chinese_prompt_with_english_reply_instruction() {
        let bank = Questionnaire::load(Locale::Chinese).unwrap();
        let q1 = bank.question(1).unwrap();
        let identity = Identity {
            nation: Nation::China,
            gender: Gender::Male,
            age: 35,
        };
        let presentation = present_options(q1, false, 0);
        let prompt = build_prompt(
            q1,
            &presentation,
            identity,
            Locale::Chinese,
            Locale::English,
            1,
        )
        .unwrap();
        // Question text in Chinese, format instruction demanding English.
        assert!(prompt.text.contains(q1.text(Locale::Chinese).unwrap()));
        assert!(prompt.text.contains("Reply in English"));
        assert!(prompt.text.contains("中国"));
    }

    #[test]
    fn prompt_is_pure() {
        let bank = Questionnaire::load(Locale::English).unwrap();
        let q3 = bank.question(3).unwrap();
        let identity = Identity {
            nation: Nation::Japan,
            gender: Gender::Male,
            age: 45,
        };
        let presentation = present_options(q3, true, 7);
        let a = build_prompt(q3, &presentation, identity, Locale::English, Locale::English, 7)
            .unwrap();
        let b = build_prompt(q3, &presentation, identity, Locale::English, Locale::English, 7)
            .unwrap();
        assert_eq!(a.text, b.text);
        assert_eq!(a.sha256(), b.sha256());
    }

    #[test]
    fn shuffled_prompt_lists_options_in_presentation_order_with_original_ids() {
        let bank = Questionnaire::load(Locale::English).unwrap();
        let q2 = bank.question(2).unwrap();
        let identity = identity_grid()[0];
        let presentation = present_options(q2, true, 3);
        let prompt = build_prompt(
            q2,
            &presentation,
            identity,
            Locale::English,
            Locale::English,
            3,
        )
        .unwrap();
        let lines: Vec<&str> = prompt
            .text
            .lines()
            .filter(|l| l.len() > 1 && l.as_bytes()[1] == b'.')
            .collect();
        assert_eq!(lines.len(), 5);
        for (line, &expected_id) in lines.iter().zip(&presentation.order) {
            let shown_id: u8 = line[..1].parse().unwrap();
            assert_eq!(shown_id, expected_id);
            let text = q2
                .option(expected_id)
                .unwrap()
                .text(Locale::English)
                .unwrap();
            assert_eq!(&line[3..], text);
        }
    }

    #[test]
    fn config_validation_rejects_duplicate_seeds() {
        let config = ExperimentConfig::new("m", Locale::English).with_seeds(vec![1, 1, 2]);
        assert!(config.validate().is_err());
    }

    #[test]
    fn config_digest_is_stable_and_sensitive() {
        let a = ExperimentConfig::new("m", Locale::English);
        let b = ExperimentConfig::new("m", Locale::English);
        assert_eq!(a.digest(), b.digest());
        let c = a.clone().with_shuffle(true);
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn template_digest_distinguishes_locales() {
        assert_ne!(
            template_digest(Locale::English, Locale::English),
            template_digest(Locale::Chinese, Locale::Chinese)
        );
    }
}
