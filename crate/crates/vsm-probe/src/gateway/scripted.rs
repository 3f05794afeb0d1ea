//! Deterministic scripted responders.
//!
//! These stand in for a live model in tests, demos, and oracle runs. Every
//! policy derives its output purely from the request (via its cache key or
//! prompt metadata), so repeated calls with the same inputs return the same
//! bytes and the backend is safe to share across worker threads.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use crate::protocol::Nation;
use crate::rng::SplitMix64;

use super::{cache_key, BackendKind, ChatBackend, ChatRequest, ChatResponse, GatewayError};

/// Per-nation option table: nation -> (question id -> option id). Questions
/// absent from a nation's table fall back to the neutral option 3.
pub type NationProfile = BTreeMap<Nation, BTreeMap<u8, u8>>;

/// What a scripted responder answers.
#[derive(Debug, Clone)]
pub enum ResponderPolicy {
    /// Always select option `k`.
    FixedOption(u8),
    /// Select uniformly among options 1..=5, deterministically per request.
    UniformRandom { seed: u64 },
    /// Select per (identity nation, question id) from a hand-authored table.
    NationProfile(NationProfile),
    /// Emit unparseable prose with the given probability (deterministic per
    /// request); otherwise answer the neutral option 3.
    Malformed { rate: f64 },
}

pub struct ScriptedBackend {
    policy: ResponderPolicy,
    name: String,
}

impl ScriptedBackend {
    pub fn new(policy: ResponderPolicy) -> Result<Self, GatewayError> {
        match &policy {
            ResponderPolicy::FixedOption(k) => {
                if !(1..=5).contains(k) {
                    return Err(GatewayError::InvalidPolicy(format!(
                        "fixed option must be 1..=5, got {k}"
                    )));
                }
            }
            ResponderPolicy::Malformed { rate } => {
                if !(0.0..=1.0).contains(rate) || rate.is_nan() {
                    return Err(GatewayError::InvalidPolicy(format!(
                        "malformed rate must be within [0, 1], got {rate}"
                    )));
                }
            }
            ResponderPolicy::NationProfile(profile) => {
                for (nation, table) in profile {
                    for (&question_id, &option_id) in table {
                        if !(1..=24).contains(&question_id) || !(1..=5).contains(&option_id) {
                            return Err(GatewayError::InvalidPolicy(format!(
                                "profile for {nation} maps question {question_id} to option {option_id}"
                            )));
                        }
                    }
                }
            }
            ResponderPolicy::UniformRandom { .. } => {}
        }
        let name = match &policy {
            ResponderPolicy::FixedOption(k) => format!("scripted:fixed:{k}"),
            ResponderPolicy::UniformRandom { seed } => format!("scripted:uniform:{seed}"),
            ResponderPolicy::NationProfile(_) => "scripted:profile".to_string(),
            ResponderPolicy::Malformed { rate } => format!("scripted:malformed:{rate}"),
        };
        Ok(Self { policy, name })
    }

    fn render_choice(option_id: u8) -> String {
        format!(
            "{{\"option\": {option_id}, \"rationale\": \"scripted responder choice\"}}"
        )
    }

    /// Stream seeded from the request digest (plus the policy seed where one
    /// exists), so each request gets an independent but reproducible draw.
    fn request_stream(request: &ChatRequest, extra_seed: u64) -> SplitMix64 {
        let key = cache_key(request);
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&hex::decode(&key[..16]).expect("hex digest")[..8]);
        SplitMix64::new(u64::from_le_bytes(bytes) ^ extra_seed)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let started = Instant::now();
        let raw_text = match &self.policy {
            ResponderPolicy::FixedOption(k) => Self::render_choice(*k),
            ResponderPolicy::UniformRandom { seed } => {
                let mut rng = Self::request_stream(request, *seed);
                Self::render_choice(rng.next_below(5) as u8 + 1)
            }
            ResponderPolicy::NationProfile(profile) => {
                let metadata = &request.prompt.metadata;
                let option_id = profile
                    .get(&metadata.identity.nation)
                    .and_then(|table| table.get(&metadata.question_id))
                    .copied()
                    .unwrap_or(3);
                Self::render_choice(option_id)
            }
            ResponderPolicy::Malformed { rate } => {
                let mut rng = Self::request_stream(request, 0x6d61_6c66);
                if rng.next_f64() < *rate {
                    "I am sorry, but I cannot pick a single number here; it depends on many things."
                        .to_string()
                } else {
                    Self::render_choice(3)
                }
            }
        };
        Ok(ChatResponse {
            raw_text,
            backend: BackendKind::Scripted,
            latency: started.elapsed().min(Duration::from_millis(1)),
            attempt_count: 1,
        })
    }

    fn name(&self) -> &str {
        &self.name
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Gender, Identity, PromptMetadata, PromptText, SamplingParams};

    fn request(nation: Nation, question_id: u8, seed: u64) -> ChatRequest {
        ChatRequest {
            model_name: "m".into(),
            prompt: PromptText {
                text: format!("q{question_id} for {nation} seed {seed}"),
                metadata: PromptMetadata {
                    question_id,
                    identity: Identity {
                        nation,
                        gender: Gender::Female,
                        age: 25,
                    },
                    seed,
                    presentation: vec![1, 2, 3, 4, 5],
                },
            },
            seed,
            sampling: SamplingParams::default(),
        }
    }

    #[test]
    fn fixed_option_always_selects_it() {
        let backend = ScriptedBackend::new(ResponderPolicy::FixedOption(2)).unwrap();
        for seed in 0..5 {
            let response = backend.complete(&request(Nation::India, 4, seed)).unwrap();
            assert!(response.raw_text.contains("\"option\": 2"));
        }
    }

    #[test]
    fn fixed_option_is_deterministic() {
        let backend = ScriptedBackend::new(ResponderPolicy::FixedOption(3)).unwrap();
        let a = backend.complete(&request(Nation::Japan, 1, 1)).unwrap();
        let b = backend.complete(&request(Nation::Japan, 1, 1)).unwrap();
        assert_eq!(a.raw_text, b.raw_text);
    }

    #[test]
    fn malformed_full_rate_is_unparseable_prose() {
        let backend = ScriptedBackend::new(ResponderPolicy::Malformed { rate: 1.0 }).unwrap();
        let response = backend.complete(&request(Nation::Brazil, 9, 2)).unwrap();
        assert!(!response.raw_text.contains('{'));
    }

    #[test]
    fn uniform_random_is_deterministic_per_request() {
        let backend = ScriptedBackend::new(ResponderPolicy::UniformRandom { seed: 11 }).unwrap();
        let a = backend.complete(&request(Nation::China, 5, 3)).unwrap();
        let b = backend.complete(&request(Nation::China, 5, 3)).unwrap();
        assert_eq!(a.raw_text, b.raw_text);
        // Across many requests the draws should not all coincide.
        let distinct: std::collections::BTreeSet<String> = (0..20)
            .map(|seed| {
                backend
                    .complete(&request(Nation::China, 5, seed))
                    .unwrap()
                    .raw_text
            })
            .collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn nation_profile_reads_identity_metadata() {
        let mut profile = NationProfile::new();
        profile
            .entry(Nation::China)
            .or_default()
            .insert(1, 5);
        let backend = ScriptedBackend::new(ResponderPolicy::NationProfile(profile)).unwrap();
        let china = backend.complete(&request(Nation::China, 1, 1)).unwrap();
        assert!(china.raw_text.contains("\"option\": 5"));
        // Unlisted nation/question pairs fall back to the neutral option.
        let france = backend.complete(&request(Nation::France, 1, 1)).unwrap();
        assert!(france.raw_text.contains("\"option\": 3"));
        let china_q2 = backend.complete(&request(Nation::China, 2, 1)).unwrap();
        assert!(china_q2.raw_text.contains("\"option\": 3"));
    }

    #[test]
    fn invalid_policies_are_rejected() {
        assert!(ScriptedBackend::new(ResponderPolicy::FixedOption(0)).is_err());
        assert!(ScriptedBackend::new(ResponderPolicy::FixedOption(6)).is_err());
        assert!(ScriptedBackend::new(ResponderPolicy::Malformed { rate: 1.5 }).is_err());
        let mut profile = NationProfile::new();
        profile.entry(Nation::Japan).or_default().insert(25, 3);
        assert!(ScriptedBackend::new(ResponderPolicy::NationProfile(profile)).is_err());
    }
}
