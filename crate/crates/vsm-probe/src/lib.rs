//! Batch audit harness for the cultural values expressed by chat-completion
//! language models.
//!
//! The harness administers the VSM 2013 questionnaire under a controlled
//! protocol (simulated identities, English or Chinese prompts, optional
//! option-position shuffling, repeated seeds), converts the answers to
//! six-dimensional cultural-value scores, and quantifies disparity within
//! and between experiment sets against bundled human reference data.
//!
//! Modules, in pipeline order:
//!
//! - [`questionnaire`]: the localized 24-question bank and option shuffling.
//! - [`protocol`]: the 54-identity grid, set configuration, prompt assembly.
//! - [`gateway`]: chat-completion backends (HTTP, replay cache, scripted).
//! - [`collection`]: running sets, parsing replies, per-identity vectors.
//! - [`scoring`]: VSM dimension formulas and national aggregation.
//! - [`metrics`]: Pearson, dispersion/MCD, DBI, silhouette, SS_h.
//! - [`reference`]: bundled human scores and MMLU ingestion.
//! - [`reporting`]: set reports, comparison matrices, CSV/JSON exports.

pub mod collection;
pub mod gateway;
pub mod metrics;
pub mod protocol;
pub mod questionnaire;
pub mod reference;
pub mod reporting;
pub mod rng;
pub mod scoring;

pub use collection::{
    aggregate_identity, parse_response, ExperimentSet, FallbackKind, ParsedAnswer, ResponseVector,
};
pub use gateway::{
    cache_key, BackendKind, ChatBackend, ChatRequest, ChatResponse, EndpointConfig, GatewayError,
    HttpBackend, ReplayBackend, ReplayCache, ResponderPolicy, RetryPolicy, ScriptedBackend,
};
pub use metrics::{
    dbi, dimension_dispersion, mcd, pearson, silhouette, ss_h, CorrelationResult, DisparityReport,
    MetricError, PointSet,
};
pub use protocol::{
    build_prompt, identity_grid, ExperimentConfig, Gender, Identity, Nation, PromptText,
    SamplingParams,
};
pub use questionnaire::{Locale, OptionPresentation, Question, Questionnaire};
pub use reference::{load_human_reference, load_mmlu, HumanReference, MmluTable};
pub use reporting::{
    comparison_matrix, intra_set_report, mmlu_delta_matrix, ComparisonMatrix, MatrixMetric,
    ReportError, SetReport,
};
pub use scoring::{
    national_aggregate, set_centroid, vsm_score, Dimension, MeanRawScores, ScoringConstants,
    VsmScore,
};
