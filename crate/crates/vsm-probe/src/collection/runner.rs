//! Experiment execution: walks the (identity, question, seed) grid, queries
//! the backend, parses and persists every response, then aggregates the
//! per-identity vectors.
//!
//! Triples run concurrently up to `max_in_flight`, but records are kept in
//! canonical grid order (identity-major, then question, then seed) so a
//! completed run always produces the same bytes. Resumption costs nothing:
//! pointing the run at a populated replay cache turns every completed triple
//! into a local read.

use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::gateway::{cache_key, ChatBackend, ChatRequest};
use crate::protocol::{
    build_prompt, identity_grid, template_digest, ExperimentConfig, Identity,
};
use crate::questionnaire::{
    present_options, Questionnaire, HEALTH_QUESTION_IDS, QUESTION_COUNT,
};

use super::store::{write_manifest, write_records, Manifest, RawRecord};
use super::{aggregate_identity, parse_response, CollectionError, ExperimentSet};

/// Execution knobs that do not define the experiment itself.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Set label; defaults to `<model>-<locale>[-shuffle]`.
    pub label: Option<String>,
    /// Concurrent outstanding requests.
    pub max_in_flight: usize,
    /// Record transport failures as unrecognizable (scored 3) instead of
    /// aborting the run.
    pub tolerate_transport: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            label: None,
            max_in_flight: 1,
            tolerate_transport: false,
        }
    }
}

struct Triple {
    identity: Identity,
    question_id: u8,
    seed: u64,
}

/// Run one experiment set against `backend`, persisting records and manifest
/// into `out_dir` when given.
pub fn run_experiment(
    config: &ExperimentConfig,
    backend: &dyn ChatBackend,
    out_dir: Option<&Path>,
    options: &RunOptions,
) -> Result<ExperimentSet, CollectionError> {
    config.validate()?;
    let questionnaire = Questionnaire::load(config.prompt_locale)?;
    let grid = identity_grid();
    let started_unix = unix_now();

    // Canonical triple order: identity-major, then question, then seed.
    let mut triples = Vec::with_capacity(grid.len() * QUESTION_COUNT * config.seeds.len());
    for &identity in &grid {
        for question_id in 1..=QUESTION_COUNT as u8 {
            for &seed in &config.seeds {
                triples.push(Triple {
                    identity,
                    question_id,
                    seed,
                });
            }
        }
    }

    let records = execute_triples(config, backend, &questionnaire, &triples, options)?;

    let label = options
        .label
        .clone()
        .unwrap_or_else(|| config.default_label());
    let recognizability_rate = recognizability(&records, config.seeds.len(), grid.len());
    let manifest = Manifest {
        set_label: label,
        config_digest: config.digest(),
        template_sha256: template_digest(config.prompt_locale, config.response_language),
        config: config.clone(),
        backend: backend.name().to_string(),
        record_count: records.len() as u64,
        recognizability_rate,
        started_unix,
        finished_unix: unix_now(),
    };

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        write_records(&dir.join("records.jsonl"), &records)?;
        write_manifest(&dir.join("manifest.json"), &manifest)?;
    }

    assemble_set(manifest, records)
}

fn execute_triples(
    config: &ExperimentConfig,
    backend: &dyn ChatBackend,
    questionnaire: &Questionnaire,
    triples: &[Triple],
    options: &RunOptions,
) -> Result<Vec<RawRecord>, CollectionError> {
    let run_one = |triple: &Triple| -> Result<RawRecord, CollectionError> {
        let question = questionnaire
            .question(triple.question_id)
            .expect("triple question ids are in range");
        let presentation = present_options(question, config.shuffle, triple.seed);
        let prompt = build_prompt(
            question,
            &presentation,
            triple.identity,
            config.prompt_locale,
            config.response_language,
            triple.seed,
        )?;
        let request = ChatRequest {
            model_name: config.model_name.clone(),
            prompt,
            seed: triple.seed,
            sampling: config.sampling.clone(),
        };
        let key = cache_key(&request);
        let raw_text = match backend.complete(&request) {
            Ok(response) => response.raw_text,
            Err(err) if options.tolerate_transport => {
                // Recorded as an empty, unrecognizable response.
                let _ = err;
                String::new()
            }
            Err(err) => return Err(err.into()),
        };
        let parsed = parse_response(&raw_text, triple.question_id);
        Ok(RawRecord {
            identity: triple.identity,
            question_id: triple.question_id,
            seed: triple.seed,
            presentation: presentation.order,
            prompt_sha256: request.prompt.sha256(),
            cache_key: key,
            raw_text,
            option_id: parsed.option_id,
            fallback: parsed.fallback,
        })
    };

    let workers = options.max_in_flight.max(1).min(triples.len().max(1));
    if workers <= 1 {
        return triples.iter().map(run_one).collect();
    }

    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let slots: Vec<Mutex<Option<Result<RawRecord, CollectionError>>>> =
        (0..triples.len()).map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= triples.len() {
                    break;
                }
                let result = run_one(&triples[index]);
                if result.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                *slots[index].lock().expect("result slot poisoned") = Some(result);
            });
        }
    });

    let mut records = Vec::with_capacity(triples.len());
    for slot in slots {
        match slot.into_inner().expect("result slot poisoned") {
            Some(Ok(record)) => records.push(record),
            Some(Err(err)) => return Err(err),
            // Slots past the first failure were never executed.
            None => {
                return Err(CollectionError::IntegrityError(
                    "run aborted before completing all triples".into(),
                ))
            }
        }
    }
    Ok(records)
}

/// recognized / total over content questions only; the two health questions
/// are excluded from the denominator since their answers are discarded.
fn recognizability(records: &[RawRecord], seed_count: usize, grid_len: usize) -> f64 {
    let content_questions = QUESTION_COUNT - HEALTH_QUESTION_IDS.len();
    let denominator = (seed_count * content_questions * grid_len) as f64;
    let recognized = records
        .iter()
        .filter(|r| !HEALTH_QUESTION_IDS.contains(&r.question_id) && r.option_id.is_some())
        .count() as f64;
    recognized / denominator
}

/// Build (or rebuild) an [`ExperimentSet`] from a manifest and its records,
/// verifying the triple coverage against the manifest's configuration.
pub fn assemble_set(
    manifest: Manifest,
    records: Vec<RawRecord>,
) -> Result<ExperimentSet, CollectionError> {
    let config = manifest.config.clone();
    config
        .validate()
        .map_err(|e| CollectionError::IntegrityError(format!("manifest config invalid: {e}")))?;
    let grid = identity_grid();
    let expected = grid.len() * QUESTION_COUNT * config.seeds.len();
    if records.len() != expected {
        return Err(CollectionError::IntegrityError(format!(
            "expected {} records, found {}",
            expected,
            records.len()
        )));
    }
    if manifest.record_count != records.len() as u64 {
        return Err(CollectionError::IntegrityError(format!(
            "manifest claims {} records, file holds {}",
            manifest.record_count,
            records.len()
        )));
    }

    // Index records by triple, rejecting duplicates and strays.
    let mut by_triple = std::collections::BTreeMap::new();
    for record in &records {
        let key = (record.identity, record.question_id, record.seed);
        if by_triple.insert(key, record).is_some() {
            return Err(CollectionError::IntegrityError(format!(
                "duplicate record for {} q{} seed {}",
                record.identity, record.question_id, record.seed
            )));
        }
    }

    let mut vectors = Vec::with_capacity(grid.len());
    for &identity in &grid {
        let mut per_seed = vec![[0u8; QUESTION_COUNT]; config.seeds.len()];
        for question_id in 1..=QUESTION_COUNT as u8 {
            for (seed_index, &seed) in config.seeds.iter().enumerate() {
                let record = by_triple
                    .get(&(identity, question_id, seed))
                    .ok_or_else(|| {
                        CollectionError::IntegrityError(format!(
                            "missing record for {} q{} seed {}",
                            identity, question_id, seed
                        ))
                    })?;
                let parsed = super::ParsedAnswer {
                    question_id,
                    option_id: record.option_id,
                    rationale: String::new(),
                    fallback: record.fallback,
                };
                per_seed[seed_index][usize::from(question_id) - 1] = parsed.effective_score();
            }
        }
        vectors.push(aggregate_identity(identity, &per_seed)?);
    }

    let recognizability_rate = recognizability(&records, config.seeds.len(), grid.len());
    if (recognizability_rate - manifest.recognizability_rate).abs() > 1e-12 {
        return Err(CollectionError::IntegrityError(format!(
            "manifest recognizability {} disagrees with records ({})",
            manifest.recognizability_rate, recognizability_rate
        )));
    }

    let set = ExperimentSet {
        label: manifest.set_label.clone(),
        config,
        vectors,
        recognizability_rate,
        manifest,
    };
    set.verify()?;
    Ok(set)
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
