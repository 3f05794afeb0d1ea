//! `vsm-probe`: run questionnaire experiments against a chat-completion
//! endpoint (or scripted/replay backends), score persisted sets, and compare
//! sets with the disparity metrics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vsm_probe::collection::{run_experiment, RunOptions};
use vsm_probe::gateway::{
    ChatBackend, EndpointConfig, ReplayBackend, ReplayCache, ResponderPolicy, ScriptedBackend,
};
use vsm_probe::protocol::{ExperimentConfig, Locale, Nation, SamplingParams};
use vsm_probe::reporting::{
    comparison_matrix, identity_scores_csv, intra_set_report, mmlu_delta_matrix, nationals_csv,
    ComparisonMatrix, MatrixMetric,
};
use vsm_probe::scoring::ScoringConstants;
use vsm_probe::{load_human_reference, load_mmlu, ExperimentSet};

#[derive(Parser)]
#[command(
    name = "vsm-probe",
    version,
    about = "Administer the VSM 2013 questionnaire to chat models and quantify the cultural values expressed"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one experiment set and persist records + manifest.
    Run(RunArgs),
    /// Score a persisted set: national VSM scores, dispersion, MCD.
    Score(ScoreArgs),
    /// Pairwise metric matrix over two or more persisted sets.
    Compare(CompareArgs),
    /// Full report bundle: per-set reports plus all comparison matrices.
    Report(ReportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Model name sent to the endpoint.
    #[arg(long)]
    model: String,
    /// Prompt language (en|zh).
    #[arg(long, default_value = "en")]
    lang: String,
    /// Language the reply-format instruction demands (defaults to --lang).
    #[arg(long)]
    response_lang: Option<String>,
    /// Shuffle option positions (per question, per seed).
    #[arg(long)]
    shuffle: bool,
    /// Number of repetition seeds (seeds 1..=N).
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// Explicit comma-separated seed list (overrides --seeds).
    #[arg(long)]
    seed_list: Option<String>,
    /// Output directory for records.jsonl and manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Set label (defaults to <model>-<lang>[-shuffle]).
    #[arg(long)]
    label: Option<String>,
    /// Backend: http | replay | scripted:fixed:K | scripted:uniform:SEED |
    /// scripted:malformed:RATE | scripted:profile:FILE.
    #[arg(long, default_value = "http")]
    backend: String,
    /// Base URL of the OpenAI-compatible endpoint (http backend).
    #[arg(long)]
    endpoint: Option<String>,
    /// Environment variable holding the bearer token.
    #[arg(long, default_value = "VSM_PROBE_API_KEY")]
    api_key_env: String,
    /// Replay cache directory; enables resumable runs. Defaults to
    /// <out>/cache for http runs.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Disable the replay cache entirely.
    #[arg(long)]
    no_cache: bool,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long, default_value_t = 1.0)]
    top_p: f64,
    #[arg(long, default_value_t = 512)]
    max_tokens: u32,
    /// Per-request timeout in seconds.
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    /// Maximum concurrent in-flight requests.
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    /// Record transport failures as unrecognizable (scored 3) instead of
    /// aborting.
    #[arg(long)]
    tolerate_transport: bool,
}

#[derive(Args)]
struct ScoreArgs {
    /// Directory of a persisted experiment set.
    #[arg(long)]
    set: PathBuf,
    /// Output directory; prints a summary to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated additive constants C_PDI,..,C_IVR.
    #[arg(long)]
    constants: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    /// Two or more persisted set directories.
    #[arg(long, num_args = 2.., required = true)]
    sets: Vec<PathBuf>,
    /// Metric: ss_h | ss | dbi | pearson.
    #[arg(long)]
    metric: String,
    /// Output file; extension picks the format (.csv or .json). Prints CSV
    /// to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    constants: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Two or more persisted set directories.
    #[arg(long, num_args = 2.., required = true)]
    sets: Vec<PathBuf>,
    /// Optional MMLU score CSV (model,score) for the delta matrix.
    #[arg(long)]
    mmlu: Option<PathBuf>,
    /// Output directory for the report bundle.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    constants: Option<String>,
}

fn main() {
    if let Err(err) = dispatch(Cli::parse()) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Score(args) => cmd_score(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Report(args) => cmd_report(args),
    }
}

fn parse_locale(tag: &str) -> Result<Locale> {
    Locale::from_tag(tag).with_context(|| format!("unknown locale {tag:?}; expected en or zh"))
}

fn parse_constants(spec: Option<&str>) -> Result<ScoringConstants> {
    let Some(spec) = spec else {
        return Ok(ScoringConstants::default());
    };
    let values: Vec<f64> = spec
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad --constants {spec:?}"))?;
    if values.len() != 6 {
        bail!("--constants needs 6 comma-separated values, got {}", values.len());
    }
    Ok(ScoringConstants {
        pdi: values[0],
        idv: values[1],
        mas: values[2],
        uai: values[3],
        lto: values[4],
        ivr: values[5],
    })
}

fn parse_seed_list(spec: &str) -> Result<Vec<u64>> {
    spec.split(',')
        .map(|v| {
            v.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed {v:?}"))
        })
        .collect()
}

/// Nation-profile file: JSON map from nation label to {question id: option}.
fn load_profile(path: &Path) -> Result<ResponderPolicy> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading profile {}", path.display()))?;
    let raw: BTreeMap<String, BTreeMap<String, u8>> =
        serde_json::from_str(&body).context("profile must be {nation: {question_id: option}}")?;
    let mut profile = BTreeMap::new();
    for (label, table) in raw {
        let nation = Nation::from_label(&label)
            .with_context(|| format!("unknown nation {label:?} in profile"))?;
        let mut options = BTreeMap::new();
        for (question, option) in table {
            let question_id: u8 = question
                .parse()
                .with_context(|| format!("bad question id {question:?} in profile"))?;
            options.insert(question_id, option);
        }
        profile.insert(nation, options);
    }
    Ok(ResponderPolicy::NationProfile(profile))
}

fn build_backend(args: &RunArgs) -> Result<Box<dyn ChatBackend>> {
    let parts: Vec<&str> = args.backend.split(':').collect();
    let inner: Box<dyn ChatBackend> = match parts.as_slice() {
        ["http"] => {
            let base_url = args
                .endpoint
                .clone()
                .context("--endpoint is required for the http backend")?;
            let mut endpoint = EndpointConfig::new(base_url);
            endpoint.api_key = std::env::var(&args.api_key_env).ok();
            endpoint.timeout = Duration::from_secs(args.timeout_secs);
            endpoint.max_in_flight = args.concurrency;
            Box::new(vsm_probe::HttpBackend::new(endpoint)?)
        }
        ["replay"] => {
            let cache_dir = args
                .cache
                .clone()
                .context("--cache is required for the replay backend")?;
            return Ok(Box::new(ReplayBackend::strict(ReplayCache::open(
                cache_dir,
            )?)));
        }
        ["scripted", "fixed", k] => Box::new(ScriptedBackend::new(ResponderPolicy::FixedOption(
            k.parse().with_context(|| format!("bad option {k:?}"))?,
        ))?),
        ["scripted", "uniform", seed] => {
            Box::new(ScriptedBackend::new(ResponderPolicy::UniformRandom {
                seed: seed.parse().with_context(|| format!("bad seed {seed:?}"))?,
            })?)
        }
        ["scripted", "malformed", rate] => {
            Box::new(ScriptedBackend::new(ResponderPolicy::Malformed {
                rate: rate.parse().with_context(|| format!("bad rate {rate:?}"))?,
            })?)
        }
        ["scripted", "profile", path] => Box::new(ScriptedBackend::new(load_profile(
            Path::new(path),
        )?)?),
        _ => bail!("unknown backend spec {:?}", args.backend),
    };

    if args.no_cache {
        return Ok(inner);
    }
    let cache_dir = match (&args.cache, parts[0]) {
        (Some(dir), _) => Some(dir.clone()),
        // http runs cache by default so interrupted runs resume for free.
        (None, "http") => Some(args.out.join("cache")),
        (None, _) => None,
    };
    Ok(match cache_dir {
        Some(dir) => Box::new(ReplayBackend::recording(ReplayCache::open(dir)?, inner)),
        None => inner,
    })
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let prompt_locale = parse_locale(&args.lang)?;
    let response_language = match &args.response_lang {
        Some(tag) => parse_locale(tag)?,
        None => prompt_locale,
    };
    let seeds = match &args.seed_list {
        Some(spec) => parse_seed_list(spec)?,
        None => vsm_probe::protocol::default_seeds(args.seeds),
    };
    let mut config = ExperimentConfig::new(&args.model, prompt_locale)
        .with_response_language(response_language)
        .with_shuffle(args.shuffle)
        .with_seeds(seeds);
    config.sampling = SamplingParams::new(args.temperature, args.top_p, args.max_tokens)
        .map_err(|e| anyhow::anyhow!(e))?;

    let backend = build_backend(&args)?;
    let options = RunOptions {
        label: args.label.clone(),
        max_in_flight: args.concurrency,
        tolerate_transport: args.tolerate_transport,
    };

    let set = run_experiment(&config, backend.as_ref(), Some(&args.out), &options)?;
    println!(
        "set {:?}: {} records, {} vectors, recognizability {:.4}",
        set.label,
        set.manifest.record_count,
        set.vectors.len(),
        set.recognizability_rate
    );
    println!("persisted to {}", args.out.display());
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<()> {
    let constants = parse_constants(args.constants.as_deref())?;
    let set = ExperimentSet::load(&args.set)
        .with_context(|| format!("loading set from {}", args.set.display()))?;
    let human = load_human_reference()?;
    let report = intra_set_report(&set, &human, &constants)?;

    match &args.out {
        None => {
            print!("{}", report.to_csv_string());
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            report.write_json(&dir.join("report.json"))?;
            report.write_csv(&dir.join("report.csv"))?;
            std::fs::write(dir.join("nationals.csv"), nationals_csv(&report.nationals))?;
            std::fs::write(
                dir.join("identity_scores.csv"),
                identity_scores_csv(&set, &constants)?,
            )?;
            println!("wrote report bundle to {}", dir.display());
        }
    }
    Ok(())
}

fn load_sets(paths: &[PathBuf]) -> Result<Vec<ExperimentSet>> {
    paths
        .iter()
        .map(|path| {
            ExperimentSet::load(path).with_context(|| format!("loading set {}", path.display()))
        })
        .collect()
}

fn write_matrix(matrix: &ComparisonMatrix, out: Option<&Path>) -> Result<()> {
    match out {
        None => print!("{}", matrix.to_csv_string()),
        Some(path) => {
            if path.extension().is_some_and(|e| e == "json") {
                matrix.write_json(path)?;
            } else {
                matrix.write_csv(path)?;
            }
            println!("wrote {} matrix to {}", matrix.metric.label(), path.display());
        }
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let metric = MatrixMetric::from_label(&args.metric)
        .with_context(|| format!("unknown metric {:?}", args.metric))?;
    if metric == MatrixMetric::MmluDelta {
        bail!("mmlu_delta comes from `vsm-probe report --mmlu`, not compare");
    }
    let constants = parse_constants(args.constants.as_deref())?;
    let sets = load_sets(&args.sets)?;
    let refs: Vec<&ExperimentSet> = sets.iter().collect();
    let human = load_human_reference()?;
    let matrix = comparison_matrix(&refs, metric, Some(&human), &constants)?;
    write_matrix(&matrix, args.out.as_deref())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let constants = parse_constants(args.constants.as_deref())?;
    let sets = load_sets(&args.sets)?;
    let refs: Vec<&ExperimentSet> = sets.iter().collect();
    let human = load_human_reference()?;
    std::fs::create_dir_all(&args.out)?;

    for set in &sets {
        let report = intra_set_report(set, &human, &constants)?;
        let stem = sanitize(&set.label);
        report.write_json(&args.out.join(format!("{stem}.report.json")))?;
        report.write_csv(&args.out.join(format!("{stem}.report.csv")))?;
        std::fs::write(
            args.out.join(format!("{stem}.identity_scores.csv")),
            identity_scores_csv(set, &constants)?,
        )?;
    }

    for metric in [
        MatrixMetric::Dbi,
        MatrixMetric::Ss,
        MatrixMetric::SsH,
        MatrixMetric::PearsonRho,
    ] {
        let matrix = comparison_matrix(&refs, metric, Some(&human), &constants)?;
        matrix.write_csv(&args.out.join(format!("matrix.{}.csv", metric.label())))?;
        matrix.write_json(&args.out.join(format!("matrix.{}.json", metric.label())))?;
    }

    if let Some(mmlu_path) = &args.mmlu {
        let table = load_mmlu(mmlu_path)?;
        let models: Vec<String> = sets.iter().map(|s| s.config.model_name.clone()).collect();
        let matrix = mmlu_delta_matrix(&table, &models)?;
        matrix.write_csv(&args.out.join("matrix.mmlu_delta.csv"))?;
        matrix.write_json(&args.out.join("matrix.mmlu_delta.json"))?;
    }

    println!("wrote report bundle for {} sets to {}", sets.len(), args.out.display());
    Ok(())
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
