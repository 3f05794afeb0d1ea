//! Persistence for experiment sets: a JSONL file of raw records plus a JSON
//! manifest, both with deterministic field order so completed runs replay
//! byte-for-byte.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::protocol::{ExperimentConfig, Identity};

use super::{CollectionError, FallbackKind};

/// One persisted (identity, question, seed) triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub identity: Identity,
    pub question_id: u8,
    pub seed: u64,
    pub presentation: Vec<u8>,
    pub prompt_sha256: String,
    pub cache_key: String,
    pub raw_text: String,
    pub option_id: Option<u8>,
    pub fallback: FallbackKind,
}

/// Run metadata persisted next to the records.
///
/// `config_digest` and `template_sha256` identify what was asked and how;
/// the timestamps are informational and excluded from reproducibility
/// comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub set_label: String,
    pub config: ExperimentConfig,
    pub config_digest: String,
    pub template_sha256: String,
    pub backend: String,
    pub record_count: u64,
    pub recognizability_rate: f64,
    pub started_unix: u64,
    pub finished_unix: u64,
}

pub fn write_records(path: &Path, records: &[RawRecord]) -> Result<(), CollectionError> {
    let mut writer = BufWriter::new(fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<RawRecord>, CollectionError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut records = Vec::new();
    for (number, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord = serde_json::from_str(&line).map_err(|e| {
            CollectionError::IntegrityError(format!(
                "{} line {}: {}",
                path.display(),
                number + 1,
                e
            ))
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), CollectionError> {
    let mut body = serde_json::to_string_pretty(manifest)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CollectionError> {
    let bytes = fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Gender, Locale, Nation};

    fn sample_record(seed: u64) -> RawRecord {
        RawRecord {
            identity: Identity {
                nation: Nation::Brazil,
                gender: Gender::Male,
                age: 45,
            },
            question_id: 7,
            seed,
            presentation: vec![1, 2, 3, 4, 5],
            prompt_sha256: "ab".into(),
            cache_key: "cd".into(),
            raw_text: "{\"option\": 3}".into(),
            option_id: Some(3),
            fallback: FallbackKind::None,
        }
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let records = vec![sample_record(1), sample_record(2)];
        write_records(&path, &records).unwrap();
        assert_eq!(read_records(&path).unwrap(), records);
    }

    #[test]
    fn record_writes_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        let records = vec![sample_record(1)];
        write_records(&a, &records).unwrap();
        write_records(&b, &records).unwrap();
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    }

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.json");
        let config = ExperimentConfig::new("m", Locale::English);
        let manifest = Manifest {
            set_label: "m-en".into(),
            config_digest: config.digest(),
            template_sha256: "t".into(),
            config,
            backend: "scripted:fixed:3".into(),
            record_count: 12960,
            recognizability_rate: 1.0,
            started_unix: 0,
            finished_unix: 1,
        };
        write_manifest(&path, &manifest).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), manifest);
    }
}
