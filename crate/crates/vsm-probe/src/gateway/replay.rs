//! Content-addressed replay cache.
//!
//! Every response is stored as one JSON file named by its cache key, fanned
//! out over two-hex-digit subdirectories. Writes go to a temp file in the
//! same directory followed by an atomic rename, so readers never observe a
//! partially written entry; concurrent readers need no locking.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{cache_key, BackendKind, ChatBackend, ChatRequest, ChatResponse, GatewayError};

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    model_name: String,
    seed: u64,
    raw_text: String,
}

/// Directory-backed store of raw responses keyed by [`cache_key`].
#[derive(Debug, Clone)]
pub struct ReplayCache {
    root: PathBuf,
}

impl ReplayCache {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, GatewayError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entry_path(key).is_file()
    }

    /// Raw cached text for `key`, byte-for-byte as recorded.
    pub fn get(&self, key: &str) -> Result<Option<String>, GatewayError> {
        let path = self.entry_path(key);
        if !path.is_file() {
            return Ok(None);
        }
        let bytes = fs::read(&path)?;
        let entry: CacheEntry = serde_json::from_slice(&bytes).map_err(|e| {
            GatewayError::CacheIo(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("corrupt cache entry {}: {}", path.display(), e),
            ))
        })?;
        Ok(Some(entry.raw_text))
    }

    /// Record a response. Last writer wins; the rename is atomic so a
    /// partially written entry is never served.
    pub fn put(&self, request: &ChatRequest, raw_text: &str) -> Result<(), GatewayError> {
        let key = cache_key(request);
        let path = self.entry_path(&key);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let entry = CacheEntry {
            key: key.clone(),
            model_name: request.model_name.clone(),
            seed: request.seed,
            raw_text: raw_text.to_string(),
        };
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(&serde_json::to_vec(&entry).expect("cache entry serializes"))?;
            file.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        let mut count = 0;
        if let Ok(shards) = fs::read_dir(&self.root) {
            for shard in shards.flatten() {
                if let Ok(entries) = fs::read_dir(shard.path()) {
                    count += entries
                        .flatten()
                        .filter(|e| e.path().extension().is_some_and(|x| x == "json"))
                        .count();
                }
            }
        }
        count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Backend that answers from a [`ReplayCache`].
///
/// In strict mode a missing entry is a [`GatewayError::CacheMiss`]. With a
/// fallback backend attached, misses are forwarded to it and the response is
/// recorded before being returned, which is what makes interrupted runs
/// resumable: completed triples replay from disk, the rest hit the inner
/// backend.
pub struct ReplayBackend {
    cache: ReplayCache,
    fallback: Option<Box<dyn ChatBackend>>,
}

impl ReplayBackend {
    /// Cache-only backend: every miss is an error.
    pub fn strict(cache: ReplayCache) -> Self {
        Self {
            cache,
            fallback: None,
        }
    }

    /// Read-through backend: misses are served by `inner` and recorded.
    pub fn recording(cache: ReplayCache, inner: Box<dyn ChatBackend>) -> Self {
        Self {
            cache,
            fallback: Some(inner),
        }
    }

    pub fn cache(&self) -> &ReplayCache {
        &self.cache
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let started = Instant::now();
        let key = cache_key(request);
        if let Some(raw_text) = self.cache.get(&key)? {
            return Ok(ChatResponse {
                raw_text,
                backend: BackendKind::Replay,
                latency: started.elapsed(),
                attempt_count: 0,
            });
        }
        match &self.fallback {
            None => Err(GatewayError::CacheMiss { key }),
            Some(inner) => {
                let response = inner.complete(request)?;
                self.cache.put(request, &response.raw_text)?;
                Ok(response)
            }
        }
    }

    fn name(&self) -> &str {
        match &self.fallback {
            None => "replay",
            Some(_) => "replay+record",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{ResponderPolicy, ScriptedBackend};
    use crate::protocol::{Gender, Identity, Nation, PromptMetadata, PromptText, SamplingParams};

    fn request(text: &str, seed: u64) -> ChatRequest {
        ChatRequest {
            model_name: "m".into(),
            prompt: PromptText {
                text: text.into(),
                metadata: PromptMetadata {
                    question_id: 3,
                    identity: Identity {
                        nation: Nation::France,
                        gender: Gender::Male,
                        age: 35,
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
    fn strict_mode_misses_are_errors() {
        let dir = tempfile::tempdir().unwrap();
        let backend = ReplayBackend::strict(ReplayCache::open(dir.path()).unwrap());
        let err = backend.complete(&request("p", 1)).unwrap_err();
        assert!(matches!(err, GatewayError::CacheMiss { .. }));
    }

    #[test]
    fn cached_bytes_are_returned_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ReplayCache::open(dir.path()).unwrap();
        let req = request("p", 1);
        cache.put(&req, "exact \u{4f60}\u{597d} bytes\n").unwrap();
        let backend = ReplayBackend::strict(cache);
        let response = backend.complete(&req).unwrap();
        assert_eq!(response.raw_text, "exact \u{4f60}\u{597d} bytes\n");
        assert_eq!(response.backend, BackendKind::Replay);
    }

    #[test]
    fn recording_mode_fills_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ReplayCache::open(dir.path()).unwrap();
        let scripted = ScriptedBackend::new(ResponderPolicy::FixedOption(2)).unwrap();
        let backend = ReplayBackend::recording(cache, Box::new(scripted));
        let req = request("p", 7);
        let first = backend.complete(&req).unwrap();
        assert_eq!(first.backend, BackendKind::Scripted);
        let second = backend.complete(&req).unwrap();
        assert_eq!(second.backend, BackendKind::Replay);
        assert_eq!(first.raw_text, second.raw_text);
    }
}
