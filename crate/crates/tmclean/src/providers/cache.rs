//! Persistent n-best cache. Append-only record file keyed by a content hash
//! of (provider id, source_lang, target_lang, n, source_text).

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{NBestRequest, ProviderError, TranslationHypothesis, Translator};

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    request: NBestRequest,
    response: Vec<TranslationHypothesis>,
}

/// Wraps any translator with a disk-backed cache. Hits never touch the
/// inner provider; the record file survives process restarts.
pub struct CachedTranslator {
    inner: Arc<dyn Translator>,
    path: PathBuf,
    state: Mutex<CacheState>,
}

struct CacheState {
    entries: HashMap<String, Vec<TranslationHypothesis>>,
    hits: u64,
    misses: u64,
}

pub fn cache_key(provider_id: &str, request: &NBestRequest) -> String {
    let mut hasher = Sha256::new();
    for part in [
        provider_id,
        &request.source_lang,
        &request.target_lang,
        &request.n.to_string(),
        &request.source_text,
    ] {
        hasher.update(part.as_bytes());
        hasher.update([0u8]);
    }
    format!("{:x}", hasher.finalize())
}

impl CachedTranslator {
    pub fn open(inner: Arc<dyn Translator>, path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let content = std::fs::read_to_string(&path)?;
            for line in content.lines() {
                if line.is_empty() {
                    continue;
                }
                let record: CacheRecord = serde_json::from_str(line).map_err(|e| {
                    std::io::Error::new(std::io::ErrorKind::InvalidData, e)
                })?;
                entries.insert(record.key, record.response);
            }
        }
        Ok(CachedTranslator {
            inner,
            path,
            state: Mutex::new(CacheState { entries, hits: 0, misses: 0 }),
        })
    }

    /// (hits, misses) since this handle was opened.
    pub fn counters(&self) -> (u64, u64) {
        let state = self.state.lock().unwrap();
        (state.hits, state.misses)
    }
}

impl Translator for CachedTranslator {
    fn id(&self) -> String {
        // Cache is transparent: the fingerprint is the inner provider's.
        self.inner.id()
    }

    fn translate_nbest(
        &self,
        request: &NBestRequest,
    ) -> Result<Vec<TranslationHypothesis>, ProviderError> {
        let key = cache_key(&self.inner.id(), request);
        {
            let mut state = self.state.lock().unwrap();
            if let Some(response) = state.entries.get(&key) {
                let response = response.clone();
                state.hits += 1;
                return Ok(response);
            }
        }
        let response = self.inner.translate_nbest(request)?;
        let mut state = self.state.lock().unwrap();
        if let std::collections::hash_map::Entry::Vacant(slot) = state.entries.entry(key.clone()) {
            let record = CacheRecord {
                key,
                request: request.clone(),
                response: response.clone(),
            };
            let line = serde_json::to_string(&record)
                .map_err(|e| ProviderError::Unavailable(format!("cache encode: {e}")))?;
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| ProviderError::Unavailable(format!("cache write: {e}")))?;
            writeln!(file, "{line}")
                .map_err(|e| ProviderError::Unavailable(format!("cache write: {e}")))?;
            slot.insert(response.clone());
        }
        state.misses += 1;
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    struct CountingTranslator {
        calls: AtomicU64,
    }

    impl Translator for CountingTranslator {
        fn id(&self) -> String {
            "counting:v1".to_string()
        }

        fn translate_nbest(
            &self,
            request: &NBestRequest,
        ) -> Result<Vec<TranslationHypothesis>, ProviderError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(vec![TranslationHypothesis {
                text: format!("hyp for {}", request.source_text),
                score: 1.0,
            }])
        }
    }

    #[test]
    fn second_identical_request_hits_the_cache() {
        let dir = tempfile::tempdir().unwrap();
        let inner = Arc::new(CountingTranslator { calls: AtomicU64::new(0) });
        let cache = CachedTranslator::open(inner.clone(), dir.path().join("mt.cache")).unwrap();
        let req = NBestRequest::new("hello", "en", "de", 5);
        let first = cache.translate_nbest(&req).unwrap();
        let second = cache.translate_nbest(&req).unwrap();
        assert_eq!(first, second);
        assert_eq!(inner.calls.load(Ordering::SeqCst), 1);
        assert_eq!(cache.counters(), (1, 1));
    }

    #[test]
    fn cache_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mt.cache");
        let req = NBestRequest::new("hello", "en", "de", 5);
        let first = {
            let inner = Arc::new(CountingTranslator { calls: AtomicU64::new(0) });
            let cache = CachedTranslator::open(inner, path.clone()).unwrap();
            cache.translate_nbest(&req).unwrap()
        };
        let inner = Arc::new(CountingTranslator { calls: AtomicU64::new(0) });
        let cache = CachedTranslator::open(inner.clone(), path).unwrap();
        let second = cache.translate_nbest(&req).unwrap();
        assert_eq!(first, second);
        assert_eq!(inner.calls.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn different_requests_use_different_keys() {
        let a = cache_key("p", &NBestRequest::new("x", "en", "de", 5));
        let b = cache_key("p", &NBestRequest::new("x", "en", "de", 6));
        let c = cache_key("q", &NBestRequest::new("x", "en", "de", 5));
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
