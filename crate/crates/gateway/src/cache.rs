use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use waterbid_core::chat::{ChatMessage, ChatRequest, RequestTag};

/// The part of a request that determines the response. The tag is
/// bookkeeping and stays out of the key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl From<&ChatRequest> for CachedRequest {
    fn from(r: &ChatRequest) -> Self {
        Self {
            model: r.model.clone(),
            messages: r.messages.clone(),
            temperature: r.temperature,
            max_tokens: r.max_tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub request: CachedRequest,
    /// Coordinates of the request that first filled this entry.
    pub tag: RequestTag,
    pub response_text: String,
    pub latency_ms: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

/// Compact JSON with object keys sorted at every level.
fn canonical_json(v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                canonical_json(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                canonical_json(item, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

/// Hex SHA-256 of the canonical JSON of model, messages, temperature and
/// max_tokens.
pub fn cache_key(request: &ChatRequest) -> String {
    let value = serde_json::to_value(CachedRequest::from(request)).expect("request is plain data");
    let mut text = String::new();
    canonical_json(&value, &mut text);
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Content-addressed entries under `dir/<first two hex chars>/<key>.json`.
#[derive(Debug)]
pub struct DiskCache {
    dir: PathBuf,
    tmp_counter: AtomicU64,
}

impl DiskCache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            tmp_counter: AtomicU64::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    /// A present but unreadable entry is reported, not treated as a miss.
    pub fn get(&self, key: &str) -> Result<Option<CacheEntry>, String> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(format!("{}: {e}", path.display())),
        };
        let entry: CacheEntry =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if entry.key != key {
            return Err(format!("{}: holds key {}", path.display(), entry.key));
        }
        Ok(Some(entry))
    }

    /// Writes to a temporary file in the same directory, then renames.
    pub fn put(&self, entry: &CacheEntry) -> std::io::Result<()> {
        let path = self.path_for(&entry.key);
        let parent = path.parent().expect("entry path has a parent");
        fs::create_dir_all(parent)?;
        let n = self.tmp_counter.fetch_add(1, Ordering::Relaxed);
        let tmp = parent.join(format!(".{}.{}.{n}.tmp", entry.key, std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(serde_json::to_string_pretty(entry)?.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)
    }
}
