//! Memoized families, optionally persisted to a directory.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::family::{FamilyError, FamilyKind, FamilySource, PolyFamily};

#[derive(Debug, Error)]
pub enum CacheError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("cache I/O on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("corrupted cache entry {0}")]
    Corrupted(PathBuf),
}

/// On-disk record of one family.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub fingerprint: String,
    pub kind: FamilyKind,
    pub n: usize,
    pub solver_precision: u32,
    /// The family's canonical JSON, stored verbatim.
    pub family: String,
    pub content_hash: String,
}

impl CacheEntry {
    pub fn new(family: &PolyFamily) -> Self {
        CacheEntry {
            fingerprint: family.source().fingerprint(),
            kind: family.kind().clone(),
            n: family.len(),
            solver_precision: family.solver_precision(),
            family: family.to_json(),
            content_hash: family.content_hash(),
        }
    }

    /// Parses the stored family after checking its hash.
    pub fn load(&self) -> Option<PolyFamily> {
        let hash = hex::encode(Sha256::digest(self.family.as_bytes()));
        if hash != self.content_hash {
            return None;
        }
        let fam = PolyFamily::from_json(&self.family).ok()?;
        (fam.source().fingerprint() == self.fingerprint && *fam.kind() == self.kind && fam.len() == self.n)
            .then_some(fam)
    }
}

type Key = (String, String);

static GLOBAL: OnceLock<Arc<FamilyCache>> = OnceLock::new();

/// Families keyed by source fingerprint, kind and length. A longer family
/// answers requests for shorter lengths.
#[derive(Default)]
pub struct FamilyCache {
    mem: RwLock<HashMap<Key, BTreeMap<usize, Arc<PolyFamily>>>>,
    dir: Option<PathBuf>,
}

impl FamilyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        FamilyCache {
            mem: RwLock::default(),
            dir: Some(dir.into()),
        }
    }

    /// Process-wide cache; in memory only unless [`Self::install_global`] ran first.
    pub fn global() -> Arc<FamilyCache> {
        GLOBAL.get_or_init(|| Arc::new(FamilyCache::new())).clone()
    }

    /// Makes `cache` the process-wide cache. Fails once the global cache is in use.
    pub fn install_global(cache: FamilyCache) -> bool {
        GLOBAL.set(Arc::new(cache)).is_ok()
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Returns the family of length `n`, computing it if needed.
    pub fn get(&self, kind: &FamilyKind, source: &FamilySource, n: usize) -> Result<Arc<PolyFamily>, CacheError> {
        let key = (source.fingerprint(), kind.key());
        if let Some(f) = self.lookup_mem(&key, n) {
            return Ok(f);
        }
        if let Some(f) = self.lookup_disk(&key, n)? {
            return Ok(self.insert(key, f));
        }
        let fam = PolyFamily::compute(kind, source, n)?;
        self.store_disk(&key, &fam)?;
        Ok(self.insert(key, fam))
    }

    fn lookup_mem(&self, key: &Key, n: usize) -> Option<Arc<PolyFamily>> {
        let mem = self.mem.read().expect("cache lock");
        let (&len, fam) = mem.get(key)?.range(n..).next()?;
        Some(if len == n { fam.clone() } else { Arc::new(fam.truncated(n)) })
    }

    fn insert(&self, key: Key, fam: PolyFamily) -> Arc<PolyFamily> {
        let mut mem = self.mem.write().expect("cache lock");
        let slot = mem.entry(key).or_default();
        let n = fam.len();
        if let Some(existing) = slot.get(&n) {
            debug_assert_eq!(**existing, fam, "recomputed family differs from the cached one");
            return existing.clone();
        }
        let fam = Arc::new(fam);
        slot.insert(n, fam.clone());
        fam
    }

    fn entry_dir(&self, key: &Key) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        let digest = hex::encode(Sha256::digest(format!("{}\n{}", key.0, key.1).as_bytes()));
        Some(dir.join(&digest[..24]))
    }

    fn lookup_disk(&self, key: &Key, n: usize) -> Result<Option<PolyFamily>, CacheError> {
        let Some(dir) = self.entry_dir(key) else {
            return Ok(None);
        };
        let Ok(listing) = fs::read_dir(&dir) else {
            return Ok(None);
        };
        let mut lengths: Vec<usize> = listing
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_prefix('n')?.strip_suffix(".json")?.parse().ok()
            })
            .filter(|&len| len >= n)
            .collect();
        lengths.sort_unstable();
        let Some(&len) = lengths.first() else {
            return Ok(None);
        };
        let path = dir.join(format!("n{len}.json"));
        let text = fs::read_to_string(&path).map_err(|source| CacheError::Io {
            path: path.clone(),
            source,
        })?;
        let entry: CacheEntry = serde_json::from_str(&text).map_err(|_| CacheError::Corrupted(path.clone()))?;
        if entry.fingerprint != key.0 || entry.kind.key() != key.1 {
            return Err(CacheError::Corrupted(path));
        }
        let fam = entry.load().ok_or(CacheError::Corrupted(path))?;
        Ok(Some(if len == n { fam } else { fam.truncated(n) }))
    }

    fn store_disk(&self, key: &Key, fam: &PolyFamily) -> Result<(), CacheError> {
        let Some(dir) = self.entry_dir(key) else {
            return Ok(());
        };
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CacheError::Io { path, source }
        };
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let path = dir.join(format!("n{}.json", fam.len()));
        let tmp = dir.join(format!(".n{}.{}.tmp", fam.len(), std::process::id()));
        let text = serde_json::to_string(&CacheEntry::new(fam)).expect("entry serializes");
        fs::write(&tmp, text).map_err(io(&tmp))?;
        fs::rename(&tmp, &path).map_err(io(&path))?;
        Ok(())
    }
}
