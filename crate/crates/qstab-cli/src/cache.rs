//! Content-addressed artifact cache.  Entries are keyed by the SHA-256 of a
//! human-readable descriptor (which embeds the construction version), store
//! a checksum of the payload, and are written atomically
//! (temp-file-then-rename) so processes can share one cache directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::hex;

/// Environment variable overriding the cache root directory.
pub const CACHE_ENV: &str = "QSTAB_CACHE";

/// Bumping this invalidates every cached artifact.
pub const CONSTRUCTION_VERSION: u32 = 1;

const DEFAULT_ROOT: &str = ".qstab-cache";
const MAGIC: &str = "qstab-cache";

#[derive(Debug, Clone)]
pub struct Cache {
    root: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CacheOutcome {
    pub payload: String,
    pub from_cache: bool,
    /// The entry existed but failed its checksum and was rebuilt.
    pub rebuilt_corrupt: bool,
}

fn key(descriptor: &str) -> String {
    let mut h = Sha256::new();
    h.update(descriptor.as_bytes());
    h.update(format!("|v={CONSTRUCTION_VERSION}").as_bytes());
    hex(&h.finalize())
}

fn payload_hash(payload: &str) -> String {
    let mut h = Sha256::new();
    h.update(payload.as_bytes());
    hex(&h.finalize())
}

impl Cache {
    /// Cache rooted at `$QSTAB_CACHE` (or `.qstab-cache`); `disabled` makes
    /// every lookup a rebuild.
    pub fn from_env(disabled: bool) -> Cache {
        if disabled {
            return Cache { root: None };
        }
        let root = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT));
        Cache { root: Some(root) }
    }

    pub fn at(root: impl Into<PathBuf>) -> Cache {
        Cache { root: Some(root.into()) }
    }

    pub fn disabled() -> Cache {
        Cache { root: None }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    /// Fetch the payload for `descriptor`, building and storing it on a
    /// miss.  Corrupt entries (checksum mismatch, truncation) are rebuilt
    /// with a warning on stderr.
    pub fn get_or_build<E>(
        &self,
        descriptor: &str,
        build: impl FnOnce() -> Result<String, E>,
    ) -> Result<CacheOutcome, E> {
        let Some(root) = &self.root else {
            return Ok(CacheOutcome {
                payload: build()?,
                from_cache: false,
                rebuilt_corrupt: false,
            });
        };
        let path = root.join(format!("{}.qstab", key(descriptor)));
        let mut rebuilt_corrupt = false;
        if let Ok(text) = fs::read_to_string(&path) {
            match parse_entry(&text) {
                Some((desc, payload)) if desc == descriptor => {
                    return Ok(CacheOutcome {
                        payload: payload.to_string(),
                        from_cache: true,
                        rebuilt_corrupt: false,
                    });
                }
                _ => {
                    eprintln!(
                        "warning: cache entry {} is corrupt; rebuilding",
                        path.display()
                    );
                    let _ = fs::remove_file(&path);
                    rebuilt_corrupt = true;
                }
            }
        }
        let payload = build()?;
        if let Err(e) = self.store(root, &path, descriptor, &payload) {
            eprintln!("warning: could not write cache entry: {e}");
        }
        Ok(CacheOutcome { payload, from_cache: false, rebuilt_corrupt })
    }

    fn store(
        &self,
        root: &Path,
        path: &Path,
        descriptor: &str,
        payload: &str,
    ) -> std::io::Result<()> {
        fs::create_dir_all(root)?;
        let tmp = root.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos())
                .unwrap_or(0)
        ));
        {
            let mut f = fs::File::create(&tmp)?;
            writeln!(f, "{MAGIC} descriptor={descriptor}")?;
            writeln!(f, "sha256={}", payload_hash(payload))?;
            f.write_all(payload.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)
    }

    /// List entries as (key, descriptor) pairs, sorted by key.
    pub fn ls(&self) -> Vec<(String, String)> {
        let Some(root) = &self.root else { return Vec::new() };
        let Ok(dir) = fs::read_dir(root) else { return Vec::new() };
        let mut out = Vec::new();
        for entry in dir.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("qstab") {
                continue;
            }
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
            let desc = fs::read_to_string(&path)
                .ok()
                .and_then(|t| {
                    t.lines()
                        .next()
                        .and_then(|l| l.strip_prefix(&format!("{MAGIC} descriptor=")))
                        .map(String::from)
                })
                .unwrap_or_else(|| "<corrupt>".into());
            out.push((stem, desc));
        }
        out.sort();
        out
    }

    /// Remove one entry by key prefix, or everything with `None`.
    pub fn rm(&self, target: Option<&str>) -> usize {
        let Some(root) = &self.root else { return 0 };
        let mut removed = 0;
        for (k, _) in self.ls() {
            let matches = target.map_or(true, |t| k.starts_with(t));
            if matches && fs::remove_file(root.join(format!("{k}.qstab"))).is_ok() {
                removed += 1;
            }
        }
        removed
    }
}

/// Returns (descriptor, payload) when the checksum verifies.
fn parse_entry(text: &str) -> Option<(&str, &str)> {
    let rest = text.strip_prefix(&format!("{MAGIC} descriptor="))?;
    let (desc, rest) = rest.split_once('\n')?;
    let rest = rest.strip_prefix("sha256=")?;
    let (hash, payload) = rest.split_once('\n')?;
    if payload_hash(payload) != hash {
        return None;
    }
    Some((desc, payload))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp_root(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("qstab-cache-test-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        dir
    }

    #[test]
    fn miss_then_hit() {
        let cache = Cache::at(tmp_root("hit"));
        let r1 = cache
            .get_or_build::<()>("thing a=1", || Ok("payload-1".into()))
            .unwrap();
        assert!(!r1.from_cache);
        let r2 = cache
            .get_or_build::<()>("thing a=1", || panic!("should not rebuild"))
            .unwrap();
        assert!(r2.from_cache);
        assert_eq!(r2.payload, "payload-1");
        assert_eq!(cache.ls().len(), 1);
        assert_eq!(cache.rm(None), 1);
    }

    #[test]
    fn corrupt_entry_is_rebuilt() {
        let root = tmp_root("corrupt");
        let cache = Cache::at(&root);
        cache.get_or_build::<()>("thing b=2", || Ok("good".into())).unwrap();
        let (k, _) = cache.ls().pop().unwrap();
        let path = root.join(format!("{k}.qstab"));
        let truncated = fs::read_to_string(&path).unwrap();
        fs::write(&path, &truncated[..truncated.len() - 2]).unwrap();
        let r = cache.get_or_build::<()>("thing b=2", || Ok("good".into())).unwrap();
        assert!(r.rebuilt_corrupt);
        assert_eq!(r.payload, "good");
        // And the rebuilt entry verifies again.
        let r = cache
            .get_or_build::<()>("thing b=2", || panic!("should not rebuild"))
            .unwrap();
        assert!(r.from_cache);
        let _ = fs::remove_dir_all(&root);
    }

    #[test]
    fn disabled_cache_always_builds() {
        let cache = Cache::disabled();
        let mut builds = 0;
        for _ in 0..2 {
            cache
                .get_or_build::<()>("x", || {
                    builds += 1;
                    Ok("p".into())
                })
                .unwrap();
        }
        assert_eq!(builds, 2);
        assert!(cache.ls().is_empty());
    }
}
