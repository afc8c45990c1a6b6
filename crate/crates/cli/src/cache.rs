//! On-disk cache of enumerated class lists, one JSON file per key.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use coset_theta::classes::{check_class_list, ClassList};
use coset_theta::json::{class_list_from_json, class_list_to_json};
use coset_theta::Coset;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Bump whenever the class-list encoding or the search changes.
pub const VERSION: &str = "cosets-classlist-v1";

pub const ENV_VAR: &str = "COSETS_CACHE_DIR";

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    /// `$COSETS_CACHE_DIR`, else `$XDG_CACHE_HOME/cosets`, else `~/.cache/cosets`.
    pub fn from_env() -> Option<Self> {
        let dir = if let Some(d) = std::env::var_os(ENV_VAR) {
            PathBuf::from(d)
        } else if let Some(d) = std::env::var_os("XDG_CACHE_HOME") {
            PathBuf::from(d).join("cosets")
        } else {
            PathBuf::from(std::env::var_os("HOME")?).join(".cache").join("cosets")
        };
        Some(Cache { dir })
    }

    pub fn key(kind: &str, seed: &Coset, primes: &[u64], validate: &[u64]) -> String {
        let mut h = Sha256::new();
        h.update(VERSION.as_bytes());
        h.update(b"\n");
        h.update(kind.as_bytes());
        h.update(b"\n");
        h.update(seed.canonical_key().0.as_bytes());
        h.update(format!("\n{primes:?}\n{validate:?}").as_bytes());
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A cached list for `seed`, with the seed replaced by the caller's coset.
    /// Unreadable, stale or invalid entries count as misses.
    pub fn load(&self, key: &str, seed: &Coset) -> Option<ClassList> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let v: Value = serde_json::from_str(&text).ok()?;
        if v.get("version")?.as_str()? != VERSION || v.get("key")?.as_str()? != key {
            return None;
        }
        let mut cl = class_list_from_json(v.get("value")?).ok()?;
        if cl.seed.canonical_key() != seed.canonical_key() {
            return None;
        }
        cl.seed = seed.clone();
        check_class_list(&cl).ok()?;
        Some(cl)
    }

    /// Writes to a temporary file in the cache directory and renames it into place.
    pub fn store(&self, key: &str, cl: &ClassList) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = json!({
            "version": VERSION,
            "key": key,
            "value": class_list_to_json(cl),
        });
        let tmp = self
            .dir
            .join(format!(".{key}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(entry.to_string().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, self.path(key))
    }
}
