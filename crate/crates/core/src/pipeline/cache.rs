use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Per-stage seed: the first eight bytes, little endian, of
/// `SHA-256(master_seed as u64 LE || stage name)`.
pub fn stage_seed(master: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Content key builder. Every field is length-prefixed so adjacent fields
/// cannot run together.
pub(crate) struct KeyBuilder(Sha256);

impl KeyBuilder {
    pub(crate) fn new(stage: &str) -> Self {
        let mut k = KeyBuilder(Sha256::new());
        k.field(stage.as_bytes());
        k
    }

    pub(crate) fn field(&mut self, bytes: &[u8]) -> &mut Self {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
        self
    }

    pub(crate) fn text(&mut self, s: &str) -> &mut Self {
        self.field(s.as_bytes())
    }

    pub(crate) fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

/// How many items each stage computed and how many it loaded from cache.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageStats {
    pub computed: BTreeMap<&'static str, usize>,
    pub cached: BTreeMap<&'static str, usize>,
}

impl StageStats {
    pub(crate) fn record(&mut self, stage: &'static str, hit: bool) {
        let map = if hit { &mut self.cached } else { &mut self.computed };
        *map.entry(stage).or_insert(0) += 1;
    }

    pub fn computed(&self, stage: &str) -> usize {
        self.computed.get(stage).copied().unwrap_or(0)
    }

    pub fn cached(&self, stage: &str) -> usize {
        self.cached.get(stage).copied().unwrap_or(0)
    }
}

/// On-disk stage cache under `<output_dir>/cache/<stage>/`. A disabled cache
/// never hits and never writes.
#[derive(Debug, Clone)]
pub(crate) struct Cache {
    root: Option<PathBuf>,
}

impl Cache {
    pub(crate) fn new(output_dir: &Path, enabled: bool) -> Self {
        Self {
            root: enabled.then(|| output_dir.join("cache")),
        }
    }

    /// Path of an entry, whether or not it exists.
    pub(crate) fn entry(&self, stage: &str, key: &str, suffix: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(stage).join(format!("{key}{suffix}")))
    }

    /// Existing entry files, or `None` if any is missing.
    pub(crate) fn lookup(&self, stage: &str, key: &str, suffixes: &[&str]) -> Option<Vec<PathBuf>> {
        let paths: Option<Vec<PathBuf>> = suffixes.iter().map(|s| self.entry(stage, key, s)).collect();
        paths.filter(|ps| ps.iter().all(|p| p.is_file()))
    }

    pub(crate) fn prepare(&self, stage: &str) -> Result<()> {
        if let Some(r) = &self.root {
            let dir = r.join(stage);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_seeds_are_stable_and_distinct() {
        assert_eq!(stage_seed(42, "mds"), stage_seed(42, "mds"));
        assert_ne!(stage_seed(42, "mds"), stage_seed(42, "cv"));
        assert_ne!(stage_seed(42, "mds"), stage_seed(43, "mds"));
    }

    #[test]
    fn keys_separate_fields() {
        let mut a = KeyBuilder::new("s");
        a.text("ab").text("c");
        let mut b = KeyBuilder::new("s");
        b.text("a").text("bc");
        assert_ne!(a.finish(), b.finish());
    }
}
