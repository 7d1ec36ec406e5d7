//! On-disk cache of diagonalized spectra keyed by `(n, K, G, spec hash)`.
//!
//! Entry layout: 8-byte magic, little-endian `u32` format version, 32-byte
//! SHA-256 of the payload, then the payload (JSON with round-trip floats).
//! Writers take an exclusive advisory lock on `<dir>/.lock`; readers a shared one.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::galerkin::SpectralData;

const MAGIC: &[u8; 8] = b"WEYLSPEC";
const VERSION: u32 = 1;
const HEADER: usize = 8 + 4 + 32;

pub const CACHE_ENV: &str = "WEYL_LAB_CACHE";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub n: usize,
    pub cutoff: u64,
    pub grid: usize,
    pub spec_hash: String,
}

impl CacheKey {
    pub fn of(s: &SpectralData) -> Self {
        Self { n: s.n, cutoff: s.provenance.cutoff, grid: s.provenance.grid, spec_hash: s.provenance.spec_hash.clone() }
    }

    fn file_name(&self) -> String {
        format!("n{}_K{}_G{}_{}.bin", self.n, self.cutoff, self.grid, self.spec_hash)
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::Cache(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    /// `$WEYL_LAB_CACHE` when set, else `fallback`.
    pub fn from_env_or(fallback: impl Into<PathBuf>) -> Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(PathBuf::from(d)),
            _ => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    fn lock_file(&self) -> Result<File> {
        Ok(OpenOptions::new().create(true).truncate(false).write(true).open(self.dir.join(".lock"))?)
    }

    pub fn store(&self, s: &SpectralData) -> Result<PathBuf> {
        let key = CacheKey::of(s);
        let payload = serde_json::to_vec(s)?;
        let mut bytes = Vec::with_capacity(HEADER + payload.len());
        bytes.extend_from_slice(MAGIC);
        bytes.extend_from_slice(&VERSION.to_le_bytes());
        bytes.extend_from_slice(&Sha256::digest(&payload));
        bytes.extend_from_slice(&payload);

        let lock = self.lock_file()?;
        lock.lock()?;
        let target = self.path(&key);
        let tmp = target.with_extension("tmp");
        let result = (|| -> Result<()> {
            let mut f = File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &target)?;
            Ok(())
        })();
        lock.unlock()?;
        result.map(|_| target)
    }

    /// `None` on a miss; unreadable or corrupt entries also count as misses.
    pub fn lookup(&self, key: &CacheKey) -> Option<SpectralData> {
        let path = self.path(key);
        if !path.exists() {
            return None;
        }
        let bytes = match self.lock_file().and_then(|l| {
            l.lock_shared()?;
            let b = fs::read(&path);
            l.unlock()?;
            Ok(b?)
        }) {
            Ok(b) => b,
            Err(e) => {
                log::warn!("cache entry {} unreadable: {e}", path.display());
                return None;
            }
        };
        match decode(&bytes) {
            Ok(s) if CacheKey::of(&s) == *key => Some(s),
            Ok(_) => {
                log::warn!("cache entry {} holds a different key", path.display());
                None
            }
            Err(e) => {
                log::warn!("cache entry {} is corrupt ({e}); ignoring it", path.display());
                None
            }
        }
    }
}

fn decode(bytes: &[u8]) -> Result<SpectralData> {
    if bytes.len() < HEADER || &bytes[..8] != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Cache(format!("format version {version}, expected {VERSION}")));
    }
    let payload = &bytes[HEADER..];
    if Sha256::digest(payload).as_slice() != &bytes[12..HEADER] {
        return Err(Error::Cache("checksum mismatch".into()));
    }
    Ok(serde_json::from_slice(payload)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{assemble, diagonalize};
    use crate::potentials::{sample, CosineTerm, PotentialKind, PotentialSpec};

    fn mathieu() -> SpectralData {
        let spec = PotentialSpec::new(1, PotentialKind::CosineSum { terms: vec![CosineTerm { amplitude: 2.0, k: vec![1] }] });
        let v = sample(&spec, 32).unwrap().with_fourier(8).unwrap();
        diagonalize(&assemble(1, 4, &v).unwrap()).unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path()).unwrap();
        let s = mathieu();
        let key = CacheKey::of(&s);
        assert!(cache.lookup(&key).is_none());
        cache.store(&s).unwrap();
        let back = cache.lookup(&key).unwrap();
        assert_eq!(back, s);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back.eigenvalues_sq), bits(&s.eigenvalues_sq));
    }

    #[test]
    fn changed_hash_misses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path()).unwrap();
        let s = mathieu();
        cache.store(&s).unwrap();
        let mut key = CacheKey::of(&s);
        key.spec_hash = "0000000000000000".into();
        assert!(cache.lookup(&key).is_none());
    }

    #[test]
    fn corrupt_entry_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path()).unwrap();
        let s = mathieu();
        let path = cache.store(&s).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 2;
        bytes[last] ^= 0x55;
        fs::write(&path, bytes).unwrap();
        assert!(cache.lookup(&CacheKey::of(&s)).is_none());
        fs::write(&path, b"junk").unwrap();
        assert!(cache.lookup(&CacheKey::of(&s)).is_none());
    }
}
