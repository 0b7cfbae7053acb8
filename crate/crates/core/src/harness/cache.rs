use std::fs;
use std::path::{Path, PathBuf};

use crate::arith::{sieve_primes, PrimeTable};
use crate::error::Result;
use crate::seed::substream;

/// Environment variable naming the prime-table cache directory.
pub const CACHE_ENV: &str = "PLA_CACHE_DIR";

const VALIDATION_WINDOW: u64 = 4096;

/// On-disk store of prime tables starting at 1.
///
/// Files are named `primes-1-<hi>.bin`. A lookup accepts any stored table
/// reaching at least as far as requested, re-sieves one random window to
/// validate it and falls back to sieving (and rewriting) on any problem.
#[derive(Clone, Debug)]
pub struct PrimeCache {
    dir: Option<PathBuf>,
}

impl PrimeCache {
    pub fn disabled() -> Self {
        PrimeCache { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        PrimeCache { dir: Some(dir.into()) }
    }

    /// Uses `PLA_CACHE_DIR` when it is set and non-empty.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::at(PathBuf::from(d)),
            _ => Self::disabled(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn file_for(dir: &Path, hi: u64) -> PathBuf {
        dir.join(format!("primes-1-{hi}.bin"))
    }

    fn candidates(dir: &Path, need: u64) -> Vec<(u64, PathBuf)> {
        let Ok(entries) = fs::read_dir(dir) else {
            return Vec::new();
        };
        let mut found: Vec<(u64, PathBuf)> = entries
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let hi = name.strip_prefix("primes-1-")?.strip_suffix(".bin")?.parse().ok()?;
                (hi >= need).then(|| (hi, e.path()))
            })
            .collect();
        found.sort();
        found
    }

    fn try_load(path: &Path, need: u64) -> Option<PrimeTable> {
        let bytes = fs::read(path).ok()?;
        let table = PrimeTable::decode(&bytes).ok()?;
        if table.lo() != 1 || table.hi() < need {
            return None;
        }
        let mut rng = substream(table.hi(), "cache-validation", 0);
        table.validate_sample(&mut rng, VALIDATION_WINDOW).ok()?;
        Some(table)
    }

    /// A table covering `[1, hi]`.
    pub fn primes_up_to(&self, hi: u64) -> Result<PrimeTable> {
        let hi = hi.max(2);
        let Some(dir) = &self.dir else {
            return sieve_primes(1, hi);
        };
        for (_, path) in Self::candidates(dir, hi) {
            if let Some(t) = Self::try_load(&path, hi) {
                return Ok(t);
            }
        }
        let table = sieve_primes(1, hi)?;
        fs::create_dir_all(dir)?;
        let target = Self::file_for(dir, hi);
        let tmp = target.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, table.encode())?;
        fs::rename(&tmp, &target)?;
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_cache_sieves() {
        let t = PrimeCache::disabled().primes_up_to(100).unwrap();
        assert_eq!(t.count(), 25);
    }

    #[test]
    fn writes_then_reuses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = PrimeCache::at(dir.path());
        let t = cache.primes_up_to(10_000).unwrap();
        let path = dir.path().join("primes-1-10000.bin");
        assert!(path.exists());
        let again = cache.primes_up_to(5_000).unwrap();
        assert_eq!(again.hi(), 10_000);
        assert_eq!(again.count(), t.count());
    }

    #[test]
    fn corrupt_file_is_replaced() {
        let dir = tempfile::tempdir().unwrap();
        let cache = PrimeCache::at(dir.path());
        let path = dir.path().join("primes-1-1000.bin");
        let mut bytes = sieve_primes(1, 1000).unwrap().encode();
        // 2 and 3 turned off, 4 turned on
        bytes[24] ^= 0b1110;
        fs::write(&path, &bytes).unwrap();
        let t = cache.primes_up_to(1000).unwrap();
        assert!(t.is_prime(2) && !t.is_prime(4));
        assert_eq!(fs::read(&path).unwrap(), t.encode());
        fs::write(&path, b"garbage").unwrap();
        assert_eq!(cache.primes_up_to(1000).unwrap().count(), 168);
    }
}
