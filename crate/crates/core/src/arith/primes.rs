//! Segmented sieve of Eratosthenes and the on-disk prime-table format.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Magic bytes opening a cached prime table.
pub const CACHE_MAGIC: &[u8; 8] = b"PLAPRIM1";

/// Size of the cache header: magic, `lo`, `hi`.
pub const CACHE_HEADER_LEN: usize = 24;

/// Bits per sieve segment handed to one worker.
const SEGMENT_WORDS: usize = 1 << 13;

/// Prime membership for every integer of `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    lo: u64,
    hi: u64,
    words: Vec<u64>,
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Primes up to `limit` by a plain sieve; used for the base primes.
pub fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Deterministic trial division.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn sieve_segment(words: &mut [u64], seg_lo: u64, seg_len: u64, base: &[u64]) {
    words.iter_mut().for_each(|w| *w = u64::MAX);
    let seg_hi = seg_lo + seg_len - 1;
    for &p in base {
        if p.saturating_mul(p) > seg_hi {
            break;
        }
        let first = (p * p).max(seg_lo.div_ceil(p) * p);
        let mut m = first;
        while m <= seg_hi {
            let i = (m - seg_lo) as usize;
            words[i / 64] &= !(1u64 << (i % 64));
            m += p;
        }
    }
    for n in [0u64, 1] {
        if n >= seg_lo && n <= seg_hi {
            let i = (n - seg_lo) as usize;
            words[i / 64] &= !(1u64 << (i % 64));
        }
    }
    let used = seg_len as usize;
    let cap = words.len() * 64;
    for i in used..cap {
        words[i / 64] &= !(1u64 << (i % 64));
    }
}

/// Exact prime membership on `[lo, hi]`, sieved segment by segment.
pub fn sieve_primes(lo: u64, hi: u64) -> Result<PrimeTable> {
    if lo == 0 {
        return Err(Error::arg("sieve range must start at 1 or above"));
    }
    if hi < lo {
        return Err(Error::arg(format!("empty sieve range [{lo}, {hi}]")));
    }
    let len = hi - lo + 1;
    let n_words = usize::try_from(len.div_ceil(64))
        .map_err(|_| Error::arg("sieve range too large for this platform"))?;
    let base = small_primes(isqrt(hi));
    let mut words = vec![0u64; n_words];
    words
        .par_chunks_mut(SEGMENT_WORDS)
        .enumerate()
        .for_each(|(k, chunk)| {
            let offset = (k * SEGMENT_WORDS * 64) as u64;
            let seg_lo = lo + offset;
            let seg_len = (len - offset).min(chunk.len() as u64 * 64);
            sieve_segment(chunk, seg_lo, seg_len, &base);
        });
    Ok(PrimeTable { lo, hi, words })
}

impl PrimeTable {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: u64) -> bool {
        n >= self.lo && n <= self.hi
    }

    /// Membership test; panics outside `[lo, hi]`.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(self.contains(n), "{n} outside table [{}, {}]", self.lo, self.hi);
        let i = (n - self.lo) as usize;
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let lo = self.lo;
        self.words.iter().enumerate().flat_map(move |(k, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(lo + k as u64 * 64 + t)
            })
        })
    }

    /// Primes in `[a, b]` clipped to the table.
    pub fn primes_in(&self, a: u64, b: u64) -> impl Iterator<Item = u64> + '_ {
        let a = a.max(self.lo);
        self.iter().skip_while(move |&p| p < a).take_while(move |&p| p <= b)
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// Number of primes in `[a, b]`, which must lie inside the table.
    pub fn count_in(&self, a: u64, b: u64) -> u64 {
        if b < a {
            return 0;
        }
        (a..=b).filter(|&n| self.is_prime(n)).count() as u64
    }

    /// Raw little-endian cache image: 24-byte header then the bit-vector,
    /// bit `i` of byte `j` standing for `lo + 8j + i`.
    pub fn encode(&self) -> Vec<u8> {
        let n_bytes = self.len().div_ceil(8) as usize;
        let mut out = Vec::with_capacity(CACHE_HEADER_LEN + n_bytes);
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&self.lo.to_le_bytes());
        out.extend_from_slice(&self.hi.to_le_bytes());
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(CACHE_HEADER_LEN + n_bytes);
        out
    }

    /// Parses a cache image. Structural checks only; see
    /// [`PrimeTable::validate_sample`] for the content check.
    pub fn decode(bytes: &[u8]) -> Result<PrimeTable> {
        if bytes.len() < CACHE_HEADER_LEN {
            return Err(Error::Cache(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if &bytes[..8] != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let lo = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        let hi = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
        if lo == 0 || hi < lo {
            return Err(Error::Cache(format!("invalid range [{lo}, {hi}]")));
        }
        let len = hi - lo + 1;
        let body = &bytes[CACHE_HEADER_LEN..];
        let expected = len.div_ceil(8);
        if body.len() as u64 != expected {
            return Err(Error::Cache(format!(
                "body has {} bytes, range needs {expected}",
                body.len()
            )));
        }
        let mut words = vec![0u64; len.div_ceil(64) as usize];
        for (j, &byte) in body.iter().enumerate() {
            words[j / 8] |= (byte as u64) << (8 * (j % 8));
        }
        let tail = (len % 64) as u32;
        if tail != 0 {
            let last = *words.last().expect("non-empty");
            if last >> tail != 0 {
                return Err(Error::Cache("padding bits are set".into()));
            }
        }
        Ok(PrimeTable { lo, hi, words })
    }

    /// Re-sieves one randomly placed window of at most `window` integers
    /// and compares it with the stored bits.
    pub fn validate_sample<R: Rng + ?Sized>(&self, rng: &mut R, window: u64) -> Result<()> {
        let w = window.max(1).min(self.len());
        let start = self.lo + rng.random_range(0..=self.len() - w);
        let fresh = sieve_primes(start, start + w - 1)?;
        for n in start..start + w {
            if fresh.is_prime(n) != self.is_prime(n) {
                return Err(Error::Cache(format!("membership of {n} disagrees with a fresh sieve")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_primes() {
        let t = sieve_primes(1, 10).unwrap();
        assert_eq!(t.iter().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
    }

    #[test]
    fn single_prime_range() {
        let t = sieve_primes(90, 100).unwrap();
        assert_eq!(t.iter().collect::<Vec<_>>(), vec![97]);
        assert_eq!(t.count(), 1);
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(sieve_primes(10, 9).is_err());
        assert!(sieve_primes(0, 9).is_err());
    }

    #[test]
    fn matches_trial_division_near_million() {
        let lo = 1_000_000;
        let hi = 1_001_000;
        let t = sieve_primes(lo, hi).unwrap();
        for n in lo..=hi {
            assert_eq!(t.is_prime(n), is_prime_trial(n), "n = {n}");
        }
    }

    #[test]
    fn multi_segment_range() {
        // Spans several segments so chunk offsets are exercised.
        let lo = 3;
        let hi = 3 + 3 * SEGMENT_WORDS as u64 * 64 + 17;
        let t = sieve_primes(lo, hi).unwrap();
        let reference = small_primes(hi);
        let got: Vec<u64> = t.iter().collect();
        let want: Vec<u64> = reference.into_iter().filter(|&p| p >= lo).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn cache_round_trip_and_validation() {
        let t = sieve_primes(1000, 5000).unwrap();
        let bytes = t.encode();
        assert_eq!(&bytes[..8], CACHE_MAGIC);
        assert_eq!(bytes.len(), CACHE_HEADER_LEN + (4001usize).div_ceil(8));
        let back = PrimeTable::decode(&bytes).unwrap();
        assert_eq!(back, t);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        back.validate_sample(&mut rng, 512).unwrap();
    }

    #[test]
    fn cache_rejects_tampering() {
        let t = sieve_primes(1, 1000).unwrap();
        let mut bytes = t.encode();
        assert!(PrimeTable::decode(&bytes[..20]).is_err());
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(PrimeTable::decode(&bad_magic).is_err());
        let mut short = bytes.clone();
        short.pop();
        assert!(PrimeTable::decode(&short).is_err());
        // Flip the bit for 4: structurally fine, caught by re-sieving.
        bytes[CACHE_HEADER_LEN] ^= 1 << 3;
        let forged = PrimeTable::decode(&bytes).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(forged.validate_sample(&mut rng, 1000).is_err());
    }
}
