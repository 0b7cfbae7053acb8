//! Classical arithmetic functions, pointwise and in bulk.

use crate::error::{Error, Result};

use super::primes::{isqrt, sieve_primes, small_primes};

/// Prime factorisation by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut k = 0;
            while n % d == 0 {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn positive(n: u64, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::arg(format!("{what} is undefined at 0")));
    }
    Ok(())
}

/// `log p` when `n = p^k`, else 0.
pub fn von_mangoldt(n: u64) -> Result<f64> {
    positive(n, "von Mangoldt function")?;
    let f = factorize(n);
    Ok(match f.as_slice() {
        [(p, _)] => (*p as f64).ln(),
        _ => 0.0,
    })
}

pub fn moebius(n: u64) -> Result<i8> {
    positive(n, "Moebius function")?;
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        return Ok(0);
    }
    Ok(if f.len() % 2 == 0 { 1 } else { -1 })
}

pub fn divisor_count(n: u64) -> Result<u64> {
    positive(n, "divisor count")?;
    Ok(factorize(n).iter().map(|&(_, k)| k as u64 + 1).product())
}

/// All divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, k) in factorize(n) {
        let base = ds.clone();
        let mut pk = 1;
        for _ in 0..k {
            pk *= p;
            ds.extend(base.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

/// Moebius values for `0..=n_max` (index 0 holds 0).
pub fn moebius_table(n_max: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n_max + 1];
    if n_max == 0 {
        mu[0] = 0;
        return mu;
    }
    mu[0] = 0;
    for p in small_primes(n_max as u64) {
        let p = p as usize;
        for m in (p..=n_max).step_by(p) {
            mu[m] = -mu[m];
        }
        if let Some(pp) = p.checked_mul(p) {
            for m in (pp..=n_max).step_by(pp) {
                mu[m] = 0;
            }
        }
    }
    mu
}

/// Von Mangoldt values for `0..=n_max` (index 0 holds 0).
pub fn von_mangoldt_table(n_max: usize) -> Vec<f64> {
    let mut lam = vec![0.0; n_max + 1];
    for p in small_primes(n_max as u64) {
        let lp = (p as f64).ln();
        let mut pk = p;
        while pk as usize <= n_max {
            lam[pk as usize] = lp;
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
        }
    }
    lam
}

/// The prime powers of `[lo, hi]` with their weights `log p`, ascending.
///
/// Primes come from a segmented sieve over the range; higher powers only
/// involve primes up to `sqrt(hi)`.
pub fn von_mangoldt_range(lo: u64, hi: u64) -> Result<Vec<(u64, f64)>> {
    let lo = lo.max(1);
    if hi < lo {
        return Ok(Vec::new());
    }
    let table = sieve_primes(lo, hi)?;
    let mut out: Vec<(u64, f64)> = table.iter().map(|p| (p, (p as f64).ln())).collect();
    for p in small_primes(isqrt(hi)) {
        let lp = (p as f64).ln();
        let mut pk = p * p;
        while pk <= hi {
            if pk >= lo {
                out.push((pk, lp));
            }
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
        }
    }
    out.sort_unstable_by_key(|&(n, _)| n);
    Ok(out)
}

/// Chebyshev's `psi(x) = sum_{n <= x} Lambda(n)`.
pub fn chebyshev_psi(x: u64) -> Result<f64> {
    Ok(von_mangoldt_range(1, x)?.iter().map(|&(_, l)| l).sum())
}
