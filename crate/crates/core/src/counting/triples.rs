use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::arith::{sieve_primes, FixedReal, PrimeTable, DEFAULT_FRAC_BITS, MIN_FRAC_BITS};
use crate::error::{Error, Result};
use crate::realfield::QuadraticIrrational;

/// A solution `(p, q, r)` of the two simultaneous approximations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxTriple {
    pub p: u64,
    pub q: u64,
    pub r: u64,
    /// `p alpha - r`
    pub slack1: f64,
    /// `p c alpha - q`
    pub slack2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FCount {
    pub count: u64,
    /// Filled only when triples were requested.
    pub triples: Vec<ApproxTriple>,
}

/// `p^(-1/5 + eps)`, the common width of both windows.
///
/// The double result is converted to fixed point exactly, so every caller
/// compares against the same real number.
pub fn window_width(p: u64, eps: f64) -> f64 {
    (p as f64).powf(eps - 0.2)
}

/// Counts `F_N(alpha)` for many `alpha` with a fixed slope, threshold
/// exponent and range `p < N`.
#[derive(Clone, Debug)]
pub struct TripleCounter {
    c: QuadraticIrrational,
    c_fixed: FixedReal,
    eps: f64,
    n: u64,
    frac_bits: u32,
    primes: Vec<u64>,
    widths: Vec<FixedReal>,
    table: PrimeTable,
}

impl TripleCounter {
    /// Sieves the primes needed for `alpha <= alpha_max`.
    pub fn new(c: &QuadraticIrrational, eps: f64, n: u64, alpha_max: f64, frac_bits: u32) -> Result<Self> {
        if !(alpha_max > 0.0 && alpha_max.is_finite()) {
            return Err(Error::arg(format!("alpha bound must be positive, got {alpha_max}")));
        }
        let hi = (n as f64 * alpha_max).ceil() as u64 + 2;
        let table = sieve_primes(1, hi.max(n).max(2))?;
        Self::with_table(c, eps, n, table, frac_bits)
    }

    /// Uses a prime table starting at 1; `alpha` may go up to roughly
    /// `table.hi() / N`.
    pub fn with_table(
        c: &QuadraticIrrational,
        eps: f64,
        n: u64,
        table: PrimeTable,
        frac_bits: u32,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::arg(format!("eps must be positive, got {eps}")));
        }
        if n == 0 {
            return Err(Error::arg("N must be at least 1"));
        }
        if frac_bits < MIN_FRAC_BITS {
            return Err(Error::arg(format!("precision must be at least {MIN_FRAC_BITS} bits")));
        }
        if table.lo() != 1 || table.hi() < n.saturating_sub(1) {
            return Err(Error::arg("prime table must cover [1, N)"));
        }
        let primes: Vec<u64> = table.primes_in(2, n.saturating_sub(1)).collect();
        let widths = primes
            .iter()
            .map(|&p| FixedReal::from_f64(window_width(p, eps), frac_bits))
            .collect::<Result<Vec<_>>>()?;
        Ok(TripleCounter {
            c_fixed: c.to_fixed(frac_bits + 64),
            c: c.clone(),
            eps,
            n,
            frac_bits,
            primes,
            widths,
            table,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn slope(&self) -> &QuadraticIrrational {
        &self.c
    }

    pub fn table(&self) -> &PrimeTable {
        &self.table
    }

    /// The counting theorem assumes `c > 1`; smaller slopes are accepted
    /// but flagged.
    pub fn slope_within_hypothesis(&self) -> bool {
        self.c.cmp_rational(&BigInt::one(), &BigInt::one()) == std::cmp::Ordering::Greater
    }

    pub fn count(&self, alpha: &FixedReal) -> Result<u64> {
        Ok(self.run(alpha, false)?.count)
    }

    pub fn count_with_triples(&self, alpha: &FixedReal) -> Result<FCount> {
        self.run(alpha, true)
    }

    fn run(&self, alpha: &FixedReal, keep: bool) -> Result<FCount> {
        if alpha.is_negative() || alpha.is_zero() {
            return Err(Error::arg("alpha must be positive"));
        }
        let alpha = alpha.with_frac_bits(alpha.frac_bits().max(self.frac_bits));
        let c_alpha = self.c_fixed.mul(&alpha);
        let mut count = 0u64;
        let mut triples = Vec::new();
        for (&p, width) in self.primes.iter().zip(&self.widths) {
            let x = alpha.mul_int(p);
            let rs = open_window(&x, width);
            let mut good_r: Vec<u64> = Vec::new();
            for r in rs.0..=rs.1 {
                if r < 2 {
                    continue;
                }
                if r > self.table.hi() {
                    return Err(Error::arg(format!(
                        "prime table ends at {} but r = {r} is needed",
                        self.table.hi()
                    )));
                }
                if self.table.is_prime(r) {
                    good_r.push(r);
                }
            }
            if good_r.is_empty() {
                continue;
            }
            let y = c_alpha.mul_int(p);
            let (q_lo, q_hi) = open_window(&y, width);
            let q_lo = q_lo.max(1);
            if q_lo > q_hi {
                continue;
            }
            count += good_r.len() as u64 * (q_hi - q_lo + 1);
            if keep {
                for &r in &good_r {
                    let slack1 = (&x - &FixedReal::from_int(r, x.frac_bits())).to_f64();
                    for q in q_lo..=q_hi {
                        let slack2 = (&y - &FixedReal::from_int(q, y.frac_bits())).to_f64();
                        triples.push(ApproxTriple {
                            p,
                            q,
                            r,
                            slack1,
                            slack2,
                        });
                    }
                }
            }
        }
        Ok(FCount { count, triples })
    }
}

/// Integers `m` with `x - width < m < x`, as an inclusive range (empty when
/// `lo > hi`). Negative candidates are clamped to 0.
fn open_window(x: &FixedReal, width: &FixedReal) -> (u64, u64) {
    let hi = x.ceil() - 1;
    let lo = (x - width).floor() + 1;
    let to_u = |v: BigInt| v.to_i128().map_or(u64::MAX, |v| v.clamp(0, u64::MAX as i128) as u64);
    (to_u(lo), to_u(hi))
}

/// `F_N(alpha)` with the triples, sieving as needed.
pub fn count_f_n(alpha: &FixedReal, c: &QuadraticIrrational, eps: f64, n: u64) -> Result<FCount> {
    let bits = alpha.frac_bits().max(DEFAULT_FRAC_BITS);
    let counter = TripleCounter::new(c, eps, n, alpha.to_f64().max(1e-9), bits)?;
    counter.count_with_triples(alpha)
}

/// `G_N(A, B) = A^2 / (4B) N^(3/5 + eps) (log N)^-2`.
pub fn g_n(big_a: f64, big_b: f64, eps: f64, n: f64) -> Result<f64> {
    if !(big_a > 0.0 && big_a < big_b) {
        return Err(Error::arg(format!("need 0 < A < B, got A={big_a}, B={big_b}")));
    }
    if !(n >= 3.0) {
        return Err(Error::arg(format!("need N >= 3, got {n}")));
    }
    let ln = n.ln();
    Ok(big_a * big_a / (4.0 * big_b) * n.powf(0.6 + eps) / (ln * ln))
}
