use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{sieve_primes, FixedReal, PrimeTable, MIN_FRAC_BITS};
use crate::error::{Error, Result};
use crate::realfield::QuadraticIrrational;
use crate::seed::substream;

use super::triples::{window_width, TripleCounter};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpMeasure {
    pub measure: f64,
    /// `(r, q)` pairs whose intervals meet inside `[a, b]`.
    pub pairs: u64,
}

fn check_measure_args(a: f64, b: f64, c: f64, eta: f64) -> Result<()> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::arg(format!("need 0 < a < b, got a={a}, b={b}")));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::arg(format!("need 0 < eta < 1, got {eta}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::arg(format!("slope must be positive, got {c}")));
    }
    Ok(())
}

/// Lebesgue measure of the union over primes `r` and `q >= 1` of
/// `[r/p, (r + eta)/p) ∩ [q/(cp), (q + eta)/(cp)) ∩ [a, b]`.
///
/// For `eta < 1` both families of intervals are disjoint, so the union
/// is a disjoint union of the pairwise intersections.
pub fn measure_b_p(p: u64, a: f64, b: f64, c: f64, eta: f64) -> Result<BpMeasure> {
    check_measure_args(a, b, c, eta)?;
    let lo = ((a * p as f64 - eta).floor().max(1.0)) as u64;
    let hi = (b * p as f64).floor() as u64;
    let table = sieve_primes(lo.max(1), hi.max(lo).max(1))?;
    Ok(measure_with(p, a, b, c, eta, &table))
}

fn measure_with(p: u64, a: f64, b: f64, c: f64, eta: f64, table: &PrimeTable) -> BpMeasure {
    // Work in units of 1/p.
    let pf = p as f64;
    let (left, right) = (a * pf, b * pf);
    let r_lo = (left - eta).floor().max(2.0) as u64;
    let r_hi = right.floor() as u64;
    let mut total = 0.0;
    let mut pairs = 0;
    if r_lo > r_hi {
        return BpMeasure { measure: 0.0, pairs };
    }
    for r in table.primes_in(r_lo, r_hi) {
        let rf = r as f64;
        let (s0, s1) = (rf.max(left), (rf + eta).min(right));
        if s1 <= s0 {
            continue;
        }
        let q_lo = ((c * rf - eta).floor() + 1.0).max(1.0) as u64;
        let q_hi = (c * (rf + eta)).ceil() as u64;
        for q in q_lo..q_hi {
            let qf = q as f64;
            let len = s1.min((qf + eta) / c) - s0.max(qf / c);
            if len > 0.0 {
                total += len;
                pairs += 1;
            }
        }
    }
    BpMeasure {
        measure: total / pf,
        pairs,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralSpec {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub n: u64,
    pub samples: usize,
    pub seed: u64,
    pub frac_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    /// `(b - a)` times the sample mean of `F_N(alpha)`.
    pub estimate: f64,
    pub stderr: f64,
    /// `sum_{p < N} lambda(B_p)` with the same window width as `F_N`.
    pub exact: f64,
    pub samples: usize,
    pub counts: Vec<u64>,
}

impl IntegralEstimate {
    /// `|estimate - exact| / stderr`, infinite when the error vanishes
    /// but the routes differ.
    pub fn z_score(&self) -> f64 {
        let diff = (self.estimate - self.exact).abs();
        if diff == 0.0 {
            0.0
        } else if self.stderr > 0.0 {
            diff / self.stderr
        } else {
            f64::INFINITY
        }
    }
}

/// A uniform `alpha` in `[a, b)` drawn from its own substream.
pub fn sample_alpha(a: f64, b: f64, seed: u64, index: u64, frac_bits: u32) -> Result<FixedReal> {
    let mut rng = substream(seed, "alpha", index);
    let unit = FixedReal::random_unit(&mut rng, frac_bits);
    let start = FixedReal::from_f64(a, frac_bits)?;
    let span = FixedReal::from_f64(b - a, frac_bits)?;
    Ok(&start + &span.mul(&unit))
}

/// Estimates `int_a^b F_N(alpha) d alpha` by Monte Carlo and by summing
/// `lambda(B_p)` over primes `p < N`.
pub fn integral_f_n(c: &QuadraticIrrational, spec: &IntegralSpec) -> Result<IntegralEstimate> {
    integral_f_n_with(c, spec, None)
}

pub fn integral_f_n_with(
    c: &QuadraticIrrational,
    spec: &IntegralSpec,
    table: Option<&PrimeTable>,
) -> Result<IntegralEstimate> {
    let IntegralSpec {
        a,
        b,
        eps,
        n,
        samples,
        seed,
        frac_bits,
    } = *spec;
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::arg(format!("need 0 < a < b, got a={a}, b={b}")));
    }
    if samples < 10 {
        return Err(Error::arg(format!("need at least 10 samples, got {samples}")));
    }
    if frac_bits < MIN_FRAC_BITS {
        return Err(Error::arg(format!("precision must be at least {MIN_FRAC_BITS} bits")));
    }
    let need = (n as f64 * b).ceil() as u64 + 2;
    let owned;
    let table = match table {
        Some(t) if t.lo() == 1 && t.hi() >= need => t,
        _ => {
            owned = sieve_primes(1, need.max(2))?;
            &owned
        }
    };
    let counter = TripleCounter::with_table(c, eps, n, table.clone(), frac_bits)?;
    let counts = (0..samples as u64)
        .into_par_iter()
        .map(|i| counter.count(&sample_alpha(a, b, seed, i, frac_bits)?))
        .collect::<Result<Vec<u64>>>()?;
    let m = samples as f64;
    let mean = counts.iter().map(|&k| k as f64).sum::<f64>() / m;
    let var = counts.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let span = b - a;

    let cf = c.to_f64();
    let primes: Vec<u64> = table.primes_in(2, n.saturating_sub(1)).collect();
    let parts: Vec<f64> = primes
        .par_iter()
        .map(|&p| measure_with(p, a, b, cf, window_width(p, eps), table).measure)
        .collect();
    Ok(IntegralEstimate {
        estimate: span * mean,
        stderr: span * (var / m).sqrt(),
        exact: parts.iter().fold(0.0, |acc, x| acc + x),
        samples,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime_trial;
    use rand::{Rng, SeedableRng};

    #[test]
    fn nested_and_disjoint_pairs() {
        // c = 2 puts q = 2r exactly on r: the q-interval is the first half
        // of the r-interval.
        let m = measure_b_p(97, 1.0, 2.0, 2.0, 0.2).unwrap();
        let primes = (97..=194u64).filter(|&r| is_prime_trial(r)).count() as f64;
        assert!((m.measure - primes * 0.2 / (2.0 * 97.0)).abs() < 1e-12);
        assert!(measure_b_p(97, 2.0, 1.0, 2.0, 0.2).is_err());
        assert!(measure_b_p(97, 1.0, 2.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn measure_bounds() {
        for p in [13u64, 97, 1009] {
            let m = measure_b_p(p, 1.0, 2.0, 2f64.sqrt(), 0.3).unwrap();
            assert!(m.measure <= 1.0);
            assert!(m.measure <= m.pairs as f64 * 0.3 / (2f64.sqrt() * p as f64) + 1e-15);
        }
    }

    #[test]
    fn measure_matches_monte_carlo() {
        let (p, eta, c) = (97u64, 0.2, 2f64.sqrt());
        let m = measure_b_p(p, 1.0, 2.0, c, eta).unwrap().measure;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000_000u64;
        let mut hits = 0u64;
        for _ in 0..n {
            let alpha: f64 = rng.random_range(1.0..2.0);
            let t = p as f64 * alpha;
            let r = t.floor();
            if t - r >= eta || !is_prime_trial(r as u64) {
                continue;
            }
            let u = c * t;
            let q = u.floor();
            if q >= 1.0 && u - q < eta {
                hits += 1;
            }
        }
        let est = hits as f64 / n as f64;
        let sigma = (est * (1.0 - est) / n as f64).sqrt();
        assert!((est - m).abs() <= 3.0 * sigma, "mc {est} exact {m} sigma {sigma}");
    }

    fn spec(n: u64, samples: usize) -> IntegralSpec {
        IntegralSpec {
            a: 1.0,
            b: 2.0,
            eps: 0.1,
            n,
            samples,
            seed: 9,
            frac_bits: 128,
        }
    }

    #[test]
    fn tiny_range_is_zero() {
        let est = integral_f_n(&QuadraticIrrational::sqrt2(), &spec(2, 10)).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert_eq!(est.exact, 0.0);
        assert!(integral_f_n(&QuadraticIrrational::sqrt2(), &spec(2, 9)).is_err());
    }

    #[test]
    fn routes_agree() {
        let est = integral_f_n(&QuadraticIrrational::sqrt2(), &spec(2000, 400)).unwrap();
        assert!(est.exact > 0.0);
        assert!(est.z_score() <= 3.0, "{est:?}");
    }

    #[test]
    fn samples_are_reproducible() {
        let a = sample_alpha(1.0, 2.0, 5, 17, 128).unwrap();
        let b = sample_alpha(1.0, 2.0, 5, 17, 128).unwrap();
        assert_eq!(a, b);
        let f = a.to_f64();
        assert!((1.0..2.0).contains(&f));
    }
}
