use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::FixedReal;
use crate::error::{Error, Result};

use super::QuadraticIrrational;

/// One continued-fraction approximant `a/q` of a quadratic irrational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub index: usize,
    pub a: BigInt,
    pub q: BigInt,
    pub partial_quotient: BigInt,
}

/// Complete quotients `(P + sqrt D) / Q` with `Q | D - P^2`.
#[derive(Clone, Debug)]
pub struct PartialQuotients {
    p: BigInt,
    q: BigInt,
    d: BigInt,
    sqrt_d: BigInt,
}

impl PartialQuotients {
    pub fn new(c: &QuadraticIrrational) -> Self {
        let radicand = c.v() * c.v() * BigInt::from(c.d());
        let (mut p, mut q) = if c.v().is_positive() {
            (c.u().clone(), c.w().clone())
        } else {
            (-c.u(), -c.w())
        };
        let mut d = radicand;
        if !(&d - &p * &p).is_multiple_of(&q) {
            let qa = q.abs();
            p *= &qa;
            d *= &q * &q;
            q *= &qa;
        }
        let sqrt_d = d.sqrt();
        PartialQuotients { p, q, d, sqrt_d }
    }

    fn floor_current(&self) -> BigInt {
        // sqrt D lies strictly between sqrt_d and sqrt_d + 1.
        if self.q.is_positive() {
            (&self.p + &self.sqrt_d).div_floor(&self.q)
        } else {
            let num: BigInt = -&self.p - &self.sqrt_d - 1;
            num.div_floor(&(-&self.q))
        }
    }
}

impl Iterator for PartialQuotients {
    type Item = BigInt;

    fn next(&mut self) -> Option<BigInt> {
        let a = self.floor_current();
        let p_next = &a * &self.q - &self.p;
        let q_next = (&self.d - &p_next * &p_next) / &self.q;
        self.p = p_next;
        self.q = q_next;
        Some(a)
    }
}

/// The first `count` partial quotients `a0, a1, ...`, in exact arithmetic.
pub fn cf_expansion(c: &QuadraticIrrational, count: usize) -> Vec<BigInt> {
    PartialQuotients::new(c).take(count).collect()
}

/// Convergents generated by the standard three-term recurrence.
#[derive(Clone, Debug)]
pub struct Convergents {
    quotients: PartialQuotients,
    index: usize,
    a_prev: BigInt,
    a_prev2: BigInt,
    q_prev: BigInt,
    q_prev2: BigInt,
}

impl Convergents {
    pub fn new(c: &QuadraticIrrational) -> Self {
        Convergents {
            quotients: PartialQuotients::new(c),
            index: 0,
            a_prev: BigInt::one(),
            a_prev2: BigInt::zero(),
            q_prev: BigInt::zero(),
            q_prev2: BigInt::one(),
        }
    }
}

impl Iterator for Convergents {
    type Item = Convergent;

    fn next(&mut self) -> Option<Convergent> {
        let pq = self.quotients.next()?;
        let a = &pq * &self.a_prev + &self.a_prev2;
        let q = &pq * &self.q_prev + &self.q_prev2;
        self.a_prev2 = std::mem::replace(&mut self.a_prev, a.clone());
        self.q_prev2 = std::mem::replace(&mut self.q_prev, q.clone());
        let item = Convergent {
            index: self.index,
            a,
            q,
            partial_quotient: pq,
        };
        self.index += 1;
        Some(item)
    }
}

pub fn convergents(c: &QuadraticIrrational, count: usize) -> Vec<Convergent> {
    Convergents::new(c).take(count).collect()
}

/// `{ q^2 : q a convergent denominator, q^2 <= n_max }`, ascending and
/// without repeats.
pub fn sequence_s(c: &QuadraticIrrational, n_max: u64) -> Vec<u64> {
    let limit = BigInt::from(n_max);
    let mut out: Vec<u64> = Vec::new();
    for conv in Convergents::new(c) {
        let sq = &conv.q * &conv.q;
        if sq > limit {
            break;
        }
        let sq = sq.to_u64().expect("bounded by n_max");
        if out.last() != Some(&sq) {
            out.push(sq);
        }
    }
    out
}

/// The decomposition `c = a/q + beta/N` for `N = q^2` in the test sequence.
#[derive(Clone, Debug)]
pub struct RationalApprox {
    pub a: BigInt,
    pub q: BigInt,
    /// `N (c - a/q)`, exactly as a surd.
    pub beta_exact: QuadraticIrrational,
    pub beta: FixedReal,
}

/// Finds the convergent with denominator `sqrt(N)`. When the denominator
/// repeats (leading partial quotient 1) the later, closer convergent is
/// returned.
pub fn rational_approx_at(c: &QuadraticIrrational, n: u64) -> Result<RationalApprox> {
    let target = BigInt::from(n);
    let mut found: Option<Convergent> = None;
    for conv in Convergents::new(c) {
        let sq = &conv.q * &conv.q;
        if sq > target {
            break;
        }
        if sq == target {
            found = Some(conv);
        }
    }
    let conv = found.ok_or_else(|| {
        Error::arg(format!("{n} is not the square of a convergent denominator of {c}"))
    })?;
    if !c.within_inverse_square(&conv.a, &conv.q) {
        return Err(Error::arg("convergent fails |c - a/q| < 1/q^2"));
    }
    let diff = c.sub_rational(&conv.a, &conv.q)?;
    let beta_exact = diff.mul_rational(&target, &BigInt::one())?;
    let beta = beta_exact.to_fixed(crate::arith::DEFAULT_FRAC_BITS);
    Ok(RationalApprox {
        a: conv.a,
        q: conv.q,
        beta_exact,
        beta,
    })
}

/// Partial quotients of a real known only to fixed-point precision.
///
/// Both ends of the enclosing interval `[m, m+1] / 2^F` are expanded and
/// only the shared prefix is reported; `precision_exhausted` records
/// that the expansion stopped because the ends diverged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicExpansion {
    pub quotients: Vec<BigInt>,
    pub precision_exhausted: bool,
}

fn rational_cf(mut num: BigInt, mut den: BigInt, max: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    while !den.is_zero() && out.len() < max {
        let (a, r) = num.div_mod_floor(&den);
        out.push(a);
        num = std::mem::replace(&mut den, r);
    }
    out
}

pub fn heuristic_cf_expansion(x: &FixedReal, max_terms: usize) -> HeuristicExpansion {
    let den = BigInt::one() << x.frac_bits();
    let lo = rational_cf(x.mantissa().clone(), den.clone(), max_terms + 1);
    let hi = rational_cf(x.mantissa() + 1, den, max_terms + 1);
    let shared: Vec<BigInt> = lo
        .iter()
        .zip(&hi)
        .take_while(|(a, b)| a == b)
        .map(|(a, _)| a.clone())
        .collect();
    // The last shared term of a rational expansion may still differ for
    // the true value; drop it unless the expansions run to max_terms.
    let exhausted = shared.len() <= max_terms;
    let mut quotients = shared;
    if exhausted {
        quotients.pop();
    }
    quotients.truncate(max_terms);
    HeuristicExpansion {
        quotients,
        precision_exhausted: exhausted,
    }
}

fn arctan_inv(n: u64, bits: u32) -> BigInt {
    // sum_k (-1)^k / ((2k+1) n^(2k+1)), in units of 2^-bits
    let one: BigInt = BigInt::one() << bits;
    let n2 = BigInt::from(n * n);
    let mut power = one / BigInt::from(n);
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &n2;
        k += 1;
    }
    sum
}

const GUARD_BITS: u32 = 32;

/// `pi` to `frac_bits` bits (Machin's formula), heuristic-precision input.
pub fn pi_fixed(frac_bits: u32) -> FixedReal {
    let bits = frac_bits + GUARD_BITS;
    let m = arctan_inv(5, bits) * 16 - arctan_inv(239, bits) * 4;
    FixedReal::from_mantissa(m, bits)
        .expect("wide precision")
        .with_frac_bits(frac_bits)
}

/// `e` to `frac_bits` bits, heuristic-precision input.
pub fn e_fixed(frac_bits: u32) -> FixedReal {
    let bits = frac_bits + GUARD_BITS;
    let mut term: BigInt = BigInt::one() << bits;
    let mut sum = BigInt::zero();
    let mut k = 1u64;
    while !term.is_zero() {
        sum += &term;
        term /= BigInt::from(k);
        k += 1;
    }
    FixedReal::from_mantissa(sum, bits)
        .expect("wide precision")
        .with_frac_bits(frac_bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn expansion_examples() {
        let r2 = QuadraticIrrational::sqrt2();
        assert_eq!(cf_expansion(&r2, 5), ints(&[1, 2, 2, 2, 2]));
        assert_eq!(cf_expansion(&QuadraticIrrational::golden(), 6), ints(&[1; 6]));
        let c = QuadraticIrrational::new(2, 1, 2, 1).unwrap();
        assert_eq!(cf_expansion(&c, 4), ints(&[3, 2, 2, 2]));
        let r3 = QuadraticIrrational::sqrt3();
        assert_eq!(cf_expansion(&r3, 5), ints(&[1, 1, 2, 1, 2]));
    }

    #[test]
    fn negative_and_scaled_surds() {
        // (3 - sqrt 7) / 2 = 0.177..., 1/x = 5.645..., ...
        let c = QuadraticIrrational::new(3, -1, 7, 2).unwrap();
        let qs = cf_expansion(&c, 8);
        let x = c.to_f64();
        let mut y = x;
        for a in &qs[..6] {
            assert_eq!(a.to_f64().unwrap(), y.floor());
            y = 1.0 / (y - y.floor());
        }
    }

    #[test]
    fn sqrt2_convergents() {
        let cs = convergents(&QuadraticIrrational::sqrt2(), 5);
        let pairs: Vec<(i64, i64)> = cs
            .iter()
            .map(|c| (c.a.to_i64().unwrap(), c.q.to_i64().unwrap()))
            .collect();
        assert_eq!(pairs, vec![(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]);
        assert_eq!(cs[0].index, 0);
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        let qs: Vec<i64> = convergents(&QuadraticIrrational::golden(), 6)
            .iter()
            .map(|c| c.q.to_i64().unwrap())
            .collect();
        assert_eq!(qs, vec![1, 1, 2, 3, 5, 8]);
    }

    #[test]
    fn sequence_examples() {
        assert_eq!(sequence_s(&QuadraticIrrational::sqrt2(), 200), vec![1, 4, 25, 144]);
        assert_eq!(sequence_s(&QuadraticIrrational::golden(), 70), vec![1, 4, 9, 25, 64]);
        assert_eq!(sequence_s(&QuadraticIrrational::sqrt3(), 1), vec![1]);
    }

    #[test]
    fn approximation_at_members() {
        let r2 = QuadraticIrrational::sqrt2();
        let at25 = rational_approx_at(&r2, 25).unwrap();
        assert_eq!((at25.a.clone(), at25.q.clone()), (BigInt::from(7), BigInt::from(5)));
        let expected = 25.0 * (std::f64::consts::SQRT_2 - 1.4);
        assert!((at25.beta.to_f64() - expected).abs() < 1e-14);
        let at4 = rational_approx_at(&r2, 4).unwrap();
        assert!((at4.beta.to_f64() - 4.0 * (std::f64::consts::SQRT_2 - 1.5)).abs() < 1e-14);
        let at1 = rational_approx_at(&QuadraticIrrational::golden(), 1).unwrap();
        assert_eq!(at1.a, BigInt::from(2));
        assert!(at1.beta.to_f64().abs() <= 1.0);
        assert!(rational_approx_at(&r2, 16).is_err());
        assert!(rational_approx_at(&r2, 26).is_err());
    }

    #[test]
    fn heuristic_expansions() {
        let e = heuristic_cf_expansion(&e_fixed(256), 20);
        assert_eq!(e.quotients, ints(&[2, 1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8, 1, 1, 10, 1, 1, 12, 1, 1]));
        assert!(!e.precision_exhausted);
        let pi = heuristic_cf_expansion(&pi_fixed(128), 5);
        assert_eq!(pi.quotients, ints(&[3, 7, 15, 1, 292]));
        let short = heuristic_cf_expansion(&e_fixed(96), 200);
        assert!(short.precision_exhausted);
        assert!(short.quotients.len() < 200);
        assert_eq!(&short.quotients[..6], &ints(&[2, 1, 2, 1, 1, 4])[..]);
    }
}
