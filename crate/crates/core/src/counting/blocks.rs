use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::{sieve_primes, von_mangoldt_range, FixedReal, Phase, PrimeTable};
use crate::error::{Error, Result};
use crate::expsum::{slope_phase, Window};
use crate::realfield::QuadraticIrrational;

/// Parameters of one block `P <= p < mu P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub p: u64,
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    /// `(a + b) / (2a)`
    pub mu: f64,
    /// `(mu P)^(-1/5 + eps/2)`
    pub eta: f64,
    /// `c eta / 2`
    pub delta: f64,
    /// `(mu P)^(-6/5 + eps/2) min(1/2, 1/c)`
    pub nu: f64,
}

impl BlockParams {
    pub fn new(p: u64, a: f64, b: f64, eps: f64, c: f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::arg("block start P must be at least 1"));
        }
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(Error::arg(format!("need 0 < a < b, got a={a}, b={b}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::arg(format!("eps must be positive, got {eps}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::arg(format!("slope must be positive, got {c}")));
        }
        let mu = (a + b) / (2.0 * a);
        let mp = mu * p as f64;
        let eta = mp.powf(-0.2 + eps / 2.0);
        Ok(BlockParams {
            p,
            a,
            b,
            eps,
            mu,
            eta,
            delta: c * eta / 2.0,
            nu: mp.powf(-1.2 + eps / 2.0) * (0.5f64).min(1.0 / c),
        })
    }

    /// `P a mu <= n <= b P`, the range of `r`.
    pub fn window(&self) -> Window {
        Window {
            p: self.p,
            a: self.a,
            b: self.b,
            mu: self.mu,
        }
    }

    /// `delta (b - a mu) P`
    pub fn t_main_term(&self) -> f64 {
        self.delta * (self.b - self.a * self.mu) * self.p as f64
    }

    /// Largest integer below `mu P`, the last admissible `p`.
    pub fn p_last(&self) -> u64 {
        let top = self.mu * self.p as f64;
        let c = top.ceil();
        (c as u64).saturating_sub(1)
    }
}

/// `delta` split as an integer part and a 128-bit fractional phase.
#[derive(Clone, Copy, Debug)]
struct WindowWidth {
    whole: u64,
    frac: Phase,
}

impl WindowWidth {
    fn new(delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::arg(format!("window width must be nonnegative, got {delta}")));
        }
        let fx = FixedReal::from_f64(delta, 128)?;
        Ok(WindowWidth {
            whole: fx.floor().to_u64().expect("finite width"),
            frac: fx.phase(),
        })
    }

    /// Number of integers in `[x, x + delta)` where `frac(x) = phi`,
    /// i.e. `[-x] - [-(x + delta)]`.
    fn count_from(&self, phi: Phase) -> u64 {
        let extra = if phi == Phase::ZERO {
            self.frac != Phase::ZERO
        } else {
            let (sum, wrapped) = phi.0.overflowing_add(self.frac.0);
            wrapped && sum != 0
        };
        self.whole + extra as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TCount {
    pub value: f64,
    pub main_term: f64,
    pub ratio: f64,
}

/// `T(P) = sum_{P a mu <= n <= b P} ([-cn] - [-(cn + delta)]) Lambda(n)`.
pub fn count_t_p(params: &BlockParams, c: &QuadraticIrrational) -> Result<TCount> {
    let w = params.window();
    let width = WindowWidth::new(params.delta)?;
    let theta = slope_phase(c);
    let mut value = 0.0;
    if !w.is_empty() {
        for (n, lam) in von_mangoldt_range(w.lo(), w.hi())? {
            value += width.count_from(theta.mul_u64(n)) as f64 * lam;
        }
    }
    let main_term = params.t_main_term();
    Ok(TCount {
        value,
        main_term,
        ratio: if main_term > 0.0 { value / main_term } else { 0.0 },
    })
}

fn primes_for(params: &BlockParams, table: Option<&PrimeTable>) -> Result<Vec<u64>> {
    let w = params.window();
    if w.is_empty() {
        return Ok(Vec::new());
    }
    match table {
        Some(t) if t.lo() <= w.lo() && t.hi() >= w.hi() => Ok(t.primes_in(w.lo(), w.hi()).collect()),
        _ => Ok(sieve_primes(w.lo(), w.hi())?.iter().collect()),
    }
}

/// `S(P) = sum_{P a mu <= r <= b P, r prime} ([-cr] - [-(cr + delta)])`.
pub fn count_s_p(params: &BlockParams, c: &QuadraticIrrational) -> Result<u64> {
    count_s_p_with(params, c, None)
}

pub fn count_s_p_with(params: &BlockParams, c: &QuadraticIrrational, table: Option<&PrimeTable>) -> Result<u64> {
    let width = WindowWidth::new(params.delta)?;
    let theta = slope_phase(c);
    Ok(primes_for(params, table)?
        .into_iter()
        .map(|r| width.count_from(theta.mul_u64(r)))
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RCount {
    pub count: u64,
    /// `(mu - 1) P / log P`
    pub asymptote: f64,
}

/// Primes `p` with `P <= p < mu P`.
pub fn count_r_p(params: &BlockParams) -> Result<RCount> {
    count_r_p_with(params, None)
}

pub fn count_r_p_with(params: &BlockParams, table: Option<&PrimeTable>) -> Result<RCount> {
    let last = params.p_last();
    let count = if last < params.p {
        0
    } else {
        match table {
            Some(t) if t.lo() <= params.p && t.hi() >= last => t.count_in(params.p, last),
            _ => sieve_primes(params.p, last)?.count(),
        }
    };
    let pf = params.p as f64;
    let asymptote = if params.p >= 2 {
        (params.mu - 1.0) * pf / pf.ln()
    } else {
        0.0
    };
    Ok(RCount { count, asymptote })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NCount {
    /// Triples `(q, p, r)`.
    pub count: u64,
    pub r_count: u64,
    /// Pairs `(q, r)`, enumerated with explicit fixed-point `q` bounds.
    pub s_count: u64,
}

/// `N(P)`: triples with `q in [cr, cr + delta)`, `P <= p < mu P`,
/// `P a mu <= r <= b P`.
pub fn count_n_p(params: &BlockParams, c: &QuadraticIrrational) -> Result<NCount> {
    count_n_p_with(params, c, None)
}

pub fn count_n_p_with(params: &BlockParams, c: &QuadraticIrrational, table: Option<&PrimeTable>) -> Result<NCount> {
    let r_count = count_r_p_with(params, table)?.count;
    let bits = 192;
    let c_fixed = c.to_fixed(bits);
    let delta = FixedReal::from_f64(params.delta, bits)?;
    let mut s_count = 0u64;
    for r in primes_for(params, table)? {
        let lo = c_fixed.mul_int(r);
        let hi = &lo + &delta;
        // q runs over ceil(cr) ..= ceil(cr + delta) - 1
        let first = lo.ceil();
        let last: num_bigint::BigInt = hi.ceil() - 1;
        if last >= first {
            let span: num_bigint::BigInt = last - first + 1;
            s_count += span.to_u64().expect("small window");
        }
    }
    Ok(NCount {
        count: r_count * s_count,
        r_count,
        s_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{is_prime_trial, von_mangoldt};

    fn sqrt2() -> QuadraticIrrational {
        QuadraticIrrational::sqrt2()
    }

    fn window_oracle(c: &QuadraticIrrational, n: u64, delta: f64) -> u64 {
        let x = c.to_fixed(256).mul_int(n);
        let d = FixedReal::from_f64(delta, 256).unwrap();
        let y = &x + &d;
        // [-x] - [-(x + delta)] with floors of negatives
        let neg_x = (-&x).floor();
        let neg_y = (-&y).floor();
        (neg_x - neg_y).to_u64().unwrap()
    }

    #[test]
    fn params_formulae() {
        let bp = BlockParams::new(1000, 1.0, 2.0, 0.1, 2f64.sqrt()).unwrap();
        assert_eq!(bp.mu, 1.5);
        assert!((bp.eta - 1500f64.powf(-0.15)).abs() < 1e-15);
        assert!((bp.delta - 2f64.sqrt() * bp.eta / 2.0).abs() < 1e-15);
        assert!((bp.nu - 1500f64.powf(-1.15) * 0.5).abs() < 1e-18);
        assert!(BlockParams::new(1000, 2.0, 1.0, 0.1, 1.4).is_err());
        assert!(BlockParams::new(1000, 1.0, 2.0, 0.0, 1.4).is_err());
        assert!(BlockParams::new(0, 1.0, 2.0, 0.1, 1.4).is_err());
    }

    #[test]
    fn window_counts_match_floor_formula() {
        let c = sqrt2();
        for delta in [0.0, 0.3, 0.99, 1.0, 1.5, 2.7] {
            let width = WindowWidth::new(delta).unwrap();
            for n in 1..400u64 {
                let got = width.count_from(slope_phase(&c).mul_u64(n));
                assert_eq!(got, window_oracle(&c, n, delta), "n={n} delta={delta}");
                assert!(got == delta.floor() as u64 || got == delta.ceil() as u64);
            }
        }
        let w = WindowWidth::new(0.25).unwrap();
        assert_eq!(w.count_from(Phase::ZERO), 1);
        assert_eq!(WindowWidth::new(2.0).unwrap().count_from(Phase::ZERO), 2);
    }

    #[test]
    fn zero_width_is_empty() {
        let mut bp = BlockParams::new(5000, 1.0, 2.0, 0.1, 1.4).unwrap();
        bp.delta = 0.0;
        assert_eq!(count_t_p(&bp, &sqrt2()).unwrap().value, 0.0);
        assert_eq!(count_s_p(&bp, &sqrt2()).unwrap(), 0);
        assert_eq!(count_n_p(&bp, &sqrt2()).unwrap().count, 0);
    }

    #[test]
    fn t_matches_direct_loop() {
        let c = sqrt2();
        let bp = BlockParams::new(3000, 1.0, 2.0, 0.1, 2f64.sqrt()).unwrap();
        let w = bp.window();
        let mut direct = 0.0;
        for n in w.lo()..=w.hi() {
            let lam = von_mangoldt(n).unwrap();
            if lam > 0.0 {
                direct += window_oracle(&c, n, bp.delta) as f64 * lam;
            }
        }
        let t = count_t_p(&bp, &c).unwrap();
        assert!((t.value - direct).abs() < 1e-9);
        assert!((t.main_term - bp.delta * 0.5 * 3000.0).abs() < 1e-9);
    }

    #[test]
    fn wide_window_lower_bound() {
        let c = sqrt2();
        let mut bp = BlockParams::new(2000, 1.0, 2.0, 0.1, 2f64.sqrt()).unwrap();
        bp.delta = 2.5;
        let w = bp.window();
        let primes = (w.lo()..=w.hi()).filter(|&n| is_prime_trial(n)).count() as u64;
        let s = count_s_p(&bp, &c).unwrap();
        assert!(s >= 2 * primes && s <= 3 * primes);
    }

    #[test]
    fn r_examples() {
        // a = 1, b = 2 gives mu = 3/2; a = 1, b = 3 gives mu = 2.
        let bp = BlockParams::new(10, 1.0, 2.0, 0.1, 1.4).unwrap();
        assert_eq!(count_r_p(&bp).unwrap().count, 2);
        let bp = BlockParams::new(2, 1.0, 3.0, 0.1, 1.4).unwrap();
        assert_eq!(count_r_p(&bp).unwrap().count, 2);
        let bp = BlockParams::new(1_000_000, 1.0, 2.0, 0.1, 1.4).unwrap();
        let direct = (1_000_000..1_500_000u64).filter(|&n| is_prime_trial(n)).count() as u64;
        assert_eq!(count_r_p(&bp).unwrap().count, direct);
    }

    #[test]
    fn n_is_product_and_matches_triple_loop() {
        let c = sqrt2();
        for p in [100u64, 777, 10_000] {
            let bp = BlockParams::new(p, 1.0, 2.0, 0.1, 2f64.sqrt()).unwrap();
            let n = count_n_p(&bp, &c).unwrap();
            let s = count_s_p(&bp, &c).unwrap();
            assert_eq!(n.s_count, s);
            assert_eq!(n.count, count_r_p(&bp).unwrap().count * s);
        }
        let bp = BlockParams::new(300, 1.0, 2.0, 0.1, 2f64.sqrt()).unwrap();
        let w = bp.window();
        let mut triples = 0u64;
        for p in bp.p..=bp.p_last() {
            if !is_prime_trial(p) {
                continue;
            }
            for r in w.lo()..=w.hi() {
                if is_prime_trial(r) {
                    triples += window_oracle(&c, r, bp.delta);
                }
            }
        }
        assert_eq!(count_n_p(&bp, &c).unwrap().count, triples);
    }

    #[test]
    fn shared_table_gives_same_counts() {
        let c = sqrt2();
        let table = sieve_primes(1, 50_000).unwrap();
        let bp = BlockParams::new(10_000, 1.0, 2.0, 0.1, 2f64.sqrt()).unwrap();
        assert_eq!(count_s_p_with(&bp, &c, Some(&table)).unwrap(), count_s_p(&bp, &c).unwrap());
        assert_eq!(count_r_p_with(&bp, Some(&table)).unwrap(), count_r_p(&bp).unwrap());
    }
}
