use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::isqrt;
use crate::error::{Error, Result};
use crate::realfield::QuadraticIrrational;

/// `d2 c m2 / d3` as an exact surd.
fn scaled(m2: i64, d2: u64, d3: u64, c: &QuadraticIrrational) -> Result<QuadraticIrrational> {
    if m2 == 0 {
        return Err(Error::arg("m2 must be nonzero"));
    }
    if d2 == 0 || d3 == 0 {
        return Err(Error::arg("d2 and d3 must be positive"));
    }
    c.mul_rational(&(BigInt::from(d2) * m2), &BigInt::from(d3))
}

/// `min_m |m/d2 + c m2/d3| = ||d2 c m2 / d3|| / d2`.
pub fn resonance_r(m2: i64, d2: u64, d3: u64, c: &QuadraticIrrational) -> Result<f64> {
    let x = scaled(m2, d2, d3, c)?;
    let f = x.add_int(&-x.floor()).to_f64();
    Ok(f.min(1.0 - f) / d2 as f64)
}

/// Exact test of `R(m2) >= 1 / (2 d2 d3 sqrt(N))` for a perfect square `N`.
pub fn resonance_bound_holds(m2: i64, d2: u64, d3: u64, c: &QuadraticIrrational, n: u64) -> Result<bool> {
    let q = isqrt(n);
    if q * q != n {
        return Err(Error::arg(format!("{n} is not a perfect square")));
    }
    let x = scaled(m2, d2, d3, c)?;
    // ||x|| / d2 >= 1/(2 d2 d3 q)  iff  ||x|| >= 1/(2 d3 q)
    Ok(x.dist_at_least(&BigInt::one(), &BigInt::from(2 * d3 * q)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSweep {
    pub n: u64,
    pub l_max: i64,
    pub checked: u64,
    pub violations: u64,
    /// Smallest `R(m2) / (1/(2 d2 d3 sqrt N))` seen.
    pub min_ratio: f64,
    /// `(m2, d2, d3)` attaining the minimum.
    pub worst: Option<(i64, u64, u64)>,
}

impl ResonanceSweep {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks the resonance bound for every `0 < |m2| <= l_max` and every
/// `(d2, d3)` among the given cells.
pub fn resonance_sweep(
    c: &QuadraticIrrational,
    n: u64,
    l_max: i64,
    cells: &[(u64, u64, u64)],
) -> Result<ResonanceSweep> {
    let mut pairs: Vec<(u64, u64)> = cells.iter().map(|&(_, d2, d3)| (d2, d3)).collect();
    pairs.sort_unstable();
    pairs.dedup();
    let root = (n as f64).sqrt();
    let mut out = ResonanceSweep {
        n,
        l_max,
        checked: 0,
        violations: 0,
        min_ratio: f64::INFINITY,
        worst: None,
    };
    for &(d2, d3) in &pairs {
        for m2 in (-l_max..=l_max).filter(|&m| m != 0) {
            out.checked += 1;
            if !resonance_bound_holds(m2, d2, d3, c, n)? {
                out.violations += 1;
            }
            let ratio = resonance_r(m2, d2, d3, c)? * 2.0 * (d2 * d3) as f64 * root;
            if ratio < out.min_ratio {
                out.min_ratio = ratio;
                out.worst = Some((m2, d2, d3));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_r(m2: i64, d2: u64, d3: u64, c: &QuadraticIrrational) -> f64 {
        let t = c.to_f64() * m2 as f64 / d3 as f64;
        let reach = (d2 as f64 * (t.abs() + 1.0)).ceil() as i64;
        (-reach..=reach)
            .map(|m| (m as f64 / d2 as f64 + t).abs())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn examples() {
        let s2 = QuadraticIrrational::sqrt2();
        let r = resonance_r(1, 2, 1, &s2).unwrap();
        assert!((r - 0.5 * (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-15);
        let r = resonance_r(3, 1, 1, &s2).unwrap();
        let t = 3.0 * 2f64.sqrt();
        assert!((r - (t - t.round()).abs()).abs() < 1e-15);
        assert!(resonance_r(0, 1, 1, &s2).is_err());
    }

    #[test]
    fn closed_form_equals_brute_force() {
        let g = QuadraticIrrational::golden();
        for m2 in [-7i64, -1, 1, 2, 13] {
            for d2 in 1..=4 {
                for d3 in 1..=4 {
                    let a = resonance_r(m2, d2, d3, &g).unwrap();
                    let b = brute_force_r(m2, d2, d3, &g);
                    assert!((a - b).abs() < 1e-12, "{m2} {d2} {d3}");
                }
            }
        }
    }

    #[test]
    fn bound_holds_in_the_regime_of_the_argument() {
        // L well below sqrt(N) / (2 c d2 d3).
        let s2 = QuadraticIrrational::sqrt2();
        let sweep = resonance_sweep(&s2, 169 * 169, 20, &[(1, 1, 1), (1, 2, 1), (1, 1, 2)]).unwrap();
        assert!(sweep.holds(), "{sweep:?}");
        assert!(sweep.min_ratio >= 1.0);
        assert!(resonance_bound_holds(1, 1, 1, &s2, 26).is_err());
    }

    #[test]
    fn exact_test_agrees_with_float() {
        let g = QuadraticIrrational::golden();
        let n = 144 * 144;
        for m2 in 1..200 {
            let exact = resonance_bound_holds(m2, 2, 1, &g, n).unwrap();
            let r = resonance_r(m2, 2, 1, &g).unwrap();
            assert_eq!(exact, r >= 1.0 / (4.0 * 144.0), "m2={m2}");
        }
    }
}
