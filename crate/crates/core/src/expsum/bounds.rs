use serde::{Deserialize, Serialize};

use crate::arith::Phase;
use crate::error::{Error, Result};
use crate::realfield::QuadraticIrrational;

use super::sums::slope_phase;

/// A measured quantity against the value of the bound formula it is
/// compared with (implied constant taken as 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundDiagnostic {
    pub measured: f64,
    pub bound_formula_value: f64,
    pub ratio: f64,
}

impl BoundDiagnostic {
    pub fn new(measured: f64, bound_formula_value: f64) -> Result<Self> {
        if !(bound_formula_value > 0.0 && bound_formula_value.is_finite()) {
            return Err(Error::arg(format!(
                "bound value must be positive and finite, got {bound_formula_value}"
            )));
        }
        Ok(BoundDiagnostic {
            measured,
            bound_formula_value,
            ratio: measured / bound_formula_value,
        })
    }
}

/// Smallest `r >= 1` with `r^k >= n^j`, i.e. `ceil(n^(j/k))`.
pub fn ceil_root(n: u64, j: u32, k: u32) -> u64 {
    let target = (n as u128).pow(j);
    let guess = (n as f64).powf(j as f64 / k as f64).ceil().max(1.0) as u64;
    let pow = |r: u64| (r as u128).checked_pow(k);
    let mut r = guess;
    while r > 1 && pow(r - 1).is_some_and(|v| v >= target) {
        r -= 1;
    }
    while pow(r).is_some_and(|v| v < target) {
        r += 1;
    }
    r
}

/// `J = ceil(P^(1/5))`.
pub fn default_j(p: u64) -> u64 {
    ceil_root(p, 1, 5)
}

/// `U = ceil(P^(2/5))`.
pub fn default_u(p: u64) -> u64 {
    ceil_root(p, 2, 5)
}

/// `sum_{l <= L} min(x/l, ||l c||^-1)`.
pub fn r_c_sum(c: &QuadraticIrrational, big_l: u64, x: f64) -> Result<f64> {
    if big_l == 0 || !(x > 1.0) {
        return Err(Error::arg(format!("need L >= 1 and x > 1, got L={big_l}, x={x}")));
    }
    let theta = slope_phase(c);
    let mut acc = 0.0;
    let mut ph = Phase::ZERO;
    for l in 1..=big_l {
        ph = ph + theta;
        let d = ph.dist();
        let cap = x / l as f64;
        acc += if d > 0.0 { cap.min(1.0 / d) } else { cap };
    }
    Ok(acc)
}

/// `(x/q + L + q) log(2 L q x)`.
pub fn r_c_bound(big_l: u64, x: f64, q: u64) -> Result<f64> {
    if q == 0 {
        return Err(Error::arg("q must be at least 1"));
    }
    let (l, q) = (big_l as f64, q as f64);
    Ok((x / q + l + q) * (2.0 * l * q * x).ln())
}

/// `H N^(4/5 + eps)`.
pub fn z_h_bound(big_h: u64, n: f64, eps: f64) -> f64 {
    big_h as f64 * n.powf(0.8 + eps)
}

/// `N^eps (H P N^-1/2 + U^2 + N^1/2)`.
pub fn z1_bound(big_h: u64, p: u64, u: u64, n: f64, eps: f64) -> f64 {
    let (h, p, u) = (big_h as f64, p as f64, u as f64);
    n.powf(eps) * (h * p / n.sqrt() + u * u + n.sqrt())
}

/// `N^eps (H P N^-1/4 + H P U^-1/2 + (H P)^1/2 N^1/4)`.
pub fn z2_bound(big_h: u64, p: u64, u: u64, n: f64, eps: f64) -> f64 {
    let (h, p, u) = (big_h as f64, p as f64, u as f64);
    let hp = h * p;
    n.powf(eps) * (hp * n.powf(-0.25) + hp / u.sqrt() + hp.sqrt() * n.powf(0.25))
}

/// `N^eps (H (P K)^1/2 + H P N^-1/4 + H P K^-1/2 + (H P)^1/2 N^1/4)`.
pub fn z_hk_bound(big_h: u64, big_k: u64, p: u64, n: f64, eps: f64) -> f64 {
    let (h, k, p) = (big_h as f64, big_k as f64, p as f64);
    let hp = h * p;
    n.powf(eps)
        * (h * (p * k).sqrt() + hp * n.powf(-0.25) + hp / k.sqrt() + hp.sqrt() * n.powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realfield::convergents;
    use num_traits::ToPrimitive;

    #[test]
    fn roots_round_up_exactly() {
        assert_eq!(default_j(100_000), 10);
        assert_eq!(default_j(100_001), 11);
        assert_eq!(default_u(100_000), 100);
        assert_eq!(default_u(1_000_000), 252);
        assert_eq!(default_j(1), 1);
        assert_eq!(ceil_root(32, 1, 5), 2);
        assert_eq!(ceil_root(33, 1, 5), 3);
    }

    #[test]
    fn r_c_examples() {
        let s2 = QuadraticIrrational::sqrt2();
        let v = r_c_sum(&s2, 1, 3.0).unwrap();
        assert!((v - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(r_c_sum(&s2, 1, 2.0).unwrap(), 2.0);
        assert!(r_c_sum(&s2, 0, 2.0).is_err());
        assert!(r_c_sum(&s2, 3, 1.0).is_err());
    }

    #[test]
    fn r_c_matches_naive_loop() {
        let s2 = QuadraticIrrational::sqrt2();
        let cf = s2.to_fixed(256);
        let naive: f64 = (1..=1000i64)
            .map(|l| {
                let d = crate::arith::dist_nearest_int(&cf.mul_int(l));
                (1e4 / l as f64).min(1.0 / d)
            })
            .sum();
        let fast = r_c_sum(&s2, 1000, 1e4).unwrap();
        assert!((fast - naive).abs() <= 1e-9 * naive);
        let bound = r_c_bound(1000, 1e4, 169).unwrap();
        let diag = BoundDiagnostic::new(fast, bound).unwrap();
        assert!(diag.ratio > 0.0 && diag.ratio <= 10.0);
    }

    #[test]
    fn bound_formula() {
        assert!((r_c_bound(1, 2.0, 1).unwrap() - 4.0 * 4f64.ln()).abs() < 1e-12);
        assert!(r_c_bound(1, 2.0, 0).is_err());
        let base = r_c_bound(100, 1e3, 12).unwrap();
        assert!(r_c_bound(101, 1e3, 12).unwrap() > base);
        assert!(r_c_bound(100, 1.1e3, 12).unwrap() > base);
    }

    #[test]
    fn ratio_headroom_golden() {
        let g = QuadraticIrrational::golden();
        let qs: Vec<u64> = convergents(&g, 16).iter().map(|c| c.q.to_u64().unwrap()).collect();
        for &q in &qs {
            for big_l in [10u64, 1000] {
                for x in [1e2, 1e4] {
                    let r = r_c_sum(&g, big_l, x).unwrap() / r_c_bound(big_l, x, q).unwrap();
                    assert!(r > 0.0 && r <= 10.0, "q={q} L={big_l} x={x} ratio={r}");
                }
            }
        }
    }

    #[test]
    fn diagnostic_rejects_bad_bound() {
        assert!(BoundDiagnostic::new(1.0, 0.0).is_err());
        assert!(BoundDiagnostic::new(1.0, f64::NAN).is_err());
        assert_eq!(BoundDiagnostic::new(3.0, 2.0).unwrap().ratio, 1.5);
    }
}
