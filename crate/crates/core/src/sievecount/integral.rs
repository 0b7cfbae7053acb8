use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::BoundDiagnostic;

const MAX_DEPTH: u32 = 48;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth >= MAX_DEPTH || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1)
}

/// Adaptive Simpson on a piece where `f` is smooth.
fn quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 0)
}

/// `beta -> min(K, 1/||beta||)` integrated over `[0, t]` for `t >= 0`,
/// one smooth piece at a time.
struct Capped {
    cap: f64,
    period: f64,
    tol: f64,
}

impl Capped {
    fn new(cap: f64) -> Self {
        let tol = 1e-12 * cap;
        let mut me = Capped {
            cap,
            period: 0.0,
            tol,
        };
        me.period = me.partial(1.0);
        me
    }

    fn g(&self, beta: f64) -> f64 {
        let d = (beta - beta.round()).abs();
        if d * self.cap <= 1.0 {
            self.cap
        } else {
            1.0 / d
        }
    }

    /// `int_0^f g` for `f` in `[0, 1]`, split at the kinks.
    fn partial(&self, f: f64) -> f64 {
        let k = 1.0 / self.cap;
        let marks = [0.0, k, 0.5, 1.0 - k, 1.0];
        let g = |b: f64| self.g(b);
        let mut acc = 0.0;
        for w in marks.windows(2) {
            let (lo, hi) = (w[0], w[1].min(f));
            if hi > lo {
                acc += quad(&g, lo, hi, self.tol);
            }
        }
        acc
    }

    fn antiderivative(&self, t: f64) -> f64 {
        if t < 0.0 {
            return -self.antiderivative(-t);
        }
        let whole = t.floor();
        whole * self.period + self.partial(t - whole)
    }
}

/// Which regime of `x (B - A)` the parameters fall in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralCase {
    /// `x (B - A) >= 1`
    ManyPeriods,
    /// `1/K <= x (B - A) < 1`
    PartialPeriod,
    /// `x (B - A) < 1/K`
    Short,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralMinCheck {
    pub big_a: f64,
    pub big_b: f64,
    pub k: f64,
    pub x: f64,
    pub case: IntegralCase,
    /// `int_A^B min(K, 1/||alpha x||) d alpha` with the bound
    /// `min{K, max{1, 1/|x|} log K}`.
    pub diagnostic: BoundDiagnostic,
}

pub fn integral_min_check(big_a: f64, big_b: f64, k: f64, x: f64) -> Result<IntegralMinCheck> {
    if !(big_a > 0.0 && big_a < big_b && big_b.is_finite()) {
        return Err(Error::arg(format!("need 0 < A < B, got A={big_a}, B={big_b}")));
    }
    if !(k >= 2.0 && k.is_finite()) {
        return Err(Error::arg(format!("need K >= 2, got {k}")));
    }
    if x == 0.0 || !x.is_finite() {
        return Err(Error::arg("x must be finite and nonzero"));
    }
    let ax = x.abs();
    let capped = Capped::new(k);
    let integral = (capped.antiderivative(ax * big_b) - capped.antiderivative(ax * big_a)) / ax;
    let spread = ax * (big_b - big_a);
    let case = if spread >= 1.0 {
        IntegralCase::ManyPeriods
    } else if spread * k >= 1.0 {
        IntegralCase::PartialPeriod
    } else {
        IntegralCase::Short
    };
    let bound = k.min((1.0f64).max(1.0 / ax) * k.ln());
    Ok(IntegralMinCheck {
        big_a,
        big_b,
        k,
        x,
        case,
        diagnostic: BoundDiagnostic::new(integral, bound)?,
    })
}

/// Midpoint Riemann sum of the same integrand.
pub fn riemann_min(big_a: f64, big_b: f64, k: f64, x: f64, points: usize) -> f64 {
    let h = (big_b - big_a) / points as f64;
    let mut acc = 0.0;
    for i in 0..points {
        let beta = (big_a + (i as f64 + 0.5) * h) * x;
        let d = (beta - beta.round()).abs();
        acc += if d * k <= 1.0 { k } else { 1.0 / d };
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_period(k: f64) -> f64 {
        2.0 * (1.0 + (k / 2.0).ln())
    }

    #[test]
    fn period_integral_is_exact() {
        for k in [2.0, 10.0, 1e3, 1e6] {
            let c = Capped::new(k);
            assert!((c.period - closed_form_period(k)).abs() < 1e-9 * c.period);
        }
    }

    #[test]
    fn ceiling_cases() {
        let r = integral_min_check(1.0, 3.0, 2.0, 0.37).unwrap();
        assert!(r.diagnostic.measured <= 2.0 * 2.0 + 1e-12);
        let r = integral_min_check(1.0, 2.0, 1000.0, 1e-4).unwrap();
        assert_eq!(r.case, IntegralCase::Short);
        assert!(r.diagnostic.measured <= 1000.0 * 1.0 + 1e-9);
        let r = integral_min_check(1.0, 2.0, 1000.0, 5.0).unwrap();
        assert_eq!(r.case, IntegralCase::ManyPeriods);
        assert!(r.diagnostic.ratio.is_finite());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(integral_min_check(2.0, 1.0, 10.0, 1.0).is_err());
        assert!(integral_min_check(1.0, 2.0, 1.5, 1.0).is_err());
        assert!(integral_min_check(1.0, 2.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn negative_x_is_symmetric() {
        let a = integral_min_check(1.0, 2.5, 50.0, 3.3).unwrap();
        let b = integral_min_check(1.0, 2.5, 50.0, -3.3).unwrap();
        assert!((a.diagnostic.measured - b.diagnostic.measured).abs() < 1e-12);
    }

    #[test]
    fn matches_riemann_sum() {
        for &(a, b, k, x) in &[
            (1.0, 2.0, 10.0, 3.7),
            (0.5, 1.7, 200.0, 0.4),
            (1.2, 1.9, 50.0, 1e-3),
        ] {
            let q = integral_min_check(a, b, k, x).unwrap().diagnostic.measured;
            let r = riemann_min(a, b, k, x, 1_000_000);
            assert!((q - r).abs() <= 0.01 * r, "{a} {b} {k} {x}: {q} vs {r}");
        }
    }
}
