use num_complex::Complex64;

use crate::arith::{divisor_count, divisors, moebius, moebius_table, von_mangoldt_table};
use crate::error::{Error, Result};

/// `b(k) = sum_{d | k, d <= V} mu(d)`.
pub fn vaughan_b(k: u64, v: u64) -> Result<i64> {
    if k == 0 {
        return Err(Error::arg("b(k) needs k >= 1"));
    }
    let mut acc = 0i64;
    for d in divisors(k) {
        if d > v {
            break;
        }
        acc += moebius(d)? as i64;
    }
    debug_assert!(acc.unsigned_abs() <= divisor_count(k)?);
    Ok(acc)
}

/// `b(k)` for `k = 0..=k_max` (index 0 holds 0).
pub fn vaughan_b_table(k_max: usize, v: u64) -> Vec<i64> {
    let mut b = vec![0i64; k_max + 1];
    let dmax = (v as usize).min(k_max);
    let mu = moebius_table(dmax);
    for d in 1..=dmax {
        let m = mu[d] as i64;
        if m == 0 {
            continue;
        }
        for k in (d..=k_max).step_by(d) {
            b[k] += m;
        }
    }
    b
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VaughanParams {
    u: u64,
    v: u64,
    x: u64,
}

impl VaughanParams {
    pub fn new(u: u64, v: u64, x: u64) -> Result<Self> {
        if u == 0 || v == 0 {
            return Err(Error::arg(format!("need U >= 1 and V >= 1, got U={u}, V={v}")));
        }
        if u.checked_mul(v).is_none_or(|uv| uv > x) {
            return Err(Error::arg(format!("need UV <= x, got U={u}, V={v}, x={x}")));
        }
        Ok(VaughanParams { u, v, x })
    }

    /// `U = V`, the balanced choice.
    pub fn balanced(u: u64, x: u64) -> Result<Self> {
        Self::new(u, u, x)
    }

    pub fn u(&self) -> u64 {
        self.u
    }

    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn x(&self) -> u64 {
        self.x
    }
}

/// The three pieces of the identity at a single `n > U`:
/// `Lambda(n) = smooth - truncated - bilinear`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VaughanPieces {
    /// `sum_{dk = n, d <= V} mu(d) log k`
    pub smooth: f64,
    /// `sum_{dmk = n, d <= V, m <= U} mu(d) Lambda(m)`
    pub truncated: f64,
    /// `sum_{mk = n, m > U, k > V} Lambda(m) b(k)`
    pub bilinear: f64,
}

impl VaughanPieces {
    pub fn reconstruct(&self) -> f64 {
        self.smooth - self.truncated - self.bilinear
    }
}

/// Identity pieces for every `n` in `(U, n_max]`, indexed by `n`; entries
/// at or below `U` are zero.
pub fn vaughan_pieces_table(n_max: usize, u: u64, v: u64) -> Vec<VaughanPieces> {
    let zero = VaughanPieces {
        smooth: 0.0,
        truncated: 0.0,
        bilinear: 0.0,
    };
    let mut out = vec![zero; n_max + 1];
    let mu = moebius_table(n_max);
    let lam = von_mangoldt_table(n_max);
    let b = vaughan_b_table(n_max, v);
    let u = (u as usize).min(n_max);
    let v = (v as usize).min(n_max);
    let logs: Vec<f64> = (0..=n_max).map(|k| if k == 0 { 0.0 } else { (k as f64).ln() }).collect();

    for d in 1..=v {
        if mu[d] == 0 {
            continue;
        }
        let md = mu[d] as f64;
        for k in 1..=n_max / d {
            out[d * k].smooth += md * logs[k];
        }
        for m in 1..=u.min(n_max / d) {
            if lam[m] == 0.0 {
                continue;
            }
            let w = md * lam[m];
            let dm = d * m;
            for n in (dm..=n_max).step_by(dm) {
                out[n].truncated += w;
            }
        }
    }
    for m in u + 1..=n_max {
        if lam[m] == 0.0 {
            continue;
        }
        for k in v + 1..=n_max / m {
            if b[k] != 0 {
                out[m * k].bilinear += lam[m] * b[k] as f64;
            }
        }
    }
    for p in out.iter_mut().take(u + 1) {
        *p = zero;
    }
    out
}

/// Pointwise identity pieces at `n > U`.
pub fn vaughan_pieces(n: u64, u: u64, v: u64) -> Result<VaughanPieces> {
    if u == 0 || v == 0 || n <= u {
        return Err(Error::arg(format!("need U, V >= 1 and n > U, got n={n}, U={u}, V={v}")));
    }
    let lam = |m: u64| crate::arith::von_mangoldt(m);
    let mut smooth = 0.0;
    let mut truncated = 0.0;
    let mut bilinear = 0.0;
    for d in divisors(n) {
        let k = n / d;
        if d <= v {
            let md = moebius(d)? as f64;
            if md != 0.0 {
                smooth += md * (k as f64).ln();
                for m in divisors(k) {
                    if m > u {
                        break;
                    }
                    truncated += md * lam(m)?;
                }
            }
        }
        // d plays m here, k = n/m
        if d > u && k > v {
            bilinear += lam(d)? * vaughan_b(k, v)? as f64;
        }
    }
    Ok(VaughanPieces {
        smooth,
        truncated,
        bilinear,
    })
}

/// Evaluated pieces of the decomposition of `sum_{U < n <= x} f(n) Lambda(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VaughanDecomposition {
    pub params: VaughanParams,
    /// `sum_{U < n <= x} f(n) Lambda(n)` summed directly.
    pub direct: Complex64,
    /// `sum_{l <= UV} max_w |sum_{w <= k <= x/l} f(kl)|`.
    pub t1: f64,
    /// `sum_{U < m <= x/V} sum_{V < k <= x/m} Lambda(m) b(k) f(mk)`.
    pub t2: Complex64,
    /// The smooth type-I piece restricted to `n > U`.
    pub type_one_smooth: Complex64,
    /// The truncated type-I piece restricted to `n > U`.
    pub type_one_truncated: Complex64,
}

impl VaughanDecomposition {
    /// `smooth - truncated - t2`, equal to `direct` up to rounding.
    pub fn reconstructed(&self) -> Complex64 {
        self.type_one_smooth - self.type_one_truncated - self.t2
    }

    /// `|direct| / ((log 2x) T1 + |T2|)`, or 0 when the bound vanishes.
    pub fn bound_ratio(&self) -> f64 {
        let bound = (2.0 * self.params.x as f64).ln() * self.t1 + self.t2.norm();
        if bound > 0.0 {
            self.direct.norm() / bound
        } else {
            0.0
        }
    }
}

pub fn vaughan_decompose<F>(f: F, params: VaughanParams) -> VaughanDecomposition
where
    F: Fn(u64) -> Complex64,
{
    let x = params.x as usize;
    let u = params.u as usize;
    let v = params.v as usize;
    let values: Vec<Complex64> = (0..=x)
        .map(|n| if n == 0 { Complex64::new(0.0, 0.0) } else { f(n as u64) })
        .collect();
    let lam = von_mangoldt_table(x);
    let mu = moebius_table(v);
    let b = vaughan_b_table(x, params.v);
    let zero = Complex64::new(0.0, 0.0);

    let direct: Complex64 = (u + 1..=x).map(|n| values[n] * lam[n]).sum();

    let mut t1 = 0.0;
    for l in 1..=(u * v).min(x) {
        let top = x / l;
        let mut tail = zero;
        let mut best = 0.0f64;
        for k in (1..=top).rev() {
            tail += values[k * l];
            best = best.max(tail.norm());
        }
        t1 += best;
    }

    let mut t2 = zero;
    for m in u + 1..=x / v.max(1) {
        if lam[m] == 0.0 {
            continue;
        }
        let mut inner = zero;
        for k in v + 1..=x / m {
            if b[k] != 0 {
                inner += values[m * k] * b[k] as f64;
            }
        }
        t2 += inner * lam[m];
    }

    let mut smooth = zero;
    let mut truncated = zero;
    for d in 1..=v.min(x) {
        if mu[d] == 0 {
            continue;
        }
        let md = mu[d] as f64;
        let mut acc = zero;
        for k in 1..=x / d {
            let n = d * k;
            if n > u {
                acc += values[n] * (k as f64).ln();
            }
        }
        smooth += acc * md;
        for m in 1..=u.min(x / d) {
            if lam[m] == 0.0 {
                continue;
            }
            let dm = d * m;
            let mut inner = zero;
            for k in 1..=x / dm {
                let n = dm * k;
                if n > u {
                    inner += values[n];
                }
            }
            truncated += inner * (md * lam[m]);
        }
    }

    VaughanDecomposition {
        params,
        direct,
        t1,
        t2,
        type_one_smooth: smooth,
        type_one_truncated: truncated,
    }
}
