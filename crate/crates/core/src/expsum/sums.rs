use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{von_mangoldt_range, Phase};
use crate::error::{Error, Result};
use crate::fourier::vaughan_b_table;
use crate::realfield::QuadraticIrrational;

/// Below this `||theta||` the type I geometric sums are summed term by term.
const RESONANCE_CUTOFF: f64 = 1e-9;

/// `frac(c)` as a 128-bit phase.
pub fn slope_phase(c: &QuadraticIrrational) -> Phase {
    c.to_fixed(128).phase()
}

/// The summation window `P a mu <= n <= b P`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub p: u64,
    pub a: f64,
    pub b: f64,
    pub mu: f64,
}

impl Window {
    pub fn new(p: u64, a: f64, b: f64, mu: f64) -> Result<Self> {
        if p == 0 || !(a > 0.0) || !(b > 0.0) || !(mu > 0.0) || !(a * mu).is_finite() {
            return Err(Error::arg(format!(
                "window needs P >= 1 and positive a, b, mu; got P={p}, a={a}, b={b}, mu={mu}"
            )));
        }
        Ok(Window { p, a, b, mu })
    }

    /// `mu = (a + b) / (2a)`.
    pub fn standard(p: u64, a: f64, b: f64) -> Result<Self> {
        Self::new(p, a, b, (a + b) / (2.0 * a))
    }

    /// Left end `P a mu` as a real.
    pub fn left(&self) -> f64 {
        self.p as f64 * self.a * self.mu
    }

    /// Right end `b P` as a real.
    pub fn right(&self) -> f64 {
        self.b * self.p as f64
    }

    pub fn lo(&self) -> u64 {
        self.left().ceil().max(1.0) as u64
    }

    pub fn hi(&self) -> u64 {
        self.right().floor().max(0.0) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.lo() > self.hi()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumKind {
    Z,
    ZTypeOne,
    ZTypeTwo,
    ZBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSumResult {
    pub kind: SumKind,
    pub value: f64,
    /// Sum of the magnitudes of the innermost summands; `value` never
    /// exceeds it.
    pub magnitude_total: f64,
    pub n_terms: u64,
    pub big_h: u64,
    pub window: Window,
    pub u: Option<u64>,
    pub k: Option<u64>,
    /// Set when the summation range is empty and the value is 0.
    pub empty_range: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ExpSumResult {
    fn new(kind: SumKind, big_h: u64, window: Window) -> Self {
        ExpSumResult {
            kind,
            value: 0.0,
            magnitude_total: 0.0,
            n_terms: 0,
            big_h,
            window,
            u: None,
            k: None,
            empty_range: true,
            elapsed: Duration::ZERO,
        }
    }

    fn absorb(&mut self, parts: Vec<(f64, f64, u64)>, start: Instant) {
        for (v, m, n) in parts {
            self.value += v;
            self.magnitude_total += m;
            self.n_terms += n;
        }
        self.empty_range = self.n_terms == 0;
        self.elapsed = start.elapsed();
    }
}

/// `sum_{lo <= n <= hi} e(h c n) Lambda(n)`.
pub fn prime_exp_sum(h: u64, c: &QuadraticIrrational, lo: u64, hi: u64) -> Result<Complex64> {
    if lo > hi {
        return Err(Error::arg(format!("need lo <= hi, got {lo} > {hi}")));
    }
    let theta = slope_phase(c).mul_u64(h);
    Ok(von_mangoldt_range(lo, hi)?
        .iter()
        .map(|&(n, l)| theta.mul_u64(n).e() * l)
        .sum())
}

fn h_range(big_h: u64) -> Result<Vec<u64>> {
    if big_h == 0 {
        return Err(Error::arg("H must be at least 1"));
    }
    Ok((big_h..=2 * big_h).collect())
}

/// `Z(H) = sum_{H <= h <= 2H} |sum_{P a mu <= n <= b P} e(h c n) Lambda(n)|`.
pub fn z_h(big_h: u64, c: &QuadraticIrrational, window: &Window) -> Result<ExpSumResult> {
    let start = Instant::now();
    let hs = h_range(big_h)?;
    let mut out = ExpSumResult::new(SumKind::Z, big_h, *window);
    if window.is_empty() {
        out.elapsed = start.elapsed();
        return Ok(out);
    }
    let terms = von_mangoldt_range(window.lo(), window.hi())?;
    let weight: f64 = terms.iter().map(|&(_, l)| l).sum();
    let theta = slope_phase(c);
    let parts: Vec<(f64, f64, u64)> = hs
        .par_iter()
        .map(|&h| {
            let th = theta.mul_u64(h);
            let s: Complex64 = terms.iter().map(|&(n, l)| th.mul_u64(n).e() * l).sum();
            (s.norm(), weight, terms.len() as u64)
        })
        .collect();
    out.absorb(parts, start);
    Ok(out)
}

/// `max_{1 <= len <= max_len} |sum_{k < len} e(k theta)|`.
fn geometric_max(theta: Phase, max_len: u64) -> f64 {
    if max_len == 0 {
        return 0.0;
    }
    let dist = theta.dist();
    if dist < RESONANCE_CUTOFF {
        // Partial sums from the top end, as the window's right end is fixed.
        let mut acc = Complex64::new(0.0, 0.0);
        let mut best = 0.0f64;
        let mut ph = Phase::ZERO;
        for _ in 0..max_len {
            acc += ph.e();
            best = best.max(acc.norm());
            ph = ph + theta;
        }
        return best;
    }
    // |sum_{k<len} e(k theta)| = |sin(pi len theta)| / |sin(pi theta)|,
    // and |sin(pi y)| grows with ||y||.
    let denom = (std::f64::consts::PI * dist).sin();
    let best_dist = if (max_len as f64) * dist <= 0.5 {
        theta.mul_u64(max_len).dist_raw()
    } else {
        let mut best = 0u128;
        let mut ph = Phase::ZERO;
        for _ in 0..max_len {
            ph = ph + theta;
            best = best.max(ph.dist_raw());
            if best == 1u128 << 127 {
                break;
            }
        }
        best
    };
    let numer = (std::f64::consts::PI * Phase(best_dist).turns()).sin();
    numer / denom
}

/// `Z_1(H) = sum_h sum_{l <= U^2} max_{P a mu / l <= w <= bP/l} |sum_{w <= k <= bP/l} e(h c k l)|`.
pub fn z1_h(big_h: u64, c: &QuadraticIrrational, window: &Window, u: u64) -> Result<ExpSumResult> {
    let start = Instant::now();
    if u == 0 {
        return Err(Error::arg("U must be at least 1"));
    }
    let hs = h_range(big_h)?;
    let mut out = ExpSumResult::new(SumKind::ZTypeOne, big_h, *window);
    out.u = Some(u);
    let theta = slope_phase(c);
    let (left, right) = (window.left(), window.right());
    let l_max = u.saturating_mul(u);
    let parts: Vec<(f64, f64, u64)> = hs
        .par_iter()
        .map(|&h| {
            let th = theta.mul_u64(h);
            let mut value = 0.0;
            let mut mags = 0.0;
            let mut n = 0u64;
            for l in 1..=l_max {
                let top = (right / l as f64).floor() as u64;
                if top == 0 {
                    break;
                }
                let w_min = ((left / l as f64).ceil() as u64).max(1);
                if w_min > top {
                    continue;
                }
                let len = top - w_min + 1;
                value += geometric_max(th.mul_u64(l), len);
                mags += len as f64;
                n += len;
            }
            (value, mags, n)
        })
        .collect();
    out.absorb(parts, start);
    Ok(out)
}

struct Bilinear {
    /// Prime powers `m` with their weights, ascending.
    lam: Vec<(u64, f64)>,
    b: Vec<i64>,
    u: u64,
    m_max: u64,
    k_max: u64,
}

impl Bilinear {
    fn new(window: &Window, u: u64) -> Result<Self> {
        if u == 0 {
            return Err(Error::arg("U must be at least 1"));
        }
        let right = window.right();
        let m_max = (right / u as f64).floor().max(0.0) as u64;
        let k_max = m_max;
        let lam = if m_max > u {
            von_mangoldt_range(u + 1, m_max)?
        } else {
            Vec::new()
        };
        let b = vaughan_b_table(k_max as usize, u);
        Ok(Bilinear {
            lam,
            b,
            u,
            m_max,
            k_max,
        })
    }

    /// `M_1(k) <= m <= M_2(k)` as an index range into `lam`.
    fn m_slice(&self, window: &Window, k: u64) -> &[(u64, f64)] {
        let m1 = ((window.left() / k as f64).ceil() as u64).max(self.u + 1);
        let m2 = ((window.right() / k as f64).floor() as u64).min(self.m_max);
        if m1 > m2 {
            return &[];
        }
        let i = self.lam.partition_point(|&(m, _)| m < m1);
        let j = self.lam.partition_point(|&(m, _)| m <= m2);
        &self.lam[i..j]
    }
}

/// `Z_2(H) = sum_h |sum_{U < m <= bP/U} sum_{P a mu/m <= k <= bP/m, k > U} Lambda(m) b(k) e(h c m k)|`
/// with `b` taken at `V = U`.
pub fn z2_h(big_h: u64, c: &QuadraticIrrational, window: &Window, u: u64) -> Result<ExpSumResult> {
    let start = Instant::now();
    let hs = h_range(big_h)?;
    let bil = Bilinear::new(window, u)?;
    let mut out = ExpSumResult::new(SumKind::ZTypeTwo, big_h, *window);
    out.u = Some(u);
    let theta = slope_phase(c);
    let parts: Vec<(f64, f64, u64)> = hs
        .par_iter()
        .map(|&h| {
            let th = theta.mul_u64(h);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut mags = 0.0;
            let mut n = 0u64;
            for k in u + 1..=bil.k_max {
                let bk = bil.b[k as usize];
                if bk == 0 {
                    continue;
                }
                let thk = th.mul_u64(k);
                let mut inner = Complex64::new(0.0, 0.0);
                for &(m, l) in bil.m_slice(window, k) {
                    inner += thk.mul_u64(m).e() * l;
                    mags += l * bk.unsigned_abs() as f64;
                    n += 1;
                }
                acc += inner * bk as f64;
            }
            (acc.norm(), mags, n)
        })
        .collect();
    out.absorb(parts, start);
    Ok(out)
}

/// `Z(H, K) = sum_h sum_{K <= k < 2K} |b(k)| |sum_{M_1(k) <= m <= M_2(k)} Lambda(m) e(h c m k)|`,
/// with `k` also restricted to `U < k <= bP/U`.
pub fn z_hk(
    big_h: u64,
    big_k: u64,
    c: &QuadraticIrrational,
    window: &Window,
    u: u64,
) -> Result<ExpSumResult> {
    let bil = Bilinear::new(window, u)?;
    z_hk_with(big_h, big_k, c, window, &bil)
}

fn z_hk_with(
    big_h: u64,
    big_k: u64,
    c: &QuadraticIrrational,
    window: &Window,
    bil: &Bilinear,
) -> Result<ExpSumResult> {
    let start = Instant::now();
    let hs = h_range(big_h)?;
    if big_k == 0 {
        return Err(Error::arg("K must be at least 1"));
    }
    let mut out = ExpSumResult::new(SumKind::ZBlock, big_h, *window);
    out.u = Some(bil.u);
    out.k = Some(big_k);
    let theta = slope_phase(c);
    let k_lo = big_k.max(bil.u + 1);
    let k_hi = big_k.saturating_mul(2).saturating_sub(1).min(bil.k_max);
    let parts: Vec<(f64, f64, u64)> = hs
        .par_iter()
        .map(|&h| {
            let th = theta.mul_u64(h);
            let mut value = 0.0;
            let mut mags = 0.0;
            let mut n = 0u64;
            for k in k_lo..=k_hi {
                let bk = bil.b[k as usize].unsigned_abs() as f64;
                if bk == 0.0 {
                    continue;
                }
                let thk = th.mul_u64(k);
                let mut inner = Complex64::new(0.0, 0.0);
                for &(m, l) in bil.m_slice(window, k) {
                    inner += thk.mul_u64(m).e() * l;
                    mags += l * bk;
                    n += 1;
                }
                value += bk * inner.norm();
            }
            (value, mags, n)
        })
        .collect();
    out.absorb(parts, start);
    Ok(out)
}

/// Left ends `K = 2^t U` of the dyadic blocks covering `U <= k <= bP/U`.
pub fn dyadic_blocks(window: &Window, u: u64) -> Vec<u64> {
    let k_max = (window.right() / u.max(1) as f64).floor() as u64;
    let mut out = Vec::new();
    let mut k = u.max(1);
    while k <= k_max {
        out.push(k);
        k = k.saturating_mul(2);
    }
    out
}

/// Both sides of `Z(H) << (log P) Z_1(H) + Z_2(H)`, plus the dyadic
/// blocks `Z(H, K)` whose sum dominates `Z_2(H)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaughanRoute {
    pub direct: ExpSumResult,
    pub type_one: ExpSumResult,
    pub type_two: ExpSumResult,
    pub blocks: Vec<ExpSumResult>,
    /// `(log P) Z_1(H) + Z_2(H)`.
    pub combined: f64,
}

impl VaughanRoute {
    pub fn block_max(&self) -> f64 {
        self.blocks.iter().map(|b| b.value).fold(0.0, f64::max)
    }

    pub fn block_total(&self) -> f64 {
        self.blocks.iter().map(|b| b.value).sum()
    }
}

pub fn z_h_vaughan_route(
    big_h: u64,
    c: &QuadraticIrrational,
    window: &Window,
    u: u64,
) -> Result<VaughanRoute> {
    let direct = z_h(big_h, c, window)?;
    let type_one = z1_h(big_h, c, window, u)?;
    let type_two = z2_h(big_h, c, window, u)?;
    let bil = Bilinear::new(window, u)?;
    let blocks = dyadic_blocks(window, u)
        .into_iter()
        .map(|k| z_hk_with(big_h, k, c, window, &bil))
        .collect::<Result<Vec<_>>>()?;
    let combined = (window.p as f64).ln() * type_one.value + type_two.value;
    Ok(VaughanRoute {
        direct,
        type_one,
        type_two,
        blocks,
        combined,
    })
}
