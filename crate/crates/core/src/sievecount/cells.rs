use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{FixedReal, Phase};
use crate::counting::sample_alpha;
use crate::error::{Error, Result};
use crate::realfield::{sequence_s, QuadraticIrrational};

const RESONANCE_CUTOFF: f64 = 1e-9;

/// `N^(eps - 1/5)`, the width of the fractional-part windows.
pub fn window_mu(n: u64, eps: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::arg(format!("need N >= 2, got {n}")));
    }
    if !(eps > 0.0 && eps < 0.2) {
        return Err(Error::arg(format!("need 0 < eps < 1/5, got {eps}")));
    }
    Ok((n as f64).powf(eps - 0.2))
}

/// Derived sizes for one `(N, eps)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveSetup {
    pub n: u64,
    pub eps: f64,
    pub window: f64,
    /// `D = N^eps`, the bound on `d1 d2 d3`.
    pub level: f64,
    /// `L = D^4 / window`, the frequency cutoff.
    pub freq_cutoff: f64,
}

impl SieveSetup {
    pub fn new(n: u64, eps: f64) -> Result<Self> {
        let window = window_mu(n, eps)?;
        let level = (n as f64).powf(eps);
        Ok(SieveSetup {
            n,
            eps,
            window,
            level,
            freq_cutoff: level.powi(4) / window,
        })
    }

    /// `floor(L)`, the largest admissible `|m_j|`.
    pub fn l_max(&self) -> i64 {
        self.freq_cutoff.floor() as i64
    }

    /// All `(d1, d2, d3)` with `d1 d2 d3 <= D`, lexicographic.
    pub fn cells(&self) -> Vec<(u64, u64, u64)> {
        cells_up_to(self.level.floor() as u64)
    }

    pub fn main_term(&self, d: (u64, u64, u64)) -> f64 {
        self.n as f64 * self.window * self.window / (d.0 * d.1 * d.2) as f64
    }
}

/// All `(d1, d2, d3)` with product at most `bound`, lexicographic.
pub fn cells_up_to(bound: u64) -> Vec<(u64, u64, u64)> {
    let mut out = Vec::new();
    for d1 in 1..=bound {
        for d2 in 1..=bound / d1 {
            for d3 in 1..=bound / (d1 * d2) {
                out.push((d1, d2, d3));
            }
        }
    }
    out
}

fn check_cell(d: (u64, u64, u64)) -> Result<()> {
    if d.0 == 0 || d.1 == 0 || d.2 == 0 {
        return Err(Error::arg(format!("cell moduli must be positive, got {d:?}")));
    }
    Ok(())
}

/// The two phases `frac(d1 alpha / d2)` and `frac(d1 c alpha / d3)`.
fn cell_phases(alpha: &FixedReal, c: &QuadraticIrrational, d: (u64, u64, u64)) -> Result<(Phase, Phase)> {
    let bits = alpha.frac_bits().max(128) + 64;
    let a = alpha.with_frac_bits(bits);
    let ca = c.to_fixed(bits).mul(&a);
    let x = a.mul_int(d.0).div_int(d.1 as i64)?;
    let y = ca.mul_int(d.0).div_int(d.2 as i64)?;
    Ok((x.phase(), y.phase()))
}

fn threshold(window: f64, d: u64) -> Result<Phase> {
    Ok(FixedReal::from_f64(window, 128)?.div_int(d as i64)?.phase())
}

/// Solutions of `1 <= n <= N/d1`, `{n d1 alpha/d2} < window/d2`,
/// `{n d1 c alpha/d3} < window/d3`.
pub fn count_sieve_s(
    alpha: &FixedReal,
    c: &QuadraticIrrational,
    n: u64,
    window: f64,
    d: (u64, u64, u64),
) -> Result<u64> {
    check_cell(d)?;
    if !(window > 0.0 && window < 1.0) {
        return Err(Error::arg(format!("window must lie in (0, 1), got {window}")));
    }
    let (x, y) = cell_phases(alpha, c, d)?;
    let (tx, ty) = (threshold(window, d.1)?, threshold(window, d.2)?);
    let mut count = 0;
    let (mut px, mut py) = (Phase::ZERO, Phase::ZERO);
    for _ in 0..n / d.0 {
        px = px + x;
        py = py + y;
        if px < tx && py < ty {
            count += 1;
        }
    }
    Ok(count)
}

/// `|sum_{1 <= n <= len} e(n theta)|`.
pub fn geometric_abs(theta: Phase, len: u64) -> f64 {
    if len == 0 {
        return 0.0;
    }
    let dist = theta.dist();
    if dist < RESONANCE_CUTOFF {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        let mut ph = Phase::ZERO;
        for _ in 0..len {
            ph = ph + theta;
            acc += ph.e();
        }
        return acc.norm();
    }
    let pi = std::f64::consts::PI;
    (pi * theta.mul_u64(len).dist()).sin() / (pi * dist).sin()
}

/// `E(alpha; d) = window^2/(d2 d3) sum_{|m_j| <= L, (m1, m2) != 0} |sum_{n <= N/d1} e(n d1 (alpha m1/d2 + c alpha m2/d3))|`.
pub fn e_term(
    alpha: &FixedReal,
    c: &QuadraticIrrational,
    setup: &SieveSetup,
    d: (u64, u64, u64),
) -> Result<f64> {
    e_term_with_cutoff(alpha, c, setup, d, setup.l_max())
}

pub fn e_term_with_cutoff(
    alpha: &FixedReal,
    c: &QuadraticIrrational,
    setup: &SieveSetup,
    d: (u64, u64, u64),
    l_max: i64,
) -> Result<f64> {
    check_cell(d)?;
    let (x, y) = cell_phases(alpha, c, d)?;
    let len = setup.n / d.0;
    let mut total = 0.0;
    for m2 in -l_max..=l_max {
        let base = y.mul_i64(m2);
        for m1 in -l_max..=l_max {
            if m1 == 0 && m2 == 0 {
                continue;
            }
            total += geometric_abs(base + x.mul_i64(m1), len);
        }
    }
    Ok(setup.window * setup.window / (d.1 * d.2) as f64 * total)
}

/// One cell's count, main term and Fourier error term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveCell {
    pub d1: u64,
    pub d2: u64,
    pub d3: u64,
    pub n: u64,
    pub window: f64,
    pub count: u64,
    pub main_term: f64,
    /// `count - main_term`
    pub error_observed: f64,
    pub e_value: f64,
}

impl SieveCell {
    pub fn rel_err(&self) -> f64 {
        self.error_observed.abs() / self.main_term
    }
}

pub fn sieve_cell(
    alpha: &FixedReal,
    c: &QuadraticIrrational,
    setup: &SieveSetup,
    d: (u64, u64, u64),
    with_e: bool,
) -> Result<SieveCell> {
    let count = count_sieve_s(alpha, c, setup.n, setup.window, d)?;
    let main_term = setup.main_term(d);
    let e_value = if with_e { e_term(alpha, c, setup, d)? } else { f64::NAN };
    Ok(SieveCell {
        d1: d.0,
        d2: d.1,
        d3: d.2,
        n: setup.n,
        window: setup.window,
        count,
        main_term,
        error_observed: count as f64 - main_term,
        e_value,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JnAverage {
    pub n: u64,
    /// `int_A^B sum_d (d1 d2 d3)^eps E(alpha; d) d alpha`, divided by
    /// `window^2 N / log^3 N`.
    pub normalized_value: f64,
    pub stderr: f64,
    pub cells: usize,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JnSpec {
    pub big_a: f64,
    pub big_b: f64,
    pub eps: f64,
    pub samples: usize,
    pub seed: u64,
    pub frac_bits: u32,
}

/// Weighted sum `J(alpha) = sum_{d1 d2 d3 <= D} (d1 d2 d3)^eps E(alpha; d)`.
pub fn j_weighted(alpha: &FixedReal, c: &QuadraticIrrational, setup: &SieveSetup) -> Result<f64> {
    let mut total = 0.0;
    for d in setup.cells() {
        let w = ((d.0 * d.1 * d.2) as f64).powf(setup.eps);
        total += w * e_term(alpha, c, setup, d)?;
    }
    Ok(total)
}

/// Monte Carlo estimate of the averaged error sum for `N` in the test
/// sequence of `c`.
pub fn j_n_average(c: &QuadraticIrrational, n: u64, spec: &JnSpec) -> Result<JnAverage> {
    if !sequence_s(c, n).contains(&n) {
        return Err(Error::arg(format!("{n} is not in the test sequence of {c}")));
    }
    if !(spec.big_a > 0.0 && spec.big_a < spec.big_b) {
        return Err(Error::arg(format!(
            "need 0 < A < B, got A={}, B={}",
            spec.big_a, spec.big_b
        )));
    }
    if spec.samples < 2 {
        return Err(Error::arg("need at least 2 samples"));
    }
    let setup = SieveSetup::new(n, spec.eps)?;
    let values = (0..spec.samples as u64)
        .into_par_iter()
        .map(|i| {
            let alpha = sample_alpha(spec.big_a, spec.big_b, spec.seed, i, spec.frac_bits)?;
            j_weighted(&alpha, c, &setup)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let span = spec.big_b - spec.big_a;
    let ln = (n as f64).ln();
    let norm = setup.window * setup.window * n as f64 / (ln * ln * ln);
    Ok(JnAverage {
        n,
        normalized_value: span * mean / norm,
        stderr: span * (var / m).sqrt() / norm,
        cells: setup.cells().len(),
        samples: spec.samples,
    })
}
