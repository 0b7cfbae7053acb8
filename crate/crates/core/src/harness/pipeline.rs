use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::PrimeTable;
use crate::counting::{
    count_n_p_with, count_r_p_with, count_s_p_with, count_t_p, g_n, integral_f_n_with, sample_alpha, BlockParams,
    IntegralSpec, TripleCounter,
};
use crate::error::{Error, Result};
use crate::expsum::{z_h, z_h_bound};
use crate::realfield::QuadraticIrrational;
use crate::sievecount::{j_weighted, SieveSetup};

use super::cache::PrimeCache;
use super::config::ExperimentConfig;
use super::pool::WorkerPool;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    Theorem3i,
    Theorem3ii,
}

impl PipelineKind {
    pub fn name(self) -> &'static str {
        match self {
            PipelineKind::Theorem3i => "theorem3i",
            PipelineKind::Theorem3ii => "theorem3ii",
        }
    }
}

/// One block `P <= p < mu P` of the lower-bound assembly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub p: u64,
    pub mu: f64,
    pub eta: f64,
    pub delta: f64,
    pub nu: f64,
    pub t_value: f64,
    pub t_main_term: f64,
    pub t_ratio: f64,
    pub s_count: u64,
    pub r_count: u64,
    pub r_asymptote: f64,
    /// `R(P) / ((mu - 1) P / log P)`, zero when the asymptote vanishes.
    pub r_ratio: f64,
    pub n_count: u64,
    /// `nu N(P)`
    pub lower_contribution: f64,
}

/// A measured quantity set against a reference formula.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub quantity: String,
    pub p: u64,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
}

impl Diagnostic {
    fn new(quantity: &str, p: u64, measured: f64, bound: f64) -> Self {
        Diagnostic {
            quantity: quantity.into(),
            p,
            measured,
            bound,
            ratio: finite_ratio(measured, bound),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub n: u64,
    pub blocks: Vec<BlockRecord>,
    /// `sum_blocks nu N(P)`
    pub lower_bound: f64,
    pub mc_estimate: f64,
    pub mc_stderr: f64,
    pub exact_integral: f64,
    /// `|mc - exact| / stderr`, absent when the standard error vanishes
    /// while the routes differ.
    pub route_z: Option<f64>,
    pub g_n: f64,
    /// `(b - a) G_N(A, B)`, zero below `N = 3`.
    pub target: f64,
    pub mc_ratio: f64,
    pub exact_ratio: f64,
    pub lower_ratio: f64,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveRecord {
    pub n: u64,
    pub cells: usize,
    pub samples: usize,
    /// Sample average of `J(alpha)` times `B - A`, over `window^2 N / log^3 N`.
    pub jn_normalized: f64,
    pub jn_stderr: f64,
    pub f_mean: f64,
    pub f_max: u64,
    pub g_n: f64,
    /// Smallest `K` with `F_N(alpha) <= K G_N + J(alpha)` on every sample.
    pub empirical_k: f64,
    pub diagnostics: Vec<Diagnostic>,
}

/// Output of one pipeline run. Serialises identically for identical
/// configuration, seed and worker count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub pipeline: PipelineKind,
    pub version: String,
    /// Git-style SHA-256 of the canonical configuration text.
    pub input_hash: String,
    pub config: ExperimentConfig,
    pub workers: usize,
    pub metric: Vec<MetricRecord>,
    pub sieve: Vec<SieveRecord>,
}

impl ExperimentReport {
    pub fn empty(kind: PipelineKind, cfg: &ExperimentConfig) -> Self {
        ExperimentReport {
            pipeline: kind,
            version: VERSION.into(),
            input_hash: input_hash(kind, cfg),
            config: cfg.clone(),
            workers: WorkerPool::resolve(cfg.workers),
            metric: Vec::new(),
            sieve: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// SHA-256 of the JSON form.
    pub fn digest(&self) -> Result<String> {
        Ok(hex(&Sha256::digest(self.to_json()?.as_bytes())))
    }

    /// Lists ratio fields that are not finite.
    pub fn non_finite_fields(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let mut check = |what: String, v: f64| {
            if !v.is_finite() {
                bad.push(what);
            }
        };
        for r in &self.metric {
            check(format!("N={} mc_ratio", r.n), r.mc_ratio);
            check(format!("N={} exact_ratio", r.n), r.exact_ratio);
            check(format!("N={} lower_ratio", r.n), r.lower_ratio);
            for b in &r.blocks {
                check(format!("N={} P={} t_ratio", r.n, b.p), b.t_ratio);
                check(format!("N={} P={} r_ratio", r.n, b.p), b.r_ratio);
            }
            for d in &r.diagnostics {
                check(format!("N={} {}", r.n, d.quantity), d.ratio);
            }
        }
        for r in &self.sieve {
            check(format!("N={} jn_normalized", r.n), r.jn_normalized);
            check(format!("N={} empirical_k", r.n), r.empirical_k);
            for d in &r.diagnostics {
                check(format!("N={} {}", r.n, d.quantity), d.ratio);
            }
        }
        bad
    }
}

/// Wall-clock for a run, kept apart from the report so the report stays
/// reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub pipeline: PipelineKind,
    pub total_ms: f64,
    pub per_n_ms: Vec<(u64, f64)>,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// `sha256("blob <len>\0" ++ content)` over the pipeline name, library
/// version and canonical configuration.
pub fn input_hash(kind: PipelineKind, cfg: &ExperimentConfig) -> String {
    let content = format!("pipeline = {}\nversion = {VERSION}\n{}", kind.name(), cfg.serialize());
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content.as_bytes());
    hex(&h.finalize())
}

fn finite_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 && den.is_finite() {
        num / den
    } else {
        0.0
    }
}

/// Block starts `floor(N / mu^(k+1))`, `k = 0, 1, ...`, down to 2.
pub fn block_starts(n: u64, mu: f64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut x = n as f64 / mu;
    while x >= 2.0 {
        let p = x.floor() as u64;
        if out.last() != Some(&p) {
            out.push(p);
        }
        x /= mu;
    }
    out
}

fn block_record(p: u64, cfg: &ExperimentConfig, c: &QuadraticIrrational, table: &PrimeTable) -> Result<BlockRecord> {
    let params = BlockParams::new(p, cfg.a, cfg.b, cfg.eps, c.to_f64())?;
    let t = count_t_p(&params, c)?;
    let s = count_s_p_with(&params, c, Some(table))?;
    let r = count_r_p_with(&params, Some(table))?;
    let n = count_n_p_with(&params, c, Some(table))?;
    Ok(BlockRecord {
        p,
        mu: params.mu,
        eta: params.eta,
        delta: params.delta,
        nu: params.nu,
        t_value: t.value,
        t_main_term: t.main_term,
        t_ratio: t.ratio,
        s_count: s,
        r_count: r.count,
        r_asymptote: r.asymptote,
        r_ratio: finite_ratio(r.count as f64, r.asymptote),
        n_count: n.count,
        lower_contribution: params.nu * n.count as f64,
    })
}

fn metric_record(n: u64, cfg: &ExperimentConfig, c: &QuadraticIrrational, table: &PrimeTable) -> Result<MetricRecord> {
    let mu = (cfg.a + cfg.b) / (2.0 * cfg.a);
    let blocks = block_starts(n, mu)
        .into_par_iter()
        .map(|p| block_record(p, cfg, c, table))
        .collect::<Result<Vec<_>>>()?;
    let lower_bound: f64 = blocks.iter().map(|b| b.lower_contribution).sum();
    let spec = IntegralSpec {
        a: cfg.a,
        b: cfg.b,
        eps: cfg.eps,
        n,
        samples: cfg.samples,
        seed: cfg.seed,
        frac_bits: cfg.precision_bits,
    };
    let est = integral_f_n_with(c, &spec, Some(table))?;
    let z = est.z_score();
    let g = if n >= 3 { g_n(cfg.big_a, cfg.big_b, cfg.eps, n as f64)? } else { 0.0 };
    let target = (cfg.b - cfg.a) * g;

    let mut diagnostics = vec![Diagnostic::new("lower_bound_vs_target", 0, lower_bound, target)];
    if let Some(top) = blocks.first() {
        let params = BlockParams::new(top.p, cfg.a, cfg.b, cfg.eps, c.to_f64())?;
        let z1 = z_h(1, c, &params.window())?;
        diagnostics.push(Diagnostic::new(
            "z_h1_vs_bound",
            top.p,
            z1.value,
            z_h_bound(1, n as f64, cfg.eps),
        ));
    }
    Ok(MetricRecord {
        n,
        lower_bound,
        mc_estimate: est.estimate,
        mc_stderr: est.stderr,
        exact_integral: est.exact,
        route_z: z.is_finite().then_some(z),
        g_n: g,
        target,
        mc_ratio: finite_ratio(est.estimate, target),
        exact_ratio: finite_ratio(est.exact, target),
        lower_ratio: finite_ratio(lower_bound, target),
        blocks,
        diagnostics,
    })
}

fn sieve_record(
    n: u64,
    cfg: &ExperimentConfig,
    c: &QuadraticIrrational,
    table: &PrimeTable,
) -> Result<SieveRecord> {
    let setup = SieveSetup::new(n, cfg.eps)?;
    let counter = TripleCounter::with_table(c, cfg.eps, n, table.clone(), cfg.precision_bits)?;
    let pairs = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let alpha = sample_alpha(cfg.big_a, cfg.big_b, cfg.seed, i, cfg.precision_bits)?;
            Ok((counter.count(&alpha)?, j_weighted(&alpha, c, &setup)?))
        })
        .collect::<Result<Vec<(u64, f64)>>>()?;
    let m = pairs.len() as f64;
    let span = cfg.big_b - cfg.big_a;
    let j_mean = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let j_var = pairs.iter().map(|p| (p.1 - j_mean).powi(2)).sum::<f64>() / (m - 1.0);
    let ln = (n as f64).ln();
    let norm = setup.window * setup.window * n as f64 / (ln * ln * ln);
    let g = if n >= 3 { g_n(cfg.big_a, cfg.big_b, cfg.eps, n as f64)? } else { 0.0 };
    let f_max = pairs.iter().map(|p| p.0).max().unwrap_or(0);
    let f_mean = pairs.iter().map(|p| p.0 as f64).sum::<f64>() / m;
    let empirical_k = pairs
        .iter()
        .map(|&(f, j)| finite_ratio(f as f64 - j, g).max(0.0))
        .fold(0.0, f64::max);
    let j_max = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(SieveRecord {
        n,
        cells: setup.cells().len(),
        samples: pairs.len(),
        jn_normalized: span * j_mean / norm,
        jn_stderr: span * (j_var / m).sqrt() / norm,
        f_mean,
        f_max,
        g_n: g,
        empirical_k,
        diagnostics: vec![
            Diagnostic::new("f_max_vs_g_n", 0, f_max as f64, g),
            Diagnostic::new("f_max_vs_g_n_plus_j_max", 0, f_max as f64, g + j_max),
        ],
    })
}

fn prime_table_for(cfg: &ExperimentConfig, ns: &[u64], cache: &PrimeCache) -> Result<PrimeTable> {
    let top = ns.iter().copied().max().unwrap_or(1) as f64;
    let reach = cfg.b.max(cfg.big_b);
    cache.primes_up_to((top * reach).ceil() as u64 + 2)
}

/// Runs the lower-bound assembly for every `N` of the configuration.
pub fn run_theorem3i_pipeline(cfg: &ExperimentConfig, cache: &PrimeCache) -> Result<(ExperimentReport, Timing)> {
    run(PipelineKind::Theorem3i, cfg, cache)
}

/// Runs the averaged error-sum and tail checks for every `N >= 2` of the
/// configuration.
pub fn run_theorem3ii_pipeline(cfg: &ExperimentConfig, cache: &PrimeCache) -> Result<(ExperimentReport, Timing)> {
    run(PipelineKind::Theorem3ii, cfg, cache)
}

fn run(kind: PipelineKind, cfg: &ExperimentConfig, cache: &PrimeCache) -> Result<(ExperimentReport, Timing)> {
    cfg.validate()?;
    let start = Instant::now();
    let c = cfg.slope()?;
    let ns = cfg.n_values()?;
    let pool = WorkerPool::new(cfg.workers)?;
    let mut report = ExperimentReport::empty(kind, cfg);
    let mut per_n_ms = Vec::new();
    pool.install(|| -> Result<()> {
        let table = prime_table_for(cfg, &ns, cache)?;
        for &n in &ns {
            let t0 = Instant::now();
            match kind {
                PipelineKind::Theorem3i => report.metric.push(metric_record(n, cfg, &c, &table)?),
                PipelineKind::Theorem3ii if n >= 2 => report.sieve.push(sieve_record(n, cfg, &c, &table)?),
                PipelineKind::Theorem3ii => continue,
            }
            per_n_ms.push((n, ms(t0.elapsed())));
        }
        Ok(())
    })?;
    let bad = report.non_finite_fields();
    if !bad.is_empty() {
        return Err(Error::arg(format!("non-finite report fields: {}", bad.join(", "))));
    }
    Ok((
        report,
        Timing {
            pipeline: kind,
            total_ms: ms(start.elapsed()),
            per_n_ms,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::NSelection;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            a: 1.2,
            b: 1.8,
            n_selection: NSelection::QMax(5),
            samples: 20,
            workers: 2,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn blocks_descend() {
        assert_eq!(block_starts(100, 2.0), vec![50, 25, 12, 6, 3]);
        assert!(block_starts(2, 1.25).is_empty());
        let b = block_starts(20736, 1.25);
        assert!(b.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn degenerate_run_has_zero_counts() {
        let (rep, _) = run_theorem3i_pipeline(&small_cfg(), &PrimeCache::disabled()).unwrap();
        assert_eq!(rep.metric.iter().map(|r| r.n).collect::<Vec<_>>(), vec![1, 4, 25]);
        let first = &rep.metric[0];
        assert!(first.blocks.is_empty() && first.mc_estimate == 0.0 && first.exact_integral == 0.0);
        assert_eq!(first.target, 0.0);
        assert!(rep.non_finite_fields().is_empty());
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = small_cfg();
        let one = run_theorem3i_pipeline(&cfg, &PrimeCache::disabled()).unwrap().0;
        let mut other_workers = cfg.clone();
        other_workers.workers = 1;
        let two = run_theorem3i_pipeline(&cfg, &PrimeCache::disabled()).unwrap().0;
        assert_eq!(one.to_json().unwrap(), two.to_json().unwrap());
        let three = run_theorem3i_pipeline(&other_workers, &PrimeCache::disabled()).unwrap().0;
        assert_eq!(one.metric, three.metric);
    }

    #[test]
    fn input_hash_tracks_config() {
        let cfg = small_cfg();
        let mut other = cfg.clone();
        other.seed += 1;
        assert_ne!(input_hash(PipelineKind::Theorem3i, &cfg), input_hash(PipelineKind::Theorem3i, &other));
        assert_ne!(input_hash(PipelineKind::Theorem3i, &cfg), input_hash(PipelineKind::Theorem3ii, &cfg));
        assert_eq!(input_hash(PipelineKind::Theorem3i, &cfg).len(), 64);
    }

    #[test]
    fn sieve_pipeline_small() {
        let cfg = ExperimentConfig {
            eps: 0.12,
            ..small_cfg()
        };
        let (rep, timing) = run_theorem3ii_pipeline(&cfg, &PrimeCache::disabled()).unwrap();
        assert_eq!(rep.sieve.iter().map(|r| r.n).collect::<Vec<_>>(), vec![4, 25]);
        assert_eq!(timing.per_n_ms.len(), 2);
        assert!(rep.sieve.iter().all(|r| r.empirical_k >= 0.0));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = ExperimentConfig {
            eps: 0.5,
            ..small_cfg()
        };
        assert!(matches!(
            run_theorem3i_pipeline(&cfg, &PrimeCache::disabled()),
            Err(Error::Config(_))
        ));
    }
}
