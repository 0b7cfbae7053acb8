use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rand::Rng;
use serde_json::json;

use pla_core::arith::{divisor_count, von_mangoldt_table, FixedReal};
use pla_core::counting::{count_f_n, g_n, integral_f_n, IntegralSpec};
use pla_core::expsum::{
    default_u, dyadic_blocks, z1_bound, z1_h, z2_bound, z2_h, z_h, z_h_bound, z_hk, z_hk_bound, ExpSumResult, Window,
};
use pla_core::fourier::{adversarial_points, check_vaaler, vaughan_b_table, vaughan_pieces_table, VaalerKernel};
use pla_core::harness::{
    emit_plotdata, run_theorem3i_pipeline, run_theorem3ii_pipeline, ExperimentConfig, ExperimentReport, PlotKind,
    PrimeCache,
};
use pla_core::realfield::QuadraticIrrational;
use pla_core::seed::substream;
use pla_core::sievecount::{cells_up_to, j_n_average, sieve_cell, JnSpec, SieveSetup};
use pla_core::{Error, Result};

use crate::Outcome;

fn slope(c: &str) -> Result<QuadraticIrrational> {
    c.parse()
}

fn alpha(s: &str, precision: u32) -> Result<FixedReal> {
    FixedReal::parse_decimal(s, precision)
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

pub fn count(alpha_s: &str, c: &str, eps: f64, n: u64, emit_triples: bool, precision: u32) -> Result<Outcome> {
    let c = slope(c)?;
    let a = alpha(alpha_s, precision)?;
    let res = count_f_n(&a, &c, eps, n)?;
    if emit_triples {
        println!("p,q,r,slack1,slack2");
        for t in &res.triples {
            println!("{},{},{},{:e},{:e}", t.p, t.q, t.r, t.slack1, t.slack2);
        }
    } else {
        print_json(&json!({"N": n, "alpha": alpha_s, "count": res.count}))?;
    }
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
pub fn integral(
    c: &str,
    a: f64,
    b: f64,
    big_a: f64,
    big_b: f64,
    eps: f64,
    n: u64,
    samples: usize,
    seed: u64,
    precision: u32,
) -> Result<Outcome> {
    let c = slope(c)?;
    let spec = IntegralSpec {
        a,
        b,
        eps,
        n,
        samples,
        seed,
        frac_bits: precision,
    };
    let est = integral_f_n(&c, &spec)?;
    let target = (b - a) * g_n(big_a, big_b, eps, n as f64)?;
    print_json(&json!({
        "estimate": est.estimate,
        "stderr": est.stderr,
        "gn_ratio": est.estimate / target,
        "exact": est.exact,
    }))?;
    Ok(Outcome::Ok)
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SumChoice {
    /// Z(H), summed directly.
    Z,
    /// Type I part Z_1(H).
    Z1,
    /// Type II part Z_2(H).
    Z2,
    /// Dyadic block Z(H, K).
    Zhk,
}

#[derive(Args)]
pub struct ExpsumArgs {
    #[arg(long, value_enum, default_value = "z")]
    kind: SumChoice,
    #[arg(long = "H", value_delimiter = ',', default_value = "1")]
    h: Vec<u64>,
    #[arg(long = "P", value_delimiter = ',', required = true)]
    p: Vec<u64>,
    /// Defaults to ceil(P^(2/5)).
    #[arg(long = "U")]
    u: Option<u64>,
    /// Block starts for zhk; defaults to every dyadic block.
    #[arg(long = "K", value_delimiter = ',')]
    k: Vec<u64>,
    #[arg(long, default_value = "sqrt2")]
    c: String,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// N in the bound formulas; defaults to ceil(b P).
    #[arg(long = "N")]
    n: Option<u64>,
}

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn expsum_row(r: &ExpSumResult, bound: f64) {
    println!(
        "{},{},{},{},{},{},{},{:.3}",
        r.big_h,
        r.window.p,
        opt(r.u),
        opt(r.k),
        r.value,
        bound,
        r.value / bound,
        r.elapsed.as_secs_f64() * 1e3
    );
}

pub fn expsum(args: &ExpsumArgs) -> Result<Outcome> {
    let c = slope(&args.c)?;
    println!("H,P,U,K,value,bound,ratio,elapsed_ms");
    for &p in &args.p {
        let window = Window::standard(p, args.a, args.b)?;
        let u = args.u.unwrap_or_else(|| default_u(p));
        let n = args.n.map_or_else(|| (args.b * p as f64).ceil(), |n| n as f64);
        for &h in &args.h {
            match args.kind {
                SumChoice::Z => expsum_row(&z_h(h, &c, &window)?, z_h_bound(h, n, args.eps)),
                SumChoice::Z1 => expsum_row(&z1_h(h, &c, &window, u)?, z1_bound(h, p, u, n, args.eps)),
                SumChoice::Z2 => expsum_row(&z2_h(h, &c, &window, u)?, z2_bound(h, p, u, n, args.eps)),
                SumChoice::Zhk => {
                    let ks = if args.k.is_empty() { dyadic_blocks(&window, u) } else { args.k.clone() };
                    for k in ks {
                        expsum_row(&z_hk(h, k, &c, &window, u)?, z_hk_bound(h, k, p, n, args.eps));
                    }
                }
            }
        }
    }
    Ok(Outcome::Ok)
}

pub fn vaaler_check(degrees: &[usize], uniform: usize, adversarial: usize, seed: u64) -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for &j in degrees {
        let kernel = VaalerKernel::new(j)?;
        let mut rng = substream(seed, "vaaler", j as u64);
        let mut points: Vec<f64> = (0..uniform).map(|_| rng.random_range(-4.0..4.0)).collect();
        points.extend(adversarial_points(j, adversarial));
        let chk = check_vaaler(&kernel, &points);
        let pass = chk.passes(-1e-12, 1e-10);
        if !pass {
            failed.push(j.to_string());
        }
        rows.push(json!({
            "degree": j,
            "points": chk.points,
            "min_delta": chk.min_delta,
            "max_excess": chk.max_excess,
            "pass": pass,
        }));
    }
    print_json(&serde_json::Value::Array(rows))?;
    if failed.is_empty() {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::AssertionFailed(format!("Vaaler inequality fails for degree {}", failed.join(", "))))
    }
}

pub fn vaughan_check(u: u64, v: u64, from: Option<u64>, n_max: u64, k_max: u64) -> Result<Outcome> {
    if u == 0 || v == 0 {
        return Err(Error::InvalidArgument("U and V must be at least 1".into()));
    }
    let pieces = vaughan_pieces_table(n_max as usize, u, v);
    let lambda = von_mangoldt_table(n_max as usize);
    let start = from.unwrap_or(u.max(v) + 1).max(1);
    let mut max_err = 0.0f64;
    let mut worst = 0;
    for n in start..=n_max {
        let err = (pieces[n as usize].reconstruct() - lambda[n as usize]).abs();
        if err > max_err {
            max_err = err;
            worst = n;
        }
    }
    let b = vaughan_b_table(k_max as usize, v);
    let mut tau_violations = 0u64;
    for k in 1..=k_max {
        if b[k as usize].unsigned_abs() > divisor_count(k)? {
            tau_violations += 1;
        }
    }
    let pass = max_err <= 1e-9 && tau_violations == 0;
    print_json(&json!({
        "U": u,
        "V": v,
        "n_range": [start, n_max],
        "max_abs_error": max_err,
        "worst_n": worst,
        "k_max": k_max,
        "b_exceeds_tau": tau_violations,
        "pass": pass,
    }))?;
    if pass {
        Ok(Outcome::Ok)
    } else {
        Ok(Outcome::AssertionFailed(format!(
            "max reconstruction error {max_err:e} at n={worst}, {tau_violations} values with |b(k)| > tau(k)"
        )))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn sieve_count(
    alpha_s: &str,
    c: &str,
    n: u64,
    eps: f64,
    max_product: Option<u64>,
    with_e: bool,
    precision: u32,
) -> Result<Outcome> {
    let c = slope(c)?;
    let a = alpha(alpha_s, precision)?;
    let setup = SieveSetup::new(n, eps)?;
    let cells = match max_product {
        Some(m) => cells_up_to(m),
        None => setup.cells(),
    };
    println!("d1,d2,d3,count,main_term,rel_err,E_value");
    for d in cells {
        let cell = sieve_cell(&a, &c, &setup, d, with_e)?;
        let e = if with_e { cell.e_value.to_string() } else { String::new() };
        println!(
            "{},{},{},{},{},{},{}",
            cell.d1,
            cell.d2,
            cell.d3,
            cell.count,
            cell.main_term,
            cell.rel_err(),
            e
        );
    }
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
pub fn jn_average(
    c: &str,
    ns: &[u64],
    eps: f64,
    big_a: f64,
    big_b: f64,
    samples: usize,
    seed: u64,
    precision: u32,
) -> Result<Outcome> {
    let c = slope(c)?;
    let spec = JnSpec {
        big_a,
        big_b,
        eps,
        samples,
        seed,
        frac_bits: precision,
    };
    let mut rows = Vec::new();
    for &n in ns {
        let avg = j_n_average(&c, n, &spec)?;
        rows.push(json!({"N": n, "normalized_value": avg.normalized_value, "stderr": avg.stderr}));
    }
    print_json(&serde_json::Value::Array(rows))?;
    Ok(Outcome::Ok)
}

fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", p.display())]))?;
            ExperimentConfig::parse_unchecked(&text)?
        }
        None => ExperimentConfig::default(),
    };
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(vec![format!("override '{o}' is not KEY=VALUE")]))?;
        cfg.set_override(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn pipeline(theorem3i: bool, config: Option<&Path>, overrides: &[String], check: bool) -> Result<Outcome> {
    let cfg = load_config(config, overrides)?;
    let cache = PrimeCache::from_env();
    let (report, timing) = if theorem3i {
        run_theorem3i_pipeline(&cfg, &cache)?
    } else {
        run_theorem3ii_pipeline(&cfg, &cache)?
    };
    fs::create_dir_all(&cfg.output_dir)?;
    let stem = report.pipeline.name();
    let report_path = cfg.output_dir.join(format!("{stem}.report.json"));
    fs::write(&report_path, report.to_json()?)?;
    fs::write(
        cfg.output_dir.join(format!("{stem}.timing.json")),
        serde_json::to_string_pretty(&timing)? + "\n",
    )?;
    print_json(&json!({
        "report": report_path.display().to_string(),
        "input_hash": report.input_hash,
        "digest": report.digest()?,
    }))?;
    if check {
        let bad: Vec<String> = report
            .metric
            .iter()
            .filter(|r| !routes_agree(r.mc_estimate, r.mc_stderr, r.exact_integral))
            .map(|r| r.n.to_string())
            .collect();
        if !bad.is_empty() {
            return Ok(Outcome::AssertionFailed(format!(
                "integral routes differ by more than 3 standard errors at N = {}",
                bad.join(", ")
            )));
        }
    }
    Ok(Outcome::Ok)
}

/// Within three standard errors; an exact match also passes when every
/// sample agreed.
fn routes_agree(estimate: f64, stderr: f64, exact: f64) -> bool {
    (estimate - exact).abs() <= 3.0 * stderr || (stderr == 0.0 && exact == estimate)
}

pub fn emit_plots(report: &Path, kind: Option<&str>, out: Option<&Path>) -> Result<Outcome> {
    let text = fs::read_to_string(report)?;
    let rep: ExperimentReport = serde_json::from_str(&text)?;
    let kinds = match kind {
        Some(k) => vec![k.parse::<PlotKind>()?],
        None => PlotKind::ALL.to_vec(),
    };
    let dir: PathBuf = match out {
        Some(d) => d.to_path_buf(),
        None => report.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    for k in kinds {
        println!("{}", emit_plotdata(&rep, k, &dir)?.display());
    }
    Ok(Outcome::Ok)
}
