//! `pla`: command-line access to the counting, exponential-sum, sieve and
//! pipeline experiments.
//!
//! Exit status is 0 on success, 2 for invalid configuration or arguments,
//! 3 when a check subcommand finds a violated assertion and 1 for I/O
//! failures.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pla_core::Error;

#[derive(Parser)]
#[command(name = "pla", version, about = "Prime-constrained Diophantine approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Slope shared by most subcommands.
#[derive(Args, Clone)]
struct SlopeArg {
    /// `sqrt2`, `golden`, `1+sqrt3` or `(u+v*sqrt(d))/w`.
    #[arg(long, default_value = "sqrt2")]
    c: String,
}

#[derive(Subcommand)]
enum Command {
    /// Count F_N(alpha), optionally listing every triple as CSV.
    Count {
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        slope: SlopeArg,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long = "N")]
        n: u64,
        /// Print p,q,r,slack1,slack2 rows instead of the total.
        #[arg(long)]
        emit_triples: bool,
        #[arg(long, default_value_t = 128)]
        precision: u32,
    },
    /// Estimate the integral of F_N over [a, b] by sampling and exactly.
    Integral {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
        /// Lower end of the outer interval used by G_N; defaults to a.
        #[arg(long = "A")]
        big_a: Option<f64>,
        /// Upper end of the outer interval used by G_N; defaults to b.
        #[arg(long = "B")]
        big_b: Option<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        slope: SlopeArg,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 128)]
        precision: u32,
    },
    /// Exponential sums over primes against their bound formulas, as CSV.
    Expsum(commands::ExpsumArgs),
    /// Check |psi* - psi| <= delta for the Vaaler kernel.
    VaalerCheck {
        /// Comma separated kernel degrees.
        #[arg(long, default_value = "1,4,16,128", value_delimiter = ',')]
        degree: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        uniform: usize,
        #[arg(long, default_value_t = 1_000)]
        adversarial: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Check that Vaughan's identity reconstructs Lambda(n) and b(k) <= tau(k).
    VaughanCheck {
        #[arg(long = "U", default_value_t = 20)]
        u: u64,
        #[arg(long = "V", default_value_t = 20)]
        v: u64,
        /// First n to check; defaults to max(U, V) + 1.
        #[arg(long)]
        from: Option<u64>,
        #[arg(long, default_value_t = 5000)]
        n_max: u64,
        #[arg(long, default_value_t = 100_000)]
        k_max: u64,
    },
    /// Per-cell sieve counts as CSV.
    SieveCount {
        #[arg(long)]
        alpha: String,
        #[command(flatten)]
        slope: SlopeArg,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 0.12)]
        eps: f64,
        /// Largest d1 d2 d3; defaults to floor(N^eps).
        #[arg(long)]
        max_product: Option<u64>,
        /// Skip the Fourier error term.
        #[arg(long)]
        no_e: bool,
        #[arg(long, default_value_t = 128)]
        precision: u32,
    },
    /// Averaged weighted error sums, as a JSON array.
    JnAverage {
        #[command(flatten)]
        slope: SlopeArg,
        /// Comma separated members of the test sequence.
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long, default_value_t = 0.12)]
        eps: f64,
        #[arg(long = "A", default_value_t = 1.0)]
        big_a: f64,
        #[arg(long = "B", default_value_t = 2.0)]
        big_b: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        precision: u32,
    },
    /// Lower-bound assembly and integral estimates for every N.
    #[command(name = "pipeline-3i")]
    Pipeline3i(PipelineArgs),
    /// Averaged error sums and tail checks for every N.
    #[command(name = "pipeline-3ii")]
    Pipeline3ii(PipelineArgs),
    /// Write plot CSVs and schema sidecars from a report.
    EmitPlots {
        #[arg(long)]
        report: PathBuf,
        /// ratio-vs-N, ratio-vs-P or bound-diagnostics; all when omitted.
        #[arg(long)]
        kind: Option<String>,
        /// Defaults to the report's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// Configuration file of key = value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. --set seed=7.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Fail with status 3 when the two integral routes disagree by more
    /// than three standard errors.
    #[arg(long)]
    check: bool,
}

/// Outcome of a subcommand that may find a failed assertion.
pub enum Outcome {
    Ok,
    AssertionFailed(String),
}

fn run(cli: Cli) -> pla_core::Result<Outcome> {
    use commands as c;
    match cli.command {
        Command::Count {
            alpha,
            slope,
            eps,
            n,
            emit_triples,
            precision,
        } => c::count(&alpha, &slope.c, eps, n, emit_triples, precision),
        Command::Integral {
            a,
            b,
            big_a,
            big_b,
            samples,
            seed,
            slope,
            eps,
            n,
            precision,
        } => c::integral(
            &slope.c,
            a,
            b,
            big_a.unwrap_or(a),
            big_b.unwrap_or(b),
            eps,
            n,
            samples,
            seed,
            precision,
        ),
        Command::Expsum(args) => c::expsum(&args),
        Command::VaalerCheck {
            degree,
            uniform,
            adversarial,
            seed,
        } => c::vaaler_check(&degree, uniform, adversarial, seed),
        Command::VaughanCheck {
            u,
            v,
            from,
            n_max,
            k_max,
        } => c::vaughan_check(u, v, from, n_max, k_max),
        Command::SieveCount {
            alpha,
            slope,
            n,
            eps,
            max_product,
            no_e,
            precision,
        } => c::sieve_count(&alpha, &slope.c, n, eps, max_product, !no_e, precision),
        Command::JnAverage {
            slope,
            n,
            eps,
            big_a,
            big_b,
            samples,
            seed,
            precision,
        } => c::jn_average(&slope.c, &n, eps, big_a, big_b, samples, seed, precision),
        Command::Pipeline3i(p) => c::pipeline(true, p.config.as_deref(), &p.overrides, p.check),
        Command::Pipeline3ii(p) => c::pipeline(false, p.config.as_deref(), &p.overrides, p.check),
        Command::EmitPlots { report, kind, out } => c::emit_plots(&report, kind.as_deref(), out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionFailed(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) | Error::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
