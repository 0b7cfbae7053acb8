use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arith::MIN_FRAC_BITS;
use crate::error::{Error, Result};
use crate::realfield::{sequence_s, QuadraticIrrational};

/// Which values of `N` a run visits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NSelection {
    /// Explicit members of the test sequence of `c`.
    List(Vec<u64>),
    /// Every member `q^2` of the test sequence with `q <= q_max`.
    QMax(u64),
}

/// Parameters shared by every pipeline.
///
/// The text form is one `key = value` pair per line:
///
/// ```text
/// file    := { line "\n" }
/// line    := blank | comment | key "=" value
/// comment := "#" any*
/// key     := "c" | "A" | "B" | "a" | "b" | "eps" | "N_list" | "Q_max"
///          | "samples" | "seed" | "precision_bits" | "output_dir" | "workers"
/// ```
///
/// Whitespace around keys and values is trimmed. `N_list` is a comma
/// separated list; exactly one of `N_list` and `Q_max` must be present.
/// `seed` accepts decimal or `0x` hexadecimal. `workers = 0` means one
/// worker per available core.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub c: String,
    pub big_a: f64,
    pub big_b: f64,
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub n_selection: NSelection,
    pub samples: usize,
    pub seed: u64,
    pub precision_bits: u32,
    pub output_dir: PathBuf,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            c: "sqrt2".into(),
            big_a: 1.0,
            big_b: 2.0,
            a: 1.0,
            b: 2.0,
            eps: 0.1,
            n_selection: NSelection::QMax(12),
            samples: 200,
            seed: 1,
            precision_bits: 128,
            output_dir: PathBuf::from("out"),
            workers: 0,
        }
    }
}

const KEYS: [&str; 13] = [
    "c",
    "A",
    "B",
    "a",
    "b",
    "eps",
    "N_list",
    "Q_max",
    "samples",
    "seed",
    "precision_bits",
    "output_dir",
    "workers",
];

fn parse_real(key: &str, v: &str) -> std::result::Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("{key}: '{v}' is not a finite real")),
    }
}

fn parse_nat<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse::<T>()
        .map_err(|_| format!("{key}: '{v}' is not a natural number"))
}

fn parse_seed(v: &str) -> std::result::Result<u64, String> {
    let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => v.parse::<u64>(),
    };
    parsed.map_err(|_| format!("seed: '{v}' is not a 64-bit integer"))
}

impl ExperimentConfig {
    /// Parses the text form, then checks every invariant. All problems
    /// are reported together.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = Self::parse_unchecked(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses the text form without checking the invariants, so that
    /// overrides can still be applied.
    pub fn parse_unchecked(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut problems = Vec::new();
        let mut seen: Vec<&str> = Vec::new();
        let mut n_list = None;
        let mut q_max = None;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!("line {}: expected key = value", no + 1));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                problems.push(format!("line {}: unknown key '{key}'", no + 1));
                continue;
            };
            if seen.contains(&known) {
                problems.push(format!("line {}: duplicate key '{key}'", no + 1));
                continue;
            }
            seen.push(known);
            let outcome = match known {
                "N_list" => parse_n_list(value).map(|l| n_list = Some(l)),
                "Q_max" => parse_nat(key, value).map(|q| q_max = Some(q)),
                _ => cfg.set(known, value),
            };
            if let Err(e) = outcome {
                problems.push(format!("line {}: {e}", no + 1));
            }
        }
        match (n_list, q_max) {
            (Some(_), Some(_)) => problems.push("N_list and Q_max are mutually exclusive".into()),
            (Some(l), None) => cfg.n_selection = NSelection::List(l),
            (None, Some(q)) => cfg.n_selection = NSelection::QMax(q),
            (None, None) => problems.push("one of N_list or Q_max is required".into()),
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies one `key = value` override, as given on a command line.
    pub fn set_override(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let outcome = match key.trim() {
            "N_list" => parse_n_list(value).map(|l| self.n_selection = NSelection::List(l)),
            "Q_max" => parse_nat("Q_max", value).map(|q| self.n_selection = NSelection::QMax(q)),
            k if KEYS.contains(&k) => self.set(k, value),
            k => Err(format!("unknown key '{k}'")),
        };
        outcome.map_err(|e| Error::Config(vec![e]))
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "c" => self.c = v.to_string(),
            "A" => self.big_a = parse_real(key, v)?,
            "B" => self.big_b = parse_real(key, v)?,
            "a" => self.a = parse_real(key, v)?,
            "b" => self.b = parse_real(key, v)?,
            "eps" => self.eps = parse_real(key, v)?,
            "samples" => self.samples = parse_nat(key, v)?,
            "seed" => self.seed = parse_seed(v)?,
            "precision_bits" => self.precision_bits = parse_nat(key, v)?,
            "output_dir" => {
                if v.is_empty() {
                    return Err("output_dir: empty path".into());
                }
                self.output_dir = PathBuf::from(v)
            }
            "workers" => self.workers = parse_nat(key, v)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Lists every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let slope = self.slope();
        if let Err(e) = &slope {
            out.push(format!("c: {e}"));
        }
        if !(self.big_a > 0.0) {
            out.push(format!("A must be positive, got {}", self.big_a));
        }
        if !(self.big_a <= self.a) {
            out.push(format!("need A <= a, got A={} a={}", self.big_a, self.a));
        }
        if !(self.a < self.b) {
            out.push(format!("need a < b, got a={} b={}", self.a, self.b));
        }
        if !(self.b <= self.big_b) {
            out.push(format!("need b <= B, got b={} B={}", self.b, self.big_b));
        }
        if !(self.eps > 0.0 && self.eps < 0.2) {
            out.push(format!("eps must lie in (0, 1/5), got {}", self.eps));
        }
        if self.precision_bits < MIN_FRAC_BITS {
            out.push(format!(
                "precision_bits must be at least {MIN_FRAC_BITS}, got {}",
                self.precision_bits
            ));
        }
        if self.samples < 10 {
            out.push(format!("samples must be at least 10, got {}", self.samples));
        }
        match &self.n_selection {
            NSelection::List(l) if l.is_empty() => out.push("N_list is empty".into()),
            NSelection::List(l) => {
                if let Ok(c) = &slope {
                    let max = l.iter().copied().max().unwrap_or(0);
                    let members = sequence_s(c, max);
                    for n in l.iter().filter(|n| !members.contains(n)) {
                        out.push(format!("N_list: {n} is not in the test sequence of c"));
                    }
                }
            }
            NSelection::QMax(q) if *q == 0 => out.push("Q_max must be at least 1".into()),
            NSelection::QMax(q) if *q > u32::MAX as u64 => out.push("Q_max too large".into()),
            NSelection::QMax(_) => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn slope(&self) -> Result<QuadraticIrrational> {
        self.c.parse()
    }

    /// The values of `N` the pipelines visit, ascending.
    pub fn n_values(&self) -> Result<Vec<u64>> {
        let c = self.slope()?;
        Ok(match &self.n_selection {
            NSelection::List(l) => {
                let mut l = l.clone();
                l.sort_unstable();
                l.dedup();
                l
            }
            NSelection::QMax(q) => sequence_s(&c, q * q),
        })
    }

    /// Canonical text form; `parse(serialize(cfg)) == cfg`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "c = {}", self.c);
        let _ = writeln!(s, "A = {:?}", self.big_a);
        let _ = writeln!(s, "B = {:?}", self.big_b);
        let _ = writeln!(s, "a = {:?}", self.a);
        let _ = writeln!(s, "b = {:?}", self.b);
        let _ = writeln!(s, "eps = {:?}", self.eps);
        match &self.n_selection {
            NSelection::List(l) => {
                let items: Vec<String> = l.iter().map(u64::to_string).collect();
                let _ = writeln!(s, "N_list = {}", items.join(","));
            }
            NSelection::QMax(q) => {
                let _ = writeln!(s, "Q_max = {q}");
            }
        }
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "precision_bits = {}", self.precision_bits);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "workers = {}", self.workers);
        s
    }
}

fn parse_n_list(v: &str) -> std::result::Result<Vec<u64>, String> {
    v.split(',')
        .map(|item| parse_nat::<u64>("N_list", item.trim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# metric trend run
c = sqrt2
A = 1
B = 2
a = 1.2
b = 1.8
eps = 0.1
Q_max = 144
samples = 200
seed = 0x2a
precision_bits = 128
output_dir = out/run1
";

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.a, 1.2);
        assert_eq!(cfg.n_values().unwrap(), vec![1, 4, 25, 144, 841, 4900]);
        assert_eq!(cfg.workers, 0);
    }

    #[test]
    fn round_trip() {
        let mut cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(ExperimentConfig::parse(&cfg.serialize()).unwrap(), cfg);
        cfg.n_selection = NSelection::List(vec![25, 144]);
        cfg.eps = 0.1 + 1e-17;
        cfg.c = "(1+1*sqrt(5))/2".into();
        cfg.n_selection = NSelection::List(vec![1, 4, 9]);
        let text = cfg.serialize();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg, "{text}");
    }

    #[test]
    fn lists_every_violation() {
        let text = "c = sqrt2\nA = 2\nB = 1\na = 1\nb = 1\neps = 0.3\nQ_max = 5\nprecision_bits = 64\nsamples = 3\n";
        let Err(Error::Config(v)) = ExperimentConfig::parse(text) else {
            panic!("expected a config error");
        };
        assert_eq!(v.len(), 5, "{v:?}");
        assert!(v.iter().any(|m| m.contains("eps")));
        assert!(v.iter().any(|m| m.contains("precision_bits")));
    }

    #[test]
    fn syntax_problems() {
        let Err(Error::Config(v)) = ExperimentConfig::parse("c sqrt2\nfoo = 1\nQ_max = 5\nQ_max = 6\n") else {
            panic!("expected a config error");
        };
        assert_eq!(v.len(), 3, "{v:?}");
        assert!(ExperimentConfig::parse("N_list = 4\nQ_max = 5\n").is_err());
        assert!(ExperimentConfig::parse("").is_err());
    }

    #[test]
    fn n_list_must_be_sequence_members() {
        assert!(ExperimentConfig::parse("N_list = 25, 144\n").is_ok());
        let Err(Error::Config(v)) = ExperimentConfig::parse("N_list = 25, 100\n") else {
            panic!("expected a config error");
        };
        assert!(v[0].contains("100"));
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        cfg.set_override("seed", "7").unwrap();
        cfg.set_override("N_list", "1,4").unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.n_values().unwrap(), vec![1, 4]);
        assert!(cfg.set_override("colour", "red").is_err());
        assert!(cfg.set_override("eps", "x").is_err());
    }
}
