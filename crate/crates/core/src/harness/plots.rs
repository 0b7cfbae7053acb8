use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::json;

use crate::error::{Error, Result};

use super::pipeline::ExperimentReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    RatioVsN,
    RatioVsP,
    BoundDiagnostics,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [PlotKind::RatioVsN, PlotKind::RatioVsP, PlotKind::BoundDiagnostics];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::RatioVsN => "ratio-vs-N",
            PlotKind::RatioVsP => "ratio-vs-P",
            PlotKind::BoundDiagnostics => "bound-diagnostics",
        }
    }

    /// Column names with their meaning, in file order.
    pub fn columns(self) -> &'static [(&'static str, &'static str)] {
        match self {
            PlotKind::RatioVsN => &[
                ("pipeline", "theorem3i or theorem3ii"),
                ("N", "member of the test sequence"),
                ("series", "name of the plotted ratio"),
                ("value", "ratio value"),
                ("stderr", "standard error of the value, 0 when exact"),
            ],
            PlotKind::RatioVsP => &[
                ("N", "member of the test sequence"),
                ("P", "block start"),
                ("series", "t_ratio, r_ratio or lower_share"),
                ("value", "ratio value"),
            ],
            PlotKind::BoundDiagnostics => &[
                ("pipeline", "theorem3i or theorem3ii"),
                ("N", "member of the test sequence"),
                ("P", "block start, 0 when not block specific"),
                ("quantity", "diagnostic name"),
                ("measured", "measured value"),
                ("bound", "reference formula value"),
                ("ratio", "measured / bound, 0 when the bound vanishes"),
            ],
        }
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = PlotKind::ALL.iter().map(|k| k.name()).collect();
            Error::arg(format!("unknown plot kind '{s}', expected one of: {}", names.join(", ")))
        })
    }
}

fn rows(report: &ExperimentReport, kind: PlotKind) -> Vec<String> {
    let pipe = report.pipeline.name();
    let mut out = Vec::new();
    match kind {
        PlotKind::RatioVsN => {
            for r in &report.metric {
                let rel = |x: f64| if r.target > 0.0 { x / r.target } else { 0.0 };
                out.push(format!("{pipe},{},mc_ratio,{},{}", r.n, r.mc_ratio, rel(r.mc_stderr)));
                out.push(format!("{pipe},{},exact_ratio,{},0", r.n, r.exact_ratio));
                out.push(format!("{pipe},{},lower_ratio,{},0", r.n, r.lower_ratio));
            }
            for r in &report.sieve {
                out.push(format!("{pipe},{},jn_normalized,{},{}", r.n, r.jn_normalized, r.jn_stderr));
                out.push(format!("{pipe},{},empirical_k,{},0", r.n, r.empirical_k));
            }
        }
        PlotKind::RatioVsP => {
            for r in &report.metric {
                for b in &r.blocks {
                    let share = if r.lower_bound > 0.0 { b.lower_contribution / r.lower_bound } else { 0.0 };
                    out.push(format!("{},{},t_ratio,{}", r.n, b.p, b.t_ratio));
                    out.push(format!("{},{},r_ratio,{}", r.n, b.p, b.r_ratio));
                    out.push(format!("{},{},lower_share,{}", r.n, b.p, share));
                }
            }
        }
        PlotKind::BoundDiagnostics => {
            let metric = report.metric.iter().map(|r| (r.n, &r.diagnostics));
            let sieve = report.sieve.iter().map(|r| (r.n, &r.diagnostics));
            for (n, diags) in metric.chain(sieve) {
                for d in diags {
                    out.push(format!(
                        "{pipe},{n},{},{},{},{},{}",
                        d.p, d.quantity, d.measured, d.bound, d.ratio
                    ));
                }
            }
        }
    }
    out
}

/// CSV text for one plot kind.
pub fn plot_csv(report: &ExperimentReport, kind: PlotKind) -> String {
    let mut s = String::new();
    let header: Vec<&str> = kind.columns().iter().map(|c| c.0).collect();
    let _ = writeln!(s, "{}", header.join(","));
    for row in rows(report, kind) {
        let _ = writeln!(s, "{row}");
    }
    s
}

/// JSON sidecar describing the columns of a plot kind.
pub fn plot_schema(kind: PlotKind) -> String {
    let cols: Vec<_> = kind
        .columns()
        .iter()
        .map(|(name, desc)| json!({"name": name, "description": desc}))
        .collect();
    let v = json!({"kind": kind.name(), "format": "csv", "header": true, "columns": cols});
    serde_json::to_string_pretty(&v).expect("static schema") + "\n"
}

/// Writes `<kind>.csv` and `<kind>.schema.json` into `dir`, returning the
/// CSV path.
pub fn emit_plotdata(report: &ExperimentReport, kind: PlotKind, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{}.csv", kind.name()));
    fs::write(&csv, plot_csv(report, kind))?;
    fs::write(dir.join(format!("{}.schema.json", kind.name())), plot_schema(kind))?;
    Ok(csv)
}
