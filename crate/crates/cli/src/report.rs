use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qlid::{BinReport, Comparison, SampleSupport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::ingest::SkipCounts;
use crate::pipeline::{sweep_order, FitRecord};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub path: String,
    pub n: usize,
    pub support: SampleSupport,
    pub total_lines: usize,
    pub skipped: SkipCounts,
}

/// Machine-readable outcome of `fit` or `sweep`. Contains nothing that
/// varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Report<'a> {
    pub command: &'static str,
    pub dataset: &'a DatasetSummary,
    pub config: &'a RunConfig,
    pub fits: &'a [FitRecord],
    pub comparison: &'a Comparison<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_bins: Option<&'a BinReport<f64>>,
}

/// Run facts that differ between otherwise identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub unix_time: u64,
    pub arguments: Vec<String>,
}

impl Metadata {
    pub fn now() -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            unix_time: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            arguments: std::env::args().collect(),
        }
    }
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    write(path, &s)
}

/// Comparison table followed by failures and warnings.
pub fn render_fit_text(records: &[FitRecord], comparison: &Comparison<f64>) -> String {
    let mut out = comparison.render_text();
    let notes = notes(records);
    if !notes.is_empty() {
        out.push('\n');
        out.push_str(&notes);
    }
    out
}

fn notes(records: &[FitRecord]) -> String {
    let mut out = String::new();
    for r in records {
        if let Some(e) = &r.error {
            let _ = writeln!(out, "! {} [{}]: failed: {e}", r.label, r.condition);
        }
        if let Some(f) = &r.result {
            if f.degenerate {
                let _ = writeln!(out, "! {} [{}]: degenerate objective, f1 equals f0", r.label, r.condition);
            }
            if f.diagnostics.at_boundary() {
                let names: Vec<&str> = f
                    .diagnostics
                    .boundary_params
                    .iter()
                    .map(|&i| f.params[i].0.as_str())
                    .collect();
                let _ = writeln!(
                    out,
                    "! {} [{}]: estimate on a bound ({})",
                    r.label,
                    r.condition,
                    names.join(", ")
                );
            }
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Sweep table as CSV, full precision.
pub fn sweep_csv(records: &[FitRecord]) -> String {
    let mut out = String::from(
        "spec_index,label,condition,q,p0,p1,u,params,criterion,aic,bic,status,artificial_bins\n",
    );
    for i in sweep_order(records) {
        let r = &records[i];
        let t = r.tuning;
        let (params, crit, aic, bic) = match &r.result {
            Some(f) => (
                f.params
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(";"),
                f.criterion_kind.labels().0.to_string(),
                f.aic.to_string(),
                f.bic.to_string(),
            ),
            None => Default::default(),
        };
        let status = match &r.error {
            Some(e) => format!("invalid: {}", e.replace('"', "'")),
            None => "ok".into(),
        };
        let bins = match &r.artificial_bins {
            Some(Ok(c)) => c.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
            Some(Err(e)) => format!("unavailable: {e}"),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},\"{}\",{},{},{},{},{},{},{},{},{},\"{}\",\"{}\"",
            r.spec_index,
            r.label,
            r.condition,
            opt(t.q),
            opt(t.p0),
            opt(t.p1),
            opt(t.u),
            params,
            crit,
            aic,
            bic,
            status,
            bins
        );
    }
    out
}

/// Sweep table as aligned text, 4 decimals.
pub fn sweep_text(records: &[FitRecord]) -> String {
    let f4 = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    let mut rows: Vec<Vec<String>> = vec![[
        "estimating function",
        "condition",
        "q",
        "p0",
        "p1",
        "u",
        "estimates",
        "criterion 1",
        "criterion 2",
        "bins",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()];
    for i in sweep_order(records) {
        let r = &records[i];
        let t = r.tuning;
        let (est, c1, c2) = match &r.result {
            Some(f) => {
                let (la, lb) = f.criterion_kind.labels();
                (
                    f.params
                        .iter()
                        .map(|(k, v)| format!("{k}={v:.4}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                    format!("{la}={:.4}", f.aic),
                    format!("{lb}={:.4}", f.bic),
                )
            }
            None => (
                format!("invalid: {}", r.error.as_deref().unwrap_or("")),
                String::new(),
                String::new(),
            ),
        };
        let bins = match &r.artificial_bins {
            Some(Ok(c)) => c.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
            Some(Err(_)) => "n/a".into(),
            None => String::new(),
        };
        rows.push(vec![
            r.label.clone(),
            r.condition.to_string(),
            f4(t.q),
            f4(t.p0),
            f4(t.p1),
            f4(t.u),
            est,
            c1,
            c2,
            bins,
        ]);
    }
    let mut widths = vec![0; rows[0].len()];
    for row in &rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
