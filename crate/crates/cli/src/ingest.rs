use std::fs;
use std::path::Path;

use qlid::{Sample, SampleSupport};
use serde::Serialize;

use crate::CliError;

/// Values parsed from a data file plus what was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub values: Vec<f64>,
    pub total_lines: usize,
    pub skipped: SkipCounts,
}

/// Lines that did not contribute a value, by reason.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SkipCounts {
    pub blank: usize,
    pub comment: usize,
    pub missing: usize,
    pub non_numeric: usize,
}

impl SkipCounts {
    pub fn total(&self) -> usize {
        self.blank + self.comment + self.missing + self.non_numeric
    }
}

impl Ingested {
    pub fn into_sample(self, support: SampleSupport) -> Result<Sample<f64>, CliError> {
        Sample::new(self.values, support).map_err(|e| CliError::Ingest(e.to_string()))
    }

    /// Half line unless some observation is negative.
    pub fn inferred_support(&self) -> SampleSupport {
        if self.values.iter().any(|&v| v < 0.0) {
            SampleSupport::FullLine
        } else {
            SampleSupport::HalfLine
        }
    }
}

/// Parses one value per line. A CSV line contributes its first field.
pub fn parse(text: &str) -> Ingested {
    let mut values = Vec::new();
    let mut skipped = SkipCounts::default();
    let mut total_lines = 0;
    for line in text.lines() {
        total_lines += 1;
        let line = line.trim();
        if line.is_empty() {
            skipped.blank += 1;
            continue;
        }
        if line.starts_with('#') {
            skipped.comment += 1;
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim().trim_matches('"');
        if field.is_empty()
            || field == "-"
            || field.eq_ignore_ascii_case("na")
            || field.eq_ignore_ascii_case("nan")
        {
            skipped.missing += 1;
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ => skipped.non_numeric += 1,
        }
    }
    Ingested {
        values,
        total_lines,
        skipped,
    }
}

pub fn read(path: &Path) -> Result<Ingested, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;
    let data = parse(&text);
    if data.values.is_empty() {
        return Err(CliError::Ingest(format!(
            "{}: no numeric values",
            path.display()
        )));
    }
    Ok(data)
}
