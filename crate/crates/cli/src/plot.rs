//! Histogram and fitted-density curves as CSV, plus an SVG overlay.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qlid::{bin_count, BinReport, DistributionSpec, Sample, SampleSupport};

use crate::report::write;
use crate::CliError;

pub const CURVE_POINTS: usize = 512;
const DEFAULT_BINS: usize = 20;

/// A density to draw and its legend text.
#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub density: DistributionSpec<f64>,
}

/// Data range padded by 10% on each side, clamped at 0 on the half line.
pub fn plot_range(sample: &Sample<f64>) -> (f64, f64) {
    let (lo, hi) = (sample.min(), sample.max());
    let pad = 0.1 * (hi - lo).max(f64::EPSILON * hi.abs().max(1.0));
    let mut lo = lo - pad;
    if sample.support() == SampleSupport::HalfLine {
        lo = lo.max(0.0);
    }
    (lo, hi + pad)
}

/// `CURVE_POINTS` evenly spaced `(x, pdf)` pairs over `range`.
pub fn curve_points(density: &DistributionSpec<f64>, range: (f64, f64)) -> Vec<(f64, f64)> {
    let prepared = density.prepare();
    let step = (range.1 - range.0) / (CURVE_POINTS - 1) as f64;
    (0..CURVE_POINTS)
        .map(|i| {
            let x = if i == CURVE_POINTS - 1 {
                range.1
            } else {
                range.0 + step * i as f64
            };
            let y = match &prepared {
                Ok(d) => qlid::Density::pdf(d, x),
                Err(_) => f64::NAN,
            };
            (x, y)
        })
        .collect()
}

/// Equal-width edges over the data range when none are given.
pub fn default_edges(sample: &Sample<f64>) -> Vec<f64> {
    let (lo, hi) = (sample.min(), sample.max());
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let w = (hi - lo) / DEFAULT_BINS as f64;
    (0..=DEFAULT_BINS)
        .map(|i| if i == DEFAULT_BINS { hi } else { lo + w * i as f64 })
        .collect()
}

/// Writes `histogram.csv`, one `curve_<i>.csv` per curve and `overlay.svg`
/// into `dir`; returns the written paths.
pub fn emit(
    dir: &Path,
    sample: &Sample<f64>,
    curves: &[Curve],
    edges: Option<&[f64]>,
) -> Result<Vec<PathBuf>, CliError> {
    let edges = edges.map(<[f64]>::to_vec).unwrap_or_else(|| default_edges(sample));
    let bins = bin_count(sample.values(), &edges).map_err(|e| CliError::Config(e.to_string()))?;
    let range = plot_range(sample);
    let mut written = Vec::new();

    let path = dir.join("histogram.csv");
    write(&path, &histogram_csv(&bins, sample.len()))?;
    written.push(path);

    let mut traces = Vec::with_capacity(curves.len());
    for (i, c) in curves.iter().enumerate() {
        let pts = curve_points(&c.density, range);
        let mut csv = String::from("x,pdf\n");
        for (x, y) in &pts {
            let _ = writeln!(csv, "{x},{y}");
        }
        let path = dir.join(format!("curve_{i}.csv"));
        write(&path, &csv)?;
        written.push(path);
        traces.push(pts);
    }

    let path = dir.join("overlay.svg");
    write(&path, &overlay_svg(&bins, sample.len(), curves, &traces, range))?;
    written.push(path);
    Ok(written)
}

/// Counts plus the density-scaled height of each half-open bin.
fn histogram_csv(bins: &BinReport<f64>, n: usize) -> String {
    let mut out = String::from("left,right,count,density\n");
    let m = bins.edges.len();
    for i in 0..m {
        let left = bins.edges[i];
        let (right, density) = if i + 1 < m {
            let r = bins.edges[i + 1];
            (r, bins.counts[i] as f64 / (n as f64 * (r - left)))
        } else {
            // exact hits on the last edge have no width
            (left, f64::NAN)
        };
        let _ = writeln!(out, "{left},{right},{},{density}", bins.counts[i]);
    }
    let _ = writeln!(out, "out_of_range,,{},", bins.out_of_range());
    out
}

const COLORS: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn overlay_svg(
    bins: &BinReport<f64>,
    n: usize,
    curves: &[Curve],
    traces: &[Vec<(f64, f64)>],
    range: (f64, f64),
) -> String {
    let (w, h, margin) = (720.0, 440.0, 50.0);
    let m = bins.edges.len();
    let heights: Vec<f64> = (0..m - 1)
        .map(|i| bins.counts[i] as f64 / (n as f64 * (bins.edges[i + 1] - bins.edges[i])))
        .collect();
    // bars outside the padded data range are clipped to it
    let (x_lo, x_hi) = range;
    let y_max = heights
        .iter()
        .chain(traces.iter().flatten().map(|(_, y)| y))
        .copied()
        .filter(|y| y.is_finite())
        .fold(0.0, f64::max)
        .max(1e-12)
        * 1.05;
    let sx = |x: f64| margin + (x.clamp(x_lo, x_hi) - x_lo) / (x_hi - x_lo) * (w - 2.0 * margin);
    let sy = |y: f64| h - margin - y.min(y_max) / y_max * (h - 2.0 * margin);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r##"<g fill="#bbbbbb" stroke="#555555" stroke-width="0.5">"##);
    for (i, &ht) in heights.iter().enumerate() {
        let (x0, x1) = (sx(bins.edges[i]), sx(bins.edges[i + 1]));
        if x1 <= x0 {
            continue;
        }
        let y = sy(ht);
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}"/>"#,
            x1 - x0,
            h - margin - y
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r##"<g stroke="#000000" stroke-width="1"><line x1="{margin}" y1="{0}" x2="{1}" y2="{0}"/><line x1="{margin}" y1="{margin}" x2="{margin}" y2="{0}"/></g>"##,
        h - margin,
        w - margin
    );
    let _ = writeln!(
        s,
        r#"<g font-family="sans-serif" font-size="11"><text x="{margin}" y="{:.1}">{x_lo:.4}</text><text x="{:.1}" y="{:.1}" text-anchor="end">{x_hi:.4}</text></g>"#,
        h - margin + 16.0,
        w - margin,
        h - margin + 16.0
    );
    for (i, (curve, pts)) in curves.iter().zip(traces).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = pts
            .iter()
            .filter(|(_, y)| y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            w - margin - 260.0,
            margin + 14.0 * (i as f64 + 1.0),
            escape(&curve.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
