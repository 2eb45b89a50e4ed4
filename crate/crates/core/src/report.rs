//! Artifact emission: deterministic CSV/JSON/SVG writers, content hashing,
//! run manifests, and atomic file writes. Floating-point output carries 17
//! significant digits (enough to round-trip f64 bit-exactly); fitted slopes
//! are printed at 6. No timestamps anywhere, so identical inputs produce
//! byte-identical artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// 17 significant digits, scientific.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// 6 significant digits for fitted slopes.
pub fn fmt_slope(v: f64) -> String {
    format!("{v:.5e}")
}

/// FNV-1a 64-bit content hash, hex-encoded. Stable across platforms and
/// releases, unlike the standard library's default hasher.
pub fn content_digest(text: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Provenance record emitted next to every artifact set: identical manifest
/// implies bit-identical outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub toolkit_version: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config_text: &str) -> Self {
        RunManifest {
            command: command.into(),
            config_digest: content_digest(config_text),
            inputs: Vec::new(),
            outputs: Vec::new(),
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization")
    }
}

/// Writes via a temporary sibling then renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = PathBuf::from(path);
    let file_name = tmp
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    tmp.set_file_name(format!(".{file_name}.tmp"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Rate-report CSV: one row per (epsilon, norm) pair with the fitted slope
/// repeated in its column.
pub fn rate_report_csv(rows: &[(f64, &str, f64, Option<f64>)]) -> String {
    let mut out = String::from("epsilon,norm_name,value,fitted_slope\n");
    for (eps, name, value, slope) in rows {
        let slope_txt = slope.map(fmt_slope).unwrap_or_default();
        let _ = writeln!(out, "{},{name},{},{slope_txt}", fmt_float(*eps), fmt_float(*value));
    }
    out
}

/// Generic series CSV with a header row.
pub fn series_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cols: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// One named polyline for the SVG plotters.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

fn svg_plot(series: &[Series], title: &str, logx: bool, logy: bool) -> String {
    let map = |v: f64, log: bool| if log { v.log10() } else { v };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if (!logx || x > 0.0) && (!logy || y > 0.0) {
                xs.push(map(x, logx));
                ys.push(map(y, logy));
            }
        }
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0).max(1e-300) * (SVG_W - 2.0 * MARGIN);
    let py = |y: f64| SVG_H - MARGIN - (y - y0) / (y1 - y0).max(1e-300) * (SVG_H - 2.0 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W}\" height=\"{SVG_H}\" viewBox=\"0 0 {SVG_W} {SVG_H}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{SVG_W}\" height=\"{SVG_H}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">{title}</text>",
        SVG_W / 2.0
    );
    // axes
    let _ = writeln!(
        out,
        "<line x1=\"{MARGIN}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        SVG_H - MARGIN,
        SVG_W - MARGIN,
        SVG_H - MARGIN
    );
    let _ = writeln!(
        out,
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{}\" stroke=\"black\"/>",
        SVG_H - MARGIN
    );
    for (lo, hi, horizontal) in [(x0, x1, true), (y0, y1, false)] {
        for k in 0..=4 {
            let v = lo + (hi - lo) * k as f64 / 4.0;
            let label = if horizontal == logx && horizontal || !horizontal && logy {
                format!("1e{v:.2}")
            } else {
                format!("{v:.3}")
            };
            if horizontal {
                let x = px(v);
                let _ = writeln!(
                    out,
                    "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">{label}</text>",
                    SVG_H - MARGIN + 16.0
                );
            } else {
                let y = py(v);
                let _ = writeln!(
                    out,
                    "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">{label}</text>",
                    MARGIN - 6.0
                );
            }
        }
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| (!logx || *x > 0.0) && (!logy || *y > 0.0))
            .map(|&(x, y)| format!("{:.2},{:.2}", px(map(x, logx)), py(map(y, logy))))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"{color}\">{}</text>",
            SVG_W - MARGIN + 4.0,
            MARGIN + 14.0 * i as f64,
            s.name
        );
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(vals: &[f64]) -> (f64, f64) {
    if vals.is_empty() {
        return (0.0, 1.0);
    }
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).abs() < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Log-log plot (both axes log10).
pub fn svg_loglog(series: &[Series], title: &str) -> String {
    svg_plot(series, title, true, true)
}

/// Linear plot.
pub fn svg_linear(series: &[Series], title: &str) -> String {
    svg_plot(series, title, false, false)
}
