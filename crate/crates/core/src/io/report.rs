use std::fmt::Write;
use std::str::FromStr;

use crate::camera::{CameraId, DivisionFit, PolynomialFisheyeModel};
use crate::error::{Error, Result};
use crate::metrics::EvaluationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::Config(format!("unknown report format '{other}'"))),
        }
    }
}

const NA: &str = "n/a";

/// Renders a report. CSV values are ratios with six decimals, markdown
/// values are percentages with one; missing cameras print as `n/a`. Rows
/// keep the report order. A report without objects prints the header and
/// the zero counts only.
pub fn emit_report(report: &EvaluationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(report),
        ReportFormat::Markdown => emit_markdown(report),
    }
}

fn total_objects(report: &EvaluationReport) -> usize {
    report.object_counts.values().sum()
}

fn with_map(report: &EvaluationReport) -> bool {
    report.rows.iter().any(|r| r.map.is_some())
}

fn emit_csv(report: &EvaluationReport) -> String {
    let fmt = |v: Option<f64>| v.map_or(NA.to_string(), |v| format!("{v:.6}"));
    let map = with_map(report);
    let mut out = String::from("representation,front,rear,left,right,miou,params,failures");
    if map {
        out.push_str(",map");
    }
    out.push('\n');
    if total_objects(report) > 0 {
        for row in &report.rows {
            let _ = write!(out, "{}", row.representation);
            for cam in CameraId::ALL {
                let _ = write!(out, ",{}", fmt(row.camera_miou(cam)));
            }
            let _ = write!(out, ",{},{},{}", fmt(row.miou()), row.params, row.failures);
            if map {
                let _ = write!(out, ",{}", fmt(row.map));
            }
            out.push('\n');
        }
    }
    let _ = write!(out, "objects");
    for cam in CameraId::ALL {
        let _ = write!(out, ",{}", report.object_counts.get(&cam).copied().unwrap_or(0));
    }
    let _ = writeln!(out, ",{},,", total_objects(report));
    out
}

fn emit_markdown(report: &EvaluationReport) -> String {
    let pct = |v: Option<f64>| v.map_or(NA.to_string(), |v| format!("{:.1}", 100.0 * v));
    let map = with_map(report);
    let mut out = format!("### {}\n\n| Representation |", report.title);
    for cam in CameraId::ALL {
        let n = report.object_counts.get(&cam).copied().unwrap_or(0);
        let _ = write!(out, " {} (n={n}) |", cam.title());
    }
    let _ = write!(out, " mIoU (n={}) | Params |", total_objects(report));
    if map {
        out.push_str(" mAP |");
    }
    out.push_str("\n|---|");
    for _ in 0..(6 + map as usize) {
        out.push_str("---:|");
    }
    out.push('\n');
    if total_objects(report) > 0 {
        for row in &report.rows {
            let _ = write!(out, "| {} |", row.representation.label());
            for cam in CameraId::ALL {
                let _ = write!(out, " {} |", pct(row.camera_miou(cam)));
            }
            let _ = write!(out, " {} | {} |", pct(row.miou()), row.params);
            if map {
                let _ = write!(out, " {} |", pct(row.map));
            }
            out.push('\n');
        }
    }
    let failures: usize = report.rows.iter().map(|r| r.failures).sum();
    if failures > 0 {
        let _ = writeln!(out, "\n{failures} fits failed and were excluded.");
    }
    out
}

/// Per-angle residual table of a division-model fit.
pub fn division_residual_csv(poly: &PolynomialFisheyeModel, fit: &DivisionFit) -> String {
    let mut out = String::from("theta_deg,r_poly_px,r_division_px,residual_px\n");
    for (&t, &res) in fit.thetas.iter().zip(&fit.residuals) {
        let r = poly.radius_unchecked(t);
        let _ = writeln!(out, "{:.4},{:.6},{:.6},{:.6}", t.to_degrees(), r, r + res, res);
    }
    out
}
