//! Rendering of run reports.

use std::fmt::Write as _;
use std::path::Path;

use crate::checks::{RunReport, Status};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

pub fn to_json(report: &RunReport) -> String {
    serde_json::to_string_pretty(report).expect("report is always serializable")
}

pub fn to_text(report: &RunReport) -> String {
    let mut out = String::new();
    let name = report.scenario.name.clone().unwrap_or_else(|| format!("n={}", report.scenario.n));
    let _ = writeln!(out, "scenario {name} (n = {})", report.scenario.n);
    for c in &report.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let mut line = format!("{tag} {:<14}", c.name);
        if !c.dimensions.is_empty() {
            let dims: Vec<String> = c.dimensions.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = write!(line, " {}", dims.join(" "));
        }
        if let Some(worst) = c.residuals.values().filter(|r| r.is_finite()).cloned().reduce(f64::max) {
            let _ = write!(line, " max_residual={worst:.2e}");
        }
        if let Some(r) = &c.reason {
            let _ = write!(line, " ({r})");
        }
        let _ = writeln!(out, "{}", line.trim_end());
        for f in &c.failed {
            let detail = c.invariant(f).and_then(|i| i.detail.clone()).unwrap_or_default();
            let _ = writeln!(out, "    failed {f}: {detail}");
        }
    }
    let _ = writeln!(out, "{}", if report.passed { "overall PASS" } else { "overall FAIL" });
    out
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => to_json(report),
        Format::Text => to_text(report),
    }
}

pub fn write_report(report: &RunReport, format: Format, path: &Path) -> Result<()> {
    std::fs::write(path, render(report, format)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
