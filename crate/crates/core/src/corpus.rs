//! The bundled scenario corpus and parallel batch runs.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::checks::{run_checks, RunReport};
use crate::error::Result;
use crate::scenario::Scenario;

macro_rules! bundled {
    ($($file:literal),* $(,)?) => {
        &[$(($file, include_str!(concat!("../scenarios/", $file)))),*]
    };
}

pub const BUNDLED: &[(&str, &str)] = bundled![
    "standard_n1.json",
    "standard_n2.json",
    "standard_n3.json",
    "complex_line_n2.json",
    "imaginary_plane_n2.json",
    "lagrangian_phase_n2.json",
    "mixed_n3.json",
    "ambient_only_n3.json",
    "scaled_kahler_n2.json",
    "perturbed_n1.json",
    "perturbed_n2.json",
    "perturbed_n3.json",
];

pub fn bundled_scenarios() -> Result<Vec<(String, Scenario)>> {
    BUNDLED.iter().map(|(f, text)| Ok((f.to_string(), Scenario::parse(text)?))).collect()
}

/// Every `*.json` file of `dir`, sorted by file name.
pub fn directory_scenarios(dir: &Path) -> Result<Vec<(String, Scenario)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, crate::scenario::load_scenario(&p)?))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusEntry {
    pub file: String,
    pub expect_pass: bool,
    /// Whether the run outcome matched `expect_pass`.
    pub as_expected: bool,
    pub report: RunReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusReport {
    pub entries: Vec<CorpusEntry>,
    pub all_as_expected: bool,
}

/// Runs scenarios concurrently; each scenario's checks run sequentially.
pub fn run_corpus(scenarios: Vec<(String, Scenario)>) -> CorpusReport {
    let entries: Vec<CorpusEntry> = scenarios
        .into_par_iter()
        .map(|(file, s)| {
            let report = run_checks(&s);
            let expect_pass = s.file.expect_pass;
            CorpusEntry { file, expect_pass, as_expected: report.passed == expect_pass, report }
        })
        .collect();
    let all_as_expected = entries.iter().all(|e| e.as_expected);
    CorpusReport { entries, all_as_expected }
}
