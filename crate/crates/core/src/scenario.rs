//! Scenario files: the structure to test, an optional subtorus, tolerances
//! and the checks to run.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{KForm, MultiIndex};
use crate::slag::SubtorusSpec;
use crate::structures::{standard_kahler, standard_volume, CalibrationPair, Tolerances};

/// All check names, in execution order.
pub const CHECK_NAMES: [&str; 9] = [
    "structure",
    "ellipticity",
    "isotropy",
    "e1_crosscheck",
    "h1_models",
    "h0_model",
    "slag",
    "relative",
    "moduli",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub idx: Vec<usize>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// `"standard"` or an explicit list of coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormSpec {
    Named(String),
    Terms(Vec<Term>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceSpec {
    pub rank_threshold: f64,
    pub residual_tolerance: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        Self { rank_threshold: t.rank_threshold, residual_tolerance: t.residual_tolerance }
    }
}

fn default_samples() -> usize {
    100
}

fn default_checks() -> Vec<String> {
    vec!["all".into()]
}

fn default_true() -> bool {
    true
}

/// The on-disk representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    #[serde(rename = "Omega")]
    pub big_omega: FormSpec,
    pub omega: FormSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtorus: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    /// Whether every requested check is expected to pass; used by corpus
    /// runs, which also carry deliberately failing scenarios.
    #[serde(default = "default_true")]
    pub expect_pass: bool,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub pair: CalibrationPair,
    pub subtorus: Option<SubtorusSpec>,
    pub tolerances: Tolerances,
    pub checks: Vec<String>,
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Validation { field: field.into(), message: message.into() }
}

fn build_form(field: &str, spec: &FormSpec, n: usize, degree: usize, real: Option<f64>) -> Result<KForm> {
    let dim = 2 * n;
    match spec {
        FormSpec::Named(s) if s == "standard" => Ok(if degree == 2 && real.is_some() {
            standard_kahler(n)
        } else {
            standard_volume(n)
        }),
        FormSpec::Named(s) => Err(invalid(field, format!("unknown form name {s:?}"))),
        FormSpec::Terms(terms) => {
            let mut form = KForm::zero(dim, degree);
            for (t, term) in terms.iter().enumerate() {
                if term.idx.len() != degree {
                    return Err(invalid(field, format!("term {t}: idx has length {}, expected {degree}", term.idx.len())));
                }
                if let Some(&bad) = term.idx.iter().find(|&&i| i >= dim) {
                    return Err(invalid(field, format!("term {t}: index {bad} out of range 0..{dim}")));
                }
                let mi = MultiIndex::new(term.idx.clone())
                    .ok_or_else(|| invalid(field, format!("term {t}: idx must be strictly increasing")))?;
                if let Some(tol) = real {
                    if term.im.abs() > tol {
                        return Err(invalid(field, format!("term {t}: imaginary part {} on a real form", term.im)));
                    }
                }
                let slot = mi.rank(dim);
                if form.coeffs()[slot] != Complex64::new(0.0, 0.0) {
                    return Err(invalid(field, format!("term {t}: duplicate idx {:?}", term.idx)));
                }
                let im = if real.is_some() { 0.0 } else { term.im };
                form.coeffs_mut()[slot] = Complex64::new(term.re, im);
            }
            Ok(form)
        }
    }
}

impl Scenario {
    pub fn from_file(file: ScenarioFile) -> Result<Self> {
        let n = file.n;
        if !(1..=4).contains(&n) {
            return Err(invalid("n", format!("{n} not in [1, 4]")));
        }
        let t = file.tolerances;
        for (field, v) in [
            ("tolerances.rank_threshold", t.rank_threshold),
            ("tolerances.residual_tolerance", t.residual_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0 && v < 1.0) {
                return Err(invalid(field, format!("{v} not in (0, 1)")));
            }
        }
        let tolerances = Tolerances { rank_threshold: t.rank_threshold, residual_tolerance: t.residual_tolerance };
        let volume = build_form("Omega", &file.big_omega, n, n, None)?;
        let kahler = build_form("omega", &file.omega, n, 2, Some(t.residual_tolerance))?;
        let pair = CalibrationPair::new(volume, kahler)?;
        let subtorus = match &file.subtorus {
            Some(rows) => {
                if rows.len() != n {
                    return Err(invalid("subtorus", format!("{} rows, expected {n}", rows.len())));
                }
                Some(SubtorusSpec::from_integer_rows(rows.clone())?)
            }
            None => None,
        };
        if file.samples == 0 {
            return Err(invalid("samples", "must be positive"));
        }
        let mut checks = Vec::new();
        for c in &file.checks {
            if c == "all" {
                checks.extend(CHECK_NAMES.iter().map(|s| s.to_string()));
            } else if CHECK_NAMES.contains(&c.as_str()) {
                checks.push(c.clone());
            } else {
                return Err(invalid("checks", format!("unknown check {c:?}")));
            }
        }
        // Execution order, each check once.
        let checks = CHECK_NAMES.iter().filter(|c| checks.iter().any(|x| x == *c)).map(|s| s.to_string()).collect();
        Ok(Self { file, pair, subtorus, tolerances, checks })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn n(&self) -> usize {
        self.file.n
    }

    pub fn name(&self) -> String {
        self.file.name.clone().unwrap_or_else(|| format!("n{}", self.file.n))
    }

    pub fn seed(&self) -> u64 {
        self.file.seed
    }

    pub fn samples(&self) -> usize {
        self.file.samples
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.file.seed = seed;
        self
    }

    pub fn with_residual_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(invalid("tolerances.residual_tolerance", format!("{tol} not positive")));
        }
        self.file.tolerances.residual_tolerance = tol;
        self.tolerances.residual_tolerance = tol;
        Ok(self)
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    Scenario::parse(&text)
}

/// Coefficient list of `form`, nonzero entries only.
pub fn form_terms(form: &KForm, tol: f64) -> Vec<Term> {
    let dim = form.dim();
    MultiIndex::enumerate(dim, form.degree())
        .into_iter()
        .zip(form.coeffs())
        .filter(|(_, c)| c.norm() > tol)
        .map(|(mi, c)| Term { idx: mi.indices().to_vec(), re: c.re, im: c.im })
        .collect()
}
