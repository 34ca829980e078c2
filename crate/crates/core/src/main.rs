use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slagkit::checks::run_checks;
use slagkit::corpus::{bundled_scenarios, directory_scenarios, run_corpus};
use slagkit::report::{render, Format};
use slagkit::scenario::{load_scenario, CHECK_NAMES};

#[derive(Parser)]
#[command(name = "slagkit", version, about = "Linear-algebra checks for calibrated structures on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of one scenario file.
    Check {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run every bundled scenario (or every *.json of --dir) concurrently.
    Corpus {
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Describe what a check verifies.
    Explain { check: Option<String> },
}

const EXPLANATIONS: [(&str, &str); 9] = [
    ("structure", "Ω is a decomposable complex n-form whose kernel is transverse to its conjugate, so it defines a complex structure I with Ω of type (n,0); ω is real, nondegenerate, of type (1,1) (Ω∧ω = 0), satisfies the Monge-Ampère normalisation ω^n/n! = c_n Ω∧Ω̄ and gives a positive metric ω(u, Iv). Also: the verdict is unchanged by random GL pullbacks and I transforms equivariantly."),
    ("ellipticity", "For every probe covector u (the 2n coordinate directions and seeded random unit vectors) the symbol sequence E⁰ → E¹ → E² of the Calabi-Yau and Kähler-Einstein orbit complexes, with maps θ ↦ u∧θ, is exact at E¹: the kernel equals the image."),
    ("isotropy", "The stabiliser of the pair inside gl(2n) has dimension n²−1 (special unitary) and 2(n²−1) for Ω alone (special linear over ℂ); the Kähler-Einstein stabiliser is skew for the metric; orbit dimension plus stabiliser dimension is 4n²."),
    ("e1_crosscheck", "The tangent space to the orbit of the pair (3n²+1 dimensional) agrees with the solution space of the linearised structure equations and with the span of contractions (i_vΩ, i_vω) wedged back; (iΩ, 0) and ρ_I(Ω, ω) are tangent, (Ω, 0) is not."),
    ("h1_models", "First cohomology of the orbit complex on the flat torus: the orbit model is contained in the linear-equation model (both dimensions reported), the Kähler class projection is onto the attainable (1,1) classes, and the Lefschetz decomposition of n-forms and 2-forms reassembles with primitive pieces (four blocks for 2-forms, three for orbit tangents when n ≥ 2)."),
    ("h0_model", "Zeroth cohomology: pairs (a, b) in degree (n−1, 1) closed under the complex structure equations form a 2n-dimensional space spanned by (i_vΩ, i_vω); the complex Hodge star sends the (1,0) part of i_vω to i_vΩ; the fitted star constants do not depend on the sample batch."),
    ("slag", "The subtorus has Im Ω and ω vanishing on it and Re Ω equal to ± its volume form; on it, the self-duality identity for contractions holds, the self-dual space E⁰_M has dimension n, and the first cohomology model of the special Lagrangian complex has dimension 1 + n(n−1)/2."),
    ("relative", "The restriction map γ¹ from the ambient first cohomology model to the subtorus has image equal to the top-degree class plus the restricted 2-form classes; the mapping-cone H¹ satisfies dim = dim coker γ_{H¹} + dim ker γ¹; its map into constant-form relative de Rham H¹ is injective."),
    ("moduli", "Dimension bookkeeping for the pair-with-subtorus deformation problem: fibre (subtorus deformations) plus base (ambient deformations preserving the condition) equals total, injectivity holds, and the cone dimension is unchanged under seeded deformations of the pair that keep the subtorus special Lagrangian."),
];

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), String> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| e.to_string())
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Check { scenario, format, output, seed, tol } => {
            let mut s = load_scenario(&scenario).map_err(|e| e.to_string())?;
            if let Some(seed) = seed {
                s = s.with_seed(seed);
            }
            if let Some(tol) = tol {
                s = s.with_residual_tolerance(tol).map_err(|e| e.to_string())?;
            }
            let report = run_checks(&s);
            emit(&render(&report, format), output.as_ref())?;
            Ok(report.passed)
        }
        Command::Corpus { dir, format, output } => {
            let scenarios = match dir {
                Some(d) => directory_scenarios(&d),
                None => bundled_scenarios(),
            }
            .map_err(|e| e.to_string())?;
            let corpus = run_corpus(scenarios);
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&corpus).map_err(|e| e.to_string())?,
                Format::Text => {
                    let mut t = String::new();
                    for e in &corpus.entries {
                        let outcome = if e.report.passed { "pass" } else { "fail" };
                        let verdict = if e.as_expected { "OK      " } else { "MISMATCH" };
                        let failed = e.report.failed_checks().join(",");
                        t.push_str(&format!("{verdict} {:<28} {outcome} (expected {})", e.file, if e.expect_pass { "pass" } else { "fail" }));
                        if !failed.is_empty() {
                            t.push_str(&format!(" failed: {failed}"));
                        }
                        t.push('\n');
                    }
                    t
                }
            };
            emit(&text, output.as_ref())?;
            Ok(corpus.all_as_expected)
        }
        Command::Explain { check } => {
            let selected: Vec<_> = match &check {
                None => EXPLANATIONS.iter().collect(),
                Some(c) => {
                    let hit: Vec<_> = EXPLANATIONS.iter().filter(|(n, _)| n == c).collect();
                    if hit.is_empty() {
                        return Err(format!("unknown check {c:?}; known: {}", CHECK_NAMES.join(", ")));
                    }
                    hit
                }
            };
            let text: String = selected.iter().map(|(n, d)| format!("{n}\n  {d}\n")).collect();
            emit(&text, None)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
