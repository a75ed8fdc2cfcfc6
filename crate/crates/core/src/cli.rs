//! The `dgldpc` command line.
//!
//! Reports go to stdout as JSON; with `--verbose` a short human summary goes
//! to stderr. Every failure is a single `error: ...` line on stderr.
//!
//! Exit status: 0 ok, 1 stability violated (`check-stability`), 2 bad
//! input or usage, 3 numerical anomaly.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::codeprops::{ComponentCode, MAX_BRUTEFORCE_DIMENSION};
use crate::de::{find_threshold_with, ThresholdOptions};
use crate::ensemble::{Ensemble, ValidatedEnsemble, ValidatedType};
use crate::exit::{chart_csv, sample_exit_chart, ExitError};
use crate::format::{fmt_f64, F17};
use crate::stability::{dgldpc_stability_boundary, dgldpc_stability_check, stability_report};
use crate::BinaryMatrix;

#[derive(Debug, Parser)]
#[command(name = "dgldpc", version, about = "GLDPC / D-GLDPC ensemble analysis on the binary erasure channel")]
struct Cli {
    /// Human-readable summary on stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Properties of a component code given as a matrix literal file.
    CodeInfo { matrix_file: PathBuf },
    /// Validation summary, design rate and stability report.
    Analyze { ensemble: PathBuf },
    /// Density-evolution threshold.
    Threshold {
        ensemble: PathBuf,
        /// Include a thinned residual trace of the run at the threshold.
        #[arg(long)]
        trace: bool,
    },
    /// Write the VND and inverse-CND curves as CSV.
    ExitChart {
        ensemble: PathBuf,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        npoints: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the stability inequality at a channel erasure probability.
    CheckStability {
        ensemble: PathBuf,
        #[arg(long)]
        q: f64,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    fn status(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

/// Runs one command; returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            let _ = writeln!(stderr, "error: {first}");
            return 2;
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(status) => status,
        Err(f) => {
            let one_line = f.message().replace('\n', " ");
            let _ = writeln!(stderr, "error: {one_line}");
            f.status()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let verbose = cli.verbose;
    match &cli.command {
        Command::CodeInfo { matrix_file } => {
            let info = code_info(matrix_file)?;
            if verbose {
                note(stderr, &format!("({}, {}) code, d_min = {}", info.n, info.k, info.d_min_independent_sets));
            }
            emit(stdout, &info)
        }
        Command::Analyze { ensemble } => {
            let ens = load(ensemble)?;
            let report = Analysis {
                validation: Validation {
                    valid: true,
                    variable_types: ens.variable_types().iter().enumerate().map(|(i, t)| summary(i, t)).collect(),
                    check_types: ens.check_types().iter().enumerate().map(|(i, t)| summary(i, t)).collect(),
                },
                design_rate: F17(ens.design_rate()),
                stability: stability_report(&ens),
                boundary: dgldpc_stability_boundary(&ens),
            };
            if verbose {
                let bound = match report.stability.gldpc_bound {
                    Some(b) => fmt_f64(b.0),
                    None => "not expressible".into(),
                };
                note(
                    stderr,
                    &format!(
                        "valid ensemble: {} variable / {} check types, design rate {}, stability bound {}",
                        ens.variable_types().len(),
                        ens.check_types().len(),
                        fmt_f64(ens.design_rate()),
                        bound
                    ),
                );
            }
            emit(stdout, &report)
        }
        Command::Threshold { ensemble, trace } => {
            let ens = load(ensemble)?;
            let opts = ThresholdOptions { trace: *trace, ..Default::default() };
            let result = find_threshold_with(&ens, &opts).map_err(|e| Failure::Numerical(e.to_string()))?;
            if verbose {
                note(
                    stderr,
                    &format!("threshold q* = {} after {} runs", fmt_f64(result.q_star), result.bisection_steps),
                );
            }
            emit(stdout, &result)
        }
        Command::ExitChart { ensemble, q, npoints, out } => {
            check_probability(*q)?;
            let ens = load(ensemble)?;
            let (vnd, cnd) = sample_exit_chart(&ens, *q, *npoints).map_err(|e| match e {
                ExitError::TooFewPoints(_) => Failure::Input(e.to_string()),
                _ => Failure::Numerical(e.to_string()),
            })?;
            fs::write(out, chart_csv(&vnd, &cnd))
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", out.display())))?;
            if verbose {
                note(stderr, &format!("wrote {} points to {}", npoints, out.display()));
            }
            Ok(0)
        }
        Command::CheckStability { ensemble, q } => {
            check_probability(*q)?;
            let ens = load(ensemble)?;
            let check = dgldpc_stability_check(&ens, *q);
            if verbose {
                let verdict = if check.holds { "holds" } else { "violated" };
                note(stderr, &format!("stability at q = {}: {verdict}, margin {}", fmt_f64(*q), fmt_f64(check.margin.0)));
            }
            let doc = CheckDoc { q: F17(*q), holds: check.holds, lhs: check.lhs, rhs: check.rhs, margin: check.margin };
            emit(stdout, &doc)?;
            Ok(if check.holds { 0 } else { 1 })
        }
    }
}

fn note(stderr: &mut dyn Write, line: &str) {
    let _ = writeln!(stderr, "{line}");
}

fn emit<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<i32, Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    writeln!(stdout, "{text}").map_err(|e| Failure::Input(format!("cannot write output: {e}")))?;
    Ok(0)
}

fn check_probability(q: f64) -> Result<(), Failure> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Failure::Input(format!("--q must lie in [0, 1], got {q}")))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ValidatedEnsemble, Failure> {
    let text = read(path)?;
    let located = |e: crate::EnsembleError| Failure::Input(format!("{}: {e}", path.display()));
    Ensemble::from_json(&text).map_err(located)?.validate().map_err(located)
}

#[derive(Serialize)]
struct CodeInfo {
    n: usize,
    k: usize,
    /// `null` when `k` is too large to enumerate codewords.
    d_min_bruteforce: Option<usize>,
    d_min_independent_sets: usize,
    info_functions: Vec<u128>,
    delta_n2: u128,
    delta_n2_kz: Vec<u128>,
}

fn code_info(path: &Path) -> Result<CodeInfo, Failure> {
    let text = read(path)?;
    let located = |e: &dyn std::fmt::Display| Failure::Input(format!("{}: {e}", path.display()));
    let gen: BinaryMatrix = text.parse().map_err(|e| located(&e))?;
    let code = ComponentCode::new(gen).map_err(|e| located(&e))?;
    let d_min_bruteforce = if code.k() <= MAX_BRUTEFORCE_DIMENSION {
        Some(code.min_distance_bruteforce().map_err(|e| located(&e))?)
    } else {
        None
    };
    let d_min_independent_sets = code.min_independent_set_size();
    if d_min_independent_sets < 2 {
        // Δ tables assume no weight-1 codewords
        return Err(located(&format!("minimum distance {d_min_independent_sets} < 2")));
    }
    let delta = code.delta_params();
    Ok(CodeInfo {
        n: code.n(),
        k: code.k(),
        d_min_bruteforce,
        d_min_independent_sets,
        info_functions: code.info_functions().values,
        delta_n2: delta.delta_n2,
        delta_n2_kz: delta.delta_n2_kz,
    })
}

#[derive(Serialize)]
struct Analysis {
    validation: Validation,
    design_rate: F17,
    stability: crate::stability::StabilityReport,
    boundary: crate::stability::StabilityBoundary,
}

#[derive(Serialize)]
struct Validation {
    valid: bool,
    variable_types: Vec<TypeSummary>,
    check_types: Vec<TypeSummary>,
}

#[derive(Serialize)]
struct TypeSummary {
    index: usize,
    n: usize,
    k: usize,
    d_min: usize,
    generalized: bool,
    edge_fraction: F17,
}

fn summary(index: usize, t: &ValidatedType) -> TypeSummary {
    TypeSummary {
        index,
        n: t.n(),
        k: t.k(),
        d_min: t.d_min(),
        generalized: t.is_generalized(),
        edge_fraction: F17(t.edge_fraction),
    }
}

#[derive(Serialize)]
struct CheckDoc {
    q: F17,
    holds: bool,
    lhs: F17,
    rhs: F17,
    margin: F17,
}
