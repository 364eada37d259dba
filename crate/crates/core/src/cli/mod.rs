//! The `redvote` command-line driver.
//!
//! Exit codes: 0 success, 2 unreadable input / parse / usage error,
//! 3 validation error, 4 solver failure, 5 threshold verdict FAIL.

mod render;
mod report;

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::bayes::{self, BayesError};
use crate::compose::{self, ComposeError, Expr, ParamPath, ValidatedWorkflow};
use crate::dsl::{self, Diagnostic, SourceFile};

pub use render::{sci, Format};
pub use report::{
    sil_band, AnalysisReport, InputDigest, Observation, PosteriorRow, PosteriorTable, SweepReport, SweepReportRow,
    Verdict, TOOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_VERDICT_FAIL: i32 = 5;

/// Environment variable that disables ANSI styling.
pub const NO_COLOR_ENV: &str = "REDVOTE_NO_COLOR";

#[derive(Debug, Parser)]
#[command(name = "redvote", version, about = "Compose and solve safety models of redundant voting architectures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a workflow and report instance outputs and exports.
    Solve(SolveArgs),
    /// Posterior marginals of a Bayesian-network instance given evidence.
    Posteriors(PosteriorArgs),
    /// Re-run a workflow with one literal input scaled by each factor.
    Sweep(SweepArgs),
    /// Parse and validate only.
    Validate {
        file: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    /// Tolerable hazard rate; the verdict fails when the metric exceeds it.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Export compared against the threshold (default: the first export).
    #[arg(long)]
    pub metric: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    pub file: PathBuf,
    pub instance: String,
    /// Observation NODE=STATE; repeatable or comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub evidence: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub file: PathBuf,
    /// Literal-bound input to vary, as INSTANCE.PARAM.
    #[arg(long)]
    pub param: ParamPath,
    /// Multipliers applied to the base value, comma-separated.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub factors: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Parse(Vec<Diagnostic>),
    #[error("error: {0}")]
    Usage(String),
    #[error("{origin}: error: {message}")]
    Validation { origin: String, message: String },
    #[error("{origin}: error: {message}")]
    Solver { origin: String, message: String },
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Parse(_) | Failure::Usage(_) => EXIT_PARSE,
            Failure::Validation { .. } => EXIT_VALIDATION,
            Failure::Solver { .. } => EXIT_SOLVER,
        }
    }

    fn validation(origin: &str, message: impl ToString) -> Self {
        Failure::Validation {
            origin: origin.to_string(),
            message: message.to_string(),
        }
    }

    fn compose(origin: &str, e: ComposeError) -> Self {
        match e {
            ComposeError::Validation(v) => Failure::validation(origin, v),
            ComposeError::Solve(s) => Failure::Solver {
                origin: origin.to_string(),
                message: s.to_string(),
            },
        }
    }
}

/// Whether standard output should be styled.
pub fn color_enabled() -> bool {
    std::env::var_os(NO_COLOR_ENV).is_none() && std::io::stdout().is_terminal()
}

/// Runs one command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command, out, color) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{f}");
            f.code()
        }
    }
}

fn load(path: &Path) -> Result<(SourceFile, ValidatedWorkflow), Failure> {
    let src = SourceFile::read(path).map_err(|d| Failure::Parse(vec![d]))?;
    let w = dsl::parse(&src).map_err(Failure::Parse)?;
    let v = compose::validate_workflow(&w).map_err(|e| Failure::validation(&src.origin, e))?;
    Ok((src, v))
}

fn emit(text: &str, dest: &Option<PathBuf>, out: &mut dyn Write) -> Result<(), Failure> {
    match dest {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(format!("cannot write report: {e}"))),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_text(r: Result<String, csv::Error>) -> Result<String, Failure> {
    r.map_err(|e| Failure::Usage(format!("cannot format csv: {e}")))
}

fn execute(command: Command, out: &mut dyn Write, color: bool) -> Result<i32, Failure> {
    match command {
        Command::Validate { file } => {
            load(&file)?;
            Ok(EXIT_OK)
        }
        Command::Solve(a) => solve(a, out, color),
        Command::Posteriors(a) => posteriors(a, out),
        Command::Sweep(a) => sweep(a, out),
    }
}

fn solve(a: SolveArgs, out: &mut dyn Write, color: bool) -> Result<i32, Failure> {
    let (src, v) = load(&a.file)?;
    let origin = src.origin.as_str();
    if let Some(t) = a.threshold.filter(|t| !t.is_finite() || *t < 0.0) {
        return Err(Failure::Usage(format!("threshold must be a finite non-negative number, got {t}")));
    }
    if a.threshold.is_none() && a.metric.is_some() {
        return Err(Failure::Usage("--metric requires --threshold".to_string()));
    }
    let metric = match (&a.threshold, &a.metric) {
        (None, _) => None,
        (Some(_), Some(m)) => {
            if !v.workflow().exports.iter().any(|e| &e.name == m) {
                return Err(Failure::validation(origin, format!("no output named `{m}` to compare")));
            }
            Some(m.clone())
        }
        (Some(_), None) => match v.workflow().exports.first() {
            Some(e) => Some(e.name.clone()),
            None => return Err(Failure::validation(origin, "a threshold needs at least one `output`")),
        },
    };
    let result = compose::run_workflow(&v).map_err(|e| Failure::compose(origin, e.into()))?;
    let mut report = AnalysisReport::new(InputDigest::of(origin, &src.text), result);
    if let (Some(t), Some(m)) = (a.threshold, metric) {
        let value = report.export(&m).expect("metric checked against exports");
        report.verdict = Some(Verdict::new(&m, value, t));
    }
    let styled = color && a.output.out.is_none();
    let text = match a.output.format {
        Format::Text => render::solve_text(&report, styled),
        Format::Json => json(&report),
        Format::Csv => csv_text(render::solve_csv(&report))?,
    };
    emit(&text, &a.output.out, out)?;
    Ok(match &report.verdict {
        Some(v) if !v.pass => EXIT_VERDICT_FAIL,
        _ => EXIT_OK,
    })
}

fn posteriors(a: PosteriorArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut pairs = Vec::new();
    for e in &a.evidence {
        match e.split_once('=') {
            Some((n, s)) if !n.is_empty() && !s.is_empty() => pairs.push((n.trim(), s.trim())),
            _ => return Err(Failure::Usage(format!("evidence must look like NODE=STATE, got `{e}`"))),
        }
    }
    let (src, v) = load(&a.file)?;
    let origin = src.origin.as_str();
    if v.class_of(&a.instance).is_none() {
        return Err(Failure::validation(origin, format!("no instance named `{}`", a.instance)));
    }
    let result = compose::run_workflow(&v).map_err(|e| Failure::compose(origin, e.into()))?;
    let net = compose::instance_network(&v, &result, &a.instance).map_err(|e| Failure::compose(origin, e))?;
    let bayes_failure = |e: BayesError| match e {
        BayesError::UnknownVariable(_) | BayesError::UnknownState { .. } => {
            Failure::validation(origin, format!("instance `{}`: {e}", a.instance))
        }
        other => Failure::Solver {
            origin: origin.to_string(),
            message: format!("instance `{}`: {other}", a.instance),
        },
    };
    let evidence = net.evidence(pairs.iter().copied()).map_err(bayes_failure)?;
    let dists = bayes::posterior_report(&net, &evidence).map_err(bayes_failure)?;
    let table = PosteriorTable::build(&a.instance, &net, &evidence, &dists);
    let text = match a.output.format {
        Format::Text => render::posteriors_text(&table),
        Format::Json => {
            let mut report = AnalysisReport::new(InputDigest::of(origin, &src.text), result);
            report.posteriors = Some(table);
            json(&report)
        }
        Format::Csv => csv_text(render::posteriors_csv(&table))?,
    };
    emit(&text, &a.output.out, out)?;
    Ok(EXIT_OK)
}

fn sweep(a: SweepArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let (src, v) = load(&a.file)?;
    let origin = src.origin.as_str();
    let rows = compose::sweep(&v, &a.param, &a.factors).map_err(|e| Failure::compose(origin, e))?;
    let base = match v.workflow().instance(&a.param.instance).and_then(|i| i.binding(&a.param.param)) {
        Some(Expr::Num(x)) => *x,
        _ => unreachable!("sweep checked the target is a literal"),
    };
    let report = SweepReport::new(
        InputDigest::of(origin, &src.text),
        &v.workflow().name,
        &a.param.to_string(),
        base,
        rows,
    );
    let text = match a.output.format {
        Format::Text => render::sweep_text(&report),
        Format::Json => json(&report),
        Format::Csv => csv_text(render::sweep_csv(&report))?,
    };
    emit(&text, &a.output.out, out)?;
    Ok(EXIT_OK)
}
