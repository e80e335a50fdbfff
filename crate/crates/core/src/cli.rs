//! Command-line driver.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, ValueEnum};
use rayon::prelude::*;

use crate::align::default_gap_penalty;
use crate::ingest::load_score;
use crate::metrics::{evaluate, evaluate_auto, Evaluation, EvaluationReport, MatchMode};
use crate::report::{emit_report, report_json, OutputFormat};
use crate::time::{format_exact, parse_rational, Rational, Time};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlignMode {
    /// Align the transcription to the ground truth with DTW; exact matching.
    Auto,
    /// Scores already share a timeline; matching uses tolerances.
    Pre,
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn time_arg(s: &str) -> Result<Time, String> {
    let t: Time = s.parse().map_err(|e: crate::time::ParseRationalError| e.to_string())?;
    if t.is_negative() {
        return Err("tolerance must not be negative".into());
    }
    Ok(t)
}

/// Evaluate a music transcription against a ground-truth score.
#[derive(Debug, Parser)]
#[command(name = "mv2h", version)]
#[command(group(ArgGroup::new("input").required(true).args(["gt", "batch"])))]
pub struct Args {
    /// Ground-truth score (.musicxml/.xml or interchange text)
    #[arg(long, value_name = "PATH", requires = "tr")]
    pub gt: Option<PathBuf>,

    /// Transcribed score
    #[arg(long, value_name = "PATH", requires = "gt")]
    pub tr: Option<PathBuf>,

    /// Manifest with one `ground-truth transcription` path pair per line
    #[arg(long, value_name = "MANIFEST", conflicts_with_all = ["gt", "tr"])]
    pub batch: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "auto")]
    pub align: AlignMode,

    /// Cost of an unaligned chord, as `p/q` or a decimal
    #[arg(long, value_name = "RATIONAL", value_parser = rational_arg)]
    pub gap_penalty: Option<Rational>,

    /// Onset tolerance in ms (pre-aligned only)
    #[arg(long, value_name = "MS", value_parser = time_arg)]
    pub onset_tolerance: Option<Time>,

    /// Metrical grouping tolerance in ms (pre-aligned only)
    #[arg(long, value_name = "MS", value_parser = time_arg)]
    pub grouping_tolerance: Option<Time>,

    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,

    /// Print exact rationals (`p/q`) instead of decimals
    #[arg(long)]
    pub exact: bool,

    /// Suppress warnings
    #[arg(short, long)]
    pub quiet: bool,

    /// Print alignment details to stderr
    #[arg(short, long)]
    pub verbose: bool,
}

/// Validated run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub pairs: Vec<(PathBuf, PathBuf)>,
    pub batch: bool,
    pub align: AlignMode,
    pub gap_penalty: Rational,
    pub mode: MatchMode,
    pub format: OutputFormat,
    pub exact: bool,
    pub quiet: bool,
    pub verbose: bool,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn read_manifest(path: &Path) -> Result<Vec<(PathBuf, PathBuf)>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_INPUT, message: format!("cannot read {}: {e}", path.display()) })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [gt, tr] = fields[..] else {
            return Err(Failure {
                code: EXIT_INPUT,
                message: format!("{}: line {}: expected two paths", path.display(), i + 1),
            });
        };
        pairs.push((base.join(gt), base.join(tr)));
    }
    Ok(pairs)
}

impl RunConfig {
    fn from_args(args: Args) -> Result<RunConfig, Failure> {
        let usage = |message: String| Failure { code: EXIT_USAGE, message };
        let mut mode = match args.align {
            AlignMode::Auto => {
                if args.onset_tolerance.is_some() || args.grouping_tolerance.is_some() {
                    return Err(usage("tolerances apply only with --align pre".into()));
                }
                MatchMode::auto_aligned()
            }
            AlignMode::Pre => MatchMode::pre_aligned(),
        };
        if let Some(t) = args.onset_tolerance {
            mode = mode.with_onset_tolerance(t).map_err(|e| usage(e.to_string()))?;
        }
        if let Some(t) = args.grouping_tolerance {
            mode = mode.with_grouping_tolerance(t).map_err(|e| usage(e.to_string()))?;
        }
        let gap_penalty = args.gap_penalty.unwrap_or_else(default_gap_penalty);
        if gap_penalty <= Rational::from_integer(0.into()) {
            return Err(usage("--gap-penalty must be positive".into()));
        }
        let (pairs, batch) = match (args.gt, args.tr, args.batch) {
            (Some(gt), Some(tr), None) => (vec![(gt, tr)], false),
            (None, None, Some(manifest)) => (read_manifest(&manifest)?, true),
            _ => return Err(usage("give either --gt and --tr, or --batch".into())),
        };
        Ok(RunConfig {
            pairs,
            batch,
            align: args.align,
            gap_penalty,
            mode,
            format: args.format,
            exact: args.exact,
            quiet: args.quiet,
            verbose: args.verbose,
        })
    }
}

/// Result of one pair: evaluation plus messages for stderr.
struct PairOutcome {
    result: Result<Evaluation, String>,
    notes: Vec<String>,
}

fn evaluate_pair(config: &RunConfig, gt_path: &Path, tr_path: &Path) -> PairOutcome {
    let mut notes = Vec::new();
    let mut load = |path: &Path| match load_score(path) {
        Ok((score, warnings)) => {
            notes.extend(warnings.iter().map(ToString::to_string));
            Ok(score)
        }
        Err(e) => {
            if let crate::ingest::LoadError::Parse(p) = &e {
                notes.extend(p.warnings.iter().map(ToString::to_string));
            }
            Err(e.to_string())
        }
    };
    let gt = match load(gt_path) {
        Ok(s) => s,
        Err(e) => return PairOutcome { result: Err(e), notes },
    };
    let tr = match load(tr_path) {
        Ok(s) => s,
        Err(e) => return PairOutcome { result: Err(e), notes },
    };
    let result = match config.align {
        AlignMode::Pre => Ok(evaluate(&tr, &gt, &config.mode)),
        AlignMode::Auto => match evaluate_auto(&tr, &gt, &config.gap_penalty) {
            Ok((evaluation, alignment)) => {
                if config.verbose {
                    notes.push(format!(
                        "alignment: {} steps, cost {}, {} anchors",
                        alignment.path.steps.len(),
                        format_exact(&alignment.path.total_cost),
                        alignment.anchors.len()
                    ));
                }
                Ok(evaluation)
            }
            Err(e) => Err(format!("{} vs {}: {e}", gt_path.display(), tr_path.display())),
        },
    };
    if let Ok(evaluation) = &result {
        notes.extend(evaluation.diagnostics.iter().map(|d| format!("warning: {d}")));
    }
    PairOutcome { result, notes }
}

fn json_string(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

/// Evaluate every configured pair and write reports to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let outcomes: Vec<PairOutcome> = config.pairs.par_iter().map(|(gt, tr)| evaluate_pair(config, gt, tr)).collect();

    let mut code = EXIT_OK;
    let mut reports: Vec<&EvaluationReport> = Vec::new();
    let mut json_items: Vec<String> = Vec::new();
    for ((gt, tr), outcome) in config.pairs.iter().zip(&outcomes) {
        for note in &outcome.notes {
            let is_warning = note.starts_with("warning");
            if !(config.quiet && is_warning) {
                let _ = writeln!(err, "{note}");
            }
        }
        match &outcome.result {
            Ok(evaluation) => {
                reports.push(&evaluation.report);
                match (config.format, config.batch) {
                    (OutputFormat::Json, true) => json_items.push(format!(
                        "{{\"ground_truth\":{},\"transcription\":{},\"report\":{}}}",
                        json_string(&gt.display().to_string()),
                        json_string(&tr.display().to_string()),
                        report_json(&evaluation.report, config.exact)
                    )),
                    (OutputFormat::Text, true) => {
                        let _ = writeln!(out, "== {} vs {} ==", gt.display(), tr.display());
                        let _ = write!(out, "{}", emit_report(&evaluation.report, config.format, config.exact));
                        let _ = writeln!(out);
                    }
                    (_, false) => {
                        let _ = write!(out, "{}", emit_report(&evaluation.report, config.format, config.exact));
                    }
                }
            }
            Err(message) => {
                let _ = writeln!(err, "error: {message}");
                code = EXIT_INPUT;
                if config.batch && config.format == OutputFormat::Json {
                    json_items.push(format!(
                        "{{\"ground_truth\":{},\"transcription\":{},\"error\":{}}}",
                        json_string(&gt.display().to_string()),
                        json_string(&tr.display().to_string()),
                        json_string(message)
                    ));
                }
            }
        }
    }

    if config.batch {
        let mean = EvaluationReport::mean(reports.iter().copied());
        match config.format {
            OutputFormat::Text => {
                let _ = writeln!(out, "== Mean over {} pairs ==", reports.len());
                if let Some(mean) = &mean {
                    let _ = write!(out, "{}", emit_report(mean, OutputFormat::Text, config.exact));
                }
            }
            OutputFormat::Json => {
                let mean_json = mean.as_ref().map_or_else(|| "null".to_string(), |m| report_json(m, config.exact));
                let _ = writeln!(
                    out,
                    "{{\"pairs\":[{}],\"count\":{},\"mean\":{}}}",
                    json_items.join(","),
                    reports.len(),
                    mean_json
                );
            }
        }
    }
    code
}

/// Parse arguments and run. Returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(args) => args,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    match RunConfig::from_args(args) {
        Ok(config) => run(&config, out, err),
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}
