//! Report serialization.

use std::fmt::Write as _;

use crate::metrics::EvaluationReport;
use crate::time::{format_decimal, format_exact, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

/// Decimal places used for every reported value.
pub const PRECISION: u32 = 4;

fn text_value(value: &Rational, exact: bool) -> String {
    if exact {
        format_exact(value)
    } else {
        format_decimal(value, PRECISION)
    }
}

fn json_value(value: &Rational, exact: bool) -> String {
    if exact {
        serde_json::Value::String(format_exact(value)).to_string()
    } else {
        format_decimal(value, PRECISION)
    }
}

/// Flat JSON object with the six report keys.
pub fn report_json(report: &EvaluationReport, exact: bool) -> String {
    let body: Vec<String> =
        report.fields().iter().map(|(key, _, value)| format!("\"{key}\":{}", json_value(value, exact))).collect();
    format!("{{{}}}", body.join(","))
}

/// `Label: value` lines, or a single JSON object. Always ends in a newline.
pub fn emit_report(report: &EvaluationReport, format: OutputFormat, exact: bool) -> String {
    match format {
        OutputFormat::Text => {
            let mut out = String::new();
            for (_, label, value) in report.fields() {
                writeln!(out, "{label}: {}", text_value(value, exact)).unwrap();
            }
            out
        }
        OutputFormat::Json => format!("{}\n", report_json(report, exact)),
    }
}
