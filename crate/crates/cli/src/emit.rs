//! Byte-stable CSV and JSON serialization of check reports and search logs.
//!
//! Floats are written with 17 significant digits so downstream fixtures can
//! reconstruct every f64 exactly.

use std::collections::BTreeSet;

use gaussmax::explorer::SearchIterRecord;
use gaussmax::verifier::{CheckReport, ParamValue, Target};

/// 17 significant digits: one before the decimal point, 16 after.
pub fn format_float(v: f64) -> String {
    format!("{:.16e}", v)
}

fn csv_quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn param_cell(v: &ParamValue) -> String {
    match v {
        ParamValue::Int(i) => i.to_string(),
        ParamValue::Float(f) => format_float(*f),
        ParamValue::Text(s) => s.clone(),
    }
}

fn target_cell(t: &Target) -> String {
    match t {
        Target::Value { value } => format_float(*value),
        Target::AtMost { bound } => format!("<={bound}"),
        Target::AtLeast { bound } => format!(">={bound}"),
        Target::Report => "report".to_string(),
    }
}

/// CSV schema: `check_id`, the sorted union of parameter keys, then
/// `estimate`, `std_error`, `n`, `target`, `verdict`.
pub fn reports_to_csv(reports: &[CheckReport]) -> String {
    let mut keys = BTreeSet::new();
    for report in reports {
        keys.extend(report.params.keys().cloned());
    }
    let mut out = String::new();
    out.push_str("check_id");
    for key in &keys {
        out.push(',');
        out.push_str(&csv_quote(key));
    }
    out.push_str(",estimate,std_error,n,target,verdict\n");
    for report in reports {
        out.push_str(&csv_quote(&report.check_id));
        for key in &keys {
            out.push(',');
            if let Some(v) = report.params.get(key) {
                out.push_str(&csv_quote(&param_cell(v)));
            }
        }
        out.push(',');
        out.push_str(&format_float(report.estimate));
        out.push(',');
        out.push_str(&format_float(report.std_error));
        out.push(',');
        out.push_str(&report.n.to_string());
        out.push(',');
        out.push_str(&csv_quote(&target_cell(&report.target)));
        out.push(',');
        out.push_str(&report.verdict.to_string());
        out.push('\n');
    }
    out
}

pub fn reports_to_json(reports: &[CheckReport]) -> String {
    let mut text = serde_json::to_string_pretty(reports).expect("reports always serialize");
    text.push('\n');
    text
}

/// Search log schema: iteration, semicolon-joined upper-triangle entries,
/// value, std_error, accepted, step, best_value.
pub fn search_log_to_csv(log: &[SearchIterRecord]) -> String {
    let mut out = String::from("iteration,entries,value,std_error,accepted,step,best_value\n");
    for rec in log {
        let entries = rec
            .entries
            .iter()
            .map(|v| format_float(*v))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.iteration,
            entries,
            format_float(rec.value),
            format_float(rec.std_error),
            rec.accepted,
            format_float(rec.step),
            format_float(rec.best_value),
        ));
    }
    out
}

pub fn search_log_to_json(log: &[SearchIterRecord]) -> String {
    #[derive(serde::Serialize)]
    struct Row<'a> {
        iteration: u64,
        entries: &'a [f64],
        value: f64,
        std_error: f64,
        accepted: bool,
        step: f64,
        best_value: f64,
    }
    let rows: Vec<Row> = log
        .iter()
        .map(|r| Row {
            iteration: r.iteration,
            entries: &r.entries,
            value: r.value,
            std_error: r.std_error,
            accepted: r.accepted,
            step: r.step,
            best_value: r.best_value,
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("log always serializes");
    text.push('\n');
    text
}
