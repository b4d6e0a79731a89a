//! Report rendering.
//!
//! The table format is two comma-separated blocks separated by a blank line:
//! one row per advertiser, then `metric,value` summary rows. The structured
//! format is the full nested report as pretty-printed JSON. Every number is
//! rounded to 12 significant digits in both formats.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::analysis::{BaselineOutcome, ComparisonReport, MarketOutcome, MarketScenario, SweepRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "structured" => Ok(ReportFormat::Structured),
            other => Err(Error::Parse(format!("unknown report format {other:?}"))),
        }
    }
}

/// Rounds to 12 significant digits, then prints the shortest decimal that
/// reads back to the rounded value.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded = round_sig(x);
    if rounded == 0.0 {
        "0".to_owned()
    } else {
        rounded.to_string()
    }
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn slot(s: Option<usize>) -> String {
    s.map_or_else(|| "-".to_owned(), |s| s.to_string())
}

struct Row {
    id: String,
    baseline_slot: Option<usize>,
    new_slot: Option<usize>,
    s_slot: Option<usize>,
    u0: f64,
    u: f64,
    delta: f64,
    us: f64,
}

fn render_table(rows: &[Row], summary: &[(&str, String)]) -> String {
    let mut out = String::from("id,baseline_slot,new_slot,s_slot,u0,u,delta,us\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.id,
            slot(r.baseline_slot),
            slot(r.new_slot),
            slot(r.s_slot),
            format_number(r.u0),
            format_number(r.u),
            format_number(r.delta),
            format_number(r.us),
        );
    }
    out.push_str("\nmetric,value\n");
    for (k, v) in summary {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

fn rounded_json(value: &impl Serialize) -> String {
    fn walk(v: &mut Value) {
        match v {
            Value::Number(n) if n.is_f64() => {
                let x = round_sig(n.as_f64().expect("f64 number"));
                *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
            }
            Value::Array(items) => items.iter_mut().for_each(walk),
            Value::Object(map) => map.values_mut().for_each(walk),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(value).expect("reports serialize");
    walk(&mut v);
    let mut text = serde_json::to_string_pretty(&v).expect("reports serialize");
    text.push('\n');
    text
}

pub fn write_report(report: &ComparisonReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Structured => rounded_json(report),
        ReportFormat::Table => {
            let rows: Vec<Row> = report
                .advertisers
                .iter()
                .map(|a| Row {
                    id: a.id.to_string(),
                    baseline_slot: a.baseline_slot,
                    new_slot: a.new_slot,
                    s_slot: a.s_slot,
                    u0: a.baseline_payoff,
                    u: a.payoff,
                    delta: a.delta.direct,
                    us: a.s_payoff,
                })
                .collect();
            let with = &report.with_mediator;
            let n = format_number;
            let summary = [
                ("R", n(with.revenue)),
                ("R0", n(report.baseline.revenue)),
                ("E", n(with.efficiency)),
                ("E0", n(report.baseline.efficiency)),
                ("u_M", n(with.mediator_payoff)),
                ("s_M_p", n(with.mediator_score.value())),
                ("l", slot(with.mediator_slot)),
                ("R_minus_R0", n(report.revenue_delta.direct)),
                ("E_minus_E0", n(report.efficiency_delta.direct)),
                ("accounting_residual", n(report.accounting.with_mediator)),
            ];
            render_table(&rows, &summary)
        }
    }
}

#[derive(Serialize)]
struct BaselineReport<'a> {
    baseline: &'a BaselineOutcome,
    accounting_residual: f64,
}

/// Report for a market without a mediator; the with/without columns
/// coincide and every delta is zero.
pub fn write_baseline_report(
    scenario: &MarketScenario,
    baseline: &BaselineOutcome,
    format: ReportFormat,
) -> String {
    let residual = crate::analysis::accounting_check(baseline);
    match format {
        ReportFormat::Structured => rounded_json(&BaselineReport {
            baseline,
            accounting_residual: residual,
        }),
        ReportFormat::Table => {
            let rows: Vec<Row> = scenario
                .advertisers
                .iter()
                .filter_map(|a| baseline.payoff(&a.id))
                .map(|p| Row {
                    id: p.id.to_string(),
                    baseline_slot: p.p_slot,
                    new_slot: p.p_slot,
                    s_slot: None,
                    u0: p.total(),
                    u: p.total(),
                    delta: 0.0,
                    us: 0.0,
                })
                .collect();
            let n = format_number;
            let summary = [
                ("R", n(baseline.revenue())),
                ("R0", n(baseline.revenue())),
                ("E", n(baseline.efficiency())),
                ("E0", n(baseline.efficiency())),
                ("u_M", n(0.0)),
                ("s_M_p", n(0.0)),
                ("l", slot(None)),
                ("R_minus_R0", n(0.0)),
                ("E_minus_E0", n(0.0)),
                ("accounting_residual", n(residual)),
            ];
            render_table(&rows, &summary)
        }
    }
}

/// One line per fitness value. `rank` is the mediator's rank among all
/// primary bidders and `l` its slot, `-` when it won none.
pub fn write_sweep(rows: &[SweepRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Structured => rounded_json(&rows),
        ReportFormat::Table => {
            let mut out =
                String::from("f,rank,l,s_M_p,R_minus_R0,E_minus_E0,u_M,min_delta,win_win\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    format_number(r.fitness),
                    slot(r.mediator_rank),
                    slot(r.mediator_slot),
                    format_number(r.mediator_score),
                    format_number(r.revenue_delta),
                    format_number(r.efficiency_delta),
                    format_number(r.mediator_payoff),
                    format_number(r.min_advertiser_delta),
                    if r.win_win { "WIN-WIN" } else { "-" },
                );
            }
            out
        }
    }
}
