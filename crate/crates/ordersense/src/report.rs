//! CSV and aligned-text rendering of run reports and counterexample tables.

use std::fmt::Write as _;

use crate::counterexamples::CheckRow;
use crate::error::Result;
use crate::run::{IndexCell, RunReport, Side};

/// Decimals printed for closed-form values.
pub const MAX_DECIMALS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Text,
}

pub const RUN_HEADER: [&str; 25] = [
    "scenario",
    "row",
    "parameter",
    "baseline_law",
    "perturbed_law",
    "baseline_first",
    "baseline_total",
    "perturbed_first",
    "perturbed_total",
    "baseline_first_lo",
    "baseline_first_hi",
    "baseline_total_lo",
    "baseline_total_hi",
    "perturbed_first_lo",
    "perturbed_first_hi",
    "perturbed_total_lo",
    "perturbed_total_hi",
    "expected_baseline_total",
    "expected_perturbed_total",
    "within_tolerance",
    "disp",
    "st",
    "ew",
    "theorem",
    "flags",
];

pub const CHECK_HEADER: [&str; 7] = ["case", "quantity", "value", "expected", "rule", "pass", "note"];

pub fn decimals(c: &IndexCell) -> usize {
    c.digits.min(MAX_DECIMALS) as usize
}

fn cell(c: &IndexCell) -> [String; 3] {
    let d = decimals(c);
    [format!("{:.d$}", c.value), format!("{:.d$}", c.ci.0), format!("{:.d$}", c.ci.1)]
}

fn writer(out: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// One record per (row, input).
pub fn run_records(report: &RunReport) -> Vec<Vec<String>> {
    let mut recs = Vec::new();
    for row in &report.rows {
        for (j, name) in report.inputs.iter().enumerate() {
            let [bf, bf_lo, bf_hi] = cell(&row.baseline[j].first);
            let [bt, bt_lo, bt_hi] = cell(&row.baseline[j].total);
            let [pf, pf_lo, pf_hi] = cell(&row.perturbed[j].first);
            let [pt, pt_lo, pt_hi] = cell(&row.perturbed[j].total);
            let expected = |side: Side| {
                row.checks
                    .iter()
                    .find(|c| c.input == j && c.side == side)
                    .map_or(String::new(), |c| format!("{}", c.expected))
            };
            let mine: Vec<_> = row.checks.iter().filter(|c| c.input == j).collect();
            let within = if mine.is_empty() {
                String::new()
            } else if mine.iter().all(|c| c.pass) {
                "yes".into()
            } else {
                "no".into()
            };
            let mut flags = Vec::new();
            if j == row.index {
                flags.push("perturbed".to_string());
            }
            let values = [&row.baseline[j].first, &row.baseline[j].total, &row.perturbed[j].first, &row.perturbed[j].total];
            if values.iter().any(|c| c.value < 0.0) {
                flags.push("negative-estimate".into());
            }
            if row.clamps > 0 {
                flags.push(format!("sigma-clamped:{}", row.clamps));
            }
            recs.push(vec![
                report.scenario.clone(),
                row.name.clone(),
                name.clone(),
                row.baseline_laws[j].clone(),
                row.perturbed_laws[j].clone(),
                bf,
                bt,
                pf,
                pt,
                bf_lo,
                bf_hi,
                bt_lo,
                bt_hi,
                pf_lo,
                pf_hi,
                pt_lo,
                pt_hi,
                expected(Side::Baseline),
                expected(Side::Perturbed),
                within,
                row.orders[0].verdict.to_string(),
                row.orders[1].verdict.to_string(),
                row.orders[2].verdict.to_string(),
                row.theorem.label().to_string(),
                flags.join(" "),
            ]);
        }
    }
    recs
}

pub fn run_csv(report: &RunReport) -> Result<String> {
    let mut out = Vec::new();
    {
        let mut w = writer(&mut out);
        w.write_record(RUN_HEADER)?;
        for r in run_records(report) {
            w.write_record(&r)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("csv of utf-8 strings"))
}

pub fn check_records(rows: &[CheckRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.case.to_string(),
                r.quantity.clone(),
                r.value.render(),
                r.expect.render_expected(),
                r.expect.render_rule(),
                match r.pass() {
                    Some(true) => "yes".into(),
                    Some(false) => "no".into(),
                    None => String::new(),
                },
                r.note.clone(),
            ]
        })
        .collect()
}

pub fn check_csv(rows: &[CheckRow]) -> Result<String> {
    let mut out = Vec::new();
    {
        let mut w = writer(&mut out);
        w.write_record(CHECK_HEADER)?;
        for r in check_records(rows) {
            w.write_record(&r)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("csv of utf-8 strings"))
}

fn aligned(header: &[&str], records: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in records {
        for (w, f) in width.iter_mut().zip(r) {
            *w = (*w).max(f.chars().count());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, fields: &mut dyn Iterator<Item = &str>| {
        let cols: Vec<String> = fields
            .zip(&width)
            .map(|(f, w)| format!("{f:<w$}"))
            .collect();
        s.push_str(cols.join("  ").trim_end());
        s.push('\n');
    };
    line(&mut s, &mut header.iter().copied());
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    line(&mut s, &mut rule.iter().map(String::as_str));
    for r in records {
        line(&mut s, &mut r.iter().map(String::as_str));
    }
    s
}

pub fn run_text(report: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}: {}", report.scenario, report.title);
    match (report.samples, report.bootstrap) {
        (Some(n), Some(b)) => {
            let _ = writeln!(s, "monte carlo, N = {n}, B = {b}, seed = {}", report.seed);
        }
        _ => {
            let _ = writeln!(s, "closed form");
        }
    }
    let cols = [1usize, 2, 3, 5, 6, 11, 12, 4, 7, 8, 15, 16, 17, 18, 19];
    let header: Vec<&str> = cols.iter().map(|&c| RUN_HEADER[c]).collect();
    let records: Vec<Vec<String>> = run_records(report)
        .into_iter()
        .map(|r| cols.iter().map(|&c| r[c].clone()).collect())
        .collect();
    s.push_str(&aligned(&header, &records));
    for row in &report.rows {
        let orders: Vec<String> = row.orders.iter().map(|o| format!("{} {}", o.relation, o.verdict)).collect();
        let _ = writeln!(s, "row {}: {}; {}", row.name, orders.join(", "), row.theorem);
        if row.clamps > 0 {
            let _ = writeln!(s, "row {}: volatility clamped {} times", row.name, row.clamps);
        }
    }
    let _ = writeln!(s, "wall clock {:.1} s", report.wall_clock.as_secs_f64());
    s
}

pub fn check_text(rows: &[CheckRow]) -> String {
    aligned(&CHECK_HEADER, &check_records(rows))
}

pub fn emit_run(report: &RunReport, format: Format) -> Result<String> {
    match format {
        Format::Csv => run_csv(report),
        Format::Text => Ok(run_text(report)),
    }
}

pub fn emit_checks(rows: &[CheckRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => check_csv(rows),
        Format::Text => Ok(check_text(rows)),
    }
}

/// Failed expectations as an aligned table; empty when all passed.
pub fn diff_table(report: &RunReport) -> String {
    let mut recs = Vec::new();
    for row in &report.rows {
        for c in row.checks.iter().filter(|c| !c.pass) {
            recs.push(vec![
                row.name.clone(),
                report.inputs[c.input].clone(),
                c.side.to_string(),
                format!("{}", c.expected),
                format!("{:.4}", c.got),
                format!("{:+.4}", c.got - c.expected),
                c.tolerance.to_string(),
            ]);
        }
        if let crate::run::TheoremVerdict::Violated(..) = row.theorem {
            recs.push(vec![row.name.clone(), String::new(), "theorem".into(), String::new(), String::new(), String::new(), row.theorem.to_string()]);
        }
    }
    if recs.is_empty() {
        return String::new();
    }
    aligned(&["row", "parameter", "side", "expected", "got", "diff", "tolerance"], &recs)
}
