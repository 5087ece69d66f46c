//! Scenario files, reproduction runs, table output and the command line
//! front end for `ordersense-core`.

pub mod counterexamples;
pub mod error;
pub mod expr;
pub mod lawspec;
pub mod parallel;
pub mod report;
pub mod run;
pub mod scenario;

use std::time::{Duration, Instant};

pub use error::{CliError, Result};
pub use report::Format;
pub use run::{run_scenario, RunOptions, RunReport};
pub use scenario::Scenario;

/// What `reproduce` can target, in the order `all` runs them.
pub const TARGETS: [&str; 5] = ["table1", "table2", "table3", "table4", "counterexamples"];

/// One rendered reproduction table.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub body: String,
    pub failures: usize,
    pub warnings: Vec<String>,
    /// Diff table of missed expectations, empty when none.
    pub diff: String,
    pub elapsed: Duration,
}

pub fn reproduce_one(target: &str, opts: &RunOptions, format: Format) -> Result<Artifact> {
    let start = Instant::now();
    if target == "counterexamples" {
        let rows = counterexamples::run_counterexamples()?;
        let failed: Vec<_> = rows.iter().filter(|r| r.pass() == Some(false)).cloned().collect();
        return Ok(Artifact {
            name: target.into(),
            body: report::emit_checks(&rows, format)?,
            failures: failed.len(),
            warnings: Vec::new(),
            diff: if failed.is_empty() { String::new() } else { report::check_text(&failed) },
            elapsed: start.elapsed(),
        });
    }
    let s = scenario::bundled(target)?;
    let r = run_scenario(&s, opts)?;
    Ok(Artifact {
        name: target.into(),
        body: report::emit_run(&r, format)?,
        failures: r.failures(),
        warnings: r.warnings(),
        diff: report::diff_table(&r),
        elapsed: start.elapsed(),
    })
}

/// `target` is one of [`TARGETS`] or `all`.
pub fn reproduce(target: &str, opts: &RunOptions, format: Format) -> Result<Vec<Artifact>> {
    let names: Vec<&str> = if target == "all" {
        TARGETS.to_vec()
    } else if TARGETS.contains(&target) {
        vec![target]
    } else {
        return Err(CliError::Scenario {
            name: target.into(),
            message: format!("unknown target (expected one of {} or all)", TARGETS.join(", ")),
        });
    };
    names.into_iter().map(|n| reproduce_one(n, opts, format)).collect()
}
