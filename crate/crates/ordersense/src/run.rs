//! Baseline-versus-perturbed runs of a scenario.

use std::fmt;
use std::time::{Duration, Instant};

use ordersense_core::hoeffding::{decompose, Form};
use ordersense_core::montecarlo::{estimate_indices_with, significant_digits, EstimationPlan, Model, SobolEstimate};
use ordersense_core::orders::{check_disp, check_ew, check_st, CheckConfig};
use ordersense_core::{Distribution, Law, OrderReport, StructuredFunction};

use crate::error::Result;
use crate::lawspec::format_law;
use crate::parallel::Parallel;
use crate::scenario::{Method, ModelKind, Row, Scenario, Shape};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BOOTSTRAP: usize = 1000;

/// Sample size used when the plan leaves it open.
pub fn default_samples(model: &ModelKind) -> usize {
    match model {
        ModelKind::Var(_) => 1_000_000,
        ModelKind::Vasicek(_) => 200_000,
        ModelKind::Heston(_) => 50_000,
        ModelKind::Structured(..) => 100_000,
    }
}

/// Command line, then `ORDERSENSE_SEED`, then the scenario file, then 42.
pub fn resolve_seed(cli: Option<u64>, env: Option<&str>, file: Option<u64>) -> Result<u64, String> {
    if let Some(s) = cli {
        return Ok(s);
    }
    if let Some(e) = env {
        return e
            .trim()
            .parse()
            .map_err(|_| format!("ORDERSENSE_SEED must be an unsigned integer, got `{e}`"));
    }
    Ok(file.unwrap_or(DEFAULT_SEED))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub bootstrap: Option<usize>,
}

/// One index with its interval; closed-form values carry a zero-width
/// interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexCell {
    pub value: f64,
    pub ci: (f64, f64),
    pub digits: u32,
}

impl IndexCell {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            ci: (value, value),
            digits: significant_digits(0.0),
        }
    }

    pub fn from_estimate(e: &SobolEstimate) -> Self {
        Self {
            value: e.value,
            ci: e.ci95,
            digits: e.significant_digits(),
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputIndices {
    pub first: IndexCell,
    pub total: IndexCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// Additive form, excess-wealth hypothesis, first-order indices.
    Additive,
    /// Product or disjoint sum of products, dispersive and usual
    /// stochastic hypotheses, total indices.
    Product,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::Additive => "additive",
            Theorem::Product => "product",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TheoremVerdict {
    Consistent(Theorem),
    Violated(Theorem, String),
    HypothesesNotMet(Theorem, String),
    OutsideScope(String),
}

impl TheoremVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            TheoremVerdict::Consistent(_) => "consistent",
            TheoremVerdict::Violated(..) => "violated",
            TheoremVerdict::HypothesesNotMet(..) => "hypotheses not met",
            TheoremVerdict::OutsideScope(_) => "outside theorem scope",
        }
    }
}

impl fmt::Display for TheoremVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoremVerdict::Consistent(t) => write!(f, "consistent with the {t} theorem"),
            TheoremVerdict::Violated(t, why) => write!(f, "violates the {t} theorem: {why}"),
            TheoremVerdict::HypothesesNotMet(t, why) => write!(f, "{t} theorem hypotheses not met: {why}"),
            TheoremVerdict::OutsideScope(why) => write!(f, "outside theorem scope: {why}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Baseline,
    Perturbed,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Baseline => "baseline",
            Side::Perturbed => "perturbed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// `got < below` and within a factor of `factor` of the expectation.
    Factor { factor: f64, below: f64 },
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Absolute(t) => write!(f, "+-{t}"),
            Tolerance::Factor { factor, below } => write!(f, "x{factor} and <{below}"),
        }
    }
}

impl Tolerance {
    pub fn accepts(&self, expected: f64, got: f64) -> bool {
        match *self {
            Tolerance::Absolute(t) => (got - expected).abs() <= t,
            Tolerance::Factor { factor, below } => {
                got < below && got > 0.0 && expected > 0.0 && got <= expected * factor && got * factor >= expected
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCheck {
    pub input: usize,
    pub side: Side,
    pub expected: f64,
    pub got: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RowReport {
    pub name: String,
    pub index: usize,
    pub baseline_laws: Vec<String>,
    pub perturbed_laws: Vec<String>,
    pub baseline: Vec<InputIndices>,
    pub perturbed: Vec<InputIndices>,
    /// Dispersive, usual stochastic and excess-wealth checks of the
    /// baseline law against the perturbed one.
    pub orders: Vec<OrderReport>,
    pub theorem: TheoremVerdict,
    pub checks: Vec<CellCheck>,
    /// Heston volatility-of-variance clamps during the two runs.
    pub clamps: u64,
}

impl RowReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count() + usize::from(matches!(self.theorem, TheoremVerdict::Violated(..)))
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub title: String,
    pub inputs: Vec<String>,
    pub method: Method,
    pub samples: Option<usize>,
    pub bootstrap: Option<usize>,
    pub seed: u64,
    pub rows: Vec<RowReport>,
    pub wall_clock: Duration,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().map(RowReport::failures).sum()
    }

    /// Inconclusive order checks; reported, never counted as failures.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in &self.rows {
            for o in &r.orders {
                if let Some(note) = o.note.as_ref().filter(|_| !o.holds() && !o.fails()) {
                    out.push(format!("{} row {}: {} check inconclusive: {note}", self.scenario, r.name, o.relation));
                }
            }
        }
        out
    }
}

fn indices(
    scenario: &Scenario,
    laws: &[Distribution],
    plan: Option<&EstimationPlan>,
) -> Result<Vec<InputIndices>> {
    let Some(plan) = plan else {
        let sf = scenario.model.structured().expect("validated closed-form model");
        let d = decompose(&sf, laws)?;
        return Ok((0..laws.len())
            .map(|i| InputIndices {
                first: IndexCell::exact(d.first_order[i]),
                total: IndexCell::exact(d.total[i]),
            })
            .collect());
    };
    let est = match &scenario.model {
        ModelKind::Var(m) => estimate_indices_with(m, laws, plan, &Parallel)?,
        ModelKind::Vasicek(m) => estimate_indices_with(m, laws, plan, &Parallel)?,
        ModelKind::Heston(m) => estimate_indices_with(m, laws, plan, &Parallel)?,
        ModelKind::Structured(sf, _) => estimate_indices_with(sf as &dyn Model, laws, plan, &Parallel)?,
    };
    Ok(est
        .chunks(2)
        .map(|p| InputIndices {
            first: IndexCell::from_estimate(&p[0]),
            total: IndexCell::from_estimate(&p[1]),
        })
        .collect())
}

/// Structural form and declared factor shapes, when a theorem can apply.
fn theorem_for(model: &ModelKind) -> Result<(StructuredFunction, Vec<Shape>), String> {
    match model {
        ModelKind::Var(m) => {
            let shape = if m.alpha >= 0.5 { Shape::LogConvex } else { Shape::None };
            Ok((m.as_structured(), vec![shape; 2]))
        }
        ModelKind::Structured(sf, shape) => Ok((sf.clone(), shape.clone())),
        ModelKind::Vasicek(_) => Err("bond price is not a product of one-dimensional factors".into()),
        ModelKind::Heston(_) => Err("call price is not a product of one-dimensional factors".into()),
    }
}

fn audit(
    model: &ModelKind,
    row: &Row,
    orders: &[OrderReport],
    base: &[InputIndices],
    pert: &[InputIndices],
) -> TheoremVerdict {
    let (sf, shape) = match theorem_for(model) {
        Ok(x) => x,
        Err(why) => return TheoremVerdict::OutsideScope(why),
    };
    let i = row.index;
    let (disp, st, ew) = (&orders[0], &orders[1], &orders[2]);
    let theorem = match sf.form() {
        Form::Additive => Theorem::Additive,
        Form::Product | Form::SumOfProducts { partition: Some(_) } => Theorem::Product,
        _ => return TheoremVerdict::OutsideScope("neither additive nor a product over disjoint blocks".into()),
    };
    let mut unmet = Vec::new();
    match theorem {
        Theorem::Additive => {
            if !matches!(shape[i], Shape::Convex | Shape::LogConvex) {
                unmet.push(format!("factor {} not declared non-decreasing convex", i + 1));
            }
            if !ew.holds() {
                unmet.push(format!("ew check {}", ew.verdict));
            }
            let (l_star, l) = (row.baseline[i].left_endpoint(), row.perturbed[i].left_endpoint());
            if !(l_star.is_finite() && l_star <= l) {
                unmet.push(format!("left endpoints {l_star} and {l} not ordered"));
            }
        }
        Theorem::Product => {
            if shape[i] != Shape::LogConvex {
                unmet.push(format!("factor {} not declared log-convex non-decreasing", i + 1));
            }
            if !disp.holds() {
                unmet.push(format!("disp check {}", disp.verdict));
            }
            if !st.holds() {
                unmet.push(format!("st check {}", st.verdict));
            }
        }
    }
    if !unmet.is_empty() {
        return TheoremVerdict::HypothesesNotMet(theorem, unmet.join("; "));
    }
    let cell = |v: &InputIndices| match theorem {
        Theorem::Additive => v.first,
        Theorem::Product => v.total,
    };
    let slack = |a: IndexCell, b: IndexCell| a.half_width() + b.half_width() + 1e-12;
    for j in 0..base.len() {
        let (s_star, s) = (cell(&base[j]), cell(&pert[j]));
        let ok = if j == i {
            s_star.value <= s.value + slack(s_star, s)
        } else {
            s_star.value + slack(s_star, s) >= s.value
        };
        if !ok {
            let rel = if j == i { ">" } else { "<" };
            return TheoremVerdict::Violated(
                theorem,
                format!("input {}: {} {rel} {}", j + 1, s_star.value, s.value),
            );
        }
    }
    TheoremVerdict::Consistent(theorem)
}

fn checks(row: &Row, side: Side, expected: Option<&Vec<f64>>, got: &[InputIndices]) -> Vec<CellCheck> {
    let Some(expected) = expected else { return Vec::new() };
    expected
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_finite())
        .map(|(j, &e)| {
            let tolerance = match row.small_below {
                Some(below) if e < below => Tolerance::Factor {
                    factor: row.small_factor,
                    below,
                },
                _ => Tolerance::Absolute(row.tolerance),
            };
            let v = got[j].total.value;
            CellCheck {
                input: j,
                side,
                expected: e,
                got: v,
                tolerance,
                pass: tolerance.accepts(e, v),
            }
        })
        .collect()
}

/// Runs every row of `scenario` under `opts`.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let seed = opts.seed.or(scenario.seed).unwrap_or(DEFAULT_SEED);
    let plan = match scenario.method {
        Method::ClosedForm => None,
        Method::MonteCarlo => Some(EstimationPlan {
            n: opts.samples.or(scenario.samples).unwrap_or_else(|| default_samples(&scenario.model)),
            bootstrap: opts.bootstrap.or(scenario.bootstrap).unwrap_or(DEFAULT_BOOTSTRAP),
            seed,
        }),
    };
    let cfg = CheckConfig::default();
    let mut rows = Vec::with_capacity(scenario.rows.len());
    for row in &scenario.rows {
        if let ModelKind::Heston(h) = &scenario.model {
            h.reset_clamp_count();
        }
        let baseline = indices(scenario, &row.baseline, plan.as_ref())?;
        let perturbed = indices(scenario, &row.perturbed, plan.as_ref())?;
        let clamps = match &scenario.model {
            ModelKind::Heston(h) => h.clamp_count(),
            _ => 0,
        };
        let (x_star, x) = (&row.baseline[row.index], &row.perturbed[row.index]);
        let orders = vec![check_disp(x_star, x, &cfg), check_st(x_star, x, &cfg), check_ew(x_star, x, &cfg)];
        let theorem = audit(&scenario.model, row, &orders, &baseline, &perturbed);
        let mut cell_checks = checks(row, Side::Baseline, row.expect_baseline_total.as_ref(), &baseline);
        cell_checks.extend(checks(row, Side::Perturbed, row.expect_perturbed_total.as_ref(), &perturbed));
        rows.push(RowReport {
            name: row.name.clone(),
            index: row.index,
            baseline_laws: row.baseline.iter().map(format_law).collect(),
            perturbed_laws: row.perturbed.iter().map(format_law).collect(),
            baseline,
            perturbed,
            orders,
            theorem,
            checks: cell_checks,
            clamps,
        });
    }
    Ok(RunReport {
        scenario: scenario.name.clone(),
        title: scenario.title.clone(),
        inputs: scenario.inputs.clone(),
        method: scenario.method,
        samples: plan.map(|p| p.n),
        bootstrap: plan.map(|p| p.bootstrap),
        seed,
        rows,
        wall_clock: start.elapsed(),
    })
}
