//! Scenario documents: a model, its inputs, an estimation plan and one or
//! more baseline-versus-perturbed rows.
//!
//! ```toml
//! schema_version = 1
//! name = "table2"
//! inputs = ["a", "b", "sigma"]
//!
//! [model]
//! kind = "vasicek"
//! r0 = 0.1
//! t = 1.0
//!
//! [plan]
//! method = "monte-carlo"
//! samples = 200000
//!
//! [[row]]
//! name = "b"
//! baseline = ["U[0,1]", "U[0,1]", "U[0,1]"]
//! perturb = { input = "b", law = "U[0,2]" }
//! expect_baseline_total = [0.41, 0.52, 0.18]
//! expect_perturbed_total = [0.48, 0.57, 0.06]
//! ```
//!
//! An expected value of `nan` leaves that cell unasserted.

use std::path::Path;

use ordersense_core::models::{HestonModel, VarModel, VasicekModel};
use ordersense_core::{Distribution, StructuredFunction};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::expr::parse_structured;
use crate::lawspec::parse_law;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub title: String,
    pub inputs: Vec<String>,
    pub model: ModelSpec,
    pub plan: PlanSpec,
    #[serde(rename = "row", default)]
    pub rows: Vec<RowSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Var { s0: f64, k: f64, t: f64, alpha: f64 },
    Vasicek { r0: f64, t: f64 },
    Heston { s0: f64, k: f64, t: f64 },
    Structured {
        function: String,
        /// Declared shape of each one-dimensional factor.
        #[serde(default)]
        shape: Vec<Shape>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// Non-decreasing and convex.
    Convex,
    /// Logarithm non-decreasing and convex.
    LogConvex,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSpec {
    pub method: Method,
    pub samples: Option<usize>,
    pub bootstrap: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub input: String,
    pub law: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub name: String,
    pub baseline: Vec<String>,
    pub perturb: Perturbation,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Cells below this value are matched up to a factor instead.
    pub small_below: Option<f64>,
    #[serde(default = "default_small_factor")]
    pub small_factor: f64,
    pub expect_baseline_total: Option<Vec<f64>>,
    pub expect_perturbed_total: Option<Vec<f64>>,
    #[serde(default)]
    pub provenance: String,
}

fn default_tolerance() -> f64 {
    0.02
}

fn default_small_factor() -> f64 {
    3.0
}

/// The evaluable model behind a scenario.
#[derive(Clone)]
pub enum ModelKind {
    Var(VarModel),
    Vasicek(VasicekModel),
    Heston(HestonModel),
    Structured(StructuredFunction, Vec<Shape>),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Var(_) => "var",
            ModelKind::Vasicek(_) => "vasicek",
            ModelKind::Heston(_) => "heston",
            ModelKind::Structured(..) => "structured",
        }
    }

    /// Closed-form structure, when there is one.
    pub fn structured(&self) -> Option<StructuredFunction> {
        match self {
            ModelKind::Var(m) => Some(m.as_structured()),
            ModelKind::Structured(sf, _) => Some(sf.clone()),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelKind::Var(_) => 2,
            ModelKind::Vasicek(_) => 3,
            ModelKind::Heston(_) => 7,
            ModelKind::Structured(sf, _) => sf.dim(),
        }
    }
}

#[derive(Clone)]
pub struct Row {
    pub name: String,
    pub baseline: Vec<Distribution>,
    pub perturbed: Vec<Distribution>,
    /// Index of the input whose law differs.
    pub index: usize,
    pub tolerance: f64,
    pub small_below: Option<f64>,
    pub small_factor: f64,
    pub expect_baseline_total: Option<Vec<f64>>,
    pub expect_perturbed_total: Option<Vec<f64>>,
    pub provenance: String,
}

#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub title: String,
    pub inputs: Vec<String>,
    pub model: ModelKind,
    pub method: Method,
    pub samples: Option<usize>,
    pub bootstrap: Option<usize>,
    pub seed: Option<u64>,
    pub rows: Vec<Row>,
}

impl Scenario {
    pub fn from_toml(name_hint: &str, text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Scenario {
            name: name_hint.to_string(),
            message: e.to_string(),
        })?;
        Self::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&path.display().to_string(), &text)
    }

    pub fn from_file(f: ScenarioFile) -> Result<Self> {
        let bad = |message: String| CliError::Scenario {
            name: f.name.clone(),
            message,
        };
        if f.schema_version != SCHEMA_VERSION {
            return Err(bad(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                f.schema_version
            )));
        }
        let k = f.inputs.len();
        let model = match &f.model {
            ModelSpec::Var { s0, k, t, alpha } => ModelKind::Var(VarModel::new(*s0, *k, *t, *alpha)?),
            ModelSpec::Vasicek { r0, t } => ModelKind::Vasicek(VasicekModel::new(*r0, *t)?),
            ModelSpec::Heston { s0, k, t } => ModelKind::Heston(HestonModel::new(*s0, *k, *t)?),
            ModelSpec::Structured { function, shape } => {
                if !shape.is_empty() && shape.len() != k {
                    return Err(bad(format!("{} shapes for {k} inputs", shape.len())));
                }
                let shape = if shape.is_empty() { vec![Shape::None; k] } else { shape.clone() };
                ModelKind::Structured(parse_structured(function, k)?, shape)
            }
        };
        if model.dim() != k {
            return Err(bad(format!(
                "model `{}` takes {} inputs but {k} are named",
                model.name(),
                model.dim()
            )));
        }
        if f.plan.method == Method::ClosedForm && model.structured().is_none() {
            return Err(bad(format!("closed-form plan needs a structured model, got `{}`", model.name())));
        }
        let mut rows = Vec::with_capacity(f.rows.len());
        for r in &f.rows {
            if r.baseline.len() != k {
                return Err(bad(format!("row `{}`: {} baseline laws for {k} inputs", r.name, r.baseline.len())));
            }
            let baseline = r.baseline.iter().map(|s| parse_law(s)).collect::<Result<Vec<_>>>()?;
            let index = f
                .inputs
                .iter()
                .position(|n| *n == r.perturb.input)
                .ok_or_else(|| bad(format!("row `{}`: unknown input `{}`", r.name, r.perturb.input)))?;
            let mut perturbed = baseline.clone();
            perturbed[index] = parse_law(&r.perturb.law)?;
            for (what, v) in [("baseline", &r.expect_baseline_total), ("perturbed", &r.expect_perturbed_total)] {
                if let Some(v) = v {
                    if v.len() != k {
                        return Err(bad(format!("row `{}`: {} expected {what} values for {k} inputs", r.name, v.len())));
                    }
                }
            }
            if r.tolerance.is_nan() || r.tolerance < 0.0 || r.small_factor.is_nan() || r.small_factor < 1.0 {
                return Err(bad(format!("row `{}`: tolerance must be >= 0 and small_factor >= 1", r.name)));
            }
            rows.push(Row {
                name: r.name.clone(),
                baseline,
                perturbed,
                index,
                tolerance: r.tolerance,
                small_below: r.small_below,
                small_factor: r.small_factor,
                expect_baseline_total: r.expect_baseline_total.clone(),
                expect_perturbed_total: r.expect_perturbed_total.clone(),
                provenance: r.provenance.clone(),
            });
        }
        Ok(Scenario {
            name: f.name,
            title: f.title,
            inputs: f.inputs,
            model,
            method: f.plan.method,
            samples: f.plan.samples,
            bootstrap: f.plan.bootstrap,
            seed: f.plan.seed,
            rows,
        })
    }
}

/// Scenario files that ship with the binary.
pub const BUNDLED: &[(&str, &str)] = &[
    ("table1", include_str!("../scenarios/table1.toml")),
    ("table2", include_str!("../scenarios/table2.toml")),
    ("table3", include_str!("../scenarios/table3.toml")),
    ("table4", include_str!("../scenarios/table4.toml")),
    ("thm2-stochastic-order", include_str!("../scenarios/thm2-stochastic-order.toml")),
    ("thm2-log-convexity", include_str!("../scenarios/thm2-log-convexity.toml")),
];

pub fn bundled(name: &str) -> Result<Scenario> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| CliError::Scenario {
            name: name.to_string(),
            message: "no bundled scenario with that name".into(),
        })?;
    Scenario::from_toml(name, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_file_validates() {
        for (name, _) in BUNDLED {
            let s = bundled(name).unwrap();
            assert_eq!(s.name, *name);
            assert!(!s.rows.is_empty());
        }
    }

    #[test]
    fn rejects_wrong_version_and_arity() {
        let ok = r#"
schema_version = 1
name = "t"
inputs = ["x", "y"]
[model]
kind = "structured"
function = "x1 + x2"
[plan]
method = "closed-form"
[[row]]
name = "r"
baseline = ["U[0,1]", "U[0,1]"]
perturb = { input = "y", law = "U[0,2]" }
"#;
        let s = Scenario::from_toml("t", ok).unwrap();
        assert_eq!(s.rows[0].index, 1);
        assert_ne!(s.rows[0].baseline[1], s.rows[0].perturbed[1]);
        assert!(Scenario::from_toml("t", &ok.replace("schema_version = 1", "schema_version = 2")).is_err());
        assert!(Scenario::from_toml("t", &ok.replace("input = \"y\"", "input = \"z\"")).is_err());
        assert!(Scenario::from_toml("t", &ok.replace("[\"U[0,1]\", \"U[0,1]\"]", "[\"U[0,1]\"]")).is_err());
        let mc_only = ok.replace("kind = \"structured\"\nfunction = \"x1 + x2\"", "kind = \"vasicek\"\nr0 = 0.1\nt = 1.0");
        assert!(Scenario::from_toml("t", &mc_only).is_err());
    }
}
