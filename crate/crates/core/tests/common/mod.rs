//! Brute-force tensor-grid oracle and the structured test functions shared by
//! the integration and acceptance suites.
#![allow(dead_code, clippy::needless_range_loop)]

use ordersense_core::hoeffding::{ProductTerm, ScalarFn, StructuredFunction};
use ordersense_core::models::VarModel;
use ordersense_core::{Distribution, Law};

pub mod families;
pub mod oracles;

// 5-point Gauss-Legendre on [-1, 1].
const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Composite 5-point rule on `(0, 1)` with `panels` panels.
pub fn unit_nodes(panels: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 1.0 / panels as f64;
    let mut x = Vec::with_capacity(5 * panels);
    let mut w = Vec::with_capacity(5 * panels);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in GL5_X.iter().zip(GL5_W) {
            x.push(mid + 0.5 * h * xi);
            w.push(0.5 * h * wi);
        }
    }
    (x, w)
}

/// Panels per axis: fine for one or two inputs, coarser for three.
pub fn default_panels(k: usize) -> usize {
    if k <= 2 {
        200
    } else {
        25
    }
}

/// `E f`, `Var f`, first-order and total indices by integrating `f` over the
/// quantile transform of every input on a full tensor grid.
pub struct TensorOracle {
    pub mean: f64,
    pub variance: f64,
    pub first: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn tensor_oracle(f: &dyn Fn(&[f64]) -> f64, laws: &[Distribution], panels: usize) -> TensorOracle {
    let k = laws.len();
    assert!((1..=3).contains(&k), "tensor oracle supports k <= 3");
    let (u, w) = unit_nodes(panels);
    let n = u.len();
    let xs: Vec<Vec<f64>> = laws.iter().map(|d| u.iter().map(|&ui| d.inverse_cdf(ui)).collect()).collect();
    let total_points = n.pow(k as u32);
    let mut values = vec![0.0; total_points];
    let mut weights = vec![0.0; total_points];
    let mut x = vec![0.0; k];
    for (p, (v, wt)) in values.iter_mut().zip(weights.iter_mut()).enumerate() {
        let mut rem = p;
        let mut weight = 1.0;
        for j in 0..k {
            let a = rem % n;
            rem /= n;
            x[j] = xs[j][a];
            weight *= w[a];
        }
        *v = f(&x);
        *wt = weight;
    }
    let mean: f64 = values.iter().zip(&weights).map(|(v, w)| v * w).sum();
    let variance: f64 = values.iter().zip(&weights).map(|(v, w)| w * (v - mean).powi(2)).sum();

    let mut first = vec![0.0; k];
    let mut total = vec![0.0; k];
    for i in 0..k {
        let stride = n.pow(i as u32);
        // E(f | X_i)
        let mut cond = vec![0.0; n];
        for (p, (v, wt)) in values.iter().zip(&weights).enumerate() {
            cond[(p / stride) % n] += v * wt / w[(p / stride) % n];
        }
        first[i] = cond.iter().zip(&w).map(|(c, wi)| wi * (c - mean).powi(2)).sum::<f64>() / variance;
        // E(f | X_{-i}): collapse axis i
        let rest = total_points / n;
        let mut cond_rest = vec![0.0; rest];
        let mut w_rest = vec![0.0; rest];
        for (p, (v, wt)) in values.iter().zip(&weights).enumerate() {
            let a = (p / stride) % n;
            let q = (p % stride) + (p / (stride * n)) * stride;
            cond_rest[q] += v * w[a];
            w_rest[q] = wt / w[a];
        }
        let v_rest: f64 = cond_rest.iter().zip(&w_rest).map(|(c, wr)| wr * (c - mean).powi(2)).sum();
        total[i] = 1.0 - v_rest / variance;
    }
    TensorOracle {
        mean,
        variance,
        first,
        total,
    }
}

pub fn u(a: f64, b: f64) -> Distribution {
    Distribution::uniform(a, b).unwrap()
}

pub fn nt(m: f64, v: f64, a: f64, b: f64) -> Distribution {
    Distribution::truncated_normal(m, v, a, b).unwrap()
}

pub fn et(rate: f64, a: f64, b: f64) -> Distribution {
    Distribution::truncated_exponential(rate, a, b).unwrap()
}

pub fn g(name: &str, f: fn(f64) -> f64) -> Option<ScalarFn> {
    Some(ScalarFn::new(name, f))
}

pub struct Case {
    pub name: &'static str,
    pub f: StructuredFunction,
    pub laws: Vec<Distribution>,
}

fn case(name: &'static str, f: StructuredFunction, laws: Vec<Distribution>) -> Case {
    assert_eq!(f.dim(), laws.len(), "{name}");
    Case { name, f, laws }
}

/// Structured functions over bounded laws with `k <= 3`.
pub fn cases() -> Vec<Case> {
    let id = || Some(ScalarFn::identity());
    let ex = || Some(ScalarFn::exp());
    let sop = |k, terms, c| StructuredFunction::sum_of_products(k, terms, c).unwrap();
    vec![
        case("sum-uniform", StructuredFunction::additive(vec![id(), id()], 0.0).unwrap(), vec![u(0.0, 1.0), u(0.0, 1.0)]),
        case("sum-unequal-widths", StructuredFunction::additive(vec![id(), id()], 1.0).unwrap(), vec![u(0.0, 1.0), u(0.0, 2.0)]),
        case(
            "additive-exp-square",
            StructuredFunction::additive(vec![ex(), g("x^2", |x| x * x)], 0.0).unwrap(),
            vec![u(0.0, 1.0), nt(0.5, 2.0, 0.0, 2.0)],
        ),
        case(
            "additive-three",
            StructuredFunction::additive(vec![id(), g("2x", |x| 2.0 * x), g("3x", |x| 3.0 * x)], -4.0).unwrap(),
            vec![nt(0.0, 1.0, -1.0, 2.0), u(0.0, 1.0), et(2.0, 0.0, 1.5)],
        ),
        case(
            "additive-inert",
            StructuredFunction::additive(vec![g("sqrt(1+x)", |x| (1.0 + x).sqrt()), None], 0.0).unwrap(),
            vec![u(0.0, 3.0), u(0.0, 1.0)],
        ),
        case("product-two", StructuredFunction::product(1.0, vec![id(), id()], 0.0).unwrap(), vec![u(0.0, 1.0), u(0.0, 1.0)]),
        case(
            "product-three",
            StructuredFunction::product(2.0, vec![id(), id(), id()], 1.0).unwrap(),
            vec![u(0.0, 1.0), u(1.0, 2.0), u(0.5, 3.0)],
        ),
        case("product-exp", StructuredFunction::product(1.0, vec![ex(), ex(), ex()], 0.0).unwrap(), vec![u(0.0, 1.0); 3]),
        case(
            "product-exp-exp",
            StructuredFunction::product(1.0, vec![g("exp(exp(x))", |x| x.exp().exp()), ex(), ex()], 0.0).unwrap(),
            vec![u(1.0, 1.9), u(0.0, 1.0), u(0.0, 1.0)],
        ),
        case(
            "var-model",
            VarModel::new(100.0, 100.0, 1.0, 0.9).unwrap().as_structured(),
            vec![u(0.0, 1.0), u(0.0, 2.0)],
        ),
        case(
            "var-model-truncated",
            VarModel::new(100.0, 100.0, 1.0, 0.9).unwrap().as_structured(),
            vec![u(0.0, 1.0), et(5.0, 0.0, 1.0)],
        ),
        case(
            "product-trig",
            StructuredFunction::product(1.0, vec![g("sin", f64::sin), g("cos", f64::cos)], 0.0).unwrap(),
            vec![u(0.0, 1.5), u(0.0, 1.0)],
        ),
        case(
            "product-square-affine",
            StructuredFunction::product(1.0, vec![g("x^2", |x| x * x), g("1+x", |x| 1.0 + x)], 0.0).unwrap(),
            vec![u(0.0, 1.0), nt(0.5, 2.0, 0.0, 2.0)],
        ),
        case(
            "partitioned",
            StructuredFunction::partitioned(
                3,
                vec![
                    vec![(0, ScalarFn::exp()), (1, ScalarFn::exp())],
                    vec![(2, ScalarFn::exp())],
                ],
                0.0,
            )
            .unwrap(),
            vec![u(0.0, 1.0); 3],
        ),
        case(
            "overlapping-terms",
            sop(
                3,
                vec![
                    ProductTerm::new(1.0, vec![id(), id(), None]),
                    ProductTerm::new(1.0, vec![None, id(), id()]),
                ],
                0.0,
            ),
            vec![u(0.0, 1.0); 3],
        ),
        case(
            "signed-terms",
            sop(
                3,
                vec![
                    ProductTerm::new(2.0, vec![id(), id(), None]),
                    ProductTerm::new(-1.0, vec![id(), None, g("x^2", |x| x * x)]),
                    ProductTerm::new(0.5, vec![None, ex(), None]),
                ],
                3.0,
            ),
            vec![u(0.0, 1.0), u(-1.0, 1.0), nt(0.5, 2.0, 0.0, 2.0)],
        ),
        case(
            "constant-plus-cubic-interaction",
            sop(
                3,
                vec![
                    ProductTerm::new(1.0, vec![id(), id(), id()]),
                    ProductTerm::new(1.0, vec![id(), None, None]),
                ],
                5.0,
            ),
            vec![u(0.0, 1.0), u(0.0, 2.0), u(0.0, 1.0)],
        ),
        case(
            "mixed-truncated",
            sop(
                2,
                vec![
                    ProductTerm::new(1.0, vec![g("log(1+x)", f64::ln_1p), None]),
                    ProductTerm::new(1.0, vec![id(), id()]),
                ],
                0.0,
            ),
            vec![et(1.0, 0.0, 2.0), nt(0.5, 2.0, 0.0, 2.0)],
        ),
        case(
            "phi-mix",
            StructuredFunction::phi_mix(0, ScalarFn::new("exp(x^2)", |x| (x * x).exp()), ScalarFn::exp(), vec![None, ex()]).unwrap(),
            vec![u(0.0, 1.8), u(0.0, 1.0)],
        ),
        case(
            "phi-mix-three",
            StructuredFunction::phi_mix(1, ScalarFn::identity(), g("x^2", |x| x * x).unwrap(), vec![ex(), None, id()]).unwrap(),
            vec![u(0.0, 1.0), u(1.0, 2.0), et(2.0, 0.0, 1.0)],
        ),
        case(
            "squares-product",
            sop(
                2,
                vec![
                    ProductTerm::new(1.0, vec![g("(1+x)^2", |x| (1.0 + x) * (1.0 + x)), id()]),
                    ProductTerm::new(-0.5, vec![id(), g("x^3", |x| x * x * x)]),
                ],
                0.0,
            ),
            vec![u(0.0, 1.0), u(0.0, 1.0)],
        ),
        case(
            "single-input",
            StructuredFunction::additive(vec![g("x^3", |x| x * x * x)], 2.0).unwrap(),
            vec![nt(0.0, 4.0, -1.0, 1.0)],
        ),
    ]
}
