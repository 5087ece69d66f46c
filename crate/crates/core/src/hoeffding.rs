//! Closed-form Hoeffding (functional ANOVA) decomposition and Sobol indices
//! for structured output functions.
//!
//! A [`StructuredFunction`] is a constant plus a finite sum of products of
//! one-dimensional factors,
//!
//! ```text
//! f(x) = K + Σ_a c_a Π_j g_j^a(x_j).
//! ```
//!
//! With independent inputs every Hoeffding component of such a function is
//! determined by the one-dimensional moments `E g_j^a`, `Cov(g_j^a, g_j^b)`
//! and `E(g_j^a g_j^b)`. For a subset `α` of inputs,
//!
//! ```text
//! Var f_α = Σ_{a,b} c_a c_b Π_{j∉α} E g_j^a E g_j^b Π_{j∈α} Cov(g_j^a, g_j^b),
//! ```
//!
//! and the total-effect part `f_Ti = Σ_{α∋i} f_α` has variance
//! `Σ_{a,b} c_a c_b Cov(g_i^a, g_i^b) Π_{j≠i} E(g_j^a g_j^b)`. Conditional
//! expectations are always obtained by integrating out coordinates through
//! the quantile substitution, never from samples.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::distributions::{Distribution, Law};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveConfig, GaussLegendre};

/// Largest number of inputs for which all `2^k` subsets are enumerated.
pub const MAX_ENUMERATED_INPUTS: usize = 20;

/// A named real function of one variable.
#[derive(Clone)]
pub struct ScalarFn {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ScalarFn {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn identity() -> Self {
        Self::new("x", |x| x)
    }

    pub fn exp() -> Self {
        Self::new("exp(x)", libm::exp)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn same_as(&self, other: &ScalarFn) -> bool {
        Arc::ptr_eq(&self.f, &other.f)
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({})", self.name)
    }
}

/// `c · Π_j g_j(x_j)`; a missing factor stands for the constant 1.
#[derive(Debug, Clone)]
pub struct ProductTerm {
    pub coefficient: f64,
    pub factors: Vec<Option<ScalarFn>>,
}

impl ProductTerm {
    pub fn new(coefficient: f64, factors: Vec<Option<ScalarFn>>) -> Self {
        Self {
            coefficient,
            factors,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut p = self.coefficient;
        for (g, &xj) in self.factors.iter().zip(x) {
            if let Some(g) = g {
                p *= g.eval(xj);
            }
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Form {
    /// `K + Σ_j g_j(x_j)`.
    Additive,
    /// `K + c Π_j g_j(x_j)`.
    Product,
    /// `K + Σ_a c_a Π_j g_j^a(x_j)`, optionally over disjoint blocks.
    SumOfProducts { partition: Option<Vec<Vec<usize>>> },
    /// `φ1(x_i) Π_{j≠i} g_j(x_j) + φ2(x_i)`.
    PhiMix { index: usize },
}

#[derive(Debug, Clone)]
pub struct StructuredFunction {
    k: usize,
    form: Form,
    terms: Vec<ProductTerm>,
    constant: f64,
}

impl StructuredFunction {
    /// `K + Σ_j g_j(x_j)`; `None` marks an inert input.
    pub fn additive(factors: Vec<Option<ScalarFn>>, constant: f64) -> Result<Self> {
        let k = factors.len();
        check_k(k)?;
        let terms = factors
            .into_iter()
            .enumerate()
            .filter_map(|(j, g)| {
                g.map(|g| {
                    let mut f = vec![None; k];
                    f[j] = Some(g);
                    ProductTerm::new(1.0, f)
                })
            })
            .collect();
        Ok(Self {
            k,
            form: Form::Additive,
            terms,
            constant,
        })
    }

    /// `K + c Π_j g_j(x_j)`; `None` marks an inert input.
    pub fn product(coefficient: f64, factors: Vec<Option<ScalarFn>>, constant: f64) -> Result<Self> {
        let k = factors.len();
        check_k(k)?;
        Ok(Self {
            k,
            form: Form::Product,
            terms: vec![ProductTerm::new(coefficient, factors)],
            constant,
        })
    }

    /// General sum of products over `k` inputs.
    pub fn sum_of_products(k: usize, terms: Vec<ProductTerm>, constant: f64) -> Result<Self> {
        check_k(k)?;
        if terms.is_empty() {
            return Err(Error::InvalidArgument("sum of products needs at least one term".into()));
        }
        for t in &terms {
            if t.factors.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "term has {} factors, expected {k}",
                    t.factors.len()
                )));
            }
        }
        Ok(Self {
            k,
            form: Form::SumOfProducts { partition: None },
            terms,
            constant,
        })
    }

    /// `Σ_a Π_{j∈I_a} g_j(x_j)` over pairwise disjoint blocks `I_a`.
    pub fn partitioned(k: usize, blocks: Vec<Vec<(usize, ScalarFn)>>, constant: f64) -> Result<Self> {
        check_k(k)?;
        let mut seen = vec![false; k];
        let mut partition = Vec::with_capacity(blocks.len());
        let mut terms = Vec::with_capacity(blocks.len());
        for block in blocks {
            let mut factors = vec![None; k];
            let mut idx = Vec::with_capacity(block.len());
            for (j, g) in block {
                if j >= k {
                    return Err(Error::InvalidArgument(format!("input index {j} out of range")));
                }
                if seen[j] {
                    return Err(Error::InvalidArgument(format!(
                        "input {j} appears in more than one block"
                    )));
                }
                seen[j] = true;
                factors[j] = Some(g);
                idx.push(j);
            }
            idx.sort_unstable();
            partition.push(idx);
            terms.push(ProductTerm::new(1.0, factors));
        }
        if terms.is_empty() {
            return Err(Error::InvalidArgument("partition needs at least one block".into()));
        }
        Ok(Self {
            k,
            form: Form::SumOfProducts {
                partition: Some(partition),
            },
            terms,
            constant,
        })
    }

    /// `φ1(x_i) Π_{j≠i} g_j(x_j) + φ2(x_i)`; `others[i]` is ignored.
    pub fn phi_mix(index: usize, phi1: ScalarFn, phi2: ScalarFn, others: Vec<Option<ScalarFn>>) -> Result<Self> {
        let k = others.len();
        check_k(k)?;
        if index >= k {
            return Err(Error::InvalidArgument(format!("input index {index} out of range")));
        }
        let mut first = others;
        first[index] = Some(phi1);
        let mut second = vec![None; k];
        second[index] = Some(phi2);
        Ok(Self {
            k,
            form: Form::PhiMix { index },
            terms: vec![ProductTerm::new(1.0, first), ProductTerm::new(1.0, second)],
            constant: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Inputs that appear in no factor.
    pub fn inert(&self) -> Vec<usize> {
        (0..self.k)
            .filter(|&j| self.terms.iter().all(|t| t.factors[j].is_none()))
            .collect()
    }

    /// Same function viewed as a general sum of products.
    pub fn as_sum_of_products(&self) -> Self {
        Self {
            form: Form::SumOfProducts { partition: None },
            ..self.clone()
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.k);
        self.constant + self.terms.iter().map(|t| t.eval(x)).sum::<f64>()
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("structured function needs at least one input".into()));
    }
    if k > 64 {
        return Err(Error::TooManyInputs { k, max: 64 });
    }
    Ok(())
}

/// A set of input indices, as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn singleton(i: usize) -> Self {
        Subset(1 << i)
    }

    pub fn from_indices(indices: &[usize]) -> Self {
        Subset(indices.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    /// `f_∅ = E f(X)`.
    pub f_empty: f64,
    /// `Var f_α` for every non-empty subset the form can populate.
    pub component_variances: Vec<(Subset, f64)>,
    pub total_variance: f64,
    /// `S_i`.
    pub first_order: Vec<f64>,
    /// `S_Ti`.
    pub total: Vec<f64>,
}

impl DecompositionResult {
    pub fn component_variance(&self, alpha: Subset) -> f64 {
        self.component_variances
            .iter()
            .find(|(s, _)| *s == alpha)
            .map_or(0.0, |c| c.1)
    }

    /// `Σ_α Var f_α`.
    pub fn summed_components(&self) -> f64 {
        crate::math::sum(self.component_variances.iter().map(|c| c.1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorMoments {
    pub mean: f64,
    pub second: f64,
}

impl FactorMoments {
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }
}

/// Quadrature over `u ∈ (0, 1)` of `h(F^{-1}(u))`, exact sums for
/// discrete laws.
struct MomentIntegrator {
    rule: GaussLegendre,
    cfg: AdaptiveConfig,
}

impl MomentIntegrator {
    fn new() -> Self {
        // 16 panels of 32 nodes: 512 nodes before any refinement.
        Self {
            rule: GaussLegendre::new(32),
            cfg: AdaptiveConfig {
                initial_panels: 16,
                rel_tol: 1e-12,
                abs_tol: 1e-300,
                max_bisections: 20_000,
            },
        }
    }

    fn expect<H: Fn(f64) -> f64>(&self, d: &Distribution, h: H) -> Result<f64> {
        if let Some(atoms) = d.atoms() {
            let mut vals = Vec::with_capacity(atoms.len());
            for &(x, p) in atoms {
                let v = h(x);
                if !v.is_finite() {
                    return Err(Error::domain(format!("factor is not finite at support point {x}")));
                }
                vals.push(p * v);
            }
            return Ok(crate::math::sum(vals));
        }
        let mut bad = None;
        // Centered integrands can vanish exactly; scale the absolute
        // tolerance by a coarse estimate of ∫|h|.
        let scale = self.rule.integrate(0.0, 1.0, |u| libm::fabs(h(d.inverse_cdf(u))));
        let cfg = AdaptiveConfig {
            abs_tol: (1e-14 * scale).max(self.cfg.abs_tol),
            ..self.cfg
        };
        let r = integrate_adaptive(&self.rule, 0.0, 1.0, &cfg, |u| {
            let x = d.inverse_cdf(u);
            let v = h(x);
            if !v.is_finite() && bad.is_none() {
                bad = Some(x);
            }
            v
        });
        match (r, bad) {
            (_, Some(x)) => Err(Error::domain(format!("factor is not finite at x = {x}"))),
            (r, None) => r,
        }
    }
}

/// `E g(X)` and `E g(X)^2`.
pub fn factor_moments(g: &ScalarFn, d: &Distribution) -> Result<FactorMoments> {
    let q = MomentIntegrator::new();
    let mean = q.expect(d, |x| g.eval(x))?;
    let centered = q.expect(d, |x| {
        let v = g.eval(x) - mean;
        v * v
    })?;
    Ok(FactorMoments {
        mean,
        second: centered + mean * mean,
    })
}

/// `E[g(X) h(X)]`.
pub fn cross_moment(g: &ScalarFn, h: &ScalarFn, d: &Distribution) -> Result<f64> {
    MomentIntegrator::new().expect(d, |x| g.eval(x) * h.eval(x))
}

/// One-dimensional moment tables for every coordinate and term pair.
struct MomentTables {
    terms: usize,
    // mean[j][a]
    mean: Vec<Vec<f64>>,
    // cov[j][a * terms + b], cross[j][...] = cov + mean_a mean_b
    cov: Vec<Vec<f64>>,
    cross: Vec<Vec<f64>>,
}

impl MomentTables {
    fn build(sf: &StructuredFunction, inputs: &[Distribution]) -> Result<Self> {
        if inputs.len() != sf.k {
            return Err(Error::InvalidArgument(format!(
                "function has {} inputs but {} laws were given",
                sf.k,
                inputs.len()
            )));
        }
        let q = MomentIntegrator::new();
        let n = sf.terms.len();
        let mut mean = vec![vec![1.0; n]; sf.k];
        let mut cov = vec![vec![0.0; n * n]; sf.k];
        for (j, d) in inputs.iter().enumerate() {
            for a in 0..n {
                if let Some(g) = &sf.terms[a].factors[j] {
                    let reuse = (0..a).find(|&b| {
                        sf.terms[b].factors[j]
                            .as_ref()
                            .is_some_and(|h| h.same_as(g))
                    });
                    mean[j][a] = match reuse {
                        Some(b) => mean[j][b],
                        None => q.expect(d, |x| g.eval(x))?,
                    };
                }
            }
            for a in 0..n {
                for b in a..n {
                    let (Some(ga), Some(gb)) = (&sf.terms[a].factors[j], &sf.terms[b].factors[j]) else {
                        continue;
                    };
                    let (ma, mb) = (mean[j][a], mean[j][b]);
                    let c = q.expect(d, |x| (ga.eval(x) - ma) * (gb.eval(x) - mb))?;
                    cov[j][a * n + b] = c;
                    cov[j][b * n + a] = c;
                }
            }
        }
        let cross = cov
            .iter()
            .zip(&mean)
            .map(|(c, m)| {
                (0..n * n)
                    .map(|ab| c[ab] + m[ab / n] * m[ab % n])
                    .collect()
            })
            .collect();
        Ok(Self {
            terms: n,
            mean,
            cov,
            cross,
        })
    }

    fn pair(&self, a: usize, b: usize) -> usize {
        a * self.terms + b
    }
}

fn degenerate_check(v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else if v.is_finite() {
        Err(Error::DegenerateModel)
    } else {
        Err(Error::domain("output variance is not finite"))
    }
}

/// Dispatches on the function's form.
pub fn decompose(sf: &StructuredFunction, inputs: &[Distribution]) -> Result<DecompositionResult> {
    match sf.form {
        Form::Additive => decompose_additive(sf, inputs),
        Form::Product => decompose_product(sf, inputs),
        Form::SumOfProducts { .. } | Form::PhiMix { .. } => decompose_sum_of_products(sf, inputs),
    }
}

/// Additive form: `S_i = S_Ti = Var g_i(X_i) / Σ_j Var g_j(X_j)`.
pub fn decompose_additive(sf: &StructuredFunction, inputs: &[Distribution]) -> Result<DecompositionResult> {
    if sf.form != Form::Additive {
        return Err(Error::InvalidArgument("decompose_additive needs an additive function".into()));
    }
    let tables = MomentTables::build(sf, inputs)?;
    let mut var_i = vec![0.0; sf.k];
    let mut f_empty = sf.constant;
    for (a, term) in sf.terms.iter().enumerate() {
        let j = term
            .factors
            .iter()
            .position(Option::is_some)
            .expect("additive terms carry one factor");
        let c = term.coefficient;
        var_i[j] += c * c * tables.cov[j][tables.pair(a, a)];
        f_empty += c * tables.mean[j][a];
    }
    let total_variance = crate::math::sum(var_i.iter().copied());
    degenerate_check(total_variance)?;
    let s: Vec<f64> = var_i.iter().map(|v| v / total_variance).collect();
    let component_variances = var_i
        .iter()
        .enumerate()
        .map(|(j, &v)| (Subset::singleton(j), v))
        .collect();
    Ok(DecompositionResult {
        f_empty,
        component_variances,
        total_variance,
        first_order: s.clone(),
        total: s,
    })
}

/// Pure product form. The first-order part of input `i` is
/// `(g_i - E g_i) Π_{j≠i} E g_j` and the total part is
/// `(g_i - E g_i) Π_{j≠i} g_j`, so `Var f_Ti = Var g_i Π_{j≠i} E g_j²`.
pub fn decompose_product(sf: &StructuredFunction, inputs: &[Distribution]) -> Result<DecompositionResult> {
    if sf.form != Form::Product {
        return Err(Error::InvalidArgument("decompose_product needs a product function".into()));
    }
    if sf.k > MAX_ENUMERATED_INPUTS {
        return Err(Error::TooManyInputs {
            k: sf.k,
            max: MAX_ENUMERATED_INPUTS,
        });
    }
    let tables = MomentTables::build(sf, inputs)?;
    from_tables(sf, &tables)
}

/// General sum of products, including the partitioned and `φ`-mix forms.
pub fn decompose_sum_of_products(
    sf: &StructuredFunction,
    inputs: &[Distribution],
) -> Result<DecompositionResult> {
    if sf.k > MAX_ENUMERATED_INPUTS {
        return Err(Error::TooManyInputs {
            k: sf.k,
            max: MAX_ENUMERATED_INPUTS,
        });
    }
    let tables = MomentTables::build(sf, inputs)?;
    from_tables(sf, &tables)
}

fn from_tables(sf: &StructuredFunction, t: &MomentTables) -> Result<DecompositionResult> {
    let k = sf.k;
    let n = sf.terms.len();
    let coef: Vec<f64> = sf.terms.iter().map(|t| t.coefficient).collect();

    let f_empty = sf.constant
        + crate::math::sum((0..n).map(|a| coef[a] * (0..k).map(|j| t.mean[j][a]).product::<f64>()));

    // Var f = Σ_{a,b} c_a c_b (Π_j E(g^a g^b) - Π_j E g^a E g^b)
    let total_variance = crate::math::sum((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| {
        let ab = t.pair(a, b);
        let cross: f64 = (0..k).map(|j| t.cross[j][ab]).product();
        let means: f64 = (0..k).map(|j| t.mean[j][a] * t.mean[j][b]).product();
        coef[a] * coef[b] * (cross - means)
    }));
    degenerate_check(total_variance)?;

    let pair_sum = |i: usize, other: &dyn Fn(usize, usize, usize) -> f64| {
        crate::math::sum((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| {
            let ab = t.pair(a, b);
            let rest: f64 = (0..k).filter(|&j| j != i).map(|j| other(j, a, b)).product();
            coef[a] * coef[b] * t.cov[i][ab] * rest
        }))
    };

    let first_var: Vec<f64> = (0..k)
        .map(|i| pair_sum(i, &|j, a, b| t.mean[j][a] * t.mean[j][b]))
        .collect();
    let total_var: Vec<f64> = (0..k)
        .map(|i| pair_sum(i, &|j, a, b| t.cross[j][t.pair(a, b)]))
        .collect();

    // Component variances over all non-empty subsets, in mask order.
    let mut component_variances = Vec::with_capacity((1usize << k) - 1);
    let mut rest = vec![0.0; k];
    for mask in 1u64..(1u64 << k) {
        let alpha = Subset(mask);
        let v = crate::math::sum((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| {
            let ab = t.pair(a, b);
            let mut p = coef[a] * coef[b];
            for j in 0..k {
                p *= if alpha.contains(j) {
                    t.cov[j][ab]
                } else {
                    t.mean[j][a] * t.mean[j][b]
                };
            }
            p
        }));
        for (i, r) in rest.iter_mut().enumerate() {
            if !alpha.contains(i) {
                *r += v;
            }
        }
        component_variances.push((alpha, v));
    }

    let first_order = first_var.iter().map(|v| v / total_variance).collect();
    // S_Ti = [1 + Σ_{α∌i} Var f_α / Var f_Ti]^{-1}
    let total = total_var
        .iter()
        .zip(&rest)
        .map(|(&vt, &r)| if vt == 0.0 { 0.0 } else { vt / (vt + r) })
        .collect();

    Ok(DecompositionResult {
        f_empty,
        component_variances,
        total_variance,
        first_order,
        total,
    })
}

/// The ratios that decide whether `S_Ti` can only decrease when `X_i` is
/// replaced in the `φ1 Π g + φ2` form, all normalized by `E(φ1(X_i))²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiMixRatios {
    pub var_phi1: f64,
    pub var_phi2: f64,
    pub cov_phi1_phi2: f64,
}

pub fn phi_mix_ratios(phi1: &ScalarFn, phi2: &ScalarFn, d: &Distribution) -> Result<PhiMixRatios> {
    let q = MomentIntegrator::new();
    let m1 = q.expect(d, |x| phi1.eval(x))?;
    let m2 = q.expect(d, |x| phi2.eval(x))?;
    let v1 = q.expect(d, |x| {
        let v = phi1.eval(x) - m1;
        v * v
    })?;
    let v2 = q.expect(d, |x| {
        let v = phi2.eval(x) - m2;
        v * v
    })?;
    let c = q.expect(d, |x| (phi1.eval(x) - m1) * (phi2.eval(x) - m2))?;
    let norm = m1 * m1;
    Ok(PhiMixRatios {
        var_phi1: v1 / norm,
        var_phi2: v2 / norm,
        cov_phi1_phi2: c / norm,
    })
}
