//! Sample-based Sobol indices for black-box models.
//!
//! Two independent `N × k` uniform matrices `A` and `B` are drawn from a
//! counter-based generator and mapped through the input quantile functions.
//! `AB_i` is `A` with column `i` taken from `B`. Then
//!
//! * first order (pick-freeze): `Ŝ_i = Ĉov(f(B), f(AB_i)) / V̂`,
//! * total effect (Jansen): `Ŝ_Ti = (1/2N) Σ (f(A) - f(AB_i))² / V̂`,
//!
//! with `V̂` the sample variance of the pooled `f(A)`, `f(B)` values.
//! Confidence intervals come from a percentile bootstrap over rows.
//!
//! Row evaluation and bootstrap replicates go through an [`Executor`], so a
//! caller can parallelize them. Every uniform is a pure function of
//! `(seed, matrix, row, column)` and all reductions run in row order, so the
//! output does not depend on the executor.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::distributions::{Distribution, Law};
use crate::error::{Error, Result};
use crate::hoeffding::StructuredFunction;
use crate::rng::CounterRng;

/// Smallest sample size accepted by [`estimate_indices`].
pub const MIN_SAMPLES: usize = 1000;
/// Smallest bootstrap size accepted by [`bootstrap_ci`].
pub const MIN_BOOTSTRAP: usize = 500;

/// A pure, reentrant map from `k` inputs to one real output.
pub trait Model: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<f64>;
}

impl Model for StructuredFunction {
    fn dim(&self) -> usize {
        StructuredFunction::dim(self)
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(StructuredFunction::eval(self, x))
    }
}

impl<M: Model + ?Sized> Model for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        (**self).eval(x)
    }
}

/// Order-preserving map over `0..n`.
pub trait Executor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matrix {
    A = 0,
    B = 1,
}

// Stream ids: matrix in the high half, column in the low half. Bootstrap
// streams live above all matrix streams.
const BOOTSTRAP_STREAM: u64 = 0x100 << 32;

/// The seeded `A`/`B` design for `n` rows over `inputs`.
#[derive(Debug, Clone)]
pub struct SobolDesign<'a> {
    inputs: &'a [Distribution],
    n: usize,
    rng: CounterRng,
    seed: u64,
}

impl<'a> SobolDesign<'a> {
    pub fn new(inputs: &'a [Distribution], n: usize, seed: u64) -> Self {
        Self {
            inputs,
            n,
            rng: CounterRng::new(seed),
            seed,
        }
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.inputs.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Input value at `(matrix, row, column)`.
    #[inline]
    pub fn value(&self, m: Matrix, row: usize, col: usize) -> f64 {
        let stream = ((m as u64) << 32) | col as u64;
        self.inputs[col].inverse_cdf(self.rng.uniform(stream, row as u64))
    }

    /// Row of `A`, `B`, or (with `swap = Some(i)`) of `AB_i`.
    pub fn fill_row(&self, m: Matrix, swap: Option<usize>, row: usize, out: &mut [f64]) {
        for (col, x) in out.iter_mut().enumerate() {
            let src = if swap == Some(col) { Matrix::B } else { m };
            *x = self.value(src, row, col);
        }
    }
}

/// Model outputs on `A`, `B` and every `AB_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PickFreezeSample {
    pub f_a: Vec<f64>,
    pub f_b: Vec<f64>,
    pub f_ab: Vec<Vec<f64>>,
}

impl PickFreezeSample {
    pub fn rows(&self) -> usize {
        self.f_a.len()
    }

    pub fn dim(&self) -> usize {
        self.f_ab.len()
    }

    /// Evaluates `model` on the whole design: `N (k + 2)` calls.
    pub fn evaluate<M: Model + ?Sized, E: Executor>(
        model: &M,
        design: &SobolDesign<'_>,
        exec: &E,
    ) -> Result<Self> {
        let k = design.dim();
        if model.dim() != k {
            return Err(Error::InvalidArgument(format!(
                "model has {} inputs but {k} laws were given",
                model.dim()
            )));
        }
        let column = |m: Matrix, swap: Option<usize>| -> Result<Vec<f64>> {
            let out = exec.map(design.rows(), |row| {
                let mut x = vec![0.0; k];
                design.fill_row(m, swap, row, &mut x);
                let y = model.eval(&x).map_err(|e| Error::Evaluation {
                    row,
                    input: x.clone(),
                    message: format!("{e}"),
                })?;
                if y.is_finite() {
                    Ok(y)
                } else {
                    Err(Error::Evaluation {
                        row,
                        input: x,
                        message: format!("model returned {y}"),
                    })
                }
            });
            out.into_iter().collect()
        };
        let f_a = column(Matrix::A, None)?;
        let f_b = column(Matrix::B, None)?;
        let f_ab = (0..k)
            .map(|i| column(Matrix::A, Some(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { f_a, f_b, f_ab })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexKind {
    First(usize),
    Total(usize),
}

impl IndexKind {
    pub fn input(self) -> usize {
        match self {
            IndexKind::First(i) | IndexKind::Total(i) => i,
        }
    }

    pub fn estimator(self) -> Estimator {
        match self {
            IndexKind::First(_) => Estimator::PickFreeze,
            IndexKind::Total(_) => Estimator::Jansen,
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexKind::First(i) => write!(f, "S_{}", i + 1),
            IndexKind::Total(i) => write!(f, "S_T{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    PickFreeze,
    Jansen,
}

impl Estimator {
    pub fn tag(self) -> &'static str {
        match self {
            Estimator::PickFreeze => "pick-freeze",
            Estimator::Jansen => "jansen",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SobolEstimate {
    pub kind: IndexKind,
    pub value: f64,
    pub ci95: (f64, f64),
    /// Set when every bootstrap replicate gave the same value.
    pub degenerate_ci: bool,
    pub n: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl SobolEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci95.1 - self.ci95.0)
    }

    pub fn significant_digits(&self) -> u32 {
        significant_digits(self.half_width())
    }
}

/// Row weights: `None` is the plain sample, `Some(w)` a bootstrap resample
/// given as per-row multiplicities.
fn weighted_moments(w: Option<&[u32]>, n: usize, xs: &[&[f64]]) -> (f64, f64) {
    // Two-pass mean / variance, rows in order.
    let mut count = 0.0;
    let mut s = 0.0;
    for x in xs {
        for r in 0..n {
            let c = w.map_or(1.0, |w| f64::from(w[r]));
            s += c * x[r];
            count += c;
        }
    }
    let mean = s / count;
    let mut ss = 0.0;
    for x in xs {
        for r in 0..n {
            let c = w.map_or(1.0, |w| f64::from(w[r]));
            let d = x[r] - mean;
            ss += c * d * d;
        }
    }
    (mean, ss / (count - 1.0))
}

/// All `2k` index estimates from one (possibly reweighted) sample:
/// `[S_1..S_k, S_T1..S_Tk]`, or `None` if the pooled variance is zero.
fn estimates_from(sample: &PickFreezeSample, w: Option<&[u32]>) -> Option<Vec<f64>> {
    let n = sample.rows();
    let k = sample.dim();
    let (_, var) = weighted_moments(w, n, &[&sample.f_a, &sample.f_b]);
    if !(var > 0.0) {
        return None;
    }
    let weight = |r: usize| w.map_or(1.0, |w| f64::from(w[r]));
    let mut out = vec![0.0; 2 * k];
    let (mb, _) = weighted_moments(w, n, &[&sample.f_b]);
    for i in 0..k {
        let ab = &sample.f_ab[i];
        let (mab, _) = weighted_moments(w, n, &[ab]);
        let mut cov = 0.0;
        let mut jansen = 0.0;
        let mut count = 0.0;
        for r in 0..n {
            let c = weight(r);
            cov += c * (sample.f_b[r] - mb) * (ab[r] - mab);
            let d = sample.f_a[r] - ab[r];
            jansen += c * d * d;
            count += c;
        }
        out[i] = cov / (count - 1.0) / var;
        out[k + i] = jansen / (2.0 * count) / var;
    }
    Some(out)
}

/// Point estimates `[S_1..S_k, S_T1..S_Tk]`.
pub fn point_estimates(sample: &PickFreezeSample) -> Result<Vec<f64>> {
    estimates_from(sample, None).ok_or(Error::DegenerateModel)
}

/// Per-row multiplicities of bootstrap replicate `b`.
pub fn bootstrap_weights(n: usize, b: usize, seed: u64) -> Vec<u32> {
    let rng = CounterRng::new(seed);
    let stream = BOOTSTRAP_STREAM | b as u64;
    let mut w = vec![0u32; n];
    for j in 0..n {
        w[rng.below(stream, j as u64, n as u64) as usize] += 1;
    }
    w
}

/// `[S_1..S_k, S_T1..S_Tk]` re-estimated on bootstrap replicate `b`.
/// A replicate with zero pooled variance yields zeros.
pub fn bootstrap_replicate(sample: &PickFreezeSample, b: usize, seed: u64) -> Vec<f64> {
    let w = bootstrap_weights(sample.rows(), b, seed);
    estimates_from(sample, Some(&w)).unwrap_or_else(|| vec![0.0; 2 * sample.dim()])
}

/// Percentile interval of `values` at levels `0.025` and `0.975`
/// (linear interpolation between order statistics).
pub fn percentile_interval(values: &mut [f64]) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    (percentile_sorted(values, 0.025), percentile_sorted(values, 0.975))
}

fn percentile_sorted(v: &[f64], p: f64) -> f64 {
    let h = p * (v.len() - 1) as f64;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// 95% percentile-bootstrap intervals for all `2k` indices, in the order of
/// [`point_estimates`]. Each interval is widened if needed so that it
/// contains the point estimate; the flag marks a zero-width bootstrap
/// distribution.
pub fn bootstrap_ci<E: Executor>(
    sample: &PickFreezeSample,
    replicates: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<((f64, f64), bool)>> {
    if replicates < MIN_BOOTSTRAP {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP} resamples, got {replicates}"
        )));
    }
    let point = estimates_from(sample, None).unwrap_or_else(|| vec![0.0; 2 * sample.dim()]);
    let reps = exec.map(replicates, |b| bootstrap_replicate(sample, b, seed));
    Ok((0..point.len())
        .map(|q| {
            let mut col: Vec<f64> = reps.iter().map(|r| r[q]).collect();
            let (lo, hi) = percentile_interval(&mut col);
            ((lo.min(point[q]), hi.max(point[q])), lo == hi)
        })
        .collect())
}

/// Largest number of decimals `d` with `half_width < 0.5 · 10^{-d}`.
/// Zero when even the units digit is uncertain; capped at 15.
pub fn significant_digits(half_width: f64) -> u32 {
    let hw = libm::fabs(half_width);
    let mut d = 0u32;
    while d < 15 && hw < 0.5 * libm::pow(10.0, -f64::from(d + 1)) {
        d += 1;
    }
    d
}

#[derive(Debug, Clone, Copy)]
pub struct EstimationPlan {
    pub n: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for EstimationPlan {
    fn default() -> Self {
        Self {
            n: 100_000,
            bootstrap: 1000,
            seed: 42,
        }
    }
}

/// `S_i` and `S_Ti` for all inputs, with bootstrap intervals. Results are
/// ordered `S_1, S_T1, S_2, S_T2, …`.
pub fn estimate_indices_with<M: Model + ?Sized, E: Executor>(
    model: &M,
    inputs: &[Distribution],
    plan: &EstimationPlan,
    exec: &E,
) -> Result<Vec<SobolEstimate>> {
    if plan.n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            plan.n
        )));
    }
    let design = SobolDesign::new(inputs, plan.n, plan.seed);
    let sample = PickFreezeSample::evaluate(model, &design, exec)?;
    let point = point_estimates(&sample)?;
    let cis = bootstrap_ci(&sample, plan.bootstrap, plan.seed, exec)?;
    let k = inputs.len();
    let mut out = Vec::with_capacity(2 * k);
    for i in 0..k {
        for (q, kind) in [(i, IndexKind::First(i)), (k + i, IndexKind::Total(i))] {
            out.push(SobolEstimate {
                kind,
                value: point[q],
                ci95: cis[q].0,
                degenerate_ci: cis[q].1,
                n: plan.n,
                seed: plan.seed,
                estimator: kind.estimator(),
            });
        }
    }
    Ok(out)
}

/// Sequential [`estimate_indices_with`] with `B = 1000` resamples.
pub fn estimate_indices<M: Model + ?Sized>(
    model: &M,
    inputs: &[Distribution],
    n: usize,
    seed: u64,
) -> Result<Vec<SobolEstimate>> {
    let plan = EstimationPlan {
        n,
        seed,
        ..EstimationPlan::default()
    };
    estimate_indices_with(model, inputs, &plan, &Sequential)
}

/// Renders `value` with the decimals its interval supports.
pub fn format_significant(e: &SobolEstimate) -> String {
    let d = e.significant_digits() as usize;
    format!("{:.*}", d, e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hoeffding::ScalarFn;

    fn u01() -> Distribution {
        Distribution::uniform(0.0, 1.0).unwrap()
    }

    struct Fn2<F>(F);
    impl<F: Fn(&[f64]) -> f64 + Send + Sync> Model for Fn2<F> {
        fn dim(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64]) -> Result<f64> {
            Ok((self.0)(x))
        }
    }

    #[test]
    fn significant_digit_rule() {
        assert_eq!(significant_digits(0.003), 2);
        assert_eq!(significant_digits(0.0002), 3);
        assert_eq!(significant_digits(0.7), 0);
        assert_eq!(significant_digits(0.0), 15);
    }

    #[test]
    fn single_input_model() {
        let sf = StructuredFunction::additive(vec![Some(ScalarFn::identity()), None], 0.0).unwrap();
        let r = estimate_indices(&sf, &[u01(), u01()], 20_000, 7).unwrap();
        assert!((r[0].value - 1.0).abs() < 0.05, "{:?}", r[0]);
        assert_eq!(r[3].value, 0.0);
        assert!(r[3].degenerate_ci);
        for e in &r {
            assert!(e.ci95.0 <= e.value && e.value <= e.ci95.1);
        }
        assert_eq!(r[0].estimator.tag(), "pick-freeze");
        assert_eq!(r[1].kind, IndexKind::Total(0));
    }

    #[test]
    fn product_total_index_covers_closed_form() {
        let m = Fn2(|x: &[f64]| x[0] * x[1]);
        let r = estimate_indices(&m, &[u01(), u01()], 50_000, 42).unwrap();
        let st1 = &r[1];
        assert!(st1.ci95.0 - 0.01 <= 4.0 / 7.0 && 4.0 / 7.0 <= st1.ci95.1 + 0.01, "{st1:?}");
    }

    #[test]
    fn constant_model_is_degenerate() {
        let m = Fn2(|_: &[f64]| 3.0);
        assert_eq!(estimate_indices(&m, &[u01(), u01()], 1000, 1), Err(Error::DegenerateModel));
    }

    #[test]
    fn nonfinite_output_reports_row() {
        let m = Fn2(|x: &[f64]| if x[0] > 0.999 { f64::NAN } else { x[0] });
        match estimate_indices(&m, &[u01(), u01()], 5000, 1) {
            Err(Error::Evaluation { input, .. }) => assert!(input[0] > 0.999),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_inputs_are_rejected() {
        let m = Fn2(|x: &[f64]| x[0]);
        assert!(estimate_indices(&m, &[u01(), u01()], 10, 1).is_err());
        let design = SobolDesign::new(&[], 0, 0);
        assert_eq!(design.rows(), 0);
    }

    #[test]
    fn percentile_interpolates() {
        let mut v: Vec<f64> = (0..=100).rev().map(f64::from).collect();
        assert_eq!(percentile_interval(&mut v), (2.5, 97.5));
    }

    #[test]
    fn bootstrap_weights_sum_to_n() {
        let w = bootstrap_weights(1000, 3, 9);
        assert_eq!(w.iter().sum::<u32>(), 1000);
        assert_eq!(w, bootstrap_weights(1000, 3, 9));
        assert_ne!(w, bootstrap_weights(1000, 4, 9));
    }
}
