//! Univariate input laws represented through their quantile functions.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{norm_cdf, norm_ppf, norm_sf};
use crate::quadrature::{integrate_adaptive, AdaptiveConfig, GaussLegendre};
use crate::rng::CounterRng;

/// Independent input laws, one per model input.
pub type InputVector = alloc::vec::Vec<Distribution>;

/// Anything with a quantile function on `(0, 1)`.
///
/// The order checks and the quadrature routines only ever look at a law
/// through this trait, which lets transformed laws such as `log X` or
/// `exp X` be compared without materializing a new family.
pub trait Law {
    /// `F^{-1}(u)` for `u` strictly inside `(0, 1)`; no validation.
    fn inverse_cdf(&self, u: f64) -> f64;

    /// Essential infimum of the support (may be `-inf`).
    fn left_endpoint(&self) -> f64;

    /// Essential supremum of the support (may be `+inf`).
    fn right_endpoint(&self) -> f64;

    fn law_mean(&self) -> Result<f64> {
        quantile_moments(self).map(|m| m.0)
    }

    fn law_variance(&self) -> Result<f64> {
        quantile_moments(self).map(|m| m.1)
    }
}

impl<L: Law + ?Sized> Law for &L {
    fn inverse_cdf(&self, u: f64) -> f64 {
        (**self).inverse_cdf(u)
    }
    fn left_endpoint(&self) -> f64 {
        (**self).left_endpoint()
    }
    fn right_endpoint(&self) -> f64 {
        (**self).right_endpoint()
    }
    fn law_mean(&self) -> Result<f64> {
        (**self).law_mean()
    }
    fn law_variance(&self) -> Result<f64> {
        (**self).law_variance()
    }
}

/// Mean and variance of a law by quadrature of its quantile function.
pub fn quantile_moments<L: Law + ?Sized>(law: &L) -> Result<(f64, f64)> {
    let rule = GaussLegendre::new(32);
    let cfg = AdaptiveConfig {
        abs_tol: 1e-12,
        ..AdaptiveConfig::default()
    };
    let mean = integrate_adaptive(&rule, 0.0, 1.0, &cfg, |u| law.inverse_cdf(u))?;
    let var = integrate_adaptive(&rule, 0.0, 1.0, &cfg, |u| {
        let d = law.inverse_cdf(u) - mean;
        d * d
    })?;
    Ok((mean, var))
}

/// The families used as model inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, variance: f64 },
    /// Normal law with the given mean and variance, conditioned on `[a, b]`.
    TruncatedNormal { mean: f64, variance: f64, a: f64, b: f64 },
    /// Exponential law with the given rate, conditioned on `[a, b]`.
    TruncatedExponential { rate: f64, a: f64, b: f64 },
    /// Finite atoms `(x, p)`, sorted by `x` with duplicates merged.
    Discrete { atoms: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
enum Prepared {
    None,
    TruncatedNormal {
        sigma: f64,
        // Lower-tail form uses Φ; upper-tail form uses the survival function.
        upper_tail: bool,
        lo: f64,
        width: f64,
    },
    TruncatedExponential {
        // 1 - exp(-rate (b - a))
        mass: f64,
    },
    Discrete {
        cumulative: Vec<f64>,
    },
}

/// A validated, immutable univariate law.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    family: Family,
    prepared: Prepared,
    mean: f64,
    variance: f64,
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!("{name} must be finite, got {v}")))
    }
}

fn check_window(a: f64, b: f64) -> Result<()> {
    check_finite("a", a)?;
    check_finite("b", b)?;
    if a < b {
        Ok(())
    } else {
        Err(Error::InvalidDistribution(format!(
            "window needs a < b, got [{a}, {b}]"
        )))
    }
}

impl Distribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        check_window(a, b)?;
        let w = b - a;
        Ok(Self {
            family: Family::Uniform { a, b },
            prepared: Prepared::None,
            mean: 0.5 * (a + b),
            variance: w * w / 12.0,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        check_finite("rate", rate)?;
        if rate <= 0.0 {
            return Err(Error::InvalidDistribution(format!("rate must be > 0, got {rate}")));
        }
        Ok(Self {
            family: Family::Exponential { rate },
            prepared: Prepared::None,
            mean: 1.0 / rate,
            variance: 1.0 / (rate * rate),
        })
    }

    /// Normal law; the second parameter is the variance.
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        check_finite("variance", variance)?;
        if variance <= 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "variance must be > 0, got {variance}"
            )));
        }
        Ok(Self {
            family: Family::Normal { mean, variance },
            prepared: Prepared::None,
            mean,
            variance,
        })
    }

    /// Normal law `N(mean, variance)` conditioned on `[a, b]`.
    pub fn truncated_normal(mean: f64, variance: f64, a: f64, b: f64) -> Result<Self> {
        check_finite("mean", mean)?;
        check_finite("variance", variance)?;
        check_window(a, b)?;
        if variance <= 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "variance must be > 0, got {variance}"
            )));
        }
        let sigma = libm::sqrt(variance);
        let alpha = (a - mean) / sigma;
        let beta = (b - mean) / sigma;
        let upper_tail = alpha + beta > 0.0;
        let (lo, width) = if upper_tail {
            let sb = norm_sf(beta);
            (sb, norm_sf(alpha) - sb)
        } else {
            let ca = norm_cdf(alpha);
            (ca, norm_cdf(beta) - ca)
        };
        if !(width > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "truncation window [{a}, {b}] carries no mass under N({mean}, {variance})"
            )));
        }
        Self::with_quadrature_moments(
            Family::TruncatedNormal { mean, variance, a, b },
            Prepared::TruncatedNormal {
                sigma,
                upper_tail,
                lo,
                width,
            },
        )
    }

    /// Exponential law with the given rate conditioned on `[a, b]`.
    pub fn truncated_exponential(rate: f64, a: f64, b: f64) -> Result<Self> {
        check_finite("rate", rate)?;
        check_window(a, b)?;
        if rate <= 0.0 {
            return Err(Error::InvalidDistribution(format!("rate must be > 0, got {rate}")));
        }
        if a < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "exponential truncation window must lie in [0, inf), got [{a}, {b}]"
            )));
        }
        let mass = -libm::expm1(-rate * (b - a));
        if !(mass > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "truncation window [{a}, {b}] carries no mass"
            )));
        }
        Self::with_quadrature_moments(
            Family::TruncatedExponential { rate, a, b },
            Prepared::TruncatedExponential { mass },
        )
    }

    /// Finite discrete law. Atoms are sorted and equal points merged.
    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("discrete law needs atoms".into()));
        }
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for &(x, p) in atoms {
            check_finite("atom", x)?;
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidDistribution(format!(
                    "atom probabilities must be > 0, got {p} at {x}"
                )));
            }
            sorted.push((x, p));
        }
        sorted.sort_by(|l, r| l.0.total_cmp(&r.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (x, p) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        let total = crate::math::sum(merged.iter().map(|a| a.1));
        if libm::fabs(total - 1.0) > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "atom probabilities sum to {total}, not 1"
            )));
        }
        let mut cumulative = Vec::with_capacity(merged.len());
        let mut acc = 0.0;
        for &(_, p) in &merged {
            acc += p;
            cumulative.push(acc);
        }
        *cumulative.last_mut().expect("non-empty") = 1.0;
        let mean = crate::math::sum(merged.iter().map(|&(x, p)| x * p));
        let variance = crate::math::sum(merged.iter().map(|&(x, p)| p * (x - mean) * (x - mean)));
        Ok(Self {
            family: Family::Discrete { atoms: merged },
            prepared: Prepared::Discrete { cumulative },
            mean,
            variance,
        })
    }

    fn with_quadrature_moments(family: Family, prepared: Prepared) -> Result<Self> {
        let mut d = Self {
            family,
            prepared,
            mean: f64::NAN,
            variance: f64::NAN,
        };
        let (m, v) = quantile_moments(&d)?;
        d.mean = m;
        d.variance = v;
        Ok(d)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.family, Family::Discrete { .. })
    }

    /// Atoms of a discrete law, `None` otherwise.
    pub fn atoms(&self) -> Option<&[(f64, f64)]> {
        match &self.family {
            Family::Discrete { atoms } => Some(atoms),
            _ => None,
        }
    }

    /// `F^{-1}(u)`; for discrete laws the left-continuous generalized
    /// inverse (smallest atom whose cumulative probability reaches `u`).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile level must be in (0, 1), got {u}")));
        }
        Ok(self.inverse_cdf(u))
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Inverse-CDF transform of a stream of uniforms.
    pub fn sample<'a, I>(&'a self, uniforms: I) -> impl Iterator<Item = f64> + 'a
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: 'a,
    {
        uniforms.into_iter().map(move |u| self.inverse_cdf(u))
    }

    /// Fills `out` with draws `start..start + out.len()` of the given stream.
    /// The values depend only on `(rng, stream, index)`, never on how the
    /// range is split into batches.
    pub fn sample_into(&self, rng: &CounterRng, stream: u64, start: u64, out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.inverse_cdf(rng.uniform(stream, start + i as u64));
        }
    }
}

impl Law for Distribution {
    fn inverse_cdf(&self, u: f64) -> f64 {
        match (&self.family, &self.prepared) {
            (Family::Uniform { a, b }, _) => a + u * (b - a),
            (Family::Exponential { rate }, _) => -libm::log1p(-u) / rate,
            (Family::Normal { mean, variance }, _) => mean + libm::sqrt(*variance) * norm_ppf(u),
            (
                Family::TruncatedNormal { mean, a, b, .. },
                Prepared::TruncatedNormal {
                    sigma,
                    upper_tail,
                    lo,
                    width,
                },
            ) => {
                let z = if *upper_tail {
                    -norm_ppf(lo + (1.0 - u) * width)
                } else {
                    norm_ppf(lo + u * width)
                };
                (mean + sigma * z).clamp(*a, *b)
            }
            (Family::TruncatedExponential { rate, a, b }, Prepared::TruncatedExponential { mass }) => {
                (a - libm::log1p(-u * mass) / rate).clamp(*a, *b)
            }
            (Family::Discrete { atoms }, Prepared::Discrete { cumulative }) => {
                let idx = cumulative.partition_point(|&c| c < u);
                atoms[idx.min(atoms.len() - 1)].0
            }
            _ => unreachable!("family and prepared state always match"),
        }
    }

    fn left_endpoint(&self) -> f64 {
        match &self.family {
            Family::Uniform { a, .. } => *a,
            Family::Exponential { .. } => 0.0,
            Family::Normal { .. } => f64::NEG_INFINITY,
            Family::TruncatedNormal { a, .. } | Family::TruncatedExponential { a, .. } => *a,
            Family::Discrete { atoms } => atoms[0].0,
        }
    }

    fn right_endpoint(&self) -> f64 {
        match &self.family {
            Family::Uniform { b, .. } => *b,
            Family::Exponential { .. } | Family::Normal { .. } => f64::INFINITY,
            Family::TruncatedNormal { b, .. } | Family::TruncatedExponential { b, .. } => *b,
            Family::Discrete { atoms } => atoms[atoms.len() - 1].0,
        }
    }

    fn law_mean(&self) -> Result<f64> {
        Ok(self.mean)
    }

    fn law_variance(&self) -> Result<f64> {
        Ok(self.variance)
    }
}

/// The law of `f(X)` for a monotone map `f`, through quantile composition.
#[derive(Debug, Clone)]
pub struct Transformed<L, F> {
    base: L,
    map: F,
    increasing: bool,
}

impl<L: Law, F: Fn(f64) -> f64> Transformed<L, F> {
    /// `f` must be nondecreasing on the support of `base`.
    pub fn increasing(base: L, map: F) -> Self {
        Self {
            base,
            map,
            increasing: true,
        }
    }

    /// `f` must be nonincreasing on the support of `base`.
    pub fn decreasing(base: L, map: F) -> Self {
        Self {
            base,
            map,
            increasing: false,
        }
    }
}

impl<L: Law, F: Fn(f64) -> f64> Law for Transformed<L, F> {
    fn inverse_cdf(&self, u: f64) -> f64 {
        if self.increasing {
            (self.map)(self.base.inverse_cdf(u))
        } else {
            (self.map)(self.base.inverse_cdf(1.0 - u))
        }
    }

    fn left_endpoint(&self) -> f64 {
        if self.increasing {
            (self.map)(self.base.left_endpoint())
        } else {
            (self.map)(self.base.right_endpoint())
        }
    }

    fn right_endpoint(&self) -> f64 {
        if self.increasing {
            (self.map)(self.base.right_endpoint())
        } else {
            (self.map)(self.base.left_endpoint())
        }
    }
}
