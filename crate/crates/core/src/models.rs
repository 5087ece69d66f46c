//! Financial output functions: Value-at-Risk of a lognormal loss, the
//! Vasicek zero-coupon bond and the Heston European call.

use alloc::format;
use alloc::vec;
use core::f64::consts::PI;
use core::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hoeffding::{ScalarFn, StructuredFunction};
use crate::math::norm_ppf;
use crate::montecarlo::Model;
use crate::quadrature::{integrate_adaptive, AdaptiveConfig, GaussLegendre};

/// `α`-quantile of the loss `S_T - K` with `S_T = S0 exp(μT + σ W_T)`.
/// Inputs are `(μ, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarModel {
    pub s0: f64,
    pub k: f64,
    pub t: f64,
    pub alpha: f64,
    z: f64,
}

impl VarModel {
    pub fn new(s0: f64, k: f64, t: f64, alpha: f64) -> Result<Self> {
        if !(s0 > 0.0 && s0.is_finite()) || !(t > 0.0 && t.is_finite()) || !k.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "VaR needs S0 > 0, T > 0 and finite K (S0={s0}, T={t}, K={k})"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("risk level must lie in (0, 1), got {alpha}")));
        }
        Ok(Self {
            s0,
            k,
            t,
            alpha,
            z: norm_ppf(alpha),
        })
    }

    pub fn eval(&self, mu: f64, sigma: f64) -> f64 {
        self.s0 * libm::exp(mu * self.t + sigma * libm::sqrt(self.t) * self.z) - self.k
    }

    /// `S0 · e^{μT} · e^{σ√T z_α} - K`: a product of two one-dimensional
    /// factors plus a constant.
    pub fn as_structured(&self) -> StructuredFunction {
        let t = self.t;
        let s = libm::sqrt(self.t) * self.z;
        let g_mu = ScalarFn::new(format!("exp({t}·mu)"), move |mu| libm::exp(mu * t));
        let g_sigma = ScalarFn::new(format!("exp({s}·sigma)"), move |sig| libm::exp(sig * s));
        StructuredFunction::product(self.s0, vec![Some(g_mu), Some(g_sigma)], -self.k)
            .expect("two inputs")
    }
}

impl Model for VarModel {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(VarModel::eval(self, x[0], x[1]))
    }
}

/// Below this value of `aT` the bond formula switches to its series.
pub const VASICEK_SERIES_BELOW: f64 = 1e-3;

/// Zero-coupon bond price `P(0, T) = A e^{-r0 B}` under `dr = a(b - r)dt + σ dW`,
/// with `B = (1 - e^{-aT})/a` and
/// `log A = (b - σ²/2a²)(B - T) - σ² B² / 4a`. Inputs are `(a, b, σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VasicekModel {
    pub r0: f64,
    pub t: f64,
}

impl VasicekModel {
    pub fn new(r0: f64, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) || !r0.is_finite() {
            return Err(Error::InvalidArgument(format!("Vasicek needs T > 0, got {t}")));
        }
        Ok(Self { r0, t })
    }

    pub fn bond(&self, a: f64, b: f64, sigma: f64) -> Result<f64> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("mean-reversion speed must be >= 0, got {a}")));
        }
        let t = self.t;
        let x = a * t;
        // B - T = T (h - 1) and the σ² part of log A is -σ² T³ G(x) / 4,
        // with h = (1 - e^{-x})/x and G = (2(h - 1) + x h²)/x².
        let (h1, g) = if x < VASICEK_SERIES_BELOW {
            let h1 = x * (-1.0 / 2.0 + x * (1.0 / 6.0 + x * (-1.0 / 24.0 + x * (1.0 / 120.0 - x / 720.0))));
            let g = -2.0 / 3.0 + x * (1.0 / 2.0 + x * (-7.0 / 30.0 + x * (1.0 / 12.0 - x * 31.0 / 1260.0)));
            (h1, g)
        } else {
            let h = -libm::expm1(-x) / x;
            (h - 1.0, (2.0 * (h - 1.0) + x * h * h) / (x * x))
        };
        let big_b = t * (1.0 + h1);
        let log_a = b * t * h1 - sigma * sigma * t * t * t * g / 4.0;
        Ok(libm::exp(log_a - self.r0 * big_b))
    }
}

impl Model for VasicekModel {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.bond(x[0], x[1], x[2])
    }
}

/// Parameters of one Heston price. `v0` is the initial level of the variance
/// process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonParams {
    pub r: f64,
    pub q: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub v0: f64,
    pub rho: f64,
}

impl HestonParams {
    /// From the input order `(r, q, κ, θ, σ, σ0, ρ)`.
    pub fn from_slice(x: &[f64]) -> Self {
        Self {
            r: x[0],
            q: x[1],
            kappa: x[2],
            theta: x[3],
            sigma: x[4],
            v0: x[5],
            rho: x[6],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HestonQuadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// First truncation point of the Fourier integral.
    pub initial_cutoff: f64,
    /// Largest truncation point tried.
    pub max_cutoff: f64,
    /// The cutoff `U` is doubled until `|f_j(U)| / U` drops below this.
    pub decay_tol: f64,
    /// `P_j` outside `[-ε, 1 + ε]` is reported as unstable.
    pub probability_slack: f64,
}

impl Default for HestonQuadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-10,
            initial_cutoff: 200.0,
            max_cutoff: 819_200.0,
            decay_tol: 1e-10,
            probability_slack: 1e-6,
        }
    }
}

/// Smallest vol-of-vol used in evaluation.
pub const HESTON_MIN_SIGMA: f64 = 1e-6;

/// European call under the Heston model, priced from the two risk-neutral
/// probabilities `P_1`, `P_2`.
#[derive(Debug)]
pub struct HestonModel {
    pub s0: f64,
    pub k: f64,
    pub t: f64,
    pub quad: HestonQuadrature,
    rule: GaussLegendre,
    clamps: AtomicU64,
}

impl Clone for HestonModel {
    fn clone(&self) -> Self {
        Self {
            s0: self.s0,
            k: self.k,
            t: self.t,
            quad: self.quad,
            rule: self.rule.clone(),
            clamps: AtomicU64::new(self.clamp_count()),
        }
    }
}

impl HestonModel {
    pub fn new(s0: f64, k: f64, t: f64) -> Result<Self> {
        if !(s0 > 0.0 && k > 0.0 && t > 0.0) || !(s0.is_finite() && k.is_finite() && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Heston needs S0, K, T > 0 (S0={s0}, K={k}, T={t})"
            )));
        }
        Ok(Self {
            s0,
            k,
            t,
            quad: HestonQuadrature::default(),
            rule: GaussLegendre::new(32),
            clamps: AtomicU64::new(0),
        })
    }

    pub fn with_quadrature(mut self, quad: HestonQuadrature) -> Self {
        self.quad = quad;
        self
    }

    /// How many evaluations had `σ` raised to [`HESTON_MIN_SIGMA`].
    pub fn clamp_count(&self) -> u64 {
        self.clamps.load(Ordering::Relaxed)
    }

    pub fn reset_clamp_count(&self) {
        self.clamps.store(0, Ordering::Relaxed);
    }

    fn validate(&self, p: &HestonParams) -> Result<HestonParams> {
        let all = [p.r, p.q, p.kappa, p.theta, p.sigma, p.v0, p.rho];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("Heston parameters must be finite"));
        }
        if !(-1.0..=1.0).contains(&p.rho) {
            return Err(Error::domain(format!("correlation must lie in [-1, 1], got {}", p.rho)));
        }
        if p.kappa < 0.0 || p.theta < 0.0 || p.v0 < 0.0 || p.sigma < 0.0 {
            return Err(Error::domain("κ, θ, σ and the initial variance must be >= 0"));
        }
        let mut p = *p;
        if p.sigma < HESTON_MIN_SIGMA {
            self.clamps.fetch_add(1, Ordering::Relaxed);
            p.sigma = HESTON_MIN_SIGMA;
        }
        Ok(p)
    }

    /// `f_j(φ)`, the characteristic function behind `P_j` (`j` = 1 or 2).
    pub fn characteristic(&self, p: &HestonParams, j: u8, phi: f64) -> Complex64 {
        let (u, b) = if j == 1 {
            (0.5, p.kappa - p.rho * p.sigma)
        } else {
            (-0.5, p.kappa)
        };
        let i = Complex64::i();
        let s2 = p.sigma * p.sigma;
        let tau = self.t;
        let beta = Complex64::new(b, -p.rho * p.sigma * phi);
        let c = Complex64::new(-phi * phi, 2.0 * u * phi);
        let mut d = (beta * beta - c * s2).sqrt();
        if d.re < 0.0 {
            d = -d;
        }
        // m = (β - d)/σ², from whichever form avoids cancellation.
        let plus = beta + d;
        let minus = beta - d;
        let m = if plus.norm_sqr() >= minus.norm_sqr() {
            c / plus
        } else {
            minus / s2
        };
        // E = 1 - e^{-dτ}
        let e = -cexpm1(-d * tau);
        let z = m * e * s2 / (d * 2.0);
        let big_d = c * e / (d * 2.0 + m * e * s2);
        let big_c = i * ((p.r - p.q) * phi * tau) + p.kappa * p.theta * (m * tau - clog1p(z) * (2.0 / s2));
        (big_c + big_d * p.v0 + i * (phi * libm::log(self.s0))).exp()
    }

    fn integrand(&self, p: &HestonParams, j: u8, phi: f64) -> f64 {
        let i = Complex64::i();
        let w = Complex64::new(0.0, -phi * libm::log(self.k)).exp() * self.characteristic(p, j, phi);
        (w / (i * phi)).re
    }

    /// `P_j = 1/2 + (1/π) ∫_0^∞ Re(e^{-iφ ln K} f_j(φ) / (iφ)) dφ`.
    pub fn probability(&self, p: &HestonParams, j: u8) -> Result<f64> {
        let p = self.validate(p)?;
        self.probability_unchecked(&p, j)
    }

    fn probability_unchecked(&self, p: &HestonParams, j: u8) -> Result<f64> {
        let q = &self.quad;
        let mut cutoff = q.initial_cutoff;
        while cutoff < q.max_cutoff && self.characteristic(p, j, cutoff).norm() / cutoff >= q.decay_tol {
            cutoff *= 2.0;
        }
        let cfg = AdaptiveConfig {
            initial_panels: 8,
            rel_tol: q.rel_tol,
            abs_tol: q.abs_tol,
            max_bisections: 4000,
        };
        let integral = integrate_adaptive(&self.rule, 0.0, cutoff, &cfg, |phi| self.integrand(p, j, phi))
            .map_err(|e| Error::NonConvergence(format!("P{j}: {e}")))?;
        let pj = 0.5 + integral / PI;
        let eps = q.probability_slack;
        if !(-eps..=1.0 + eps).contains(&pj) {
            return Err(Error::NumericalInstability(format!("P{j} = {pj} lies outside [0, 1]")));
        }
        Ok(pj)
    }

    /// `(P_1, P_2)`.
    pub fn probabilities(&self, p: &HestonParams) -> Result<(f64, f64)> {
        let p = self.validate(p)?;
        Ok((self.probability_unchecked(&p, 1)?, self.probability_unchecked(&p, 2)?))
    }

    /// `S0 e^{-qτ} P_1 - K e^{-rτ} P_2`.
    pub fn call(&self, p: &HestonParams) -> Result<f64> {
        let (p1, p2) = self.probabilities(p)?;
        Ok(self.s0 * libm::exp(-p.q * self.t) * p1 - self.k * libm::exp(-p.r * self.t) * p2)
    }

    /// `K e^{-rτ}(1 - P_2) - S0 e^{-qτ}(1 - P_1)`.
    pub fn put(&self, p: &HestonParams) -> Result<f64> {
        let (p1, p2) = self.probabilities(p)?;
        Ok(self.k * libm::exp(-p.r * self.t) * (1.0 - p2) - self.s0 * libm::exp(-p.q * self.t) * (1.0 - p1))
    }
}

impl Model for HestonModel {
    fn dim(&self) -> usize {
        7
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.call(&HestonParams::from_slice(x))
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
fn cexpm1(z: Complex64) -> Complex64 {
    let (s, c) = (libm::sin(z.im), libm::cos(z.im));
    let half = libm::sin(0.5 * z.im);
    Complex64::new(
        libm::expm1(z.re) * c - 2.0 * half * half,
        libm::exp(z.re) * s,
    )
}

/// `log(1 + z)` without cancellation for small `|z|`.
fn clog1p(z: Complex64) -> Complex64 {
    let re = 0.5 * libm::log1p(z.re * (2.0 + z.re) + z.im * z.im);
    Complex64::new(re, libm::atan2(z.im, 1.0 + z.re))
}
