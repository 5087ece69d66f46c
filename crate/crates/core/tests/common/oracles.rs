//! Independent pricing oracles: Black-Scholes, Euler simulation of the Heston
//! SDE, and exact simulation of the Vasicek short rate.

use rand::{rngs::StdRng, SeedableRng};
use rand_distr::{Distribution as _, StandardNormal};

use super::families::phi;

pub fn black_scholes_call(s0: f64, k: f64, t: f64, r: f64, q: f64, vol: f64) -> f64 {
    let sd = vol * t.sqrt();
    let d1 = ((s0 / k).ln() + (r - q) * t + 0.5 * sd * sd) / sd;
    s0 * (-q * t).exp() * phi(d1) - k * (-r * t).exp() * phi(d1 - sd)
}

/// `∫_0^T v(t) dt` for `dv = κ(θ - v)dt` started at `v0`.
pub fn deterministic_total_variance(kappa: f64, theta: f64, v0: f64, t: f64) -> f64 {
    if kappa * t < 1e-8 {
        return v0 * t;
    }
    theta * t + (v0 - theta) * (-(-kappa * t).exp_m1()) / kappa
}

pub struct McPrice {
    pub mean: f64,
    pub se: f64,
}

/// Call price under Heston by full-truncation Euler in log-price. The bounded
/// put payoff is simulated and mapped through parity, which holds exactly for
/// the log-Euler scheme since the discounted forward stays a martingale.
#[allow(clippy::too_many_arguments)]
pub fn heston_euler_call(
    s0: f64,
    k: f64,
    t: f64,
    [r, q, kappa, theta, sigma, v0, rho]: [f64; 7],
    paths: usize,
    steps: usize,
    seed: u64,
) -> McPrice {
    let mut rng = StdRng::seed_from_u64(seed);
    let dt = t / steps as f64;
    let sq = dt.sqrt();
    let rho_c = (1.0 - rho * rho).max(0.0).sqrt();
    let disc = (-r * t).exp();
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..paths {
        let (mut x, mut v) = (s0.ln(), v0);
        for _ in 0..steps {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            let vp = v.max(0.0);
            let root = vp.sqrt();
            x += (r - q - 0.5 * vp) * dt + root * sq * z1;
            v += kappa * (theta - vp) * dt + sigma * root * sq * (rho * z1 + rho_c * z2);
        }
        let pay = disc * (k - x.exp()).max(0.0);
        sum += pay;
        sum2 += pay * pay;
    }
    let n = paths as f64;
    let mean = sum / n;
    McPrice {
        mean: mean + s0 * (-q * t).exp() - k * disc,
        se: ((sum2 / n - mean * mean) / (n - 1.0)).sqrt(),
    }
}

/// `E exp(-∫_0^T r dt)` with `r` sampled exactly on a grid and the integral by
/// the trapezoid rule.
#[allow(clippy::too_many_arguments)]
pub fn vasicek_mc_bond(r0: f64, t: f64, a: f64, b: f64, sigma: f64, paths: usize, steps: usize, seed: u64) -> McPrice {
    let mut rng = StdRng::seed_from_u64(seed);
    let dt = t / steps as f64;
    let decay = (-a * dt).exp();
    let sd = sigma * ((1.0 - decay * decay) / (2.0 * a)).sqrt();
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..paths {
        let mut r = r0;
        let mut integral = 0.0;
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            let next = b + (r - b) * decay + sd * z;
            integral += 0.5 * (r + next) * dt;
            r = next;
        }
        let p = (-integral).exp();
        sum += p;
        sum2 += p * p;
    }
    let n = paths as f64;
    let mean = sum / n;
    McPrice {
        mean,
        se: ((sum2 / n - mean * mean) / (n - 1.0)).sqrt(),
    }
}

/// A point of the unit box used by the bundled Heston scenario.
pub fn heston_box_draw(rng: &mut StdRng) -> [f64; 7] {
    use rand::Rng;
    core::array::from_fn(|_| rng.gen_range(0.0..1.0))
}
