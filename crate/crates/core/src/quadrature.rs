//! Gauss–Legendre rules and a globally adaptive bisection integrator.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;

use crate::error::{Error, Result};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes nodes and weights by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if libm::fabs(dx) <= 1e-16 * libm::fabs(x).max(1.0) {
                    let (_, d) = legendre(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mut s = 0.0;
        for (x, w) in self.mapped(a, b) {
            s += w * f(x);
        }
        s
    }
}

// Returns (P_n(x), P_n'(x)).
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Settings for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveConfig {
    /// Number of equal panels the interval is split into before refinement.
    pub initial_panels: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bisections allowed before giving up.
    pub max_bisections: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            initial_panels: 16,
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_bisections: 20_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    // Estimate from the two half-panels and from the whole panel.
    fine: f64,
    left: f64,
    right: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn make_panel<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    f: &mut F,
) -> Panel {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, &mut *f);
    let right = rule.integrate(m, b, &mut *f);
    let fine = left + right;
    Panel {
        a,
        b,
        fine,
        left,
        right,
        err: libm::fabs(fine - whole),
    }
}

/// Integrates `f` over `[a, b]` by repeatedly bisecting the panel with the
/// largest error estimate until the summed estimate falls below
/// `max(abs_tol, rel_tol * |I|)`.
///
/// The integrand is never evaluated at the endpoints, so integrable endpoint
/// singularities are fine. The summation order depends only on the panel
/// layout, which makes the result reproducible.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    cfg: &AdaptiveConfig,
    mut f: F,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let panels = cfg.initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(panels * 4);
    for p in 0..panels {
        let pa = a + h * p as f64;
        let pb = if p + 1 == panels { b } else { a + h * (p + 1) as f64 };
        let whole = rule.integrate(pa, pb, &mut f);
        heap.push(make_panel(rule, pa, pb, whole, &mut f));
    }
    let (mut total, mut err) = totals(&heap);
    let mut bisections = 0usize;
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::NonConvergence(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        if err <= cfg.abs_tol.max(cfg.rel_tol * libm::fabs(total)) {
            // Re-sum in panel order so the result does not depend on the
            // running-total history.
            let (exact, exact_err) = totals(&heap);
            if exact_err <= cfg.abs_tol.max(cfg.rel_tol * libm::fabs(exact)) {
                return Ok(exact);
            }
            total = exact;
            err = exact_err;
        }
        if bisections >= cfg.max_bisections {
            return Err(Error::NonConvergence(format!(
                "error estimate {err:e} after {bisections} bisections on [{a}, {b}]"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(m > worst.a && m < worst.b) {
            // Panel can no longer be split in floating point; freeze it.
            err -= worst.err;
            heap.push(Panel { err: 0.0, ..worst });
            continue;
        }
        let l = make_panel(rule, worst.a, m, worst.left, &mut f);
        let r = make_panel(rule, m, worst.b, worst.right, &mut f);
        total += l.fine + r.fine - worst.fine;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        bisections += 1;
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    let mut panels: Vec<(f64, f64, f64)> = heap.iter().map(|p| (p.a, p.fine, p.err)).collect();
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    let total = crate::math::sum(panels.iter().map(|p| p.1));
    let err = crate::math::sum(panels.iter().map(|p| p.2));
    (total, err)
}
