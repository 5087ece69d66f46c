//! Generated law pairs with known order relations, and their analytic
//! verdicts. Parameters come from Weyl sequences so sweeps are deterministic.

use ordersense_core::distributions::Transformed;
use ordersense_core::orders::{check_disp, CheckConfig, Grid};
use ordersense_core::{Distribution, Law, Verdict};

pub type Map = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Mapped = Transformed<Distribution, Map>;

const WEYL: [f64; 6] = [
    0.618_033_988_749_895,
    0.414_213_562_373_095_1,
    0.732_050_807_568_877_2,
    0.236_067_977_499_789_7,
    0.645_751_311_064_590_6,
    0.316_624_790_355_400_3,
];

/// The `j`-th coordinate of the `i`-th point, in `[0, 1)`.
pub fn weyl(i: usize, j: usize) -> f64 {
    ((i as f64 + 1.0) * WEYL[j % WEYL.len()] + 0.1 * j as f64).fract()
}

pub fn lerp(t: f64, lo: f64, hi: f64) -> f64 {
    lo + t * (hi - lo)
}

pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// Bounded base law with support in `[0, 5]`; the family cycles with `i`.
pub fn bounded_law(i: usize) -> Distribution {
    let (s, t, r) = (weyl(i, 0), weyl(i, 1), weyl(i, 2));
    let a = lerp(s, 0.0, 2.0);
    let w = lerp(t, 0.2, 3.0);
    match i % 3 {
        0 => Distribution::uniform(a, a + w).unwrap(),
        1 => Distribution::truncated_normal(lerp(r, a, a + w), lerp(s, 0.1, 4.0), a, a + w).unwrap(),
        _ => Distribution::truncated_exponential(lerp(r, 0.2, 4.0), a, a + w).unwrap(),
    }
}

/// `T(x) = c x + d + e (x - x0)^3` with `c >= 1`, `e >= 0`, so that
/// `T(x) - x` is nondecreasing. `d` is chosen so that `T(l) >= l`.
pub fn spreading_map(i: usize, left: f64, right: f64) -> Map {
    let c = lerp(weyl(i, 3), 1.0, 2.5);
    let e = if i.is_multiple_of(4) { 0.0 } else { lerp(weyl(i, 4), 0.0, 0.3) };
    let x0 = lerp(weyl(i, 5), left, right);
    let shift = lerp(weyl(i, 1), 0.0, 1.0);
    let d = left - c * left - e * (left - x0).powi(3) + shift;
    Box::new(move |x| c * x + d + e * (x - x0).powi(3))
}

/// `X` bounded and `Y = T(X)` with `X <=disp Y` and `X <=st Y`.
pub fn disp_st_pair(i: usize) -> (Distribution, Mapped) {
    let x = bounded_law(i);
    let map = spreading_map(i, x.left_endpoint(), x.right_endpoint());
    let y = Transformed::increasing(x.clone(), map);
    (x, y)
}

/// A positive base law and `Y = c X^p (1 + e X^q)`: star-ordered iff `p >= 1`
/// (for `e >= 0`). The exponent avoids a neighborhood of 1.
pub fn power_pair(i: usize) -> (Distribution, Mapped, bool) {
    let mut x = bounded_law(i);
    if x.left_endpoint() < 0.05 {
        let a = 0.05 + weyl(i, 2);
        x = Distribution::uniform(a, a + lerp(weyl(i, 1), 0.2, 3.0)).unwrap();
    }
    let ordered = i.is_multiple_of(2);
    let p = if ordered { lerp(weyl(i, 3), 1.05, 3.0) } else { lerp(weyl(i, 3), 0.2, 0.95) };
    let c = lerp(weyl(i, 4), 0.1, 5.0);
    let e = if ordered && i.is_multiple_of(4) { lerp(weyl(i, 5), 0.0, 0.5) } else { 0.0 };
    let q = lerp(weyl(i, 0), 0.5, 2.0);
    let y = Transformed::increasing(x.clone(), Box::new(move |t: f64| c * t.powf(p) * (1.0 + e * t.powf(q))) as Map);
    (x, y, ordered)
}

/// A pair from an analytically ordered family, with the disp verdict its
/// closed-form condition gives on the default quantile window.
pub struct FamilyPair {
    pub family: &'static str,
    pub x: Distribution,
    pub y: Distribution,
    pub ordered: bool,
}

pub const FAMILIES: [&str; 5] = [
    "uniform-width",
    "exponential-rate",
    "normal-variance",
    "uniform-vs-truncated-normal",
    "truncated-exponential-same-window",
];

/// `d/du F^{-1}(u)` for the exponential with `rate` truncated on `[a, b]`.
fn et_quantile_slope(rate: f64, a: f64, b: f64, u: f64) -> f64 {
    let (ea, eb) = ((-rate * a).exp(), (-rate * b).exp());
    (ea - eb) / (rate * (ea + u * (eb - ea)))
}

/// The `i`-th pair of `family`. `None` when it falls inside the margin around
/// the boundary of the analytic condition.
pub fn family_pair(family: &str, i: usize) -> Option<FamilyPair> {
    let (s, t, r, v) = (weyl(i, 0), weyl(i, 1), weyl(i, 2), weyl(i, 3));
    let (x, y, ordered) = match family {
        "uniform-width" => {
            let (w1, w2) = (lerp(s, 0.1, 5.0), lerp(t, 0.1, 5.0));
            if !i.is_multiple_of(10) && (w1 - w2).abs() < 1e-3 {
                return None;
            }
            let w2 = if i.is_multiple_of(10) { w1 } else { w2 };
            (
                Distribution::uniform(lerp(r, -3.0, 3.0), lerp(r, -3.0, 3.0) + w1).unwrap(),
                Distribution::uniform(lerp(v, -3.0, 3.0), lerp(v, -3.0, 3.0) + w2).unwrap(),
                w1 <= w2,
            )
        }
        "exponential-rate" => {
            let (l1, l2) = (lerp(s, 0.1, 10.0), lerp(t, 0.1, 10.0));
            if (l1 - l2).abs() < 1e-3 * l1 {
                return None;
            }
            (Distribution::exponential(l1).unwrap(), Distribution::exponential(l2).unwrap(), l1 >= l2)
        }
        "normal-variance" => {
            let (v1, v2) = (lerp(s, 0.01, 9.0), lerp(t, 0.01, 9.0));
            if (v1 - v2).abs() < 1e-3 * v1 {
                return None;
            }
            (
                Distribution::normal(lerp(r, -5.0, 5.0), v1).unwrap(),
                Distribution::normal(lerp(v, -5.0, 5.0), v2).unwrap(),
                v1 <= v2,
            )
        }
        "uniform-vs-truncated-normal" => {
            let c = lerp(s, -2.0, 2.0);
            let d = c + lerp(t, 0.2, 4.0);
            let m = lerp(r, c, d);
            let var = lerp(v, 0.05, 4.0);
            let sd = var.sqrt();
            let bound = sd * (2.0 * core::f64::consts::PI).sqrt() * (phi((d - m) / sd) - phi((c - m) / sd));
            let width = bound * lerp(weyl(i, 4), 0.3, 1.7);
            if (width / bound - 1.0).abs() < 0.01 {
                return None;
            }
            let a = lerp(weyl(i, 5), -2.0, 2.0);
            (
                Distribution::uniform(a, a + width).unwrap(),
                Distribution::truncated_normal(m, var, c, d).unwrap(),
                width <= bound,
            )
        }
        "truncated-exponential-same-window" => {
            let a = lerp(s, 0.0, 2.0);
            let b = a + lerp(t, 0.2, 3.0);
            let mu = lerp(r, 0.1, 6.0);
            let lambda = if i.is_multiple_of(5) { mu } else { lerp(v, 0.1, 6.0) };
            // Ordered on the quantile window iff the slope of F_Y^{-1} dominates.
            let on = |lo: f64, hi: f64| {
                (0..=2000).all(|k| {
                    let u = lerp(k as f64 / 2000.0, lo, hi);
                    et_quantile_slope(lambda, a, b, u) >= et_quantile_slope(mu, a, b, u) * (1.0 - 1e-12)
                })
            };
            let ordered = on(Grid::DEFAULT_LO, Grid::DEFAULT_HI);
            let inner = on(2.0 * Grid::DEFAULT_LO, 1.0 - 2.0 * (1.0 - Grid::DEFAULT_HI));
            let outer = on(0.5 * Grid::DEFAULT_LO, 1.0 - 0.5 * (1.0 - Grid::DEFAULT_HI));
            if lambda != mu && (ordered != inner || ordered != outer) {
                return None;
            }
            (
                Distribution::truncated_exponential(mu, a, b).unwrap(),
                Distribution::truncated_exponential(lambda, a, b).unwrap(),
                ordered,
            )
        }
        other => panic!("unknown family {other}"),
    };
    Some(FamilyPair { family: FAMILIES.iter().find(|f| **f == family).unwrap(), x, y, ordered })
}

/// Pairs `0..count` of `family` that clear the boundary margin.
pub fn family_pairs(family: &str, count: usize) -> Vec<FamilyPair> {
    (0..).filter_map(|i| family_pair(family, i)).take(count).collect()
}

/// Whether the checker's disp verdict matches the analytic one.
pub fn disp_agrees(p: &FamilyPair, cfg: &CheckConfig) -> bool {
    let want = if p.ordered { Verdict::Holds } else { Verdict::Fails };
    check_disp(&p.x, &p.y, cfg).verdict == want
}

/// `Cov(h1(X), h2(X))` by quadrature of the quantile function.
pub fn quantile_cov<L: Law + ?Sized>(law: &L, h1: &dyn Fn(f64) -> f64, h2: &dyn Fn(f64) -> f64) -> f64 {
    let (u, w) = super::unit_nodes(400);
    let (mut m1, mut m2, mut m12) = (0.0, 0.0, 0.0);
    for (ui, wi) in u.iter().zip(&w) {
        let x = law.inverse_cdf(*ui);
        let (a, b) = (h1(x), h2(x));
        m1 += wi * a;
        m2 += wi * b;
        m12 += wi * a * b;
    }
    m12 - m1 * m2
}
