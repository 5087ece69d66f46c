//! Grid verification of univariate stochastic orders.
//!
//! Every relation is checked through an equivalent quantile-function
//! criterion evaluated on a grid of levels in `(0, 1)`. A `Holds` verdict is
//! grid evidence, not a proof.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::distributions::{Distribution, Law};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveConfig, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// Usual stochastic order.
    St,
    /// Convex order (exact check for finite discrete laws only).
    Cx,
    /// Dilation order.
    Dil,
    /// Dispersive order.
    Disp,
    /// Excess wealth order.
    Ew,
    /// Star order.
    Star,
    /// Lorenz order.
    Lorenz,
}

impl Relation {
    pub const ALL: [Relation; 7] = [
        Relation::St,
        Relation::Cx,
        Relation::Dil,
        Relation::Disp,
        Relation::Ew,
        Relation::Star,
        Relation::Lorenz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Relation::St => "st",
            Relation::Cx => "cx",
            Relation::Dil => "dil",
            Relation::Disp => "disp",
            Relation::Ew => "ew",
            Relation::Star => "star",
            Relation::Lorenz => "lorenz",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Relation::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown order relation '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Where a defining inequality was evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum At {
    /// A probability level `u` (or `p`).
    Level(f64),
    /// A support point `t` (stop-loss comparisons).
    Point(f64),
    /// The equal-means requirement of the convex order.
    Mean,
}

/// First grid point where `lhs <= rhs` failed by more than the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub at: At,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub relation: Relation,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub grid_size: usize,
    pub tolerance: f64,
    /// Why the verdict is inconclusive, when it is.
    pub note: Option<String>,
}

impl OrderReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub fn fails(&self) -> bool {
        self.verdict == Verdict::Fails
    }
}

/// Levels at which quantiles are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    levels: Vec<f64>,
}

impl Grid {
    pub const DEFAULT_POINTS: usize = 2000;
    pub const DEFAULT_LO: f64 = 0.0005;
    pub const DEFAULT_HI: f64 = 0.9995;

    /// `n` equispaced levels covering `[lo, hi]`, with `0 < lo < hi < 1`.
    pub fn equispaced(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 || !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs n >= 2 and 0 < lo < hi < 1, got n={n} [{lo}, {hi}]"
            )));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let levels = (0..n).map(|k| lo + step * k as f64).collect();
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::equispaced(Self::DEFAULT_POINTS, Self::DEFAULT_LO, Self::DEFAULT_HI)
            .expect("default grid is valid")
    }
}

/// Grid plus relative tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub grid: Grid,
    /// Tolerance relative to the local scale `max(1, |lhs|, |rhs|)`.
    pub rel_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            grid: Grid::default(),
            rel_tol: 1e-9,
        }
    }
}

impl CheckConfig {
    pub fn with_points(n: usize) -> Result<Self> {
        Ok(Self {
            grid: Grid::equispaced(n, Grid::DEFAULT_LO, Grid::DEFAULT_HI)?,
            ..Self::default()
        })
    }

    fn tol(&self, a: f64, b: f64) -> f64 {
        self.rel_tol * 1f64.max(libm::fabs(a)).max(libm::fabs(b))
    }
}

struct ReportBuilder<'a> {
    relation: Relation,
    cfg: &'a CheckConfig,
}

impl ReportBuilder<'_> {
    fn report(&self, verdict: Verdict, witness: Option<Witness>, note: Option<String>) -> OrderReport {
        OrderReport {
            relation: self.relation,
            verdict,
            witness,
            grid_size: self.cfg.grid.len(),
            tolerance: self.cfg.rel_tol,
            note,
        }
    }

    fn holds(&self) -> OrderReport {
        self.report(Verdict::Holds, None, None)
    }

    fn fails(&self, w: Witness) -> OrderReport {
        self.report(Verdict::Fails, Some(w), None)
    }

    fn inconclusive(&self, why: String) -> OrderReport {
        self.report(Verdict::Inconclusive, None, Some(why))
    }

    /// Scans `lhs(k) <= rhs(k)` and reports the first violation.
    fn scan<I: Iterator<Item = (At, f64, f64)>>(&self, items: I) -> OrderReport {
        for (at, lhs, rhs) in items {
            if !lhs.is_finite() || !rhs.is_finite() {
                return self.inconclusive(format!("non-finite comparison at {at:?}"));
            }
            if lhs > rhs + self.cfg.tol(lhs, rhs) {
                return self.fails(Witness { at, lhs, rhs });
            }
        }
        self.holds()
    }
}

fn quantiles<L: Law + ?Sized>(law: &L, grid: &Grid) -> Vec<f64> {
    grid.levels().iter().map(|&u| law.inverse_cdf(u)).collect()
}

/// Quantiles of a law on a grid together with the partial integrals of the
/// quantile function below and above every grid level.
#[derive(Debug, Clone)]
pub struct QuantileProfile {
    pub quantiles: Vec<f64>,
    /// `∫_0^{u_k} F^{-1}`.
    pub head: Vec<f64>,
    /// `∫_{u_k}^1 F^{-1}`.
    pub tail: Vec<f64>,
    /// `∫_0^1 F^{-1}`, consistent with `head` and `tail`.
    pub mean: f64,
}

impl QuantileProfile {
    pub fn new<L: Law + ?Sized>(law: &L, grid: &Grid) -> Result<Self> {
        let rule = GaussLegendre::new(16);
        let cfg = AdaptiveConfig {
            initial_panels: 1,
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_bisections: 4000,
        };
        let levels = grid.levels();
        let q = |u: f64| law.inverse_cdf(u);
        let n = levels.len();
        let mut segments = Vec::with_capacity(n + 1);
        segments.push(integrate_adaptive(&rule, 0.0, levels[0], &cfg, q)?);
        for w in levels.windows(2) {
            segments.push(integrate_adaptive(&rule, w[0], w[1], &cfg, q)?);
        }
        segments.push(integrate_adaptive(&rule, levels[n - 1], 1.0, &cfg, q)?);

        let mut head = Vec::with_capacity(n);
        let mut acc = 0.0;
        for s in &segments[..n] {
            acc += s;
            head.push(acc);
        }
        let mut tail = alloc::vec![0.0; n];
        let mut acc = 0.0;
        for k in (0..n).rev() {
            acc += segments[k + 1];
            tail[k] = acc;
        }
        let mean = crate::math::sum(segments.iter().copied());
        Ok(Self {
            quantiles: quantiles(law, grid),
            head,
            tail,
            mean,
        })
    }

    /// Excess wealth transform `∫_p^1 (F^{-1}(u) - F^{-1}(p)) du`.
    pub fn excess_wealth(&self, grid: &Grid) -> Vec<f64> {
        grid.levels()
            .iter()
            .zip(self.tail.iter().zip(&self.quantiles))
            .map(|(&p, (&t, &q))| t - (1.0 - p) * q)
            .collect()
    }

    /// `∫_p^1 (F^{-1}(u) - E X) du`.
    pub fn centered_tail(&self, grid: &Grid) -> Vec<f64> {
        grid.levels()
            .iter()
            .zip(&self.tail)
            .map(|(&p, &t)| t - (1.0 - p) * self.mean)
            .collect()
    }

    /// Lorenz curve `(1/E X) ∫_0^p F^{-1}`.
    pub fn lorenz(&self) -> Vec<f64> {
        self.head.iter().map(|h| h / self.mean).collect()
    }
}

/// `X <=st Y` iff `F_X^{-1} <= F_Y^{-1}` everywhere.
pub fn check_st<X: Law + ?Sized, Y: Law + ?Sized>(x: &X, y: &Y, cfg: &CheckConfig) -> OrderReport {
    let b = ReportBuilder {
        relation: Relation::St,
        cfg,
    };
    b.scan(
        cfg.grid
            .levels()
            .iter()
            .map(|&u| (At::Level(u), x.inverse_cdf(u), y.inverse_cdf(u))),
    )
}

/// `X <=disp Y` iff `F_Y^{-1} - F_X^{-1}` is nondecreasing.
pub fn check_disp<X: Law + ?Sized, Y: Law + ?Sized>(x: &X, y: &Y, cfg: &CheckConfig) -> OrderReport {
    let b = ReportBuilder {
        relation: Relation::Disp,
        cfg,
    };
    let levels = cfg.grid.levels();
    let diff: Vec<f64> = levels
        .iter()
        .map(|&u| y.inverse_cdf(u) - x.inverse_cdf(u))
        .collect();
    // Tolerance scales with the quantiles, not with their difference.
    let scale: Vec<f64> = levels
        .iter()
        .map(|&u| 1f64.max(libm::fabs(x.inverse_cdf(u))).max(libm::fabs(y.inverse_cdf(u))))
        .collect();
    for k in 1..levels.len() {
        let (prev, cur) = (diff[k - 1], diff[k]);
        if !prev.is_finite() || !cur.is_finite() {
            return b.inconclusive(format!("non-finite quantile near level {}", levels[k]));
        }
        let tol = cfg.rel_tol * scale[k].max(scale[k - 1]);
        if prev > cur + tol {
            return b.fails(Witness {
                at: At::Level(levels[k]),
                lhs: prev,
                rhs: cur,
            });
        }
    }
    b.holds()
}

fn profiles<X: Law + ?Sized, Y: Law + ?Sized>(
    x: &X,
    y: &Y,
    grid: &Grid,
) -> core::result::Result<(QuantileProfile, QuantileProfile), String> {
    let px = QuantileProfile::new(x, grid).map_err(|e| format!("X: {e}"))?;
    let py = QuantileProfile::new(y, grid).map_err(|e| format!("Y: {e}"))?;
    Ok((px, py))
}

/// `X <=ew Y` iff the excess wealth transform of `X` is dominated by that
/// of `Y` at every level.
pub fn check_ew<X: Law + ?Sized, Y: Law + ?Sized>(x: &X, y: &Y, cfg: &CheckConfig) -> OrderReport {
    let b = ReportBuilder {
        relation: Relation::Ew,
        cfg,
    };
    let (px, py) = match profiles(x, y, &cfg.grid) {
        Ok(p) => p,
        Err(why) => return b.inconclusive(why),
    };
    let wx = px.excess_wealth(&cfg.grid);
    let wy = py.excess_wealth(&cfg.grid);
    b.scan(
        cfg.grid
            .levels()
            .iter()
            .zip(wx.iter().zip(&wy))
            .map(|(&p, (&l, &r))| (At::Level(p), l, r)),
    )
}

/// `X <=dil Y` iff `∫_p^1 (F_X^{-1} - EX) <= ∫_p^1 (F_Y^{-1} - EY)` for all `p`.
pub fn check_dil<X: Law + ?Sized, Y: Law + ?Sized>(x: &X, y: &Y, cfg: &CheckConfig) -> OrderReport {
    let b = ReportBuilder {
        relation: Relation::Dil,
        cfg,
    };
    let (px, py) = match profiles(x, y, &cfg.grid) {
        Ok(p) => p,
        Err(why) => return b.inconclusive(why),
    };
    let dx = px.centered_tail(&cfg.grid);
    let dy = py.centered_tail(&cfg.grid);
    b.scan(
        cfg.grid
            .levels()
            .iter()
            .zip(dx.iter().zip(&dy))
            .map(|(&p, (&l, &r))| (At::Level(p), l, r)),
    )
}

fn require_nonnegative<L: Law + ?Sized>(law: &L, which: &str, relation: Relation) -> Result<()> {
    let l = law.left_endpoint();
    if l >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{relation} order needs a nonnegative support; {which} has left endpoint {l}"
        )))
    }
}

/// `X <=* Y` iff `F_Y^{-1} / F_X^{-1}` is nondecreasing. Levels where
/// `F_X^{-1}` is numerically zero are skipped.
pub fn check_star<X: Law + ?Sized, Y: Law + ?Sized>(
    x: &X,
    y: &Y,
    cfg: &CheckConfig,
) -> Result<OrderReport> {
    require_nonnegative(x, "X", Relation::Star)?;
    require_nonnegative(y, "Y", Relation::Star)?;
    let b = ReportBuilder {
        relation: Relation::Star,
        cfg,
    };
    let mut prev: Option<(f64, f64)> = None;
    for &u in cfg.grid.levels() {
        let qx = x.inverse_cdf(u);
        let qy = y.inverse_cdf(u);
        if !qx.is_finite() || !qy.is_finite() {
            return Ok(b.inconclusive(format!("non-finite quantile at level {u}")));
        }
        if qx <= cfg.rel_tol {
            continue;
        }
        let ratio = qy / qx;
        if let Some((_, last)) = prev {
            if last > ratio + cfg.tol(last, ratio) {
                return Ok(b.fails(Witness {
                    at: At::Level(u),
                    lhs: last,
                    rhs: ratio,
                }));
            }
        }
        prev = Some((u, ratio));
    }
    Ok(b.holds())
}

/// `X <=Lorenz Y` iff the Lorenz curve of `X` lies above that of `Y`.
pub fn check_lorenz<X: Law + ?Sized, Y: Law + ?Sized>(
    x: &X,
    y: &Y,
    cfg: &CheckConfig,
) -> Result<OrderReport> {
    require_nonnegative(x, "X", Relation::Lorenz)?;
    require_nonnegative(y, "Y", Relation::Lorenz)?;
    let b = ReportBuilder {
        relation: Relation::Lorenz,
        cfg,
    };
    let (px, py) = match profiles(x, y, &cfg.grid) {
        Ok(p) => p,
        Err(why) => return Ok(b.inconclusive(why)),
    };
    if !(px.mean > 0.0 && py.mean > 0.0) {
        return Err(Error::domain("Lorenz order needs strictly positive means"));
    }
    let lx = px.lorenz();
    let ly = py.lorenz();
    // L_Y(p) <= L_X(p)
    Ok(b.scan(
        cfg.grid
            .levels()
            .iter()
            .zip(lx.iter().zip(&ly))
            .map(|(&p, (&l, &r))| (At::Level(p), r, l)),
    ))
}

/// `E (X - t)_+`.
pub fn stop_loss(atoms: &[(f64, f64)], t: f64) -> f64 {
    crate::math::sum(atoms.iter().map(|&(x, p)| p * (x - t).max(0.0)))
}

/// Exact convex-order check for finite discrete laws: equal means and
/// stop-loss dominance at every support point of either law.
pub fn check_cx_discrete(x: &Distribution, y: &Distribution, rel_tol: f64) -> Result<OrderReport> {
    let (ax, ay) = match (x.atoms(), y.atoms()) {
        (Some(ax), Some(ay)) => (ax, ay),
        _ => {
            return Err(Error::domain(
                "convex order is only checked exactly for finite discrete laws",
            ))
        }
    };
    let mut points: Vec<f64> = ax.iter().chain(ay).map(|a| a.0).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let cfg = CheckConfig {
        grid: Grid { levels: Vec::new() },
        rel_tol,
    };
    let b = ReportBuilder {
        relation: Relation::Cx,
        cfg: &cfg,
    };
    let (mx, my) = (x.mean(), y.mean());
    if libm::fabs(mx - my) > cfg.tol(mx, my) {
        let mut r = b.fails(Witness {
            at: At::Mean,
            lhs: mx,
            rhs: my,
        });
        r.grid_size = points.len();
        return Ok(r);
    }
    let mut r = b.scan(
        points
            .iter()
            .map(|&t| (At::Point(t), stop_loss(ax, t), stop_loss(ay, t))),
    );
    r.grid_size = points.len();
    Ok(r)
}

/// Dispatches to the check for `relation`.
pub fn check(
    relation: Relation,
    x: &Distribution,
    y: &Distribution,
    cfg: &CheckConfig,
) -> Result<OrderReport> {
    match relation {
        Relation::St => Ok(check_st(x, y, cfg)),
        Relation::Cx => check_cx_discrete(x, y, cfg.rel_tol),
        Relation::Dil => Ok(check_dil(x, y, cfg)),
        Relation::Disp => Ok(check_disp(x, y, cfg)),
        Relation::Ew => Ok(check_ew(x, y, cfg)),
        Relation::Star => check_star(x, y, cfg),
        Relation::Lorenz => check_lorenz(x, y, cfg),
    }
}
