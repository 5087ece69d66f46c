mod common;

use common::oracles::{
    black_scholes_call, deterministic_total_variance, heston_box_draw, heston_euler_call, vasicek_mc_bond,
};
use ordersense_core::models::{HestonModel, HestonParams, HestonQuadrature, VarModel, VasicekModel};
use rand::{rngs::StdRng, SeedableRng};

#[test]
fn var_is_monotone_on_a_grid() {
    for alpha in [0.5, 0.9, 0.99] {
        let m = VarModel::new(100.0, 100.0, 1.0, alpha).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let (mu, s) = (-1.0 + 0.05 * i as f64, 0.05 * j as f64);
                let v = m.eval(mu, s);
                assert!(m.eval(mu + 0.05, s) >= v);
                assert!(m.eval(mu, s + 0.05) >= v, "alpha {alpha}, mu {mu}, sigma {s}");
            }
        }
    }
}

#[test]
fn vasicek_bond_is_positive_and_decreasing_in_r0() {
    for i in 0..=10 {
        for j in 0..=10 {
            for l in 0..=10 {
                let (a, b, s) = (0.1 * i as f64, 0.2 * j as f64, 0.1 * l as f64);
                let mut prev = f64::INFINITY;
                for r in 0..10 {
                    let p = VasicekModel::new(-0.1 + 0.05 * r as f64, 1.0).unwrap().bond(a, b, s).unwrap();
                    assert!(p > 0.0 && p.is_finite());
                    assert!(p < prev, "a {a} b {b} sigma {s}");
                    prev = p;
                }
            }
        }
    }
}

#[test]
fn vasicek_series_joins_the_closed_form() {
    let m = VasicekModel::new(0.1, 1.0).unwrap();
    let below = m.bond(0.999e-3, 0.5, 0.5).unwrap();
    let above = m.bond(1.001e-3, 0.5, 0.5).unwrap();
    assert!((below - above).abs() < 1e-6);
    // a = 0: Gaussian integral of a driftless Brownian rate.
    let exact = (-0.1f64 + 0.25 / 6.0).exp();
    assert!((m.bond(0.0, 0.5, 0.5).unwrap() - exact).abs() < 1e-14);
}

#[test]
fn vasicek_matches_simulation() {
    let m = VasicekModel::new(0.1, 1.0).unwrap();
    for (a, b, s) in [(0.5, 0.5, 0.5), (1.0, 0.1, 0.3), (0.05, 1.5, 0.8)] {
        let mc = vasicek_mc_bond(0.1, 1.0, a, b, s, 100_000, 200, 11);
        let p = m.bond(a, b, s).unwrap();
        assert!((mc.mean - p).abs() < 3.0 * mc.se, "({a}, {b}, {s}): {p} vs {} ± {}", mc.mean, mc.se);
    }
}

fn heston() -> HestonModel {
    HestonModel::new(100.0, 100.0, 0.5).unwrap()
}

#[test]
fn heston_reduces_to_black_scholes_without_vol_of_vol() {
    let h = heston();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..50 {
        let mut x = heston_box_draw(&mut rng);
        x[4] = 1e-4;
        x[5] = x[5].max(0.01);
        let p = HestonParams::from_slice(&x);
        let vol = (deterministic_total_variance(p.kappa, p.theta, p.v0, h.t) / h.t).sqrt();
        let bs = black_scholes_call(h.s0, h.k, h.t, p.r, p.q, vol);
        let c = h.call(&p).unwrap();
        assert!((c - bs).abs() < 1e-3 * bs, "{p:?}: {c} vs {bs}");
    }
}

#[test]
fn heston_matches_euler_simulation() {
    let h = heston();
    let mut rng = StdRng::seed_from_u64(5);
    for d in 0..2 {
        let x = heston_box_draw(&mut rng);
        let c = h.call(&HestonParams::from_slice(&x)).unwrap();
        let mc = heston_euler_call(h.s0, h.k, h.t, x, 40_000, 200, 100 + d);
        assert!((mc.mean - c).abs() < 3.0 * mc.se, "{x:?}: {c} vs {} ± {}", mc.mean, mc.se);
    }
}

#[test]
fn heston_respects_bounds_on_the_unit_box() {
    let h = heston();
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..1000 {
        let x = heston_box_draw(&mut rng);
        let p = HestonParams::from_slice(&x);
        let (p1, p2) = h.probabilities(&p).unwrap();
        for pj in [p1, p2] {
            assert!((-1e-6..=1.0 + 1e-6).contains(&pj), "{p:?}: {pj}");
        }
        let c = h.call(&p).unwrap();
        let intrinsic = (h.s0 * (-p.q * h.t).exp() - h.k * (-p.r * h.t).exp()).max(0.0);
        assert!(c >= intrinsic - 1e-6, "{p:?}: {c} < {intrinsic}");
        assert!(c <= h.s0 * (-p.q * h.t).exp() + 1e-6);
    }
}

#[test]
fn heston_integrand_decays_before_the_largest_cutoff() {
    let h = heston();
    let q = HestonQuadrature::default();
    let mut rng = StdRng::seed_from_u64(13);
    for _ in 0..200 {
        let mut x = heston_box_draw(&mut rng);
        x[4] = x[4].max(1e-6);
        let p = HestonParams::from_slice(&x);
        for j in [1, 2] {
            let mut u = q.initial_cutoff;
            while h.characteristic(&p, j, u).norm() / u >= q.decay_tol {
                u *= 2.0;
                assert!(u <= q.max_cutoff, "{p:?}: P{j} integrand still {} at {u}", h.characteristic(&p, j, u).norm() / u);
            }
        }
        let wide = HestonModel::new(100.0, 100.0, 0.5).unwrap().with_quadrature(HestonQuadrature {
            initial_cutoff: 4.0 * q.initial_cutoff,
            ..q
        });
        let (a, b) = (wide.call(&p).unwrap(), h.call(&p).unwrap());
        assert!((a - b).abs() < 1e-6, "{p:?}: {a} vs {b}");
    }
}

#[test]
fn put_call_parity() {
    let h = heston();
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..100 {
        let p = HestonParams::from_slice(&heston_box_draw(&mut rng));
        let lhs = h.call(&p).unwrap() - h.put(&p).unwrap();
        let rhs = h.s0 * (-p.q * h.t).exp() - h.k * (-p.r * h.t).exp();
        assert!((lhs - rhs).abs() < 1e-9);
    }
}

#[test]
fn tiny_vol_of_vol_is_clamped_and_counted() {
    let h = heston();
    let mut x = [0.05, 0.01, 1.0, 0.04, 0.0, 0.04, 0.5];
    let _ = h.call(&HestonParams::from_slice(&x)).unwrap();
    assert_eq!(h.clamp_count(), 1);
    x[4] = 0.3;
    let _ = h.call(&HestonParams::from_slice(&x)).unwrap();
    assert_eq!(h.clamp_count(), 1);
    h.reset_clamp_count();
    assert_eq!(h.clamp_count(), 0);
}
