mod common;

use common::families::{
    disp_agrees, disp_st_pair, family_pair, power_pair, quantile_cov, FAMILIES,
};
use ordersense_core::distributions::Transformed;
use ordersense_core::orders::{
    check_dil, check_disp, check_ew, check_lorenz, check_st, check_star, CheckConfig,
};
use ordersense_core::{Law, Verdict};
use proptest::prelude::*;

fn cfg() -> CheckConfig {
    CheckConfig::with_points(400).unwrap()
}

fn cv2<L: Law>(l: &L) -> f64 {
    let (m, v) = ordersense_core::distributions::quantile_moments(l).unwrap();
    v / (m * m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn disp_implies_ew_implies_dil_and_variance(i in 0usize..100_000) {
        let (x, y) = disp_st_pair(i);
        let c = cfg();
        prop_assert_eq!(check_disp(&x, &y, &c).verdict, Verdict::Holds);
        prop_assert_eq!(check_ew(&x, &y, &c).verdict, Verdict::Holds);
        prop_assert_eq!(check_dil(&x, &y, &c).verdict, Verdict::Holds);
        prop_assert!(x.variance() <= y.law_variance().unwrap() * (1.0 + 1e-9));
    }

    #[test]
    fn star_agrees_with_log_disp(i in 0usize..100_000) {
        let (x, y, ordered) = power_pair(i);
        let c = cfg();
        let star = check_star(&x, &y, &c).unwrap().verdict;
        let lx = Transformed::increasing(&x, f64::ln);
        let ly = Transformed::increasing(&y, f64::ln);
        prop_assert_eq!(star, check_disp(&lx, &ly, &c).verdict);
        prop_assert_eq!(star == Verdict::Holds, ordered);
    }

    #[test]
    fn star_implies_lorenz_and_cv2(i in 0usize..50_000) {
        let (x, y, _) = power_pair(2 * i);
        let c = cfg();
        prop_assert_eq!(check_star(&x, &y, &c).unwrap().verdict, Verdict::Holds);
        prop_assert_eq!(check_lorenz(&x, &y, &c).unwrap().verdict, Verdict::Holds);
        prop_assert!(cv2(&x) <= cv2(&y) * (1.0 + 1e-9));
    }

    #[test]
    fn disp_and_st_survive_convex_maps(i in 0usize..100_000, which in 0usize..3) {
        let (x, y) = disp_st_pair(i);
        let c = cfg();
        prop_assert_eq!(check_st(&x, &y, &c).verdict, Verdict::Holds);
        let top = y.right_endpoint() + 0.5;
        let f: fn(f64, f64) -> f64 = match which {
            0 => |t, _| t.exp(),
            1 => |t, _| t * t,
            _ => |t, top| -(top - t).ln(),
        };
        let fx = Transformed::increasing(&x, move |t| f(t, top));
        let fy = Transformed::increasing(&y, move |t| f(t, top));
        prop_assert_eq!(check_disp(&fx, &fy, &c).verdict, Verdict::Holds);
    }

    #[test]
    fn ew_survives_convex_maps_with_ordered_left_endpoints(i in 0usize..100_000) {
        let (x, y) = disp_st_pair(i);
        prop_assert!(x.left_endpoint() <= y.left_endpoint());
        let fx = Transformed::increasing(&x, f64::exp);
        let fy = Transformed::increasing(&y, f64::exp);
        prop_assert_eq!(check_ew(&fx, &fy, &cfg()).verdict, Verdict::Holds);
    }

    #[test]
    fn ew_orders_covariances_of_convex_maps(i in 0usize..100_000) {
        let (x, y) = disp_st_pair(i);
        let hs: [&dyn Fn(f64) -> f64; 2] = [&f64::exp, &|t: f64| if t > 0.0 { t } else { 0.0 }];
        for h1 in hs {
            for h2 in hs {
                let (cx, cy) = (quantile_cov(&x, h1, h2), quantile_cov(&y, h1, h2));
                prop_assert!(cx <= cy + 1e-9 * (1.0 + cy.abs()), "{} > {}", cx, cy);
            }
        }
    }
}

#[test]
fn analytic_families_match_checker() {
    let c = CheckConfig::default();
    for family in FAMILIES {
        let mut seen = 0;
        let (mut ordered, mut unordered) = (0, 0);
        for i in 0..400 {
            let Some(p) = family_pair(family, i) else { continue };
            seen += 1;
            if p.ordered {
                ordered += 1;
            } else {
                unordered += 1;
            }
            assert!(disp_agrees(&p, &c), "{family} #{i}: {:?} vs {:?}, ordered = {}", p.x.family(), p.y.family(), p.ordered);
        }
        assert!(seen >= 200, "{family}: {seen}");
        assert!(ordered > 10 && unordered > 10, "{family}: {ordered} ordered, {unordered} not");
    }
}

#[test]
fn truncated_exponentials_on_one_window_are_ordered_only_at_equal_rates() {
    let c = CheckConfig::default();
    let x = ordersense_core::Distribution::truncated_exponential(2.0, 0.0, 1.0).unwrap();
    let y = ordersense_core::Distribution::truncated_exponential(1.0, 0.0, 1.0).unwrap();
    assert_eq!(check_disp(&x, &y, &c).verdict, Verdict::Fails);
    assert_eq!(check_disp(&y, &x, &c).verdict, Verdict::Fails);
    assert_eq!(check_disp(&x, &x, &c).verdict, Verdict::Holds);
}

#[test]
fn shrinking_map_reverses_disp() {
    let c = cfg();
    for i in 0..50 {
        let (x, y) = disp_st_pair(i);
        let flat = (y.right_endpoint() - y.left_endpoint()) - (x.right_endpoint() - x.left_endpoint());
        if flat > 1e-6 {
            assert_eq!(check_disp(&y, &x, &c).verdict, Verdict::Fails, "#{i}");
        }
    }
}
