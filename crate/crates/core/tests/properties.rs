mod common;

use proptest::prelude::*;
use rand::Rng;
use rug::Rational;

use tracecoef_core::densities::{finite_part, finite_part_by_radius, residue_density};
use tracecoef_core::laurent::{resolvent_to_zeta_full, zeta_regular_value};
use tracecoef_core::parse::{format_symbol, parse_symbol};
use tracecoef_core::resolvent::{
    coefficient_of_inverse_lambda, difference_coefficient, model_trace_expansion, trace_defect,
};
use tracecoef_core::symbol::{deg, series_log, symbol_product, to_f64};
use tracecoef_core::{ClassicalSymbol, Degree, HomogeneousTerm, Precision, ScalarValue};

fn prec() -> Precision {
    Precision::default()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

/// Order σ (possibly half-integral) with σ + n < m.
fn model_order(rng: &mut rand::rngs::StdRng, n: usize, m: i64) -> Degree {
    let top = 2 * (m - n as i64) - 1;
    Degree::new(rng.gen_range(-6..=top), 2)
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn homogeneity_outside_unit_ball(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=3);
        let d = Degree::new(r.gen_range(-8..=6), r.gen_range(1..=2));
        let t = HomogeneousTerm::new(d, common::angular(&mut r, n, 1, 4));
        let rad = r.gen_range(1.0..3.0);
        let x = common::random_direction(&mut r, n, rad);
        let s: f64 = r.gen_range(1.0..5.0);
        let y: Vec<f64> = x.iter().map(|v| v * s).collect();
        let lhs = t.eval(0, &y);
        let rhs = s.powf(to_f64(d)) * t.eval(0, &x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn parser_round_trip(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=3);
        let msize = r.gen_range(1..=2);
        let order = Degree::new(r.gen_range(-6..=4), r.gen_range(1..=2));
        let s = common::symbol(&mut r, n, msize, order, 3);
        let text = format_symbol(&s);
        let back = parse_symbol(&text, n, msize).unwrap();
        prop_assert_eq!(&back, &s, "{}", text);
        prop_assert_eq!(format_symbol(&back), text);
    }

    #[test]
    fn series_log_matches_pointwise_log(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=3);
        let m = r.gen_range(1..=4);
        let p = common::elliptic(&mut r, n, m, 4);
        let j = r.gen_range(1..=4u32);
        let logp = series_log(&p, j, prec()).unwrap();
        let (_, cs) = p.radial_leading().unwrap();
        let c = cs[0].to_f64();
        // |coefficient sums| of lower terms, relative to c, bound |u| termwise
        let b = p.terms()[1..]
            .iter()
            .map(|t| {
                let a: f64 = t.angular.entry(0).terms().map(|(_, q)| q.to_f64().abs()).sum();
                let jj = to_f64(p.order() - t.degree);
                (a / c).max(1.0).powf(1.0 / jj)
            })
            .fold(1.0f64, f64::max);
        for _ in 0..4 {
            let rad = r.gen_range(16.0..32.0);
            let x = common::random_direction(&mut r, n, rad);
            let exact = p.eval_entry(0, &x).ln();
            let approx = logp.eval_entry(0, &x);
            let q = 2.0 * b / rad;
            let tail = 2.0 * q.powi(j as i32 + 1) / (1.0 - q);
            prop_assert!((exact - approx).abs() <= tail + 1e-12 * exact.abs(),
                "|xi| = {rad}: {exact} vs {approx}, tail bound {tail}");
        }
    }

    #[test]
    fn product_is_pointwise_and_polynomial(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=3);
        let d = deg(r.gen_range(-3..=1));
        let a = ClassicalSymbol::scalar(n, vec![HomogeneousTerm::new(d, common::angular(&mut r, n, 1, 3))]).unwrap();
        let p = common::elliptic(&mut r, n, 2, 2);
        let logp = series_log(&p, 3, prec()).unwrap();
        let prod = symbol_product(&a, &logp).unwrap();
        for (_, _, c) in prod.components() {
            prop_assert!(c.exact.entry(0).degree() <= 3 + 2 * 3);
        }
        let rad = r.gen_range(1.0..6.0);
        let x = common::random_direction(&mut r, n, rad);
        let lhs = prod.eval_entry(0, &x);
        let rhs = a.eval_entry(0, &x) * logp.eval_entry(0, &x);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn residue_ignores_extension_but_finite_part_does_not(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=3);
        let msize = r.gen_range(1..=2);
        let order = deg(r.gen_range(-(n as i64) - 1..=1));
        let a = common::symbol(&mut r, n, msize, order, 4);
        let b = a.with_extension_shift(2);
        prop_assert!(residue_density(&a).exact_eq(&residue_density(&b)));
        // each term moves TR_x by W(1/(s+K+2) − 1/(s+K)) ≠ 0 when its weight is nonzero
        let any_weight = a.terms().iter().any(|t| !t.angular.trace_moment().is_exact_zero());
        if any_weight && a.terms().len() == 1 {
            prop_assert!(!finite_part(&a).exact_eq(&finite_part(&b)));
        }
    }

    #[test]
    fn densities_are_linear(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=3);
        let order = deg(r.gen_range(-4..=2));
        let a = common::symbol(&mut r, n, 1, order, 3);
        let order_b = order - deg(r.gen_range(0..=2));
        let b = common::symbol(&mut r, n, 1, order_b, 3);
        let q = common::small_rational(&mut r);
        let sum = a.add(&b).unwrap();
        prop_assert!(finite_part(&sum).exact_eq(&(&finite_part(&a) + &finite_part(&b))));
        prop_assert!(residue_density(&sum).exact_eq(&(&residue_density(&a) + &residue_density(&b))));
        prop_assert!(finite_part(&a.scale(&q)).exact_eq(&finite_part(&a).scale(&q)));
        prop_assert!(residue_density(&a.scale(&q)).exact_eq(&residue_density(&a).scale(&q)));
    }

    #[test]
    fn radius_definition_is_equivalent(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=4);
        let order = Degree::new(r.gen_range(-10..=4), r.gen_range(1..=2));
        let msize = r.gen_range(1..=2);
        let a = common::symbol(&mut r, n, msize, order, 4);
        prop_assert!(finite_part_by_radius(&a, 8).exact_eq(&finite_part(&a)));
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn moments_match_monte_carlo(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(2..=4);
        let p = common::sphere_poly(&mut r, n, 8, 4);
        let area = tracecoef_core::SpherePoly::one(n).moment().to_f64();
        let samples = 20_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..samples {
            let x = common::random_direction(&mut r, n, 1.0);
            let v = p.eval(&x);
            sum += v;
            sq += v * v;
        }
        let mean = sum / samples as f64;
        let var = (sq / samples as f64 - mean * mean).max(0.0);
        let sigma = area * (var / samples as f64).sqrt();
        let exact = p.moment().to_f64();
        prop_assert!((area * mean - exact).abs() <= 5.0 * sigma + 1e-12,
            "{p}: MC {} vs {exact} (sigma {sigma})", area * mean);
    }

    #[test]
    fn inverse_lambda_coefficient_is_finite_part(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=2);
        let m = if r.gen_bool(0.5) { 2 } else { 4 };
        let msize = r.gen_range(1..=2);
        let order = model_order(&mut r, n, m);
        let a = common::symbol(&mut r, n, msize, order, 4);
        let e = model_trace_expansion(&a, m as u32, 1, None, prec()).unwrap();
        let (log_c, c) = coefficient_of_inverse_lambda(&e);
        prop_assert!(c.exact_eq(&finite_part(&a)), "{c} vs {}", finite_part(&a));
        prop_assert!(log_c.exact_eq(&residue_density(&a).scale(&Rational::from((1, m)))));
    }

    #[test]
    fn log_coefficient_is_residue_for_all_powers(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=2);
        let m = if r.gen_bool(0.5) { 2 } else { 4 };
        let order = model_order(&mut r, n, m);
        let a = common::symbol(&mut r, n, 1, order, 4);
        let res = residue_density(&a).scale(&Rational::from((1, m)));
        for big_n in 1..=3 {
            let e = model_trace_expansion(&a, m as u32, big_n, None, prec()).unwrap();
            prop_assert!(coefficient_of_inverse_lambda(&e).0.exact_eq(&res));
        }
    }

    #[test]
    fn higher_powers_are_termwise_derivatives(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=2);
        let m = if r.gen_bool(0.5) { 2 } else { 4 };
        let order = model_order(&mut r, n, m);
        let a = common::symbol(&mut r, n, 1, order, 3);
        let floor = deg(-6);
        let base = model_trace_expansion(&a, m as u32, 1, Some(floor), prec()).unwrap();
        for big_n in 2..=3u32 {
            let direct = model_trace_expansion(&a, m as u32, big_n, Some(floor - deg(big_n as i64 - 1)), prec()).unwrap();
            let derived = base.raise_power(big_n - 1);
            for (e, l, v) in derived.entries() {
                prop_assert!(direct.coefficient(e, l).agrees_with(v, 1e-40), "N={big_n} ({e},{l})");
            }
            for (e, l, v) in direct.entries() {
                prop_assert!(derived.coefficient(e, l).agrees_with(v, 1e-40), "N={big_n} ({e},{l})");
            }
        }
    }

    #[test]
    fn difference_coefficient_equals_trace_defect(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=2);
        let m = r.gen_range(1..=3);
        let gap = r.gen_range(0..=2);
        let a = common::symbol(&mut r, n, 1, deg(gap - n as i64), 3);
        let p = common::elliptic(&mut r, n, m, 3);
        let p2 = common::elliptic(&mut r, n, m, 3);
        let big_n = r.gen_range(1..=3);
        let d = difference_coefficient(&a, &p, &p2, big_n, prec()).unwrap();
        let t = trace_defect(&a, &p, &p2, prec()).unwrap();
        prop_assert!(d.agrees_with(&t, 1e-30), "{d} vs {t}");
    }

    #[test]
    fn trace_defect_is_a_cocycle(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=2);
        let order = deg(r.gen_range(0..=2) - n as i64);
        let a = common::symbol(&mut r, n, 1, order, 3);
        let ps: Vec<ClassicalSymbol> = (0..3)
            .map(|_| {
                let m = r.gen_range(1..=4);
                common::elliptic(&mut r, n, m, 3)
            })
            .collect();
        let d13 = trace_defect(&a, &ps[0], &ps[2], prec()).unwrap();
        let d12 = trace_defect(&a, &ps[0], &ps[1], prec()).unwrap();
        let d23 = trace_defect(&a, &ps[1], &ps[2], prec()).unwrap();
        prop_assert!(d13.agrees_with(&(&d12 + &d23), 1e-30));
    }

    #[test]
    fn pipeline_regular_value_is_power_independent(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.gen_range(1..=2);
        let m = if r.gen_bool(0.5) { 2 } else { 4 };
        let order = model_order(&mut r, n, m);
        let a = common::symbol(&mut r, n, 1, order, 3);
        let fp = finite_part(&a);
        for big_n in 1..=3 {
            let e = model_trace_expansion(&a, m as u32, big_n, None, prec()).unwrap();
            let z = resolvent_to_zeta_full(&e, prec()).unwrap();
            let v = zeta_regular_value(&z);
            prop_assert!(v.agrees_with(&fp, 1e-30), "N={big_n}: {v} vs {fp}");
        }
    }
}

#[test]
fn scalar_sums_track_error() {
    let x = ScalarValue::euler_gamma(prec());
    let y = &x - &x;
    assert!(y.is_zero_within_bound());
}
