//! Worked examples with independently derived reference values.

mod common;

use common::pi_over;
use rug::Rational;

use tracecoef_core::densities::{
    finite_part, finite_part_by_radius, parity_class, radius_expansion, residue0_log,
    residue_density, ParityClass,
};
use tracecoef_core::laurent::{
    alpha, known_series, resolvent_to_zeta_at_zero, resolvent_to_zeta_full, zeta_regular_value,
    KnownSeries, LaurentSeries,
};
use tracecoef_core::parse::parse_symbol;
use tracecoef_core::resolvent::{
    c0, coefficient_of_inverse_lambda, difference_coefficient, model_trace_expansion,
    resolvent_symbol, trace_defect, AsymptoticExpansion, Provenance,
};
use tracecoef_core::symbol::{deg, series_log, symbol_product};
use tracecoef_core::{ClassicalSymbol, Degree, Error, Precision, ScalarValue, SpherePoly};

fn prec() -> Precision {
    Precision::default()
}

fn radial(n: usize, d: i64) -> ClassicalSymbol {
    ClassicalSymbol::radial(n, deg(d), Rational::from(1))
}

fn sym(text: &str, n: usize) -> ClassicalSymbol {
    parse_symbol(text, n, 1).unwrap()
}

fn ln(q: i64) -> ScalarValue {
    ScalarValue::ln_rational(&Rational::from(q), prec()).unwrap()
}

fn constant_of(p: &SpherePoly) -> Rational {
    p.as_constant().expect("constant angular part")
}

#[test]
fn parsing() {
    let s = sym("xi1^2/|xi|^3", 2);
    assert_eq!(s.terms().len(), 1);
    assert_eq!(s.order(), deg(-1));
    let one = sym("1", 1);
    assert_eq!(one.order(), deg(0));
    assert!(matches!(
        parse_symbol("xi1 + xi2^2", 2, 1),
        Err(Error::NonHomogeneous { .. })
    ));
}

#[test]
fn sphere_moments() {
    assert!(SpherePoly::one(2).moment().exact_eq(&pi_over((2, 1), 1)));
    let x1sq = SpherePoly::coordinate(3, 0).pow(2);
    assert!(x1sq.moment().exact_eq(&pi_over((4, 3), 1)));
    assert!(SpherePoly::coordinate(2, 0).moment().is_exact_zero());
}

#[test]
fn log_symbols() {
    let l = series_log(&sym("|xi|^2; 1", 1), 4, prec()).unwrap();
    let at = |d: i64, k: u32| constant_of(l.component(deg(d), k).exact.entry(0));
    assert_eq!(at(0, 1), 2);
    assert_eq!(at(-2, 0), 1);
    assert_eq!(at(-4, 0), Rational::from((-1, 2)));
    assert_eq!(l.components().len(), 3);

    let l = series_log(&sym("4*|xi|^2", 1), 2, prec()).unwrap();
    let c = l.component(deg(0), 0);
    assert!(c
        .trace_moment()
        .agrees_with(&(&ln(4) * &ScalarValue::int(2)), 1e-45));

    let l = series_log(&sym("|xi|^2; xi1", 2), 3, prec()).unwrap();
    let x1 = SpherePoly::coordinate(2, 0);
    assert_eq!(l.component(deg(-1), 0).exact.entry(0), &x1);
    assert_eq!(
        l.component(deg(-2), 0).exact.entry(0),
        &x1.pow(2).scale(&Rational::from((-1, 2)))
    );
}

#[test]
fn products() {
    let two_log = series_log(&sym("|xi|^2", 1), 0, prec()).unwrap();
    let r = symbol_product(&radial(1, 0), &two_log).unwrap();
    assert_eq!(constant_of(r.component(deg(0), 1).exact.entry(0)), 2);

    let log4 = series_log(&sym("4*|xi|^2", 1), 0, prec()).unwrap();
    let r = symbol_product(&radial(1, -1), &log4).unwrap();
    let c = r.component(deg(-1), 0);
    assert!(c
        .trace_moment()
        .agrees_with(&(&ln(4) * &ScalarValue::int(2)), 1e-45));

    let a = ClassicalSymbol::single(deg(-1), SpherePoly::coordinate(2, 0));
    let inv = series_log(&sym("|xi|^2; 1", 2), 2, prec()).unwrap();
    let r = symbol_product(&a, &inv).unwrap();
    assert_eq!(
        r.component(deg(-3), 0).exact.entry(0),
        &SpherePoly::coordinate(2, 0)
    );
}

#[test]
fn finite_parts_and_residues() {
    assert!(finite_part(&radial(1, -1)).exact_eq(&pi_over((1, 2), -1)));
    assert!(finite_part(&radial(1, -2)).exact_eq(&pi_over((2, 1), -1)));
    assert!(finite_part(&radial(1, 0)).is_exact_zero());

    let e = radius_expansion(&radial(1, -1), 4);
    assert!(e.constant.exact_eq(&pi_over((1, 2), -1)));
    assert!(e.log_coefficient.exact_eq(&pi_over((1, 1), -1)));
    let e = radius_expansion(&radial(1, 0), 4);
    assert!(e.powers[0].1.exact_eq(&pi_over((1, 1), -1)));
    assert!(e.constant.is_exact_zero());
    assert!(finite_part_by_radius(&radial(2, -2), 4).exact_eq(&finite_part(&radial(2, -2))));

    assert!(residue_density(&radial(1, -1)).exact_eq(&pi_over((1, 1), -1)));
    assert!(residue_density(&radial(2, -2)).exact_eq(&pi_over((1, 2), -1)));
    let half = ClassicalSymbol::radial(1, Degree::new(-1, 2), Rational::from(1));
    assert!(residue_density(&half).is_exact_zero());
}

#[test]
fn log_residues() {
    let model = series_log(&sym("|xi|^2; 1", 1), 2, prec()).unwrap();
    assert!(residue0_log(&radial(1, -1), &model)
        .unwrap()
        .is_exact_zero());

    let log4 = series_log(&sym("4*|xi|^2", 1), 2, prec()).unwrap();
    let v = residue0_log(&radial(1, -1), &log4).unwrap();
    assert!(v.agrees_with(&(&ln(4) * &pi_over((1, 1), -1)), 1e-45));

    // even-even a of order 0 in n = 3, even-even P of order 4
    let a = sym("1; xi1^2/|xi|^2; xi3^4/|xi|^6", 3);
    assert_eq!(parity_class(&a), ParityClass::EvenEven);
    let logp = series_log(&sym("|xi|^4; xi2^3; 3", 3), 4, prec()).unwrap();
    assert!(residue0_log(&a, &logp).unwrap().is_zero_within_bound());
}

#[test]
fn parity() {
    assert_eq!(parity_class(&radial(1, -1)), ParityClass::EvenOdd);
    assert_eq!(parity_class(&sym("|xi|^2", 3)), ParityClass::EvenEven);
    assert_eq!(
        parity_class(&sym("|xi|^2; xi1*|xi|", 2)),
        ParityClass::Neither
    );
}

#[test]
fn resolvent_symbols() {
    let r = resolvent_symbol(&sym("|xi|^2", 1), 1, 1).unwrap();
    assert_eq!(r.terms.len(), 1);
    let r = resolvent_symbol(&sym("|xi|^2; 1", 1), 1, 3).unwrap();
    let shape: Vec<(u32, Rational)> = r
        .terms
        .iter()
        .map(|t| (t.power, constant_of(t.angular.entry(0))))
        .collect();
    assert_eq!(
        shape,
        vec![
            (1, Rational::from(1)),
            (2, Rational::from(-1)),
            (3, Rational::from(1))
        ]
    );
    let r = resolvent_symbol(&sym("|xi|^2", 1), 2, 1).unwrap();
    assert_eq!(r.terms[0].power, 2);
    assert!(resolvent_symbol(&sym("|xi|^2", 1), 1, 0).is_err());
    assert!(matches!(
        resolvent_symbol(&sym("xi1*|xi|", 2), 1, 1),
        Err(Error::NonRadialLeading)
    ));
}

#[test]
fn model_expansions() {
    let e = model_trace_expansion(&radial(1, 0), 2, 1, None, prec()).unwrap();
    assert!(e
        .coefficient(Degree::new(-1, 2), 0)
        .exact_eq(&ScalarValue::ratio(1, 2)));
    assert!(e.coefficient(deg(-1), 0).is_exact_zero());

    let e = model_trace_expansion(&radial(1, -1), 2, 1, None, prec()).unwrap();
    let (l, c) = coefficient_of_inverse_lambda(&e);
    assert!(l.exact_eq(&pi_over((1, 2), -1)));
    assert!(c.exact_eq(&pi_over((1, 2), -1)));
    assert!(e.provenance(deg(-1), 1).contains(&Provenance::Log));

    let e = model_trace_expansion(&radial(1, -2), 4, 1, None, prec()).unwrap();
    assert!(coefficient_of_inverse_lambda(&e)
        .1
        .exact_eq(&pi_over((2, 1), -1)));

    assert!(matches!(
        model_trace_expansion(&radial(1, 1), 2, 1, None, prec()),
        Err(Error::ModelPrecondition { .. })
    ));
}

#[test]
fn inverse_lambda_coefficients() {
    let empty = AsymptoticExpansion::new(1, deg(-3));
    let (l, c) = coefficient_of_inverse_lambda(&empty);
    assert!(l.is_exact_zero() && c.is_exact_zero());

    let b = ScalarValue::ratio(7, 3);
    let mut e = AsymptoticExpansion::new(1, deg(-3));
    e.add_term(deg(-1), 1, ScalarValue::one(), Provenance::Synthetic);
    e.add_term(deg(-1), 0, b.clone(), Provenance::Synthetic);
    let (l, c) = coefficient_of_inverse_lambda(&e.raise_power(1));
    assert!(l.exact_eq(&ScalarValue::one()));
    assert!(c.exact_eq(&(&b - &ScalarValue::one())));
}

#[test]
fn difference_coefficients() {
    let a = radial(1, -1);
    let p = sym("4*|xi|^2", 1);
    let p1 = sym("|xi|^2", 1);
    assert!(difference_coefficient(&a, &p, &p, 1, prec())
        .unwrap()
        .is_zero_within_bound());
    let expect = (&ln(4) * &pi_over((1, 1), -1)).scale(&Rational::from((-1, 2)));
    for big_n in 1..=3 {
        let v = difference_coefficient(&a, &p, &p1, big_n, prec()).unwrap();
        assert!(v.agrees_with(&expect, 1e-40));
    }
    let half = ClassicalSymbol::radial(1, Degree::new(-1, 2), Rational::from(1));
    assert!(difference_coefficient(&half, &p, &p1, 1, prec())
        .unwrap()
        .is_exact_zero());
    assert!(matches!(
        difference_coefficient(&a, &p, &sym("|xi|^4", 1), 1, prec()),
        Err(Error::OrderMismatch(..))
    ));
}

#[test]
fn trace_defects() {
    let a = radial(1, -1);
    let p = sym("|xi|^2; 1", 1);
    assert!(trace_defect(&a, &p, &p, prec())
        .unwrap()
        .is_zero_within_bound());

    let q = sym("|xi|^4; 1", 1);
    let d = trace_defect(&a, &p, &q, prec()).unwrap();
    let via_c0 = &c0(&a, &p, prec()).unwrap() - &c0(&a, &q, prec()).unwrap();
    assert!(d.agrees_with(&via_c0, 1e-40));

    let squared = sym("|xi|^4; 2*|xi|^2; 1", 1);
    assert!(trace_defect(&a, &p, &squared, prec())
        .unwrap()
        .is_zero_within_bound());
    let a2 = sym("1/|xi|; xi1/|xi|^2", 1);
    assert!(trace_defect(&a2, &p, &squared, prec())
        .unwrap()
        .is_zero_within_bound());
}

#[test]
fn basic_coefficients() {
    let smoothing = radial(1, -2);
    for p in ["|xi|^2; 1", "3*|xi|^4; xi1^3; 2"] {
        assert!(c0(&smoothing, &sym(p, 1), prec())
            .unwrap()
            .exact_eq(&finite_part(&smoothing)));
    }
    let a = sym("1; xi1^2/|xi|^2", 3);
    let p = sym("|xi|^2; 1", 3);
    assert!(c0(&a, &p, prec())
        .unwrap()
        .agrees_with(&finite_part(&a), 1e-45));

    let a = radial(1, -1);
    let d =
        &c0(&a, &sym("4*|xi|^2", 1), prec()).unwrap() - &c0(&a, &sym("|xi|^2", 1), prec()).unwrap();
    let expect = (&ln(4) * &pi_over((1, 1), -1)).scale(&Rational::from((-1, 2)));
    assert!(d.agrees_with(&expect, 1e-40));
}

#[test]
fn laurent_arithmetic() {
    let z = Degree::from_integer(0);
    let s = LaurentSeries::monomial(z, 1, ScalarValue::one(), 6);
    let inv = LaurentSeries::monomial(z, -1, ScalarValue::one(), 6);
    assert!(inv.mul(&s).unwrap().coeff(0).exact_eq(&ScalarValue::one()));

    let b = ScalarValue::ratio(2, 5);
    let a = ScalarValue::ratio(3, 7);
    let f = LaurentSeries::from_coeffs(z, [(-2, ScalarValue::one()), (-1, b.clone())], 0);
    let g = LaurentSeries::from_coeffs(z, [(1, ScalarValue::one()), (2, a.clone())], 3);
    let fg = f.mul(&g).unwrap();
    assert!(fg.coeff(-1).exact_eq(&ScalarValue::one()));
    assert!(fg.coeff(0).exact_eq(&(&b + &a)));

    let zero = LaurentSeries::new(z, 6);
    assert!(f.add(&zero).unwrap().coeff(-1).exact_eq(&b));
    assert!(zero.mul(&f).unwrap().is_zero());
    let elsewhere = LaurentSeries::one(Degree::new(1, 2), 3);
    assert!(f.mul(&elsewhere).is_err());
}

#[test]
fn known_series_values() {
    let g1 = known_series(KnownSeries::GM(1), 4, prec()).unwrap();
    for k in 0..4 {
        assert!(g1.coeff(k).exact_eq(&ScalarValue::int(-1)));
    }
    let g3 = known_series(KnownSeries::GM(3), 4, prec()).unwrap();
    assert!(g3.coeff(1).exact_eq(&ScalarValue::ratio(-11, 6)));
    let sin = known_series(KnownSeries::SinFactor(0), 4, prec()).unwrap();
    assert!(sin.coeff(1).exact_eq(&ScalarValue::one()));
    assert!(sin.coeff(3).exact_eq(&pi_over((-1, 6), 2)));
    let gamma = known_series(KnownSeries::Gamma, 4, prec()).unwrap();
    assert!(gamma.coeff(-1).exact_eq(&ScalarValue::one()));
    assert!(gamma
        .coeff(0)
        .agrees_with(&(-ScalarValue::euler_gamma(prec())), 1e-45));
    assert!(KnownSeries::parse("bessel").is_err());
}

#[test]
fn transitions_at_zero() {
    let (cm1, c0v) =
        resolvent_to_zeta_at_zero(&ScalarValue::zero(), &ScalarValue::int(5), 1, prec()).unwrap();
    assert!(cm1.is_exact_zero() && c0v.exact_eq(&ScalarValue::int(5)));
    let (cm1, c0v) =
        resolvent_to_zeta_at_zero(&ScalarValue::one(), &ScalarValue::zero(), 3, prec()).unwrap();
    assert!(cm1.exact_eq(&ScalarValue::one()));
    assert!(c0v.exact_eq(&ScalarValue::ratio(3, 2)));
    let b = ScalarValue::ratio(4, 9);
    let (_, c0v) =
        resolvent_to_zeta_at_zero(&ScalarValue::one(), &(&b - &ScalarValue::one()), 2, prec())
            .unwrap();
    assert!(c0v.exact_eq(&b));
    assert_eq!(alpha(3), Rational::from((3, 2)));
}

#[test]
fn full_transitions() {
    // ζ(s) = (2π)^{−1}√π Γ(s−½)/Γ(s): simple pole at ½ with residue 1/(2π)
    let e = model_trace_expansion(&radial(1, 0), 2, 1, None, prec()).unwrap();
    let z = resolvent_to_zeta_full(&e, prec()).unwrap();
    let half = z.at(Degree::new(1, 2)).unwrap();
    assert!(half.c_triple.exact_eq(&pi_over((1, 2), -1)));
    assert!(z.poles.values().all(|p| p.c_prime.is_exact_zero()));

    let mut e = AsymptoticExpansion::new(2, deg(-4));
    e.add_term(deg(-2), 1, ScalarValue::ratio(1, 3), Provenance::Synthetic);
    e.add_term(deg(-2), 0, ScalarValue::ratio(5, 7), Provenance::Synthetic);
    let z = resolvent_to_zeta_full(&e, prec()).unwrap();
    let (cm1, c0v) = resolvent_to_zeta_at_zero(
        &ScalarValue::ratio(1, 3),
        &ScalarValue::ratio(5, 7),
        2,
        prec(),
    )
    .unwrap();
    assert!(z.at(deg(0)).unwrap().c_triple.agrees_with(&cm1, 1e-40));
    assert!(zeta_regular_value(&z).agrees_with(&c0v, 1e-40));

    let mut e1 = AsymptoticExpansion::new(1, deg(-6));
    e1.add_term(deg(-2), 1, ScalarValue::ratio(2, 3), Provenance::Synthetic);
    e1.add_term(deg(-2), 0, ScalarValue::ratio(-1, 4), Provenance::Synthetic);
    let z1 = resolvent_to_zeta_full(&e1, prec()).unwrap();
    let z2 = resolvent_to_zeta_full(&e1.raise_power(1), prec()).unwrap();
    let (p1, p2) = (z1.at(deg(-1)).unwrap(), z2.at(deg(-1)).unwrap());
    for (x, y) in [
        (&p1.c_prime, &p2.c_prime),
        (&p1.c_second, &p2.c_second),
        (&p1.c_triple, &p2.c_triple),
    ] {
        assert!(x.agrees_with(y, 1e-40), "{x} vs {y}");
    }
}

#[test]
fn regular_values() {
    let mut e = AsymptoticExpansion::new(1, deg(-3));
    e.add_term(deg(-1), 0, ScalarValue::ratio(9, 4), Provenance::Synthetic);
    let v = zeta_regular_value(&resolvent_to_zeta_full(&e, prec()).unwrap());
    assert!(v.agrees_with(&ScalarValue::ratio(9, 4), 1e-45));

    let a = radial(1, -2);
    for m in [2, 4] {
        let e = model_trace_expansion(&a, m, 2, None, prec()).unwrap();
        let v = zeta_regular_value(&resolvent_to_zeta_full(&e, prec()).unwrap());
        assert!(v.agrees_with(&pi_over((2, 1), -1), 1e-40));
    }
    let empty = resolvent_to_zeta_full(&AsymptoticExpansion::new(1, deg(-3)), prec()).unwrap();
    assert!(zeta_regular_value(&empty).is_exact_zero());
}
