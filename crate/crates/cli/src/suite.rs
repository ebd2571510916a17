//! The acceptance matrix behind `tracecoef verify`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rug::Rational;
use serde::Serialize;
use tracecoef_core::densities::{
    finite_part, finite_part_by_radius, parity_class, residue0_log, residue_density, ParityClass,
};
use tracecoef_core::laurent::{
    alpha, resolvent_to_zeta_at_zero, resolvent_to_zeta_at_zero_shifted, resolvent_to_zeta_full,
};
use tracecoef_core::parse::parse_symbol;
use tracecoef_core::resolvent::{
    c0, coefficient_of_inverse_lambda, difference_coefficient, log_truncation, model_operator,
    model_trace_expansion, trace_defect, AsymptoticExpansion, Provenance,
};
use tracecoef_core::symbol::{deg, series_log};
use tracecoef_core::{
    AngularPoly, ClassicalSymbol, Degree, HomogeneousTerm, Precision, ScalarValue, SpherePoly,
};
use tracecoef_oracle::{
    fit_expansion, fit_radius_constant, lattice_trace, model_ladder, numeric_trace, FitOptions,
    FitStatus, QuadOptions, RaySampler,
};

use crate::error::CliError;

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    /// criterion keys or ids to run; empty runs everything
    pub only: Vec<String>,
    /// perturb the harmonic-number constant (negative control for the alpha criterion)
    pub corrupt_alpha: bool,
    pub precision: Precision,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub key: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// largest observed error (0 for exact agreement)
    pub max_error: f64,
    pub tolerance: f64,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} [{}] {}: {} cases, max error {:.2e} (tol {:.0e}), {:.2}s of {}s{}",
            self.id,
            self.key,
            if self.passed { "PASS" } else { "FAIL" },
            self.cases,
            self.max_error,
            self.tolerance,
            self.seconds,
            self.budget_seconds,
            if self.detail.is_empty() {
                String::new()
            } else {
                format!(" ({})", self.detail)
            }
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Outcome of the checks inside one criterion.
#[derive(Default)]
struct Tally {
    cases: usize,
    max_error: f64,
    failures: Vec<String>,
}

impl Tally {
    fn exact(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.max_error = self.max_error.max(1.0);
            self.failures.push(what());
        }
    }

    fn close(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.max_error = self.max_error.max(err);
        if err > tol {
            self.failures.push(what());
        }
    }

    fn error(&mut self, what: String) {
        self.cases += 1;
        self.max_error = f64::INFINITY;
        self.failures.push(what);
    }
}

struct CriterionDef {
    id: u32,
    key: &'static str,
    title: &'static str,
    tolerance: f64,
    budget: f64,
    run: fn(&SuiteOptions, &mut Tally),
}

const CRITERIA: [CriterionDef; 8] = [
    CriterionDef {
        id: 1,
        key: "alpha",
        title: "harmonic-number shift: (C-1, C0) independent of N",
        tolerance: 0.0,
        budget: 1.0,
        run: alpha_shift,
    },
    CriterionDef {
        id: 2,
        key: "finite-part",
        title: "(-lambda)^-1 coefficient equals the finite part",
        tolerance: 0.0,
        budget: 5.0,
        run: inverse_lambda,
    },
    CriterionDef {
        id: 3,
        key: "residue",
        title: "log coefficient equals res/m",
        tolerance: 0.0,
        budget: 5.0,
        run: residues,
    },
    CriterionDef {
        id: 4,
        key: "defect",
        title: "trace defect, cocycle and scaling",
        tolerance: 1e-10,
        budget: 10.0,
        run: defects,
    },
    CriterionDef {
        id: 5,
        key: "oracle",
        title: "numeric fits and lattice sums",
        tolerance: 1e-6,
        budget: 120.0,
        run: oracle,
    },
    CriterionDef {
        id: 6,
        key: "parity",
        title: "parity classes kill the residue densities",
        tolerance: 0.0,
        budget: 5.0,
        run: parity,
    },
    CriterionDef {
        id: 7,
        key: "radius",
        title: "finite part by radius expansion",
        tolerance: 1e-8,
        budget: 30.0,
        run: radius,
    },
    CriterionDef {
        id: 8,
        key: "transition",
        title: "double-pole cross term",
        tolerance: 1e-40,
        budget: 1.0,
        run: transition,
    },
];

pub fn criterion_keys() -> Vec<&'static str> {
    CRITERIA.iter().map(|c| c.key).collect()
}

pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport, CliError> {
    for o in &opts.only {
        if !CRITERIA
            .iter()
            .any(|c| c.key == o || c.id.to_string() == *o)
        {
            return Err(CliError::Usage(format!(
                "unknown criterion '{o}'; expected one of {} or 1-8",
                criterion_keys().join(", ")
            )));
        }
    }
    let mut criteria = Vec::new();
    for c in &CRITERIA {
        if !opts.only.is_empty()
            && !opts
                .only
                .iter()
                .any(|o| c.key == o || c.id.to_string() == *o)
        {
            continue;
        }
        criteria.push(run_criterion(c, opts));
    }
    Ok(SuiteReport {
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

/// Run a single criterion by key.
pub fn run_one(key: &str, opts: &SuiteOptions) -> Option<CriterionResult> {
    CRITERIA
        .iter()
        .find(|c| c.key == key)
        .map(|c| run_criterion(c, opts))
}

fn run_criterion(c: &CriterionDef, opts: &SuiteOptions) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::default();
    (c.run)(opts, &mut t);
    let seconds = start.elapsed().as_secs_f64();
    let mut detail = t
        .failures
        .iter()
        .take(3)
        .cloned()
        .collect::<Vec<_>>()
        .join("; ");
    if t.failures.len() > 3 {
        detail.push_str(&format!("; {} more", t.failures.len() - 3));
    }
    if seconds > c.budget {
        if !detail.is_empty() {
            detail.push_str("; ");
        }
        detail.push_str("over runtime budget");
    }
    CriterionResult {
        id: c.id,
        key: c.key,
        title: c.title,
        passed: t.failures.is_empty() && t.cases > 0 && seconds <= c.budget,
        cases: t.cases,
        max_error: t.max_error,
        tolerance: c.tolerance,
        seconds,
        budget_seconds: c.budget,
        detail,
    }
}

fn sym(text: &str, n: usize) -> ClassicalSymbol {
    parse_symbol(text, n, 1).expect("corpus symbol parses")
}

fn rel(x: &ScalarValue, y: &ScalarValue) -> f64 {
    let (a, b) = (x.to_f64(), y.to_f64());
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

// random symbols with small rational coefficients

fn small_rational(r: &mut StdRng) -> Rational {
    let mut num: i64 = r.gen_range(-5..=5);
    if num == 0 {
        num = 1;
    }
    Rational::from((num, r.gen_range(1..=4i64)))
}

fn sphere_poly(r: &mut StdRng, n: usize, max_degree: u32, terms: usize) -> SpherePoly {
    let mut out = SpherePoly::zero(n);
    let count = r.gen_range(1..=terms);
    for _ in 0..count {
        let total = r.gen_range(0..=max_degree);
        let mut e = vec![0u32; n];
        for _ in 0..total {
            e[r.gen_range(0..n)] += 1;
        }
        let c = small_rational(r);
        out = out.add(&SpherePoly::monomial(n, e, c));
    }
    if out.is_zero() {
        SpherePoly::one(n)
    } else {
        out
    }
}

fn random_symbol(
    r: &mut StdRng,
    n: usize,
    msize: usize,
    order: Degree,
    count: usize,
) -> ClassicalSymbol {
    let angular =
        |r: &mut StdRng| AngularPoly::new((0..msize).map(|_| sphere_poly(r, n, 3, 3)).collect());
    let mut terms = vec![HomogeneousTerm::new(order, angular(r))];
    for j in 1..count as i64 {
        if r.gen_bool(0.75) {
            terms.push(HomogeneousTerm::new(order - deg(j), angular(r)));
        }
    }
    ClassicalSymbol::new(n, msize, Some(order), terms).expect("random symbol is valid")
}

fn random_elliptic(r: &mut StdRng, n: usize, m: i64, lower: usize) -> ClassicalSymbol {
    let c = Rational::from(r.gen_range(1..=4));
    let mut terms = vec![HomogeneousTerm::new(deg(m), AngularPoly::constant(n, 1, c))];
    for j in 1..=lower as i64 {
        if r.gen_bool(0.7) {
            let p = sphere_poly(r, n, 2, 2).scale(&Rational::from((1, 2)));
            terms.push(HomogeneousTerm::new(deg(m - j), AngularPoly::scalar(p)));
        }
    }
    ClassicalSymbol::scalar(n, terms).expect("elliptic symbol is valid")
}

/// Half-integral order σ with σ + n < m.
fn model_order(r: &mut StdRng, n: usize, m: i64) -> Degree {
    Degree::new(r.gen_range(-6..=2 * (m - n as i64) - 1), 2)
}

fn alpha_shift(opts: &SuiteOptions, t: &mut Tally) {
    let prec = opts.precision;
    t.exact(alpha(2) == 1 && alpha(3) == (3, 2), || {
        "alpha_2, alpha_3".into()
    });
    for (n, text) in [(1, "1/|xi|"), (2, "xi1^2/|xi|^4")] {
        let a = sym(text, n);
        for m in [2u32, 4] {
            let e1 = match model_trace_expansion(&a, m, 1, Some(deg(-6)), prec) {
                Ok(e) => e,
                Err(e) => return t.error(format!("{text}: {e}")),
            };
            let mut first: Option<(ScalarValue, ScalarValue)> = None;
            for big_n in 1..=3u32 {
                let e = e1.raise_power(big_n - 1);
                let at = -deg(big_n as i64);
                let (la, b) = (e.coefficient(at, 1), e.coefficient(at, 0));
                let pair = if opts.corrupt_alpha && big_n >= 2 {
                    resolvent_to_zeta_at_zero_shifted(&la, &b, big_n, &Rational::from((1, 7)), prec)
                } else {
                    resolvent_to_zeta_at_zero(&la, &b, big_n, prec)
                };
                let (cm1, c0v) = match pair {
                    Ok(p) => p,
                    Err(e) => return t.error(format!("{text} N={big_n}: {e}")),
                };
                t.exact(cm1.is_exact() && c0v.is_exact(), || {
                    format!("{text} m={m} N={big_n}: not exact")
                });
                match &first {
                    None => {
                        let fp = finite_part(&a);
                        let res = residue_density(&a).scale(&Rational::from((1, m)));
                        t.exact(c0v.exact_eq(&fp), || {
                            format!("{text} m={m}: C0 = {c0v}, TR = {fp}")
                        });
                        t.exact(cm1.exact_eq(&res), || {
                            format!("{text} m={m}: C-1 = {cm1}, res/m = {res}")
                        });
                        first = Some((cm1, c0v));
                    }
                    Some((f1, f0)) => {
                        t.exact(cm1.exact_eq(f1) && c0v.exact_eq(f0), || {
                            format!(
                                "{text} m={m}: N={big_n} gives ({cm1}, {c0v}) vs N=1 ({f1}, {f0})"
                            )
                        });
                    }
                }
            }
        }
    }
}

fn inverse_lambda(opts: &SuiteOptions, t: &mut Tally) {
    let mut r = StdRng::seed_from_u64(0x5eed_0002);
    for i in 0..12 {
        let n = 1 + i % 2;
        let m: i64 = if (i / 2) % 2 == 0 { 2 } else { 4 };
        let msize = r.gen_range(1..=2);
        let order = model_order(&mut r, n, m);
        let a = random_symbol(&mut r, n, msize, order, 4);
        match model_trace_expansion(&a, m as u32, 1, None, opts.precision) {
            Ok(e) => {
                let (_, c) = coefficient_of_inverse_lambda(&e);
                let fp = finite_part(&a);
                t.exact(c.is_exact() && c.exact_eq(&fp), || {
                    format!("case {i}: {c} vs {fp}")
                });
            }
            Err(e) => t.error(format!("case {i}: {e}")),
        }
    }
}

fn residues(opts: &SuiteOptions, t: &mut Tally) {
    let mut r = StdRng::seed_from_u64(0x5eed_0003);
    for i in 0..10 {
        let n = 1 + i % 2;
        // σ + n < 2 so that both m = 2 and m = 4 are admissible
        let order = model_order(&mut r, n, 2);
        let a = random_symbol(&mut r, n, 1, order, 4);
        let res = residue_density(&a);
        let shifted = a.with_extension_shift(2);
        for m in [2u32, 4] {
            let expect = res.scale(&Rational::from((1, m)));
            for big_n in 1..=3 {
                for (label, s) in [("K", &a), ("K+2", &shifted)] {
                    match model_trace_expansion(s, m, big_n, None, opts.precision) {
                        Ok(e) => {
                            let (l, _) = coefficient_of_inverse_lambda(&e);
                            t.exact(l.is_exact() && l.exact_eq(&expect), || {
                                format!("case {i} m={m} N={big_n} {label}: {l} vs {expect}")
                            });
                        }
                        Err(e) => t.error(format!("case {i}: {e}")),
                    }
                }
            }
        }
    }
}

fn defects(opts: &SuiteOptions, t: &mut Tally) {
    let prec = opts.precision;
    let tol = 1e-10;
    let mut r = StdRng::seed_from_u64(0x5eed_0004);
    for i in 0..8 {
        let n = 1 + i % 2;
        let m = r.gen_range(1..=3);
        let gap = r.gen_range(0..=2);
        let a = random_symbol(&mut r, n, 1, deg(gap - n as i64), 3);
        let p = random_elliptic(&mut r, n, m, 3);
        let p2 = random_elliptic(&mut r, n, m, 3);
        let big_n = r.gen_range(1..=3);
        match (
            difference_coefficient(&a, &p, &p2, big_n, prec),
            trace_defect(&a, &p, &p2, prec),
        ) {
            (Ok(d), Ok(v)) => t.close(rel(&d, &v), tol, || format!("pair {i}: {d} vs {v}")),
            (Err(e), _) | (_, Err(e)) => t.error(format!("pair {i}: {e}")),
        }
    }
    for i in 0..8 {
        let n = 1 + i % 2;
        let order = deg(r.gen_range(0..=2) - n as i64);
        let a = random_symbol(&mut r, n, 1, order, 3);
        let ps: Vec<ClassicalSymbol> = (0..3)
            .map(|_| {
                let m = r.gen_range(1..=4);
                random_elliptic(&mut r, n, m, 3)
            })
            .collect();
        let d = |x: usize, y: usize| trace_defect(&a, &ps[x], &ps[y], prec);
        match (d(0, 2), d(0, 1), d(1, 2)) {
            (Ok(d13), Ok(d12), Ok(d23)) => {
                let sum = &d12 + &d23;
                t.close(rel(&d13, &sum), tol, || {
                    format!("triple {i}: {d13} vs {sum}")
                })
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => t.error(format!("triple {i}: {e}")),
        }
    }
    // C0(A, cP) − C0(A, P) = −(1/m) log c · res(A)
    for (i, c) in [(3, 1), (5, 2), (1, 4), (7, 3)].into_iter().enumerate() {
        let n = 1 + i % 2;
        let m = 2 * (1 + i as i64 % 2);
        let c = Rational::from(c);
        let mut a = random_symbol(&mut r, n, 1, deg(1 - n as i64), 3);
        a = a
            .add(&ClassicalSymbol::radial(
                n,
                deg(-(n as i64)),
                Rational::from(1),
            ))
            .unwrap();
        let p = random_elliptic(&mut r, n, m, 2);
        let res = residue_density(&a);
        let expect = match ScalarValue::ln_rational(&c, prec) {
            Some(l) => (&l * &res).scale(&Rational::from((-1, m))),
            None => return t.error(format!("log {c}")),
        };
        match (c0(&a, &p.scale(&c), prec), c0(&a, &p, prec)) {
            (Ok(x), Ok(y)) => {
                let got = &x - &y;
                t.close(rel(&got, &expect), tol, || {
                    format!("scaling by {c}: {got} vs {expect}")
                });
            }
            (Err(e), _) | (_, Err(e)) => t.error(format!("scaling by {c}: {e}")),
        }
    }
}

fn oracle(opts: &SuiteOptions, t: &mut Tally) {
    let tol = 1e-6;
    let quad = QuadOptions::default();
    let corpus = [
        (1, 2, "1"),
        (1, 2, "1/|xi|"),
        (1, 2, "|xi|^(1/2); xi1/|xi|^(3/2)"),
        (1, 4, "|xi|^2; 1/|xi|"),
        (1, 4, "xi1*|xi|; 1/|xi|^2"),
        (2, 2, "1/|xi|"),
        (2, 2, "1/|xi|^2"),
        (2, 2, "xi1^2/|xi|^3; 1/|xi|^3"),
        (2, 4, "1; xi1^2/|xi|^2"),
        (2, 4, "|xi|"),
        (2, 4, "|xi|^(-1/2)"),
    ];
    for (n, m, text) in corpus {
        let a = sym(text, n);
        let p = model_operator(n, m);
        for big_n in 1..=2u32 {
            let e = match model_trace_expansion(&a, m, big_n, None, opts.precision) {
                Ok(e) => e,
                Err(e) => {
                    t.error(format!("{text}: {e}"));
                    continue;
                }
            };
            let ladder = model_ladder(&a, m, big_n, 4);
            let sampler = RaySampler::for_ladder(PI / 4.0, ladder.len());
            let fitted = sampler
                .sample(|l| Ok(numeric_trace(&a, &p, big_n, l, &quad)?.value))
                .and_then(|s| fit_expansion(&s, &ladder, &FitOptions::default()));
            match fitted {
                Ok(mut report) => {
                    report.compare_with(&e, -deg(big_n as i64), tol);
                    let err = if report.status == FitStatus::Ok {
                        report.max_rel_error()
                    } else {
                        f64::INFINITY
                    };
                    t.close(err, tol, || {
                        format!(
                            "{text} n={n} m={m} N={big_n}: {:?}, max rel {:.1e}",
                            report.status,
                            report.max_rel_error()
                        )
                    });
                }
                Err(e) => t.error(format!("{text} n={n} m={m} N={big_n}: {e}")),
            }
        }
    }
    // lattice sums over ℤⁿ against (2π)ⁿ times the integral, for smooth symbols
    let lattice = [
        (1, "1", "|xi|^2; 1", 2u32),
        (2, "1", "|xi|^2; 1", 3),
        (2, "|xi|^2", "|xi|^4; 1", 2),
        (1, "1", "|xi|^4; 1", 1),
    ];
    for (n, a, p, big_n) in lattice {
        let (a, p) = (sym(a, n), sym(p, n));
        for tt in [1e3, 1e4] {
            let l = lattice_trace(&a, &p, big_n, -tt, 1e-7);
            let v = numeric_trace(&a, &p, big_n, Complex64::new(-tt, 0.0), &quad);
            match (l, v) {
                (Ok(l), Ok(v)) => {
                    let v = v.value.re * (2.0 * PI).powi(n as i32);
                    t.close((l.value - v).abs() / v.abs(), tol, || {
                        format!("lattice n={n} t={tt}: {} vs {v}", l.value)
                    });
                }
                (Err(e), _) => t.error(format!("lattice n={n} t={tt}: {e}")),
                (_, Err(e)) => t.error(format!("integral n={n} t={tt}: {e}")),
            }
        }
    }
}

fn parity_symbol(r: &mut StdRng, n: usize, order: i64, odd_shift: bool) -> ClassicalSymbol {
    let mut terms = Vec::new();
    for j in 0..4 {
        let d = order - j;
        // even-even: angular parity of d; even-odd: parity of d − 1
        let even = (d - i64::from(odd_shift)) % 2 == 0;
        let (e, o) = sphere_poly(r, n, 4, 3).parity_split();
        let q = if even { e } else { o };
        let q = if !q.is_zero() {
            q
        } else if even {
            SpherePoly::one(n)
        } else {
            SpherePoly::coordinate(n, 0)
        };
        terms.push(HomogeneousTerm::new(deg(d), AngularPoly::scalar(q)));
    }
    ClassicalSymbol::scalar(n, terms).expect("parity symbol is valid")
}

fn parity(opts: &SuiteOptions, t: &mut Tally) {
    let prec = opts.precision;
    let mut r = StdRng::seed_from_u64(0x5eed_0006);
    // (n, even-odd?)
    for (n, odd) in [
        (1, false),
        (3, false),
        (2, true),
        (1, false),
        (3, false),
        (2, true),
    ] {
        let order = r.gen_range(-(n as i64)..=1 - n as i64);
        let a = parity_symbol(&mut r, n, order, odd);
        let p = parity_symbol(&mut r, n, 2, false);
        // make p elliptic: replace its leading term by c|ξ|²
        let lead = HomogeneousTerm::new(
            deg(2),
            AngularPoly::constant(n, 1, Rational::from(r.gen_range(1..=3))),
        );
        let p = ClassicalSymbol::scalar(
            n,
            std::iter::once(lead)
                .chain(p.terms()[1..].iter().cloned())
                .collect(),
        )
        .expect("elliptic parity symbol");
        let class = if odd {
            ParityClass::EvenOdd
        } else {
            ParityClass::EvenEven
        };
        t.exact(parity_class(&a) == class, || {
            format!("n={n}: class {:?}", parity_class(&a))
        });
        t.exact(parity_class(&p) == ParityClass::EvenEven, || {
            format!("n={n}: p class")
        });
        let res = residue_density(&a);
        t.exact(res.is_exact_zero(), || format!("n={n}: res = {res}"));
        let logp = match series_log(&p, log_truncation(&a), prec) {
            Ok(l) => l,
            Err(e) => return t.error(format!("n={n}: {e}")),
        };
        match residue0_log(&a, &logp) {
            Ok(v) => t.exact(v.is_exact_zero(), || format!("n={n}: res0(a log p) = {v}")),
            Err(e) => t.error(format!("n={n}: {e}")),
        }
        match c0(&a, &p, prec) {
            Ok(v) => {
                let fp = finite_part(&a);
                t.exact(v.exact_eq(&fp), || format!("n={n}: C0 = {v}, TR = {fp}"))
            }
            Err(e) => t.error(format!("n={n}: {e}")),
        }
        // negative control: an even angular part at degree −n breaks the class
        let broken = a
            .add(&ClassicalSymbol::radial(
                n,
                deg(-(n as i64)),
                Rational::from(1),
            ))
            .expect("control symbol");
        t.exact(parity_class(&broken) == ParityClass::Neither, || {
            format!("n={n}: control class")
        });
        t.exact(!residue_density(&broken).is_zero_within_bound(), || {
            format!("n={n}: control residue vanished")
        });
    }
}

fn radius(_opts: &SuiteOptions, t: &mut Tally) {
    let tol = 1e-8;
    let corpus = [
        (1, "1/|xi|"),
        (1, "1"),
        (1, "1/|xi|^2"),
        (1, "|xi|; 3; xi1/|xi|^2"),
        (1, "|xi|^(1/2); 2/|xi|^(1/2)"),
        (2, "1/|xi|^2"),
        (2, "xi1^2/|xi|^2; xi2/|xi|^2; 1/|xi|^3"),
        (2, "|xi|^(-1/2); 1/|xi|^(5/2)"),
        (2, "xi1^2*xi2^2/|xi|^3; 5/|xi|^2"),
    ];
    for (n, text) in corpus {
        let a = sym(text, n);
        let fp = finite_part(&a);
        let by_r = finite_part_by_radius(&a, a.terms().len() + 1);
        t.exact(fp.exact_eq(&by_r), || format!("{text}: {fp} vs {by_r}"));
        match fit_radius_constant(&a, 24) {
            Ok(f) => {
                let v = fp.to_f64();
                t.close((f.constant - v).abs() / v.abs().max(1.0), tol, || {
                    format!("{text}: fitted {} vs {v}", f.constant)
                });
            }
            Err(e) => t.error(format!("{text}: {e}")),
        }
    }
}

fn transition(opts: &SuiteOptions, t: &mut Tally) {
    let prec = opts.precision;
    let mut e = AsymptoticExpansion::new(1, deg(-4));
    e.add_term(deg(-2), 1, ScalarValue::one(), Provenance::Synthetic);
    let z = match resolvent_to_zeta_full(&e, prec) {
        Ok(z) => z,
        Err(err) => return t.error(err.to_string()),
    };
    let Some(pole) = z.at(deg(-1)) else {
        return t.error("no pole at s = -1".into());
    };
    let expect = &ScalarValue::one() - &ScalarValue::euler_gamma(prec);
    t.exact(!pole.c_second.is_zero_within_bound(), || {
        "c'' vanished".into()
    });
    t.close(rel(&pole.c_second, &expect), 1e-40, || {
        format!("c'' = {} vs 1 - gamma", pole.c_second)
    });
    t.close(rel(&pole.c_prime, &ScalarValue::one()), 1e-40, || {
        format!("c' = {}", pole.c_prime)
    });
    for k in 1..=2 {
        match resolvent_to_zeta_full(&e.raise_power(k), prec) {
            Ok(zk) => match zk.at(deg(-1)) {
                Some(q) => {
                    let err = rel(&q.c_prime, &pole.c_prime)
                        .max(rel(&q.c_second, &pole.c_second))
                        .max(rel(&q.c_triple, &pole.c_triple));
                    t.close(err, 1e-40, || format!("N={}: pole data differs", k + 1));
                }
                None => t.error(format!("N={}: no pole at s = -1", k + 1)),
            },
            Err(err) => t.error(format!("N={}: {err}", k + 1)),
        }
    }
}
