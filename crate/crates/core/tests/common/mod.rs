#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rug::Rational;
use tracecoef_core::symbol::deg;
use tracecoef_core::{AngularPoly, ClassicalSymbol, Degree, HomogeneousTerm, SpherePoly};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut StdRng) -> Rational {
    let mut num: i64 = rng.gen_range(-5..=5);
    if num == 0 {
        num = 1;
    }
    let den: i64 = rng.gen_range(1..=4);
    Rational::from((num, den))
}

/// Random polynomial of total degree ≤ `max_degree` with up to `terms` monomials.
pub fn sphere_poly(rng: &mut StdRng, n: usize, max_degree: u32, terms: usize) -> SpherePoly {
    let mut out = SpherePoly::zero(n);
    for _ in 0..rng.gen_range(1..=terms) {
        let total = rng.gen_range(0..=max_degree);
        let mut e = vec![0u32; n];
        for _ in 0..total {
            e[rng.gen_range(0..n)] += 1;
        }
        out = out.add(&SpherePoly::monomial(n, e, small_rational(rng)));
    }
    if out.is_zero() {
        SpherePoly::one(n)
    } else {
        out
    }
}

pub fn angular(rng: &mut StdRng, n: usize, msize: usize, max_degree: u32) -> AngularPoly {
    AngularPoly::new(
        (0..msize)
            .map(|_| sphere_poly(rng, n, max_degree, 3))
            .collect(),
    )
}

/// Angular part whose every monomial has the parity of `even`.
pub fn parity_angular(rng: &mut StdRng, n: usize, even: bool) -> SpherePoly {
    let p = sphere_poly(rng, n, 4, 3);
    let (e, o) = p.parity_split();
    let q = if even { e } else { o };
    if q.is_zero() {
        if even {
            SpherePoly::one(n)
        } else {
            SpherePoly::coordinate(n, 0)
        }
    } else {
        q
    }
}

/// Random symbol of order `order` with terms at order, order−1, … (gaps allowed).
pub fn symbol(
    rng: &mut StdRng,
    n: usize,
    msize: usize,
    order: Degree,
    count: usize,
) -> ClassicalSymbol {
    let mut terms = vec![HomogeneousTerm::new(order, angular(rng, n, msize, 3))];
    for j in 1..count as i64 {
        if rng.gen_bool(0.75) {
            terms.push(HomogeneousTerm::new(
                order - deg(j),
                angular(rng, n, msize, 3),
            ));
        }
    }
    ClassicalSymbol::new(n, msize, Some(order), terms).unwrap()
}

/// Radial-leading elliptic symbol c|ξ|^m + lower-order terms.
pub fn elliptic(rng: &mut StdRng, n: usize, m: i64, lower: usize) -> ClassicalSymbol {
    let c = Rational::from(rng.gen_range(1..=4));
    let mut terms = vec![HomogeneousTerm::new(deg(m), AngularPoly::constant(n, 1, c))];
    for j in 1..=lower as i64 {
        if rng.gen_bool(0.7) {
            let p = sphere_poly(rng, n, 2, 2).scale(&Rational::from((1, 2)));
            terms.push(HomogeneousTerm::new(deg(m - j), AngularPoly::scalar(p)));
        }
    }
    ClassicalSymbol::scalar(n, terms).unwrap()
}

pub fn random_direction(rng: &mut StdRng, n: usize, radius: f64) -> Vec<f64> {
    use rand_distr::StandardNormal;
    let v: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x * radius / r).collect()
}

pub fn pi_over(q: (i64, i64), k: i32) -> tracecoef_core::ScalarValue {
    tracecoef_core::ScalarValue::pi_multiple(Rational::from(q), k)
}
