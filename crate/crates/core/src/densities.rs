//! Pointwise densities: finite-part integral, residue, log-residue, parity.

use num_traits::Zero;
use rug::Rational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::ScalarValue;
use crate::symbol::{
    deg, is_natural, symbol_product, to_rug, ClassicalSymbol, Degree, HomogeneousTerm,
    LogPolyhomSymbol,
};

/// (2π)^{−n}.
pub fn fourier_normalization(n: usize) -> ScalarValue {
    let q = Rational::from((1, rug::Integer::from(1) << n as u32));
    ScalarValue::pi_multiple(q, -(n as i32))
}

/// (2π)^{−n} ∫_{S^{n−1}} tr angular dS for one term.
pub fn angular_weight(t: &HomogeneousTerm) -> ScalarValue {
    let n = t.dimension();
    &fourier_normalization(n) * &t.angular.trace_moment()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// d > −n: ∫_{|ξ|≤1} (a − a^h)
    Above,
    /// d = −n: ∫_{|ξ|≤1} a
    Critical,
    /// d < −n: ∫ a over all of ℝⁿ
    Below,
}

impl Branch {
    pub fn of(d: Degree, n: usize) -> Branch {
        let s = d + deg(n as i64);
        if s > Degree::zero() {
            Branch::Above
        } else if s.is_zero() {
            Branch::Critical
        } else {
            Branch::Below
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TermContribution {
    #[serde(serialize_with = "ser_degree")]
    pub degree: Degree,
    pub branch: Branch,
    pub extension: u32,
    pub value: ScalarValue,
}

pub fn ser_degree<S: serde::Serializer>(d: &Degree, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&d.to_string())
}

/// Contribution of one term to TR_x.
pub fn term_finite_part(t: &HomogeneousTerm) -> TermContribution {
    let n = t.dimension();
    let w = angular_weight(t);
    let s = t.degree + deg(n as i64);
    let k = deg(t.extension as i64);
    let branch = Branch::of(t.degree, n);
    let radial = match branch {
        Branch::Critical => Degree::new(1, t.extension as i64),
        _ => Degree::from_integer(1) / (s + k) - Degree::from_integer(1) / s,
    };
    TermContribution {
        degree: t.degree,
        branch,
        extension: t.extension,
        value: w.scale(&to_rug(radial)),
    }
}

pub fn finite_part_terms(a: &ClassicalSymbol) -> Vec<TermContribution> {
    a.terms().iter().map(term_finite_part).collect()
}

/// TR_x(A): the Hadamard finite part of ∫ tr a(ξ) đξ.
pub fn finite_part(a: &ClassicalSymbol) -> ScalarValue {
    ScalarValue::sum(finite_part_terms(a).iter().map(|c| &c.value))
}

/// ∫_{|ξ|≤R} tr a đξ = Σ c_s R^s + c_log log R + c_0 for R ≥ 1.
#[derive(Clone, Debug, Serialize)]
pub struct RadiusExpansion {
    pub powers: Vec<(String, ScalarValue)>,
    pub log_coefficient: ScalarValue,
    pub constant: ScalarValue,
}

/// Exact large-R expansion of the ball integral, keeping at most `orders`
/// power terms (the constant and log terms are always kept).
pub fn radius_expansion(a: &ClassicalSymbol, orders: usize) -> RadiusExpansion {
    let n = a.dimension();
    let mut powers: Vec<(Degree, ScalarValue)> = Vec::new();
    let mut log_coefficient = ScalarValue::zero();
    let mut constant = ScalarValue::zero();
    for t in a.terms() {
        let w = angular_weight(t);
        let s = t.degree + deg(n as i64);
        let k = deg(t.extension as i64);
        // unit ball: ∫_0^1 r^{d+K+n−1} dr
        let inner = w.scale(&to_rug(Degree::from_integer(1) / (s + k)));
        constant = &constant + &inner;
        if s.is_zero() {
            // ∫_1^R r^{−1} dr = log R
            log_coefficient = &log_coefficient + &w;
        } else {
            // ∫_1^R r^{s−1} dr = (R^s − 1)/s
            let c = w.scale(&to_rug(Degree::from_integer(1) / s));
            constant = &constant - &c;
            match powers.iter_mut().find(|(e, _)| *e == s) {
                Some((_, v)) => *v = &*v + &c,
                None => powers.push((s, c)),
            }
        }
    }
    powers.sort_by_key(|x| std::cmp::Reverse(x.0));
    powers.truncate(orders);
    RadiusExpansion {
        powers: powers
            .into_iter()
            .map(|(e, v)| (e.to_string(), v))
            .collect(),
        log_coefficient,
        constant,
    }
}

/// Constant term of the large-R expansion of ∫_{|ξ|≤R} tr a đξ.
pub fn finite_part_by_radius(a: &ClassicalSymbol, orders: usize) -> ScalarValue {
    radius_expansion(a, orders).constant
}

/// res_x(A) = ∫_{|ξ|=1} tr a_{−n} đS.
pub fn residue_density(a: &ClassicalSymbol) -> ScalarValue {
    let n = a.dimension();
    match a.term_at(-deg(n as i64)) {
        Some(t) => angular_weight(t),
        None => ScalarValue::zero(),
    }
}

/// res_{x,0}(A log P) = ∫_{|ξ|=1} tr r_{−n,0} đS with r the symbol of a·logp.
pub fn residue0_log(a: &ClassicalSymbol, logp: &LogPolyhomSymbol) -> Result<ScalarValue> {
    let n = a.dimension();
    if n != logp.dimension() {
        return Err(Error::DimensionMismatch(n, logp.dimension()));
    }
    if a.matrix_size() != logp.matrix_size() {
        return Err(Error::MatrixSize {
            expected: a.matrix_size(),
            found: logp.matrix_size(),
        });
    }
    let target = -deg(n as i64);
    // product degrees are σ_a + σ_r − j; −n is reachable only if this is natural
    let gap = a.order() + logp.order() - target;
    if !is_natural(gap) || a.is_zero() {
        return Ok(ScalarValue::zero());
    }
    let r = symbol_product(a, logp)?;
    if r.cutoff() > target {
        return Err(Error::TruncationTooCoarse {
            needed: target,
            have: r.cutoff(),
        });
    }
    let comp = r.residue_component();
    Ok(&fourier_normalization(n) * &comp.trace_moment())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParityClass {
    EvenEven,
    EvenOdd,
    Neither,
}

/// Classify by a_{σ−j}(−ξ) = (−1)^{σ−j} a_{σ−j}(ξ) (even-even) or with the
/// exponent σ−j−1 (even-odd).
pub fn parity_class(a: &ClassicalSymbol) -> ParityClass {
    if !a.order().is_integer() {
        return ParityClass::Neither;
    }
    let ee = a.terms().iter().all(|t| {
        let d = t.degree.to_integer();
        t.angular.parity().matches_sign(d % 2 == 0)
    });
    if ee {
        return ParityClass::EvenEven;
    }
    let eo = a.terms().iter().all(|t| {
        let d = t.degree.to_integer();
        t.angular.parity().matches_sign((d - 1) % 2 == 0)
    });
    if eo {
        ParityClass::EvenOdd
    } else {
        ParityClass::Neither
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub n: usize,
    pub matrix_size: usize,
    #[serde(serialize_with = "ser_degree")]
    pub order: Degree,
    pub tr_x: ScalarValue,
    pub res_x: ScalarValue,
    pub res_x0_log: Option<ScalarValue>,
    pub parity: ParityClass,
    pub terms: Vec<TermContribution>,
}

pub fn density_report(
    a: &ClassicalSymbol,
    logp: Option<&LogPolyhomSymbol>,
) -> Result<DensityReport> {
    let terms = finite_part_terms(a);
    let tr_x = ScalarValue::sum(terms.iter().map(|c| &c.value));
    let res_x0_log = match logp {
        Some(l) => Some(residue0_log(a, l)?),
        None => None,
    };
    Ok(DensityReport {
        n: a.dimension(),
        matrix_size: a.matrix_size(),
        order: a.order(),
        tr_x,
        res_x: residue_density(a),
        res_x0_log,
        parity: parity_class(a),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::SpherePoly;
    use crate::scalar::Precision;
    use crate::symbol::series_log;

    fn one_over_pi(q: (i64, i64)) -> ScalarValue {
        ScalarValue::pi_multiple(Rational::from(q), -1)
    }

    fn radial(n: usize, d: i64) -> ClassicalSymbol {
        ClassicalSymbol::radial(n, deg(d), Rational::from(1))
    }

    #[test]
    fn finite_part_examples() {
        assert!(finite_part(&radial(1, -1)).exact_eq(&one_over_pi((1, 2))));
        assert!(finite_part(&radial(1, -2)).exact_eq(&one_over_pi((2, 1))));
        assert!(finite_part(&radial(1, 0)).is_exact_zero());
    }

    #[test]
    fn radius_expansion_examples() {
        let e = radius_expansion(&radial(1, -1), 4);
        assert!(e.constant.exact_eq(&one_over_pi((1, 2))));
        assert!(e.log_coefficient.exact_eq(&one_over_pi((1, 1))));
        let z = radius_expansion(&radial(1, 0), 4);
        assert!(z.constant.is_exact_zero());
        assert_eq!(z.powers.len(), 1);
        assert!(z.powers[0].1.exact_eq(&one_over_pi((1, 1))));
        let a = radial(2, -2);
        assert!(finite_part_by_radius(&a, 3).exact_eq(&finite_part(&a)));
    }

    #[test]
    fn residue_examples() {
        assert!(residue_density(&radial(1, -1)).exact_eq(&one_over_pi((1, 1))));
        assert!(residue_density(&radial(2, -2)).exact_eq(&one_over_pi((1, 2))));
        let half = ClassicalSymbol::radial(1, Degree::new(-1, 2), Rational::from(1));
        assert!(residue_density(&half).is_exact_zero());
    }

    #[test]
    fn log_residue_of_scaled_square() {
        let prec = Precision::default();
        let p = ClassicalSymbol::radial(1, deg(2), Rational::from(4));
        let logp = series_log(&p, 2, prec).unwrap();
        let v = residue0_log(&radial(1, -1), &logp).unwrap();
        let expect = ScalarValue::ln_rational(&Rational::from(4), prec).unwrap();
        let expect = &expect * &one_over_pi((1, 1));
        assert!(v.agrees_with(&expect, 1e-45));
    }

    #[test]
    fn log_residue_requires_reach() {
        let prec = Precision::default();
        let p = crate::parse::parse_symbol("|xi|^2; 1", 1, 1).unwrap();
        let logp = series_log(&p, 0, prec).unwrap();
        let e = residue0_log(&radial(1, 0), &logp).unwrap_err();
        assert!(matches!(e, Error::TruncationTooCoarse { .. }));
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity_class(&radial(1, -1)), ParityClass::EvenOdd);
        assert_eq!(parity_class(&radial(3, 2)), ParityClass::EvenEven);
        let mixed = crate::parse::parse_symbol("|xi|^2; xi1*|xi|", 2, 1).unwrap();
        assert_eq!(parity_class(&mixed), ParityClass::Neither);
        let odd = ClassicalSymbol::single(deg(-1), SpherePoly::coordinate(2, 0));
        assert_eq!(parity_class(&odd), ParityClass::EvenEven);
    }
}
