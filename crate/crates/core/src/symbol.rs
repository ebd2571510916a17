//! Classical and log-polyhomogeneous symbols with radial-times-angular terms.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{One, Zero};
use rug::Rational;
use serde::Serialize;

use crate::angular::{AngularPoly, SpherePoly};
use crate::error::{Error, Result};
use crate::scalar::{Precision, ScalarValue};

/// Homogeneity degrees and other small exact exponents.
pub type Degree = Rational64;

pub fn is_natural(d: Degree) -> bool {
    d.is_integer() && d >= Degree::zero()
}

pub fn to_rug(d: Degree) -> Rational {
    Rational::from((*d.numer(), *d.denom()))
}

pub fn deg(n: i64) -> Degree {
    Degree::from_integer(n)
}

/// Smallest even K with d + K + n ≥ 1.
pub fn default_extension(d: Degree, n: usize) -> u32 {
    let need = Degree::one() - d - deg(n as i64);
    if need <= Degree::zero() {
        return 0;
    }
    let k = need.ceil().to_integer() as u32;
    k + (k % 2)
}

/// One homogeneous component `|ξ|^d · angular(ξ/|ξ|) · (log[ξ])^l`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousTerm {
    pub degree: Degree,
    pub log_power: u32,
    pub angular: AngularPoly,
    pub extension: u32,
}

impl HomogeneousTerm {
    pub fn new(degree: Degree, angular: AngularPoly) -> Self {
        let extension = default_extension(degree, angular.dimension());
        HomogeneousTerm {
            degree,
            log_power: 0,
            angular,
            extension,
        }
    }

    pub fn with_extension(mut self, k: u32) -> Self {
        self.extension = k;
        self
    }

    pub fn dimension(&self) -> usize {
        self.angular.dimension()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.extension.is_multiple_of(2) {
            return Err(Error::InvalidSymbol(format!(
                "extension exponent K = {} must be even",
                self.extension
            )));
        }
        let s = self.degree + deg(self.extension as i64) + deg(self.dimension() as i64);
        if s < Degree::one() {
            return Err(Error::InvalidSymbol(format!(
                "extension K = {} too small for degree {} (need d + K + n >= 1)",
                self.extension, self.degree
            )));
        }
        Ok(())
    }

    /// Strictly homogeneous value of diagonal entry `i` at ξ ≠ 0.
    pub fn eval_homogeneous(&self, i: usize, x: &[f64]) -> f64 {
        let r = norm(x);
        r.powf(to_f64(self.degree)) * self.angular.entry(i).eval_direction(x)
    }

    /// Realized value, with the |ξ|^K taming inside the unit ball.
    pub fn eval(&self, i: usize, x: &[f64]) -> f64 {
        let r = norm(x);
        let h = self.eval_homogeneous(i, x);
        if r >= 1.0 {
            h
        } else {
            r.powi(self.extension as i32) * h
        }
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn to_f64(d: Degree) -> f64 {
    *d.numer() as f64 / *d.denom() as f64
}

/// Finite sum of homogeneous terms of degrees σ, σ−1, … (gaps allowed).
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSymbol {
    n: usize,
    matrix_size: usize,
    order: Degree,
    terms: Vec<HomogeneousTerm>,
}

impl ClassicalSymbol {
    /// Build from terms; sorts by decreasing degree, merges equal degrees
    /// and drops zero terms. The order is the leading degree unless given.
    pub fn new(
        n: usize,
        matrix_size: usize,
        order: Option<Degree>,
        terms: Vec<HomogeneousTerm>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSymbol(
                "dimension n must be at least 1".into(),
            ));
        }
        if matrix_size == 0 {
            return Err(Error::InvalidSymbol(
                "matrix size M must be at least 1".into(),
            ));
        }
        let mut merged: BTreeMap<Degree, HomogeneousTerm> = BTreeMap::new();
        for t in terms {
            if t.dimension() != n {
                return Err(Error::DimensionMismatch(n, t.dimension()));
            }
            if t.angular.matrix_size() != matrix_size {
                return Err(Error::MatrixSize {
                    expected: matrix_size,
                    found: t.angular.matrix_size(),
                });
            }
            if t.log_power != 0 {
                return Err(Error::InvalidSymbol(
                    "classical symbols carry no log powers".into(),
                ));
            }
            match merged.get_mut(&t.degree) {
                Some(existing) => {
                    if existing.extension != t.extension {
                        return Err(Error::InvalidSymbol(format!(
                            "conflicting extension exponents at degree {}",
                            t.degree
                        )));
                    }
                    existing.angular = existing.angular.add(&t.angular);
                }
                None => {
                    merged.insert(t.degree, t);
                }
            }
        }
        let terms: Vec<HomogeneousTerm> = merged
            .into_values()
            .rev()
            .filter(|t| !t.angular.is_zero())
            .collect();
        let order = match order {
            Some(o) => o,
            None => terms.first().map(|t| t.degree).unwrap_or_else(Degree::zero),
        };
        let s = ClassicalSymbol {
            n,
            matrix_size,
            order,
            terms,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn scalar(n: usize, terms: Vec<HomogeneousTerm>) -> Result<Self> {
        ClassicalSymbol::new(n, 1, None, terms)
    }

    /// Single scalar term `|ξ|^d · angular`.
    pub fn single(d: Degree, angular: SpherePoly) -> Self {
        let n = angular.dimension();
        ClassicalSymbol::scalar(
            n,
            vec![HomogeneousTerm::new(d, AngularPoly::scalar(angular))],
        )
        .expect("single term is valid")
    }

    /// Single radial term `c|ξ|^d` in dimension n.
    pub fn radial(n: usize, d: Degree, c: Rational) -> Self {
        ClassicalSymbol::single(d, SpherePoly::constant(n, c))
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev: Option<Degree> = None;
        for t in &self.terms {
            t.validate()?;
            if t.degree > self.order {
                return Err(Error::InvalidSymbol(format!(
                    "degree {} exceeds order {}",
                    t.degree, self.order
                )));
            }
            if !is_natural(self.order - t.degree) {
                return Err(Error::InvalidSymbol(format!(
                    "degree {} is not of the form order - j",
                    t.degree
                )));
            }
            if let Some(p) = prev {
                if t.degree >= p {
                    return Err(Error::InvalidSymbol(
                        "degrees must strictly decrease".into(),
                    ));
                }
            }
            prev = Some(t.degree);
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn order(&self) -> Degree {
        self.order
    }

    pub fn terms(&self) -> &[HomogeneousTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_at(&self, d: Degree) -> Option<&HomogeneousTerm> {
        self.terms.iter().find(|t| t.degree == d)
    }

    /// Same symbol with every extension exponent raised by `by` (must be even).
    pub fn with_extension_shift(&self, by: u32) -> Self {
        let mut s = self.clone();
        for t in &mut s.terms {
            t.extension += by;
        }
        s
    }

    pub fn with_extensions(&self, ks: &[u32]) -> Result<Self> {
        let mut s = self.clone();
        for (t, &k) in s.terms.iter_mut().zip(ks) {
            t.extension = k;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| HomogeneousTerm {
                angular: t.angular.scale(q),
                ..t.clone()
            })
            .collect();
        ClassicalSymbol::new(self.n, self.matrix_size, Some(self.order), terms)
            .expect("scaling preserves validity")
    }

    /// Sum of two symbols whose orders differ by an integer.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let order = if self.order >= other.order {
            self.order
        } else {
            other.order
        };
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        ClassicalSymbol::new(self.n, self.matrix_size, Some(order), terms)
    }

    /// Realized value of diagonal entry `i`.
    pub fn eval_entry(&self, i: usize, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(i, x)).sum()
    }

    pub fn eval_trace(&self, x: &[f64]) -> f64 {
        (0..self.matrix_size).map(|i| self.eval_entry(i, x)).sum()
    }

    /// Constants c_i with leading term c_i|ξ|^m on every diagonal entry.
    pub fn radial_leading(&self) -> Result<(Degree, Vec<Rational>)> {
        let lead = self.terms.first().ok_or(Error::EmptySymbol)?;
        let mut cs = Vec::with_capacity(self.matrix_size);
        for e in lead.angular.entries() {
            let c = e.as_constant().ok_or(Error::NonRadialLeading)?;
            if c <= 0 {
                return Err(Error::NonPositiveLeading(c.to_string()));
            }
            cs.push(c);
        }
        Ok((lead.degree, cs))
    }

    /// Whether every term is radial (angular part constant per entry).
    pub fn is_radial(&self) -> bool {
        self.terms.iter().all(|t| {
            t.angular
                .entries()
                .iter()
                .all(|e| e.as_constant().is_some())
        })
    }
}

/// Angular component of a log-polyhomogeneous term: an exact part plus
/// parts carrying transcendental weights such as log c.
#[derive(Clone, Debug)]
pub struct LogComponent {
    pub exact: AngularPoly,
    pub weighted: Vec<(ScalarValue, AngularPoly)>,
}

impl LogComponent {
    pub fn exact(p: AngularPoly) -> Self {
        LogComponent {
            exact: p,
            weighted: Vec::new(),
        }
    }

    pub fn zero(n: usize, m: usize) -> Self {
        LogComponent::exact(AngularPoly::zero(n, m))
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
            && self
                .weighted
                .iter()
                .all(|(w, p)| w.is_exact_zero() || p.is_zero())
    }

    pub fn add_weighted(&mut self, w: ScalarValue, p: AngularPoly) {
        if w.is_exact_zero() || p.is_zero() {
            return;
        }
        if let Some(q) = w.as_rational() {
            self.exact = self.exact.add(&p.scale(q));
            return;
        }
        for (ew, ep) in &mut self.weighted {
            if ew.identical(&w) {
                *ep = ep.add(&p);
                return;
            }
        }
        self.weighted.push((w, p));
    }

    pub fn add(&mut self, other: &LogComponent) {
        self.exact = self.exact.add(&other.exact);
        for (w, p) in &other.weighted {
            self.add_weighted(w.clone(), p.clone());
        }
    }

    /// Multiply every angular part by `a` (entrywise).
    pub fn mul_angular(&self, a: &AngularPoly) -> LogComponent {
        let mut out = LogComponent::exact(self.exact.mul(a));
        for (w, p) in &self.weighted {
            out.add_weighted(w.clone(), p.mul(a));
        }
        out
    }

    /// ∫_{S^{n−1}} tr(component) dS.
    pub fn trace_moment(&self) -> ScalarValue {
        let mut acc = self.exact.trace_moment();
        for (w, p) in &self.weighted {
            acc = &acc + &(w * &p.trace_moment());
        }
        acc
    }

    pub fn eval_entry_direction(&self, i: usize, x: &[f64]) -> f64 {
        let mut v = self.exact.entry(i).eval_direction(x);
        for (w, p) in &self.weighted {
            v += w.to_f64() * p.entry(i).eval_direction(x);
        }
        v
    }
}

/// Terms `r_{d,l}(ξ) (log[ξ])^l`, known exactly for degrees ≥ `cutoff`.
#[derive(Clone, Debug)]
pub struct LogPolyhomSymbol {
    n: usize,
    matrix_size: usize,
    order: Degree,
    cutoff: Degree,
    terms: BTreeMap<(Degree, u32), LogComponent>,
}

impl LogPolyhomSymbol {
    pub fn new(n: usize, matrix_size: usize, order: Degree, cutoff: Degree) -> Self {
        LogPolyhomSymbol {
            n,
            matrix_size,
            order,
            cutoff,
            terms: BTreeMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn order(&self) -> Degree {
        self.order
    }

    /// Lowest degree that is known exactly; σ − J.
    pub fn cutoff(&self) -> Degree {
        self.cutoff
    }

    pub fn truncation(&self) -> Degree {
        self.order - self.cutoff
    }

    pub fn insert(&mut self, degree: Degree, log_power: u32, c: LogComponent) {
        if degree < self.cutoff || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&(degree, log_power)) {
            Some(e) => {
                e.add(&c);
                if e.is_zero() {
                    self.terms.remove(&(degree, log_power));
                }
            }
            None => {
                self.terms.insert((degree, log_power), c);
            }
        }
    }

    /// Components ordered by decreasing degree, then increasing log power.
    pub fn components(&self) -> Vec<(Degree, u32, &LogComponent)> {
        let mut v: Vec<_> = self.terms.iter().map(|((d, l), c)| (*d, *l, c)).collect();
        v.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        v
    }

    pub fn component(&self, degree: Degree, log_power: u32) -> LogComponent {
        self.terms
            .get(&(degree, log_power))
            .cloned()
            .unwrap_or_else(|| LogComponent::zero(self.n, self.matrix_size))
    }

    /// r_{−n,0}; zero when absent.
    pub fn residue_component(&self) -> LogComponent {
        self.component(-deg(self.n as i64), 0)
    }

    /// Σ r_{d,l}(ξ)(log|ξ|)^l on entry `i` at |ξ| ≥ 1.
    pub fn eval_entry(&self, i: usize, x: &[f64]) -> f64 {
        let r = norm(x);
        let lr = r.ln();
        self.terms
            .iter()
            .map(|((d, l), c)| {
                r.powf(to_f64(*d)) * lr.powi(*l as i32) * c.eval_entry_direction(i, x)
            })
            .sum()
    }
}

/// Log-symbol of p: m·log[ξ] + log c + Σ (−1)^{k+1} u^k / k, where
/// u = (p − c|ξ|^m)/(c|ξ|^m); kept down to degree −J.
pub fn series_log(p: &ClassicalSymbol, j: u32, prec: Precision) -> Result<LogPolyhomSymbol> {
    let (m, cs) = p.radial_leading()?;
    let n = p.dimension();
    let msize = p.matrix_size();
    let cutoff = -deg(j as i64);
    let mut out = LogPolyhomSymbol::new(n, msize, Degree::zero(), cutoff);

    let m_r = to_rug(m);
    out.insert(
        Degree::zero(),
        1,
        LogComponent::exact(AngularPoly::constant(n, msize, m_r)),
    );

    let mut logc = LogComponent::zero(n, msize);
    for (i, c) in cs.iter().enumerate() {
        let w = ScalarValue::ln_rational(c, prec).expect("leading coefficient is positive");
        let mut sel = vec![SpherePoly::zero(n); msize];
        sel[i] = SpherePoly::one(n);
        logc.add_weighted(w, AngularPoly::new(sel));
    }
    out.insert(Degree::zero(), 0, logc);

    // u as a map from degree (≤ −1) to angular part, divided by c_i
    let inv_c: Vec<SpherePoly> = cs
        .iter()
        .map(|c| SpherePoly::constant(n, c.clone().recip()))
        .collect();
    let inv_c = AngularPoly::new(inv_c);
    let u: BTreeMap<Degree, AngularPoly> = p.terms()[1..]
        .iter()
        .map(|t| (t.degree - m, t.angular.mul(&inv_c)))
        .filter(|(d, _)| *d >= cutoff)
        .collect();

    let mut power: BTreeMap<Degree, AngularPoly> = BTreeMap::new();
    power.insert(
        Degree::zero(),
        AngularPoly::constant(n, msize, Rational::from(1)),
    );
    for k in 1..=j {
        power = series_mul(&power, &u, cutoff);
        if power.is_empty() {
            break;
        }
        let mut coef = Rational::from((1, k));
        if k % 2 == 0 {
            coef = -coef;
        }
        for (d, a) in &power {
            out.insert(*d, 0, LogComponent::exact(a.scale(&coef)));
        }
    }
    Ok(out)
}

fn series_mul(
    a: &BTreeMap<Degree, AngularPoly>,
    b: &BTreeMap<Degree, AngularPoly>,
    cutoff: Degree,
) -> BTreeMap<Degree, AngularPoly> {
    let mut out: BTreeMap<Degree, AngularPoly> = BTreeMap::new();
    for (da, pa) in a {
        for (db, pb) in b {
            let d = *da + *db;
            if d < cutoff {
                continue;
            }
            let prod = pa.mul(pb);
            match out.get_mut(&d) {
                Some(e) => *e = e.add(&prod),
                None => {
                    out.insert(d, prod);
                }
            }
        }
    }
    out.retain(|_, p| !p.is_zero());
    out
}

/// Degreewise product a·r; exact down to σ_a + cutoff(r).
pub fn symbol_product(a: &ClassicalSymbol, r: &LogPolyhomSymbol) -> Result<LogPolyhomSymbol> {
    if a.dimension() != r.dimension() {
        return Err(Error::DimensionMismatch(a.dimension(), r.dimension()));
    }
    if a.matrix_size() != r.matrix_size() {
        return Err(Error::MatrixSize {
            expected: a.matrix_size(),
            found: r.matrix_size(),
        });
    }
    let order = a.order() + r.order();
    let cutoff = a.order() + r.cutoff();
    let mut out = LogPolyhomSymbol::new(a.dimension(), a.matrix_size(), order, cutoff);
    for t in a.terms() {
        for (d, l, c) in r.components() {
            out.insert(t.degree + d, l, c.mul_angular(&t.angular));
        }
    }
    Ok(out)
}

/// Serializable summary row for a log-symbol component.
#[derive(Clone, Debug, Serialize)]
pub struct LogTermRow {
    pub degree: String,
    pub log_power: u32,
    pub angular: String,
    pub weighted: Vec<(ScalarValue, String)>,
}

impl LogPolyhomSymbol {
    pub fn rows(&self) -> Vec<LogTermRow> {
        self.components()
            .into_iter()
            .map(|(d, l, c)| LogTermRow {
                degree: d.to_string(),
                log_power: l,
                angular: c.exact.to_string(),
                weighted: c
                    .weighted
                    .iter()
                    .map(|(w, p)| (w.clone(), p.to_string()))
                    .collect(),
            })
            .collect()
    }
}
