//! Polynomials restricted to the unit sphere S^{n-1}.
//!
//! A [`SpherePoly`] is kept in the normal form obtained from the rewrite
//! `ξ_n² → 1 − ξ_1² − … − ξ_{n−1}²` (for n = 1: `ξ_1² → 1`). Monomials in this
//! form have `ξ_n`-degree at most one and form a basis of the polynomial
//! functions on the sphere, so equality, zero tests and parity are decided on
//! the coefficients directly.

use std::collections::BTreeMap;
use std::fmt;

use rug::{Integer, Rational};

use crate::scalar::ScalarValue;

pub type Exponent = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpherePoly {
    n: usize,
    terms: BTreeMap<Exponent, Rational>,
}

/// Behaviour under the antipodal map ξ → −ξ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Zero,
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn combine(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Zero, p) | (p, Parity::Zero) => p,
            (a, b) if a == b => a,
            _ => Parity::Mixed,
        }
    }

    /// True when `f(−ξ) = (−1)^e f(ξ)`.
    pub fn matches_sign(self, exponent_even: bool) -> bool {
        match self {
            Parity::Zero => true,
            Parity::Even => exponent_even,
            Parity::Odd => !exponent_even,
            Parity::Mixed => false,
        }
    }
}

fn factorial(k: u32) -> Integer {
    Integer::from(Integer::factorial(k))
}

/// Γ(k + ½)/√π = (2k)! / (4^k k!).
fn half_gamma_ratio(k: u32) -> Rational {
    let num = factorial(2 * k);
    let den = Integer::from(Integer::u_pow_u(4, k)) * factorial(k);
    Rational::from((num, den))
}

/// ∫_{S^{n−1}} ξ^α dS as an exact `q·π^k`.
pub fn monomial_moment(alpha: &[u32]) -> ScalarValue {
    let n = alpha.len() as u32;
    if alpha.iter().any(|a| a % 2 == 1) {
        return ScalarValue::zero();
    }
    if n == 1 {
        return ScalarValue::int(2);
    }
    // numerator Π Γ((α_i+1)/2) = π^{n/2} Π half_gamma_ratio(α_i/2)
    let mut q = Rational::from(2);
    for a in alpha {
        q *= half_gamma_ratio(a / 2);
    }
    let total: u32 = alpha.iter().sum::<u32>() / 2;
    // denominator Γ(total + n/2)
    if n.is_multiple_of(2) {
        let g = factorial(total + n / 2 - 1);
        q /= Rational::from(g);
        ScalarValue::pi_multiple(q, (n / 2) as i32)
    } else {
        let g = half_gamma_ratio(total + (n - 1) / 2);
        q /= g;
        ScalarValue::pi_multiple(q, ((n - 1) / 2) as i32)
    }
}

impl SpherePoly {
    pub fn zero(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        SpherePoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = SpherePoly::zero(n);
        if c != 0 {
            p.terms.insert(vec![0; n], c);
        }
        p
    }

    pub fn one(n: usize) -> Self {
        SpherePoly::constant(n, Rational::from(1))
    }

    /// The coordinate function ξ_i (0-based index).
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        SpherePoly::monomial(n, e, Rational::from(1))
    }

    pub fn monomial(n: usize, exponent: Exponent, c: Rational) -> Self {
        assert_eq!(exponent.len(), n, "exponent length must equal dimension");
        let mut p = SpherePoly::zero(n);
        p.add_monomial(exponent, c);
        p
    }

    /// Build from raw (not yet reduced) monomials.
    pub fn from_terms<I: IntoIterator<Item = (Exponent, Rational)>>(n: usize, terms: I) -> Self {
        let mut p = SpherePoly::zero(n);
        for (e, c) in terms {
            p.add_monomial(e, c);
        }
        p
    }

    fn add_reduced(&mut self, e: Exponent, c: Rational) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_default();
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&e);
        }
    }

    fn add_monomial(&mut self, e: Exponent, c: Rational) {
        if c == 0 {
            return;
        }
        let last = self.n - 1;
        let k = e[last];
        if k < 2 {
            self.add_reduced(e, c);
            return;
        }
        // ξ_n^k = ξ_n^{k mod 2} (1 − Σ_{i<n} ξ_i²)^{k/2}, expanded multinomially
        let half = k / 2;
        let mut base = e.clone();
        base[last] = k % 2;
        let others = last;
        let mut stack: Vec<(usize, u32, Exponent, Rational)> = vec![(0, half, base, c)];
        // distribute `remaining` powers of (−ξ_i²) over coordinates i < n,
        // the leftover goes to the constant 1
        while let Some((i, remaining, exp, coef)) = stack.pop() {
            if i == others || remaining == 0 {
                self.add_reduced(exp, coef);
                continue;
            }
            let mut binom = Integer::from(1);
            for j in 0..=remaining {
                if j > 0 {
                    binom *= remaining - j + 1;
                    binom /= j;
                }
                let mut ex = exp.clone();
                ex[i] += 2 * j;
                let mut cf = coef.clone() * Rational::from(binom.clone());
                if j % 2 == 1 {
                    cf = -cf;
                }
                stack.push((i + 1, remaining - j, ex, cf));
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant value if the polynomial is constant on the sphere.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::new()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                if e.iter().all(|&k| k == 0) {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Highest total degree in the normal form.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if *q == 0 {
            return SpherePoly::zero(self.n);
        }
        SpherePoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.clone() * q))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_reduced(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Rational::from(-1)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = SpherePoly::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_monomial(e, ca.clone() * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = SpherePoly::one(self.n);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn parity(&self) -> Parity {
        self.terms.keys().fold(Parity::Zero, |acc, e| {
            let p = if e.iter().sum::<u32>() % 2 == 0 {
                Parity::Even
            } else {
                Parity::Odd
            };
            acc.combine(p)
        })
    }

    /// Split into even and odd parts.
    pub fn parity_split(&self) -> (SpherePoly, SpherePoly) {
        let mut even = SpherePoly::zero(self.n);
        let mut odd = SpherePoly::zero(self.n);
        for (e, c) in &self.terms {
            if e.iter().sum::<u32>() % 2 == 0 {
                even.terms.insert(e.clone(), c.clone());
            } else {
                odd.terms.insert(e.clone(), c.clone());
            }
        }
        (even, odd)
    }

    /// ∫_{S^{n−1}} p dS, exact.
    pub fn moment(&self) -> ScalarValue {
        let mut acc = ScalarValue::zero();
        for (e, c) in &self.terms {
            let m = monomial_moment(e);
            acc = &acc + &m.scale(c);
        }
        acc
    }

    /// Evaluate at an arbitrary point (no projection to the sphere).
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = c.to_f64();
                for (xi, &k) in x.iter().zip(e) {
                    v *= xi.powi(k as i32);
                }
                v
            })
            .sum()
    }

    /// Evaluate at ξ/|ξ|.
    pub fn eval_direction(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let w: Vec<f64> = x.iter().map(|v| v / r).collect();
        self.eval(&w)
    }
}

impl fmt::Display for SpherePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("xi{}", i + 1)
                    } else {
                        format!("xi{}^{}", i + 1, k)
                    }
                })
                .collect();
            let neg = *c < 0;
            let mag = c.clone().abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Diagonal M×M matrix of sphere polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AngularPoly {
    n: usize,
    entries: Vec<SpherePoly>,
}

impl AngularPoly {
    pub fn new(entries: Vec<SpherePoly>) -> Self {
        assert!(!entries.is_empty(), "matrix size must be at least 1");
        let n = entries[0].dimension();
        assert!(
            entries.iter().all(|e| e.dimension() == n),
            "diagonal entries must share the dimension"
        );
        AngularPoly { n, entries }
    }

    pub fn scalar(p: SpherePoly) -> Self {
        AngularPoly::new(vec![p])
    }

    /// `p` times the M×M identity.
    pub fn identity_times(p: SpherePoly, m: usize) -> Self {
        AngularPoly::new(vec![p; m])
    }

    pub fn zero(n: usize, m: usize) -> Self {
        AngularPoly::new(vec![SpherePoly::zero(n); m])
    }

    pub fn constant(n: usize, m: usize, c: Rational) -> Self {
        AngularPoly::identity_times(SpherePoly::constant(n, c), m)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn matrix_size(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[SpherePoly] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &SpherePoly {
        &self.entries[i]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(SpherePoly::is_zero)
    }

    /// Fiber trace: sum of the diagonal.
    pub fn trace(&self) -> SpherePoly {
        self.entries
            .iter()
            .fold(SpherePoly::zero(self.n), |acc, e| acc.add(e))
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.n, other.n, "dimension mismatch");
        assert_eq!(
            self.entries.len(),
            other.entries.len(),
            "matrix size mismatch"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        AngularPoly {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Rational::from(-1)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        AngularPoly {
            n: self.n,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.mul(b))
                .collect(),
        }
    }

    pub fn scale(&self, q: &Rational) -> Self {
        AngularPoly {
            n: self.n,
            entries: self.entries.iter().map(|e| e.scale(q)).collect(),
        }
    }

    pub fn mul_scalar_poly(&self, p: &SpherePoly) -> Self {
        AngularPoly {
            n: self.n,
            entries: self.entries.iter().map(|e| e.mul(p)).collect(),
        }
    }

    pub fn parity(&self) -> Parity {
        self.entries
            .iter()
            .fold(Parity::Zero, |acc, e| acc.combine(e.parity()))
    }

    /// ∫_{S^{n−1}} tr p dS.
    pub fn trace_moment(&self) -> ScalarValue {
        self.trace().moment()
    }

    pub fn eval_trace_direction(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|e| e.eval_direction(x)).sum()
    }
}

impl fmt::Display for AngularPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.len() == 1 {
            return write!(f, "{}", self.entries[0]);
        }
        write!(f, "diag(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}
