//! Truncated Laurent series and the resolvent-to-zeta transitions.
//!
//! A term `c̃ (−λ)^α` of the trace expansion of `A(P−λ)^{−N}` becomes a
//! simple pole of `Γ(s)ζ(A,P,s)` at `s = α + N`, and a pair
//! `(c̃′ log(−λ) + c̃″)(−λ)^{−k−N}` becomes `c̃′/(s+k)² + c̃″/(s+k)` after
//! multiplication by `h(s) = (N−1)!/Γ(N−s)`. The transitions below are
//! carried out by multiplying these series, so the Taylor coefficients of
//! `h` at `s = −k` enter the secondary coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rug::float::Constant;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::resolvent::AsymptoticExpansion;
use crate::scalar::{Precision, ScalarValue};
use crate::symbol::{deg, to_rug, Degree};

/// Σ_{k ≥ valuation} c_k (s − point)^k, known for k < order.
#[derive(Clone, Debug)]
pub struct LaurentSeries {
    point: Degree,
    coeffs: BTreeMap<i32, ScalarValue>,
    order: i32,
}

impl LaurentSeries {
    pub fn new(point: Degree, order: i32) -> Self {
        LaurentSeries {
            point,
            coeffs: BTreeMap::new(),
            order,
        }
    }

    pub fn from_coeffs<I: IntoIterator<Item = (i32, ScalarValue)>>(
        point: Degree,
        coeffs: I,
        order: i32,
    ) -> Self {
        let mut s = LaurentSeries::new(point, order);
        for (k, c) in coeffs {
            s.set(k, c);
        }
        s
    }

    /// Exact series (an entire function known to all orders up to `order`).
    pub fn monomial(point: Degree, k: i32, c: ScalarValue, order: i32) -> Self {
        LaurentSeries::from_coeffs(point, [(k, c)], order)
    }

    pub fn one(point: Degree, order: i32) -> Self {
        LaurentSeries::monomial(point, 0, ScalarValue::one(), order)
    }

    pub fn point(&self) -> Degree {
        self.point
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn set(&mut self, k: i32, c: ScalarValue) {
        if k >= self.order || c.is_exact_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    /// Coefficient of (s − point)^k; exact zero when absent.
    pub fn coeff(&self, k: i32) -> ScalarValue {
        self.coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(ScalarValue::zero)
    }

    pub fn valuation(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (i32, &ScalarValue)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.point != other.point {
            return Err(Error::Domain(format!(
                "expansion point mismatch: {} vs {}",
                self.point, other.point
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let order = self.order.min(other.order);
        let mut out = LaurentSeries::new(self.point, order);
        for k in self.coeffs.keys().chain(other.coeffs.keys()) {
            if *k < order && !out.coeffs.contains_key(k) {
                out.set(*k, &self.coeff(*k) + &other.coeff(*k));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &ScalarValue) -> Self {
        let mut out = LaurentSeries::new(self.point, self.order);
        for (k, v) in &self.coeffs {
            out.set(*k, v * c);
        }
        out
    }

    /// Cauchy product, valid below min(T_f + v_g, T_g + v_f).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let (vf, vg) = match (self.valuation(), other.valuation()) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                // a zero factor: the product is zero to the known order
                let order = match (self.valuation(), other.valuation()) {
                    (None, Some(b)) => self.order + b,
                    (Some(a), None) => other.order + a,
                    _ => self.order.min(other.order),
                };
                return Ok(LaurentSeries::new(self.point, order));
            }
        };
        let order = (self.order + vg).min(other.order + vf);
        let mut acc: BTreeMap<i32, ScalarValue> = BTreeMap::new();
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let k = i + j;
                if k >= order {
                    continue;
                }
                let e = acc.entry(k).or_insert_with(ScalarValue::zero);
                *e = &*e + &(a * b);
            }
        }
        Ok(LaurentSeries::from_coeffs(self.point, acc, order))
    }

    /// Substitute s − p → −(s − p).
    pub fn reflect(&self) -> Self {
        let mut out = LaurentSeries::new(self.point, self.order);
        for (k, v) in &self.coeffs {
            out.set(*k, if k % 2 == 0 { v.clone() } else { -v });
        }
        out
    }

    pub fn at_point(&self, point: Degree) -> Self {
        LaurentSeries {
            point,
            ..self.clone()
        }
    }

    /// exp(f) for a power series f with f(point) = 0.
    pub fn exp(&self) -> Result<Self> {
        if self.valuation().is_some_and(|v| v < 1) {
            return Err(Error::Domain(
                "exp needs a series vanishing at the expansion point".into(),
            ));
        }
        let t = self.order.max(1) as usize;
        let mut g: Vec<ScalarValue> = vec![ScalarValue::one()];
        for k in 1..t {
            let mut acc = ScalarValue::zero();
            for j in 1..=k {
                let fj = self.coeff(j as i32);
                if fj.is_exact_zero() {
                    continue;
                }
                acc = &acc + &(&fj * &g[k - j]).scale(&Rational::from(j as i64));
            }
            g.push(acc.scale(&Rational::from((1, k as i64))));
        }
        Ok(LaurentSeries::from_coeffs(
            self.point,
            g.into_iter().enumerate().map(|(k, c)| (k as i32, c)),
            self.order.max(1),
        ))
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let var = if self.point.is_zero() {
            "s".to_string()
        } else {
            format!("(s - {})", self.point)
        };
        let mut first = true;
        for (k, v) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({v})*{var}^{k}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O({var}^{})", self.order)
    }
}

/// ζ(k) for k ≥ 2: exact rational·π^k for even k, MPFR otherwise.
pub fn zeta_value(k: u32, prec: Precision) -> ScalarValue {
    assert!(k >= 2, "zeta value needs k >= 2");
    if k.is_multiple_of(2) {
        // ζ(2j) = (−1)^{j+1} B_{2j} (2π)^{2j} / (2 (2j)!)
        let b = bernoulli(k);
        let mut q = b * Rational::from(Integer::from(1) << k) / Rational::from(2);
        q /= Rational::from(Integer::factorial(k));
        if (k / 2).is_multiple_of(2) {
            q = -q;
        }
        ScalarValue::pi_multiple(q, k as i32)
    } else {
        let v = Float::with_val(prec.bits(), k).zeta();
        ScalarValue::rounded(v)
    }
}

/// Bernoulli number B_k (B_1 = −1/2).
pub fn bernoulli(k: u32) -> Rational {
    // Akiyama–Tanigawa
    let k = k as usize;
    let mut a: Vec<Rational> = Vec::with_capacity(k + 1);
    let mut b1 = Rational::new();
    for m in 0..=k {
        a.push(Rational::from((1, m as i64 + 1)));
        for j in (1..=m).rev() {
            let diff = a[j - 1].clone() - &a[j];
            a[j - 1] = diff * Rational::from(j as i64);
        }
        if m == 1 {
            b1 = a[0].clone();
        }
    }
    if k == 1 {
        -b1
    } else {
        a[0].clone()
    }
}

/// H_m = 1 + ½ + … + 1/m.
pub fn harmonic(m: u32) -> Rational {
    (1..=m).fold(Rational::new(), |acc, j| {
        acc + Rational::from((1, j as i64))
    })
}

/// α_N = 1 + ½ + … + 1/(N−1).
pub fn alpha(n: u32) -> Rational {
    harmonic(n.saturating_sub(1))
}

/// log Γ(1+ε) = −γε + Σ_{k≥2} (−1)^k ζ(k) ε^k / k, through ε^{t−1}.
fn log_gamma_one(t: i32, prec: Precision) -> LaurentSeries {
    let mut s = LaurentSeries::new(Degree::zero(), t);
    if t > 1 {
        s.set(1, -ScalarValue::euler_gamma(prec));
    }
    for k in 2..t {
        let mut z = zeta_value(k as u32, prec).scale(&Rational::from((1, k as i64)));
        if k % 2 == 1 {
            z = -z;
        }
        s.set(k, z);
    }
    s
}

/// Taylor data of 1/Γ(x + ε) at an integer x, through ε^{t−1}.
pub fn inv_gamma_at_integer(x: i64, t: i32, prec: Precision) -> LaurentSeries {
    let zero = Degree::zero();
    let base = log_gamma_one(t, prec)
        .scale(&ScalarValue::int(-1))
        .exp()
        .expect("valuation ≥ 1");
    let mut out = base;
    if x >= 1 {
        // 1/Γ(x+ε) = Π_{j=1}^{x−1} 1/(j+ε) · 1/Γ(1+ε)
        for j in 1..x {
            let mut geo = LaurentSeries::new(zero, t);
            let mut c = Rational::from((1, j));
            for k in 0..t {
                geo.set(k, ScalarValue::rational(c.clone()));
                c = -c / Rational::from(j);
            }
            out = out.mul(&geo).expect("same point");
        }
    } else {
        // 1/Γ(x+ε) = Π_{i=x}^{0} (i+ε) · 1/Γ(1+ε)
        for i in x..=0 {
            let lin = LaurentSeries::from_coeffs(
                zero,
                [(0, ScalarValue::int(i)), (1, ScalarValue::one())],
                t + 1,
            );
            out = out.mul(&lin).expect("same point");
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KnownSeries {
    /// Γ(s) at 0.
    Gamma,
    /// 1/Γ(s) at 0.
    InvGamma,
    /// M!/Γ(M+1−s) at 0, the factor relating ψ(s−M) to Γ(s)ζ(s).
    InvGammaShift(u32),
    /// g_M(s) = M!/((s−M)⋯(s−1)) at 0.
    GM(u32),
    /// (1/π) sin(π(s−M)) at 0.
    SinFactor(u32),
}

impl KnownSeries {
    pub fn parse(name: &str) -> Result<KnownSeries> {
        let (head, arg) = match name.find('(') {
            Some(i) if name.ends_with(')') => (&name[..i], Some(&name[i + 1..name.len() - 1])),
            _ => (name, None),
        };
        let m = || -> Result<u32> {
            arg.and_then(|a| a.trim().parse().ok())
                .ok_or_else(|| Error::Domain(format!("series '{name}' needs a natural argument")))
        };
        match head {
            "gamma" => Ok(KnownSeries::Gamma),
            "inv_gamma" => Ok(KnownSeries::InvGamma),
            "inv_gamma_shift" => Ok(KnownSeries::InvGammaShift(m()?)),
            "g_M" | "g" => Ok(KnownSeries::GM(m()?)),
            "sin_factor" => Ok(KnownSeries::SinFactor(m()?)),
            _ => Err(Error::Domain(format!("unknown series '{name}'"))),
        }
    }
}

/// Series data at s = 0 with `t` coefficients from the leading index.
pub fn known_series(which: KnownSeries, t: u32, prec: Precision) -> Result<LaurentSeries> {
    if t == 0 {
        return Err(Error::Domain("truncation T must be at least 1".into()));
    }
    let t = t as i32;
    let zero = Degree::zero();
    Ok(match which {
        KnownSeries::Gamma => {
            // Γ(s) = Γ(1+s)/s
            let g1 = log_gamma_one(t, prec).exp()?;
            let shifted: Vec<(i32, ScalarValue)> =
                g1.coefficients().map(|(k, v)| (k - 1, v.clone())).collect();
            LaurentSeries::from_coeffs(zero, shifted, t - 1)
        }
        KnownSeries::InvGamma => {
            // 1/Γ(s) = s/Γ(1+s)
            let g = inv_gamma_at_integer(1, t, prec);
            let shifted: Vec<(i32, ScalarValue)> =
                g.coefficients().map(|(k, v)| (k + 1, v.clone())).collect();
            LaurentSeries::from_coeffs(zero, shifted, t + 1)
        }
        KnownSeries::InvGammaShift(m) => {
            let g = inv_gamma_at_integer(m as i64 + 1, t, prec).reflect();
            g.scale(&ScalarValue::rational(Rational::from(Integer::factorial(
                m,
            ))))
        }
        KnownSeries::GM(m) => {
            // Π_{j=1}^{M} j/(s−j) = (−1)^M Π_j Σ_i (s/j)^i
            let mut out = LaurentSeries::one(zero, t);
            for j in 1..=m {
                let mut geo = LaurentSeries::new(zero, t);
                let mut c = Rational::from(1);
                for k in 0..t {
                    geo.set(k, ScalarValue::rational(c.clone()));
                    c /= Rational::from(j);
                }
                out = out.mul(&geo)?;
            }
            if m % 2 == 1 {
                out = out.scale(&ScalarValue::int(-1));
            }
            out
        }
        KnownSeries::SinFactor(m) => {
            // (1/π) sin(π(s−M)) = (−1)^M Σ_i (−1)^i π^{2i} s^{2i+1}/(2i+1)!
            let mut out = LaurentSeries::new(zero, t + 1);
            let mut i = 0;
            while 2 * i + 1 < t + 1 {
                let mut q =
                    Rational::from((1, Integer::from(Integer::factorial(2 * i as u32 + 1))));
                if (i + m as i32) % 2 == 1 {
                    q = -q;
                }
                out.set(2 * i + 1, ScalarValue::pi_multiple(q, 2 * i));
                i += 1;
            }
            out
        }
    })
}

/// Transition of the (−λ)^{−N} pair (a log(−λ) + b) to (C₋₁, C₀) of ζ at 0,
/// by the product g_M(s)·(1/π)sin(π(s−M))·(a/s² + b/s).
pub fn resolvent_to_zeta_at_zero(
    a: &ScalarValue,
    b: &ScalarValue,
    n: u32,
    prec: Precision,
) -> Result<(ScalarValue, ScalarValue)> {
    resolvent_to_zeta_at_zero_shifted(a, b, n, &Rational::new(), prec)
}

/// As [`resolvent_to_zeta_at_zero`], with `shift` added to the linear
/// Taylor coefficient of g_M (negative-control hook; zero in normal use).
#[doc(hidden)]
pub fn resolvent_to_zeta_at_zero_shifted(
    a: &ScalarValue,
    b: &ScalarValue,
    n: u32,
    shift: &Rational,
    prec: Precision,
) -> Result<(ScalarValue, ScalarValue)> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let m = n - 1;
    let t = 4;
    let mut g = known_series(KnownSeries::GM(m), t, prec)?;
    if *shift != 0 {
        let sign = if m.is_multiple_of(2) { 1 } else { -1 };
        let c1 = &g.coeff(1) + &ScalarValue::rational(shift.clone() * Rational::from(sign));
        g.set(1, c1);
    }
    let sin = known_series(KnownSeries::SinFactor(m), t, prec)?;
    let zero = Degree::zero();
    let psi = LaurentSeries::from_coeffs(zero, [(-2, a.clone()), (-1, b.clone())], 0);
    let zeta = g.mul(&sin)?.mul(&psi)?;
    let c_m1 = zeta.coeff(-1);
    let c_0 = zeta.coeff(0);
    if *shift == 0 {
        let closed = b + &a.scale(&alpha(n));
        if !c_0.agrees_with(&closed, 1e-30) || !c_m1.agrees_with(a, 1e-30) {
            return Err(Error::Consistency(format!(
                "series transition gave C0 = {c_0}, closed form b + alpha_N a = {closed}"
            )));
        }
    }
    Ok((c_m1, c_0))
}

/// Pole data of Γ(s)ζ(A,P,s) and of ζ(A,P,s) at one pole.
#[derive(Clone, Debug, Serialize)]
pub struct PoleEntry {
    /// coefficient of (s − s₀)^{−2} in Γ(s)ζ(s)
    pub c_prime: ScalarValue,
    /// coefficient of (s − s₀)^{−1} in Γ(s)ζ(s)
    pub c_second: ScalarValue,
    /// residue of ζ(s) at s₀
    pub c_triple: ScalarValue,
    /// resolvent coefficients this entry came from: (log, plain)
    pub source: (ScalarValue, ScalarValue),
    /// ζ Laurent coefficients (index, value) determined at this pole
    pub zeta: Vec<(i32, ScalarValue)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZetaPoleData {
    pub resolvent_power: u32,
    pub poles: BTreeMap<String, PoleEntry>,
    #[serde(skip)]
    locations: BTreeMap<Degree, String>,
}

impl ZetaPoleData {
    pub fn empty(resolvent_power: u32) -> Self {
        ZetaPoleData {
            resolvent_power,
            poles: BTreeMap::new(),
            locations: BTreeMap::new(),
        }
    }

    pub fn at(&self, s: Degree) -> Option<&PoleEntry> {
        self.locations.get(&s).and_then(|k| self.poles.get(k))
    }

    fn insert(&mut self, s: Degree, e: PoleEntry) {
        let key = s.to_string();
        self.locations.insert(s, key.clone());
        self.poles.insert(key, e);
    }

    /// Pole locations in decreasing order.
    pub fn locations(&self) -> Vec<Degree> {
        self.locations.keys().rev().copied().collect()
    }
}

/// sin(πr) when it is 0, ±½ or ±1.
pub fn exact_sin_pi(r: Degree) -> Option<Rational> {
    let two = deg(2);
    let mut x = r - (r / two).floor() * two;
    if x < Degree::zero() {
        x += two;
    }
    let table: [(Degree, i64, i64); 8] = [
        (Degree::zero(), 0, 1),
        (Degree::one(), 0, 1),
        (Degree::new(1, 2), 1, 1),
        (Degree::new(3, 2), -1, 1),
        (Degree::new(1, 6), 1, 2),
        (Degree::new(5, 6), 1, 2),
        (Degree::new(7, 6), -1, 2),
        (Degree::new(11, 6), -1, 2),
    ];
    table
        .iter()
        .find(|(v, _, _)| *v == x)
        .map(|(_, p, q)| Rational::from((*p, *q)))
}

pub fn sin_pi(r: Degree, prec: Precision) -> ScalarValue {
    match exact_sin_pi(r) {
        Some(q) => ScalarValue::rational(q),
        None => {
            let x = Float::with_val(prec.bits(), &to_rug(r))
                * Float::with_val(prec.bits(), Constant::Pi);
            // the rounded argument is off by at most two ulps of |x|
            let slack = 4.0 * x.to_f64().abs() * prec.unit_roundoff();
            ScalarValue::rounded(x.sin()).widen(slack)
        }
    }
}

/// Rising factorial (x)_k = x(x+1)⋯(x+k−1) for rational x.
fn rising(x: Degree, k: u32) -> Rational {
    (0..k).fold(Rational::from(1), |acc, i| acc * to_rug(x + deg(i as i64)))
}

/// Map every term of a resolvent expansion to pole data of Γζ and ζ.
pub fn resolvent_to_zeta_full(e: &AsymptoticExpansion, prec: Precision) -> Result<ZetaPoleData> {
    let big_n = e.power();
    let m = big_n - 1;
    let n_deg = deg(big_n as i64);
    let mfact = ScalarValue::rational(Rational::from(Integer::factorial(m)));
    let t = 4;
    let mut out = ZetaPoleData::empty(big_n);
    for alpha_exp in e.exponents() {
        let loc = alpha_exp + n_deg;
        let log_c = e.coefficient(alpha_exp, 1);
        let plain = e.coefficient(alpha_exp, 0);
        if e.max_log_power_at(alpha_exp) > 1 {
            return Err(Error::Domain(format!(
                "log power above 1 at exponent {alpha_exp}"
            )));
        }
        if loc.is_integer() && loc <= Degree::zero() {
            // double pole pair at s = −k
            let k = -loc.to_integer();
            // h(−k+ε) = M!/Γ(N+k−ε)
            let h = inv_gamma_at_integer(big_n as i64 + k, t, prec)
                .reflect()
                .scale(&mfact);
            let principal = LaurentSeries::from_coeffs(
                Degree::zero(),
                [(-2, log_c.clone()), (-1, plain.clone())],
                0,
            );
            let gz = h.mul(&principal)?;
            let inv_g = inv_gamma_at_integer(-k, t, prec);
            let z = inv_g.mul(&gz)?;
            out.insert(
                loc,
                PoleEntry {
                    c_prime: gz.coeff(-2),
                    c_second: gz.coeff(-1),
                    c_triple: z.coeff(-1),
                    source: (log_c, plain),
                    zeta: (-1..z.order()).map(|i| (i, z.coeff(i))).collect(),
                },
            );
        } else {
            if !log_c.is_exact_zero() {
                return Err(Error::Domain(format!(
                    "log term at non-integer exponent {alpha_exp} does not fit the expansion grid"
                )));
            }
            if loc.is_integer() && loc >= n_deg {
                return Err(Error::Domain(format!(
                    "power term at exponent {alpha_exp} gives a pole at s = {loc} >= N"
                )));
            }
            // c_j = M!/Γ(N − s_j)·c̃_j, c‴_j = c_j/Γ(s_j)
            //     = M!·c̃_j·sin(πs_j)/(π (1 − s_j)_M)
            let inv_gamma_nz = {
                let x = Float::with_val(prec.bits(), &to_rug(n_deg - loc));
                ScalarValue::rounded(x.gamma().recip()).demote_with_slack(64.0)
            };
            let c_j = &(&mfact * &plain) * &inv_gamma_nz;
            let sin = sin_pi(loc, prec);
            let denom = ScalarValue::pi_multiple(rising(Degree::one() - loc, m), 1);
            let c_triple = (&(&mfact * &plain) * &sin)
                .checked_div(&denom)
                .ok_or_else(|| Error::Consistency("vanishing Pochhammer factor".into()))?;
            out.insert(
                loc,
                PoleEntry {
                    c_prime: ScalarValue::zero(),
                    c_second: c_j,
                    c_triple: c_triple.clone(),
                    source: (log_c, plain),
                    zeta: vec![(-1, c_triple)],
                },
            );
        }
    }
    Ok(out)
}

/// Regular value of ζ(A,P,s) at s = 0: the s⁰ coefficient of
/// (1/Γ(s))·(c′₀/s² + c″₀/s + …) = c″₀ + γ c′₀.
pub fn zeta_regular_value(z: &ZetaPoleData) -> ScalarValue {
    match z.at(Degree::zero()) {
        Some(e) => e
            .zeta
            .iter()
            .find(|(i, _)| *i == 0)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(ScalarValue::zero),
        None => ScalarValue::zero(),
    }
}

/// Residue of ζ at 0 (C₋₁).
pub fn zeta_residue_at_zero(z: &ZetaPoleData) -> ScalarValue {
    z.at(Degree::zero())
        .map(|e| e.c_triple.clone())
        .unwrap_or_else(ScalarValue::zero)
}
