//! Coefficient carrier: exact `q·π^k` values with automatic demotion to
//! MPFR floats carrying an absolute error bound.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Working precision for numeric values, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    bits: u32,
}

pub const DEFAULT_DIGITS: u32 = 50;

impl Precision {
    pub fn from_digits(digits: u32) -> Self {
        let digits = digits.max(5);
        // log2(10) ≈ 3.3219; 16 guard bits.
        let bits = (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 16;
        Precision { bits }
    }

    pub fn from_bits(bits: u32) -> Self {
        Precision { bits: bits.max(24) }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn digits(self) -> u32 {
        (f64::from(self.bits.saturating_sub(16)) / std::f64::consts::LOG2_10).floor() as u32
    }

    /// Relative size of one rounding step at this precision.
    pub fn unit_roundoff(self) -> f64 {
        2f64.powi(1 - self.bits as i32)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::from_digits(DEFAULT_DIGITS)
    }
}

/// A real coefficient value.
#[derive(Clone, Debug)]
pub enum ScalarValue {
    /// `rational · π^pi_power`
    Exact { rational: Rational, pi_power: i32 },
    /// MPFR value with an absolute error bound.
    Numeric { value: Float, error: f64 },
}

fn round_up(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE
    }
}

fn ulp_bound(value: &Float) -> f64 {
    let mag = value.to_f64().abs();
    round_up(mag * 2f64.powi(1 - value.prec() as i32))
}

impl ScalarValue {
    pub fn zero() -> Self {
        ScalarValue::Exact {
            rational: Rational::new(),
            pi_power: 0,
        }
    }

    pub fn one() -> Self {
        ScalarValue::rational(Rational::from(1))
    }

    pub fn rational(q: Rational) -> Self {
        ScalarValue::Exact {
            rational: q,
            pi_power: 0,
        }
    }

    pub fn int(v: i64) -> Self {
        ScalarValue::rational(Rational::from(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ScalarValue::rational(Rational::from((num, den)))
    }

    pub fn pi_multiple(q: Rational, pi_power: i32) -> Self {
        if q == 0 {
            return ScalarValue::zero();
        }
        ScalarValue::Exact {
            rational: q,
            pi_power,
        }
    }

    /// Wrap a float that is correctly rounded (error at most one ulp).
    pub fn rounded(value: Float) -> Self {
        let error = ulp_bound(&value);
        ScalarValue::Numeric { value, error }
    }

    /// Scale the error bound of a numeric value by `factor`.
    pub fn demote_with_slack(self, factor: f64) -> Self {
        match self {
            ScalarValue::Numeric { value, error } => ScalarValue::Numeric {
                value,
                error: round_up(error * factor),
            },
            exact => exact,
        }
    }

    /// Widen the error bound of a numeric value by `abs`.
    pub fn widen(self, abs: f64) -> Self {
        match self {
            ScalarValue::Numeric { value, error } => ScalarValue::Numeric {
                value,
                error: round_up(error + abs),
            },
            exact => exact,
        }
    }

    pub fn numeric(value: Float, error: f64) -> Self {
        ScalarValue::Numeric {
            value,
            error: error.max(0.0),
        }
    }

    pub fn euler_gamma(prec: Precision) -> Self {
        ScalarValue::rounded(Float::with_val(prec.bits(), Constant::Euler))
    }

    /// Natural logarithm of a positive rational; exact zero for 1.
    pub fn ln_rational(q: &Rational, prec: Precision) -> Option<Self> {
        if *q <= 0 {
            return None;
        }
        if *q == 1 {
            return Some(ScalarValue::zero());
        }
        let x = Float::with_val(prec.bits(), q);
        Some(ScalarValue::rounded(x.ln()))
    }

    /// `q^e` for positive rational `q` and rational exponent `e`.
    pub fn rational_power(q: &Rational, exponent: &Rational, prec: Precision) -> Self {
        if *exponent.denom() == 1 {
            if let Some(e) = exponent.numer().to_i32() {
                let base = q.clone();
                return if e >= 0 {
                    ScalarValue::rational(base.pow(e as u32))
                } else {
                    ScalarValue::rational(base.recip().pow((-e) as u32))
                };
            }
        }
        let x = Float::with_val(prec.bits(), q);
        let e = Float::with_val(prec.bits(), exponent);
        let v = x.pow(e);
        // pow is correctly rounded; the exponent conversion may add one more ulp.
        let err = 2.0 * ulp_bound(&v);
        ScalarValue::Numeric {
            value: v,
            error: err,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ScalarValue::Exact { .. })
    }

    /// True only for an exact zero.
    pub fn is_exact_zero(&self) -> bool {
        match self {
            ScalarValue::Exact { rational, .. } => *rational == 0,
            ScalarValue::Numeric { .. } => false,
        }
    }

    /// Zero, or a numeric value whose error bound encloses zero.
    pub fn is_zero_within_bound(&self) -> bool {
        match self {
            ScalarValue::Exact { rational, .. } => *rational == 0,
            ScalarValue::Numeric { value, error } => value.to_f64().abs() <= *error,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ScalarValue::Exact { rational, pi_power } if *pi_power == 0 || *rational == 0 => {
                Some(rational)
            }
            _ => None,
        }
    }

    pub fn error_bound(&self) -> f64 {
        match self {
            ScalarValue::Exact { .. } => 0.0,
            ScalarValue::Numeric { error, .. } => *error,
        }
    }

    pub fn precision_bits(&self) -> Option<u32> {
        match self {
            ScalarValue::Exact { .. } => None,
            ScalarValue::Numeric { value, .. } => Some(value.prec()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ScalarValue::Exact { rational, pi_power } => {
                rational.to_f64() * std::f64::consts::PI.powi(*pi_power)
            }
            ScalarValue::Numeric { value, .. } => value.to_f64(),
        }
    }

    /// Float value and error at `bits` precision.
    pub fn to_float(&self, bits: u32) -> (Float, f64) {
        match self {
            ScalarValue::Exact { rational, pi_power } => {
                if *rational == 0 {
                    return (Float::new(bits), 0.0);
                }
                let q = Float::with_val(bits, rational);
                if *pi_power == 0 {
                    let err = ulp_bound(&q);
                    return (q, err);
                }
                let pi = Float::with_val(bits, Constant::Pi);
                let pk = pi.pow(*pi_power);
                let v = q * pk;
                // one rounding each for q, π, the power and the product
                let steps = 3.0 + f64::from(pi_power.unsigned_abs());
                let err = round_up(steps * ulp_bound(&v));
                (v, err)
            }
            ScalarValue::Numeric { value, error } => {
                if value.prec() == bits {
                    (value.clone(), *error)
                } else {
                    let v = Float::with_val(bits, value);
                    let err = round_up(*error + ulp_bound(&v));
                    (v, err)
                }
            }
        }
    }

    /// Demote to the numeric kind.
    pub fn demote(&self, prec: Precision) -> Self {
        let (v, e) = self.to_float(prec.bits());
        ScalarValue::Numeric { value: v, error: e }
    }

    fn working_bits(a: &Self, b: &Self) -> u32 {
        match (a.precision_bits(), b.precision_bits()) {
            (Some(x), Some(y)) => x.max(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => Precision::default().bits(),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            ScalarValue::Exact { rational, pi_power } => ScalarValue::Exact {
                rational: rational.clone().abs(),
                pi_power: *pi_power,
            },
            ScalarValue::Numeric { value, error } => ScalarValue::Numeric {
                value: value.clone().abs(),
                error: *error,
            },
        }
    }

    /// Multiply by a rational.
    pub fn scale(&self, q: &Rational) -> Self {
        match self {
            ScalarValue::Exact { rational, pi_power } => {
                ScalarValue::pi_multiple(rational.clone() * q, *pi_power)
            }
            ScalarValue::Numeric { .. } => self * &ScalarValue::rational(q.clone()),
        }
    }

    /// Division; `None` when the divisor is (or may be) zero.
    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        match (self, rhs) {
            (
                ScalarValue::Exact {
                    rational: a,
                    pi_power: ka,
                },
                ScalarValue::Exact {
                    rational: b,
                    pi_power: kb,
                },
            ) => {
                if *b == 0 {
                    return None;
                }
                Some(ScalarValue::pi_multiple(a.clone() / b, ka - kb))
            }
            _ => {
                let bits = ScalarValue::working_bits(self, rhs);
                let (a, ea) = self.to_float(bits);
                let (b, eb) = rhs.to_float(bits);
                let babs = b.to_f64().abs();
                if babs <= eb || babs == 0.0 {
                    return None;
                }
                let aabs = a.to_f64().abs();
                let v = a / b;
                let err = (aabs * eb + babs * ea) / (babs * (babs - eb));
                let err = round_up(err + ulp_bound(&v));
                Some(ScalarValue::Numeric {
                    value: v,
                    error: err,
                })
            }
        }
    }

    /// Agreement test: exact values compare exactly, otherwise the
    /// difference must lie within the combined bounds plus `rel` slack.
    pub fn agrees_with(&self, other: &Self, rel: f64) -> bool {
        if let (ScalarValue::Exact { .. }, ScalarValue::Exact { .. }) = (self, other) {
            if self.exact_eq(other) {
                return true;
            }
        }
        let d = (self - other).to_f64().abs();
        let bound = self.error_bound() + other.error_bound();
        let scale = self.to_f64().abs().max(other.to_f64().abs());
        d <= bound + rel * scale
    }

    /// Exact structural equality (both exact, equal values).
    pub fn exact_eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                ScalarValue::Exact {
                    rational: a,
                    pi_power: ka,
                },
                ScalarValue::Exact {
                    rational: b,
                    pi_power: kb,
                },
            ) => (*a == 0 && *b == 0) || (a == b && ka == kb),
            _ => false,
        }
    }

    /// Same representation and value (numeric values compared bitwise).
    pub fn identical(&self, other: &Self) -> bool {
        match (self, other) {
            (
                ScalarValue::Numeric {
                    value: a,
                    error: ea,
                },
                ScalarValue::Numeric {
                    value: b,
                    error: eb,
                },
            ) => a == b && ea == eb,
            _ => self.exact_eq(other),
        }
    }

    /// Relative difference `|a − b| / max(|a|, |b|)` in f64 (0 when both vanish).
    pub fn relative_difference(&self, other: &Self) -> f64 {
        if self.exact_eq(other) {
            return 0.0;
        }
        let d = (self - other).to_f64().abs();
        let scale = self.to_f64().abs().max(other.to_f64().abs());
        if scale == 0.0 {
            d
        } else {
            d / scale
        }
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a ScalarValue>>(items: I) -> ScalarValue {
        items
            .into_iter()
            .fold(ScalarValue::zero(), |acc, x| &acc + x)
    }

    fn combine_numeric(a: &Self, b: &Self, subtract: bool) -> Self {
        let bits = ScalarValue::working_bits(a, b);
        let (x, ex) = a.to_float(bits);
        let (y, ey) = b.to_float(bits);
        let v = if subtract { x - y } else { x + y };
        let err = round_up(ex + ey + ulp_bound(&v));
        ScalarValue::Numeric {
            value: v,
            error: err,
        }
    }

    fn add_impl(&self, rhs: &Self, subtract: bool) -> Self {
        match (self, rhs) {
            (
                ScalarValue::Exact {
                    rational: a,
                    pi_power: ka,
                },
                ScalarValue::Exact {
                    rational: b,
                    pi_power: kb,
                },
            ) => {
                if *b == 0 {
                    return self.clone();
                }
                if *a == 0 {
                    return if subtract { -rhs } else { rhs.clone() };
                }
                if ka == kb {
                    let q = if subtract {
                        a.clone() - b
                    } else {
                        a.clone() + b
                    };
                    return ScalarValue::pi_multiple(q, *ka);
                }
                ScalarValue::combine_numeric(self, rhs, subtract)
            }
            _ => {
                if rhs.is_exact_zero() {
                    return self.clone();
                }
                if self.is_exact_zero() {
                    return if subtract { -rhs } else { rhs.clone() };
                }
                ScalarValue::combine_numeric(self, rhs, subtract)
            }
        }
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        match (self, rhs) {
            (
                ScalarValue::Exact {
                    rational: a,
                    pi_power: ka,
                },
                ScalarValue::Exact {
                    rational: b,
                    pi_power: kb,
                },
            ) => ScalarValue::pi_multiple(a.clone() * b, ka + kb),
            _ => {
                if self.is_exact_zero() || rhs.is_exact_zero() {
                    return ScalarValue::zero();
                }
                let bits = ScalarValue::working_bits(self, rhs);
                let (x, ex) = self.to_float(bits);
                let (y, ey) = rhs.to_float(bits);
                let (xa, ya) = (x.to_f64().abs(), y.to_f64().abs());
                let v = x * y;
                let err = round_up(xa * ey + ya * ex + ex * ey + ulp_bound(&v));
                ScalarValue::Numeric {
                    value: v,
                    error: err,
                }
            }
        }
    }

    /// Compare against zero: `Some` only when the sign is certain.
    pub fn sign(&self) -> Option<Ordering> {
        match self {
            ScalarValue::Exact { rational, .. } => Some(rational.cmp0()),
            ScalarValue::Numeric { value, error } => {
                let v = value.to_f64();
                if v.abs() <= *error {
                    None
                } else {
                    Some(if v > 0.0 {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    })
                }
            }
        }
    }

    /// Compact decimal string with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let (v, _) = self.to_float(Precision::from_digits(digits as u32 + 5).bits());
        if v.is_zero() {
            return "0".to_string();
        }
        v.to_string_radix(10, Some(digits))
    }
}

impl PartialEq for ScalarValue {
    /// Exact equality only; numeric values are never `==`.
    fn eq(&self, other: &Self) -> bool {
        self.exact_eq(other)
    }
}

impl fmt::Display for ScalarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarValue::Exact { rational, pi_power } => {
                if *rational == 0 {
                    return write!(f, "0");
                }
                match pi_power {
                    0 => write!(f, "{rational}"),
                    1 => write!(f, "{rational}*pi"),
                    k => write!(f, "{rational}*pi^{k}"),
                }
            }
            ScalarValue::Numeric { error, .. } => {
                write!(f, "{} (±{:.1e})", self.to_decimal(20), error)
            }
        }
    }
}

impl Serialize for ScalarValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ScalarValue::Exact { rational, pi_power } => {
                let mut s = serializer.serialize_struct("ScalarValue", 4)?;
                s.serialize_field("kind", "exact")?;
                s.serialize_field("rational", &rational.to_string())?;
                s.serialize_field("pi_power", pi_power)?;
                s.serialize_field("approx", &self.to_f64())?;
                s.end()
            }
            ScalarValue::Numeric { value, error } => {
                let mut s = serializer.serialize_struct("ScalarValue", 4)?;
                s.serialize_field("kind", "numeric")?;
                let digits = Precision::from_bits(value.prec()).digits() as usize;
                s.serialize_field("value", &self.to_decimal(digits.max(5)))?;
                s.serialize_field("error_bound", error)?;
                s.serialize_field("approx", &value.to_f64())?;
                s.end()
            }
        }
    }
}

impl Neg for &ScalarValue {
    type Output = ScalarValue;
    fn neg(self) -> ScalarValue {
        match self {
            ScalarValue::Exact { rational, pi_power } => ScalarValue::Exact {
                rational: -rational.clone(),
                pi_power: *pi_power,
            },
            ScalarValue::Numeric { value, error } => ScalarValue::Numeric {
                value: -value.clone(),
                error: *error,
            },
        }
    }
}

impl Neg for ScalarValue {
    type Output = ScalarValue;
    fn neg(self) -> ScalarValue {
        -&self
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&ScalarValue> for &ScalarValue {
            type Output = ScalarValue;
            fn $method(self, rhs: &ScalarValue) -> ScalarValue {
                $body(self, rhs)
            }
        }
        impl $trait<ScalarValue> for ScalarValue {
            type Output = ScalarValue;
            fn $method(self, rhs: ScalarValue) -> ScalarValue {
                $body(&self, &rhs)
            }
        }
        impl $trait<&ScalarValue> for ScalarValue {
            type Output = ScalarValue;
            fn $method(self, rhs: &ScalarValue) -> ScalarValue {
                $body(&self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &ScalarValue, b: &ScalarValue| a
    .add_impl(b, false));
forward_binop!(Sub, sub, |a: &ScalarValue, b: &ScalarValue| a
    .add_impl(b, true));
forward_binop!(Mul, mul, |a: &ScalarValue, b: &ScalarValue| a.mul_impl(b));
