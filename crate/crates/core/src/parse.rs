//! Text front end for symbols.
//!
//! ```text
//! symbol  := item (';' item)*
//! item    := term | 'diag(' entry (',' entry)* ')'
//! entry   := term (';' term)*
//! term    := sum ('/' radial)? ('@K=' nat)?
//! sum     := ('+'|'-')? product (('+'|'-') product)*
//! product := factor ('*' factor)*
//! factor  := number | 'xi' '_'? index ('^' nat)? | radial | '(' sum ')'
//! radial  := '|xi|' ('^' rexp)?
//! rexp    := nat | '(' '-'? nat ('/' nat)? ')'
//! number  := nat ('/' nat | '.' digits)?
//! ```
//!
//! Every term must be homogeneous: all monomials (counting `|xi|` powers)
//! share one degree. A scalar item inside a matrix symbol stands for that
//! term times the identity.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rug::{Integer, Rational};

use crate::angular::{AngularPoly, Exponent, SpherePoly};
use crate::error::{Error, Result};
use crate::symbol::{default_extension, deg, ClassicalSymbol, Degree, HomogeneousTerm};

pub const GRAMMAR: &str = "\
symbol  := item (';' item)*
item    := term | 'diag(' entry (',' entry)* ')'
entry   := term (';' term)*
term    := sum ('/' radial)? ('@K=' nat)?
sum     := ('+'|'-')? product (('+'|'-') product)*
product := factor ('*' factor)*
factor  := number | xi<i> ('^' nat)? | radial | '(' sum ')'
radial  := '|xi|' ('^' rexp)?      rexp := nat | '(' '-'? nat ('/' nat)? ')'
example: \"xi1^2/|xi|^3; 2*|xi|^(-1/2)\"   matrix: \"diag(1/|xi|^2, 3*xi1/|xi|^3)\"";

/// Raw polynomial in ξ and |ξ|: (ξ-exponent, |ξ| power) → coefficient.
type RawPoly = BTreeMap<(Exponent, Degree), Rational>;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

struct RawTerm {
    pos: usize,
    degree: Degree,
    angular: SpherePoly,
    extension: Option<u32>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn rest_starts_with(&mut self, s: &str) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        if self.rest_starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            std::str::from_utf8(&self.src[start..self.pos]).ok()
        }
    }

    fn nat(&mut self) -> Result<Integer> {
        self.skip_ws();
        match self.digits() {
            Some(d) => Ok(d.parse::<Integer>().expect("digit string")),
            None => self.err("expected a natural number"),
        }
    }

    fn small_nat(&mut self) -> Result<i64> {
        let v = self.nat()?;
        match v.to_i64() {
            Some(x) if x <= 1_000_000 => Ok(x),
            _ => self.err("exponent too large"),
        }
    }

    fn number(&mut self) -> Result<Rational> {
        let whole = self.nat()?;
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac = self.digits().unwrap_or("");
            let scale = Integer::from(Integer::u_pow_u(10, frac.len() as u32));
            let f: Integer = if frac.is_empty() {
                Integer::new()
            } else {
                frac.parse().expect("digit string")
            };
            return Ok(Rational::from((whole * &scale + f, scale)));
        }
        // "a/b" is a rational literal only when a digit follows the slash
        let save = self.pos;
        if self.eat(b'/') {
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                let den = self.nat()?;
                if den == 0 {
                    return self.err("zero denominator");
                }
                return Ok(Rational::from((whole, den)));
            }
            self.pos = save;
        }
        Ok(Rational::from(whole))
    }

    fn rexp(&mut self) -> Result<Degree> {
        if self.eat(b'(') {
            let neg = self.eat(b'-');
            let num = self.small_nat()?;
            let den = if self.eat(b'/') { self.small_nat()? } else { 1 };
            if den == 0 {
                return self.err("zero denominator in exponent");
            }
            self.expect(b')')?;
            let r = Degree::new(num, den);
            Ok(if neg { -r } else { r })
        } else {
            Ok(deg(self.small_nat()?))
        }
    }

    fn radial(&mut self) -> Result<Degree> {
        if !self.eat_str("|xi|") {
            return self.err("expected '|xi|'");
        }
        if self.eat(b'^') {
            self.rexp()
        } else {
            Ok(deg(1))
        }
    }

    fn constant(&self, c: Rational) -> RawPoly {
        let mut p = RawPoly::new();
        if c != 0 {
            p.insert((vec![0; self.n], Degree::zero()), c);
        }
        p
    }

    fn factor(&mut self) -> Result<RawPoly> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let q = self.number()?;
                Ok(self.constant(q))
            }
            Some(b'(') => {
                self.pos += 1;
                let s = self.sum()?;
                self.expect(b')')?;
                Ok(s)
            }
            Some(b'|') => {
                let r = self.radial()?;
                let mut p = RawPoly::new();
                p.insert((vec![0; self.n], r), Rational::from(1));
                Ok(p)
            }
            Some(b'x') => {
                if !self.eat_str("xi") {
                    return self.err("expected 'xi<i>'");
                }
                if self.src.get(self.pos) == Some(&b'_') {
                    self.pos += 1;
                }
                let at = self.pos;
                let idx = match self.digits() {
                    Some(d) => d.parse::<usize>().unwrap_or(0),
                    None => return self.err("expected coordinate index after 'xi'"),
                };
                if idx == 0 || idx > self.n {
                    return Err(Error::Syntax {
                        pos: at,
                        message: format!("coordinate index {idx} out of range 1..={}", self.n),
                    });
                }
                let e = if self.eat(b'^') { self.small_nat()? } else { 1 };
                let mut ex = vec![0u32; self.n];
                ex[idx - 1] = e as u32;
                let mut p = RawPoly::new();
                p.insert((ex, Degree::zero()), Rational::from(1));
                Ok(p)
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn product(&mut self) -> Result<RawPoly> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = raw_mul(&acc, &f);
        }
        Ok(acc)
    }

    fn sum(&mut self) -> Result<RawPoly> {
        let mut acc = RawPoly::new();
        let mut sign = 1;
        if self.eat(b'-') {
            sign = -1;
        } else {
            self.eat(b'+');
        }
        loop {
            let p = self.product()?;
            for (k, c) in p {
                let e = acc.entry(k).or_default();
                if sign > 0 {
                    *e += c;
                } else {
                    *e -= c;
                }
            }
            if self.eat(b'+') {
                sign = 1;
            } else if self.eat(b'-') {
                sign = -1;
            } else {
                break;
            }
        }
        acc.retain(|_, c| *c != 0);
        Ok(acc)
    }

    fn term(&mut self) -> Result<Option<RawTerm>> {
        self.skip_ws();
        let start = self.pos;
        let poly = self.sum()?;
        let mut denom = Degree::zero();
        if self.eat(b'/') {
            if self.peek() != Some(b'|') {
                return Err(Error::BadDenominator { pos: self.pos });
            }
            denom = self.radial()?;
        }
        let mut extension = None;
        if self.eat(b'@') {
            if !self.eat_str("K=") {
                return self.err("expected 'K=' after '@'");
            }
            let k = self.small_nat()?;
            extension = Some(k as u32);
        }
        let mut degree: Option<Degree> = None;
        let mut angular = SpherePoly::zero(self.n);
        for ((ex, r), c) in &poly {
            let d = deg(ex.iter().map(|&k| k as i64).sum()) + r;
            match degree {
                None => degree = Some(d),
                Some(d0) if d0 != d => {
                    let (first, second) = if d0 < d { (d0, d) } else { (d, d0) };
                    return Err(Error::NonHomogeneous {
                        pos: start,
                        first,
                        second,
                    });
                }
                _ => {}
            }
            angular = angular.add(&SpherePoly::monomial(self.n, ex.clone(), c.clone()));
        }
        match degree {
            None => Ok(None),
            Some(d) => Ok(Some(RawTerm {
                pos: start,
                degree: d - denom,
                angular,
                extension,
            })),
        }
    }

    fn entry(&mut self, stop_at_comma: bool) -> Result<Vec<RawTerm>> {
        let mut out = Vec::new();
        loop {
            if let Some(t) = self.term()? {
                out.push(t);
            }
            if self.eat(b';') {
                continue;
            }
            let next = self.peek();
            if next.is_none() || (stop_at_comma && matches!(next, Some(b',') | Some(b')'))) {
                break;
            }
            return self.err("expected ';' between terms");
        }
        Ok(out)
    }
}

fn raw_mul(a: &RawPoly, b: &RawPoly) -> RawPoly {
    let mut out = RawPoly::new();
    for ((ea, ra), ca) in a {
        for ((eb, rb), cb) in b {
            let e: Exponent = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let key = (e, *ra + *rb);
            *out.entry(key).or_default() += ca.clone() * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn build_term(raw: RawTerm, entries: Vec<SpherePoly>, n: usize) -> Result<HomogeneousTerm> {
    let k = raw
        .extension
        .unwrap_or_else(|| default_extension(raw.degree, n));
    let t = HomogeneousTerm::new(raw.degree, AngularPoly::new(entries)).with_extension(k);
    t.validate().map_err(|e| match e {
        Error::InvalidSymbol(m) => Error::Syntax {
            pos: raw.pos,
            message: m,
        },
        other => other,
    })?;
    Ok(t)
}

/// Parse symbol text in dimension `n` with diagonal matrix size `m`.
pub fn parse_symbol(text: &str, n: usize, m: usize) -> Result<ClassicalSymbol> {
    if n == 0 {
        return Err(Error::InvalidSymbol(
            "dimension n must be at least 1".into(),
        ));
    }
    if m == 0 {
        return Err(Error::InvalidSymbol(
            "matrix size M must be at least 1".into(),
        ));
    }
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        n,
    };
    let mut terms = Vec::new();
    if p.peek().is_none() {
        return p.err("empty symbol text");
    }
    loop {
        if p.eat_str("diag(") {
            let mut slot = 0usize;
            loop {
                let entry = p.entry(true)?;
                if slot >= m {
                    return Err(Error::MatrixSize {
                        expected: m,
                        found: slot + 1,
                    });
                }
                for raw in entry {
                    let mut entries = vec![SpherePoly::zero(n); m];
                    entries[slot] = raw.angular.clone();
                    terms.push(build_term(raw, entries, n)?);
                }
                slot += 1;
                if p.eat(b',') {
                    continue;
                }
                p.expect(b')')?;
                break;
            }
            if slot != m {
                return Err(Error::MatrixSize {
                    expected: m,
                    found: slot,
                });
            }
        } else if let Some(raw) = p.term()? {
            let entries = vec![raw.angular.clone(); m];
            terms.push(build_term(raw, entries, n)?);
        }
        if p.peek().is_none() {
            break;
        }
        if !p.eat(b';') {
            return p.err("expected ';' between terms");
        }
    }
    ClassicalSymbol::new(n, m, None, terms)
}

fn fmt_rexp(r: Degree) -> String {
    if r.is_integer() && !r.is_negative() {
        format!("{}", r.to_integer())
    } else {
        format!("({r})")
    }
}

fn fmt_radial(r: Degree) -> String {
    if r == deg(1) {
        "|xi|".to_string()
    } else {
        format!("|xi|^{}", fmt_rexp(r))
    }
}

/// Print one scalar term in the grammar above.
fn format_term(d: Degree, p: &SpherePoly, k: u32, n: usize) -> String {
    let top = deg(p.degree() as i64);
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (e, c) in p.terms().collect::<Vec<_>>().into_iter().rev() {
        let md: u32 = e.iter().sum();
        let mut factors: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .map(|(i, &x)| {
                if x == 1 {
                    format!("xi{}", i + 1)
                } else {
                    format!("xi{}^{}", i + 1, x)
                }
            })
            .collect();
        let pad = top - deg(md as i64);
        if !pad.is_zero() {
            factors.push(fmt_radial(pad));
        }
        let mag = c.clone().abs();
        let body = if factors.is_empty() {
            mag.to_string()
        } else if mag == 1 {
            factors.join("*")
        } else {
            format!("{}*{}", mag, factors.join("*"))
        };
        parts.push((*c < 0, body));
    }
    let mut poly = String::new();
    for (i, (neg, body)) in parts.iter().enumerate() {
        if i == 0 {
            if *neg {
                poly.push('-');
            }
        } else {
            poly.push_str(if *neg { " - " } else { " + " });
        }
        poly.push_str(body);
    }
    let shift = d - top;
    let mut out = if shift.is_zero() {
        poly
    } else if shift.is_positive() {
        let wrapped = if parts.len() > 1 {
            format!("({poly})")
        } else {
            poly
        };
        if wrapped == "1" {
            fmt_radial(shift)
        } else {
            format!("{wrapped}*{}", fmt_radial(shift))
        }
    } else {
        let wrapped = if parts.len() > 1 {
            format!("({poly})")
        } else {
            poly
        };
        format!("{wrapped}/{}", fmt_radial(-shift))
    };
    if k != default_extension(d, n) {
        out.push_str(&format!(" @K={k}"));
    }
    out
}

/// Print a symbol so that `parse_symbol(format_symbol(s), n, M) == s`.
pub fn format_symbol(s: &ClassicalSymbol) -> String {
    let n = s.dimension();
    let m = s.matrix_size();
    if s.is_zero() {
        return "0".to_string();
    }
    if m == 1 {
        return s
            .terms()
            .iter()
            .map(|t| format_term(t.degree, t.angular.entry(0), t.extension, n))
            .collect::<Vec<_>>()
            .join("; ");
    }
    let entries: Vec<String> = (0..m)
        .map(|i| {
            let ts: Vec<String> = s
                .terms()
                .iter()
                .filter(|t| !t.angular.entry(i).is_zero())
                .map(|t| format_term(t.degree, t.angular.entry(i), t.extension, n))
                .collect();
            if ts.is_empty() {
                "0".to_string()
            } else {
                ts.join("; ")
            }
        })
        .collect();
    format!("diag({})", entries.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    #[test]
    fn degree_bookkeeping() {
        let s = parse_symbol("xi1^2/|xi|^3", 2, 1).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.terms()[0].degree, deg(-1));
        let expect = SpherePoly::monomial(2, vec![2, 0], Rational::from(1));
        assert_eq!(s.terms()[0].angular.entry(0), &expect);
    }

    #[test]
    fn constant_symbol() {
        let s = parse_symbol("1", 1, 1).unwrap();
        assert_eq!(s.terms()[0].degree, deg(0));
        assert_eq!(s.terms()[0].angular.entry(0), &SpherePoly::one(1));
    }

    #[test]
    fn mixed_degrees_rejected() {
        let e = parse_symbol("xi1 + xi2^2", 2, 1).unwrap_err();
        assert!(matches!(e, Error::NonHomogeneous { .. }), "{e:?}");
    }

    #[test]
    fn bad_denominator() {
        let e = parse_symbol("xi1/xi2", 2, 1).unwrap_err();
        assert!(matches!(e, Error::BadDenominator { .. }), "{e:?}");
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_symbol("xi1 ** 2", 2, 1).unwrap_err() {
            Error::Syntax { pos, .. } => assert_eq!(pos, 5),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn separate_terms_merge_by_degree() {
        let s = parse_symbol("xi1/|xi|^2; xi2/|xi|^2; |xi|^2", 2, 1).unwrap();
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.order(), deg(2));
    }

    #[test]
    fn rational_exponents_and_coefficients() {
        let s = parse_symbol("3/4*|xi|^(-1/2)", 1, 1).unwrap();
        assert_eq!(s.terms()[0].degree, Degree::new(-1, 2));
        assert_eq!(
            s.terms()[0].angular.entry(0).as_constant().unwrap(),
            Rational::from((3, 4))
        );
        let t = parse_symbol("1/|xi|^(1/2)", 1, 1).unwrap();
        assert_eq!(t.terms()[0].degree, Degree::new(-1, 2));
    }

    #[test]
    fn diagonal_matrix() {
        let s = parse_symbol("diag(1/|xi|^2, 3*xi1/|xi|^3; |xi|^(-2))", 2, 2).unwrap();
        assert_eq!(s.matrix_size(), 2);
        assert_eq!(s.terms().len(), 1);
        let e = parse_symbol("diag(1, 2, 3)", 1, 2).unwrap_err();
        assert!(matches!(e, Error::MatrixSize { .. }));
    }

    #[test]
    fn extension_override() {
        let s = parse_symbol("1/|xi| @K=4", 1, 1).unwrap();
        assert_eq!(s.terms()[0].extension, 4);
        assert!(parse_symbol("1/|xi| @K=0", 1, 1).is_err());
    }

    #[test]
    fn printer_round_trip() {
        for (text, n, m) in [
            ("xi1^2/|xi|^3", 2, 1),
            ("|xi|^2; 1", 3, 1),
            ("(xi1^2 - 2*xi1*xi2)/|xi|^4; -1/2*xi2/|xi|^4", 2, 1),
            ("diag(1/|xi|^2, 0)", 2, 2),
            ("1/|xi| @K=4", 1, 1),
            ("xi1*|xi|^(1/2)", 1, 1),
        ] {
            let s = parse_symbol(text, n, m).unwrap();
            let printed = format_symbol(&s);
            let again = parse_symbol(&printed, n, m).unwrap();
            assert_eq!(s, again, "{text} -> {printed}");
            assert_eq!(format_symbol(&again), printed);
        }
    }
}
