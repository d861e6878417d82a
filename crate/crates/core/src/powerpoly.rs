//! Generalized polynomials `Σ c·u^p` with exact non-negative rational exponents.
//!
//! Factor templates such as `1 − u^{n/2}` or `√A − u^{n/2−1}` carry half-integer
//! powers for odd `n`, so exponents are kept as reduced fractions while
//! coefficients stay `f64`. Terms are merged on exact exponent equality and
//! coefficients below [`STRUCTURAL_TOL`] are treated as structural zeros.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Coefficient magnitude below which a term is dropped; also the tolerance for
/// structural equality between polynomials.
pub const STRUCTURAL_TOL: f64 = 1e-12;

/// A non-negative rational exponent in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent(Rational64);

impl Exponent {
    pub const ZERO: Exponent = Exponent(Rational64::new_raw(0, 1));
    pub const ONE: Exponent = Exponent(Rational64::new_raw(1, 1));

    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::Domain("exponent with zero denominator".into()));
        }
        Self::from_ratio(Rational64::new(numer, denom))
    }

    pub fn integer(k: u32) -> Self {
        Exponent(Rational64::from_integer(i64::from(k)))
    }

    pub fn from_ratio(r: Rational64) -> Result<Self> {
        if r < Rational64::from_integer(0) {
            return Err(Error::Domain(format!("negative exponent {r}")));
        }
        Ok(Exponent(r))
    }

    pub fn ratio(self) -> Rational64 {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn value(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    pub fn is_zero(self) -> bool {
        self.numer() == 0
    }

    pub fn is_integer(self) -> bool {
        self.denom() == 1
    }

    /// Reciprocal `1/p`; fails for `p = 0`.
    pub fn recip(self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Domain("reciprocal of a zero exponent".into()));
        }
        Ok(Exponent(self.0.recip()))
    }

    pub fn checked_sub(self, other: Exponent) -> Result<Self> {
        Self::from_ratio(self.0 - other.0)
    }
}

impl Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 + rhs.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

/// `u^p` for real `u`. Integer powers accept any sign of `u`; fractional
/// powers require `u ≥ 0`.
pub fn pow(u: f64, p: Exponent) -> Result<f64> {
    if p.is_integer() {
        let k = p.numer();
        return Ok(match i32::try_from(k) {
            Ok(k) => u.powi(k),
            Err(_) => u.powf(k as f64),
        });
    }
    if u < 0.0 {
        return Err(Error::Domain(format!(
            "u = {u} < 0 raised to fractional power {p}"
        )));
    }
    if p.numer() == 1 && p.denom() == 2 {
        return Ok(u.sqrt());
    }
    Ok(u.powf(p.value()))
}

/// A finite sum of `c·u^p` terms in canonical form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerPoly {
    terms: Vec<(Exponent, f64)>,
}

impl PowerPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, Exponent::ZERO)
    }

    pub fn monomial(c: f64, p: Exponent) -> Self {
        Self::from_canonical_parts(vec![(p, c)])
    }

    /// Merges equal exponents, sorts, and drops structural zeros.
    pub fn canonicalize<I>(raw: I) -> Self
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        Self::from_canonical_parts(raw.into_iter().collect())
    }

    /// Canonicalize from `(numer, denom, coeff)` triples.
    pub fn from_fractions(raw: &[(i64, i64, f64)]) -> Result<Self> {
        let terms = raw
            .iter()
            .map(|&(n, d, c)| Exponent::new(n, d).map(|p| (p, c)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::canonicalize(terms))
    }

    fn from_canonical_parts(mut raw: Vec<(Exponent, f64)>) -> Self {
        raw.sort_by_key(|t| t.0);
        let mut terms: Vec<(Exponent, f64)> = Vec::with_capacity(raw.len());
        for (p, c) in raw {
            match terms.last_mut() {
                Some((q, acc)) if *q == p => *acc += c,
                _ => terms.push((p, c)),
            }
        }
        terms.retain(|(_, c)| c.abs() >= STRUCTURAL_TOL);
        PowerPoly { terms }
    }

    pub fn terms(&self) -> &[(Exponent, f64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `u^p` (zero when absent).
    pub fn coeff(&self, p: Exponent) -> f64 {
        self.terms
            .binary_search_by(|(q, _)| q.cmp(&p))
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(Exponent::ZERO)
    }

    /// All terms except the constant one.
    pub fn non_constant_part(&self) -> PowerPoly {
        PowerPoly {
            terms: self.terms.iter().copied().filter(|(p, _)| !p.is_zero()).collect(),
        }
    }

    pub fn max_exponent(&self) -> Option<Exponent> {
        self.terms.last().map(|(p, _)| *p)
    }

    pub fn scale(&self, k: f64) -> PowerPoly {
        Self::from_canonical_parts(self.terms.iter().map(|&(p, c)| (p, c * k)).collect())
    }

    /// Multiply by `u^e`.
    pub fn shift(&self, e: Exponent) -> PowerPoly {
        PowerPoly {
            terms: self.terms.iter().map(|&(p, c)| (p + e, c)).collect(),
        }
    }

    pub fn mul(&self, other: &PowerPoly) -> PowerPoly {
        let mut raw = Vec::with_capacity(self.len() * other.len());
        for &(p, a) in &self.terms {
            for &(q, b) in &other.terms {
                raw.push((p + q, a * b));
            }
        }
        Self::from_canonical_parts(raw)
    }

    /// Formal derivative `Σ c·p·u^{p−1}`. Fails when a term has `0 < p < 1`,
    /// whose derivative would carry a negative power; use
    /// [`PowerPoly::u_deriv`] for those.
    pub fn deriv(&self) -> Result<PowerPoly> {
        let mut raw = Vec::with_capacity(self.len());
        for &(p, c) in &self.terms {
            if p.is_zero() {
                continue;
            }
            raw.push((p.checked_sub(Exponent::ONE)?, c * p.value()));
        }
        Ok(Self::from_canonical_parts(raw))
    }

    /// `u·dp/du = Σ c·p·u^p`, always representable.
    pub fn u_deriv(&self) -> PowerPoly {
        Self::from_canonical_parts(
            self.terms
                .iter()
                .map(|&(p, c)| (p, c * p.value()))
                .collect(),
        )
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        let mut acc = 0.0;
        for &(p, c) in &self.terms {
            acc += c * pow(u, p)?;
        }
        Ok(acc)
    }

    /// Largest coefficient-wise absolute difference.
    pub fn max_coeff_diff(&self, other: &PowerPoly) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        let mut worst: f64 = 0.0;
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            let d = match ord {
                Ordering::Less => {
                    i += 1;
                    a[i - 1].1
                }
                Ordering::Greater => {
                    j += 1;
                    b[j - 1].1
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                    a[i - 1].1 - b[j - 1].1
                }
            };
            worst = worst.max(d.abs());
        }
        worst
    }

    /// Structural equality: same exponents, coefficients within `tol`.
    pub fn approx_eq(&self, other: &PowerPoly, tol: f64) -> bool {
        self.max_coeff_diff(other) < tol
    }
}

impl Add for &PowerPoly {
    type Output = PowerPoly;
    fn add(self, rhs: &PowerPoly) -> PowerPoly {
        PowerPoly::from_canonical_parts(self.terms.iter().chain(&rhs.terms).copied().collect())
    }
}

impl Sub for &PowerPoly {
    type Output = PowerPoly;
    fn sub(self, rhs: &PowerPoly) -> PowerPoly {
        self + &(-rhs)
    }
}

impl Neg for &PowerPoly {
    type Output = PowerPoly;
    fn neg(self) -> PowerPoly {
        PowerPoly {
            terms: self.terms.iter().map(|&(p, c)| (p, -c)).collect(),
        }
    }
}

impl Mul for &PowerPoly {
    type Output = PowerPoly;
    fn mul(self, rhs: &PowerPoly) -> PowerPoly {
        PowerPoly::mul(self, rhs)
    }
}

impl fmt::Display for PowerPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, &(p, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            match (i, c < 0.0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if p.is_zero() {
                write!(f, "{mag}")?;
                continue;
            }
            if mag != 1.0 {
                write!(f, "{mag} ")?;
            }
            if p == Exponent::ONE {
                f.write_str("u")?;
            } else {
                write!(f, "u^{{{p}}}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Serialize for PowerPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
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

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<Option<f64>> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i == start {
            return Ok(None);
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii slice");
        self.pos = i;
        match text.parse::<f64>() {
            Ok(v) => Ok(Some(v)),
            Err(_) => {
                self.pos = start;
                self.err(format!("bad number {text:?}"))
            }
        }
    }

    fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<i64>().or_else(|_| {
            self.pos = start;
            self.err("expected integer")
        })
    }

    fn exponent(&mut self) -> Result<Exponent> {
        let braced = self.eat(b'{');
        let num = self.integer()?;
        let den = if self.eat(b'/') { self.integer()? } else { 1 };
        if braced && !self.eat(b'}') {
            return self.err("expected '}'");
        }
        Exponent::new(num, den).or_else(|e| self.err(e.to_string()))
    }

    fn term(&mut self) -> Result<(Exponent, f64)> {
        let coeff = self.number()?;
        self.eat(b'*');
        if self.eat(b'u') {
            let p = if self.eat(b'^') {
                self.exponent()?
            } else {
                Exponent::ONE
            };
            Ok((p, coeff.unwrap_or(1.0)))
        } else {
            match coeff {
                Some(c) => Ok((Exponent::ZERO, c)),
                None => self.err("expected a coefficient or 'u'"),
            }
        }
    }
}

impl FromStr for PowerPoly {
    type Err = Error;

    /// Parses the rendering produced by `Display`, e.g.
    /// `1 - 1.25 u^{1/2} - 2.25 u`. Braces around exponents and `*` between
    /// coefficient and `u` are optional.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser {
            src: s.as_bytes(),
            pos: 0,
        };
        let mut raw = Vec::new();
        let mut sign = if p.eat(b'-') {
            -1.0
        } else {
            p.eat(b'+');
            1.0
        };
        loop {
            let (e, c) = p.term()?;
            raw.push((e, sign * c));
            match p.peek() {
                None => break,
                Some(b'+') => {
                    p.pos += 1;
                    sign = 1.0;
                }
                Some(b'-') => {
                    p.pos += 1;
                    sign = -1.0;
                }
                Some(_) => return p.err("expected '+' or '-'"),
            }
        }
        Ok(PowerPoly::canonicalize(raw))
    }
}
