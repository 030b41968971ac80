//! Exact sparse multivariate polynomials over the rationals.
//!
//! Variables are `q1..qr` (degree 4), `b1..br` (degree 2), `h` (degree 2) and,
//! for Schubert calculus, `x1..xn` (degree 2). Terms are stored in a
//! `BTreeMap` keyed by [`Monomial`], whose `Ord` is the weighted graded reverse
//! lexicographic order with ranking `b1 > b2 > .. > x1 > .. > q1 > .. > h`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// A polynomial variable. Indices are 1-based.
///
/// The derived `Ord` is the variable ranking: earlier means higher ranked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    B(u8),
    X(u8),
    Q(u8),
    H,
}

impl Var {
    pub fn weight(self) -> u32 {
        match self {
            Var::Q(_) => 4,
            _ => 2,
        }
    }

    pub fn name(self) -> String {
        match self {
            Var::B(i) => format!("b{i}"),
            Var::X(i) => format!("x{i}"),
            Var::Q(i) => format!("q{i}"),
            Var::H => "h".to_string(),
        }
    }
}

impl Var {
    pub fn latex_name(self) -> String {
        match self {
            Var::B(i) => format!("b_{i}"),
            Var::X(i) => format!("x_{i}"),
            Var::Q(i) => format!("q_{i}"),
            Var::H => "h".to_string(),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Var {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "h" {
            return Ok(Var::H);
        }
        let (kind, idx) = s.split_at(1.min(s.len()));
        let idx: u8 = idx
            .parse()
            .ok()
            .filter(|&i| i > 0)
            .ok_or_else(|| ParseError::UnknownVariable(s.to_string()))?;
        match kind {
            "b" => Ok(Var::B(idx)),
            "x" => Ok(Var::X(idx)),
            "q" => Ok(Var::Q(idx)),
            _ => Err(ParseError::UnknownVariable(s.to_string())),
        }
    }
}

/// A power product of variables; zero exponents are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_exponents(exps: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut m = BTreeMap::new();
        for (v, e) in exps {
            *m.entry(v).or_insert(0) += e;
        }
        Monomial(m.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(&v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn weighted_degree(&self) -> u32 {
        self.0.iter().map(|&(v, e)| v.weight() * e).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        for &(v, e) in &self.0 {
            let d = other.exponent(v);
            if d > e {
                return None;
            }
            if e > d {
                out.push((v, e - d));
            }
        }
        if other.0.iter().any(|&(v, _)| self.exponent(v) == 0) {
            return None;
        }
        Some(Monomial(out))
    }

    /// Splits into the factor made of variables accepted by `keep` and the rest.
    pub fn split(&self, keep: impl Fn(Var) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.0.iter().partition(|(v, _)| keep(*v));
        (Monomial(a), Monomial(b))
    }

    fn render(&self) -> Vec<String> {
        self.render_with(false)
    }

    fn render_with(&self, latex: bool) -> Vec<String> {
        // q's, h, x's in ascending index order, then b's with descending index.
        let mut parts: Vec<(Var, u32)> = self.0.iter().filter(|(v, _)| !matches!(v, Var::B(_))).copied().collect();
        parts.sort_by_key(|(v, _)| match v {
            Var::Q(i) => (0, *i),
            Var::H => (1, 0),
            Var::X(i) => (2, *i),
            Var::B(_) => unreachable!(),
        });
        let mut bs: Vec<(Var, u32)> = self.0.iter().filter(|(v, _)| matches!(v, Var::B(_))).copied().collect();
        bs.reverse();
        parts
            .into_iter()
            .chain(bs)
            .map(|(v, e)| {
                let name = if latex { v.latex_name() } else { v.name() };
                match (e, latex) {
                    (1, _) => name,
                    (_, false) => format!("{name}^{e}"),
                    (_, true) if e < 10 => format!("{name}^{e}"),
                    (_, true) => format!("{name}^{{{e}}}"),
                }
            })
            .collect()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match self.weighted_degree().cmp(&other.weighted_degree()) {
            Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        loop {
            match (i, j) {
                (0, 0) => return Equal,
                (0, _) => return Greater,
                (_, 0) => return Less,
                _ => {}
            }
            let (va, ea) = a[i - 1];
            let (vb, eb) = b[j - 1];
            match va.cmp(&vb) {
                Greater => return Less,
                Less => return Greater,
                Equal => {
                    if ea != eb {
                        return eb.cmp(&ea);
                    }
                    i -= 1;
                    j -= 1;
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Result of [`Poly::weighted_degree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degree {
    /// The zero polynomial, homogeneous of every degree.
    Zero,
    Homogeneous(u32),
    Mixed,
}

impl Degree {
    /// True when compatible with homogeneity of degree `d`.
    pub fn admits(self, d: u32) -> bool {
        match self {
            Degree::Zero => true,
            Degree::Homogeneous(e) => e == d,
            Degree::Mixed => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(rat(n))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Rational::one(), Monomial::var(v))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl DoubleEndedIterator<Item = (Monomial, Rational)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    /// The rational value when the polynomial is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 if self.terms.contains_key(&Monomial::one()) => Some(self.constant_term()),
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn variables(&self) -> Vec<Var> {
        let mut vs: Vec<Var> = self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| *v)).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn weighted_degree(&self) -> Degree {
        let mut it = self.terms.keys().map(Monomial::weighted_degree);
        match it.next() {
            None => Degree::Zero,
            Some(d) => {
                if it.all(|e| e == d) {
                    Degree::Homogeneous(d)
                } else {
                    Degree::Mixed
                }
            }
        }
    }

    /// Simultaneous substitution of variables by polynomials.
    pub fn substitute(&self, bindings: &BTreeMap<Var, Poly>) -> Poly {
        if bindings.is_empty() {
            return self.clone();
        }
        let mut out = Poly::zero();
        let mut powers: BTreeMap<(Var, u32), Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut rest = Vec::new();
            let mut acc = Poly::constant(c.clone());
            for &(v, e) in &m.0 {
                match bindings.get(&v) {
                    Some(p) => {
                        let pw = powers.entry((v, e)).or_insert_with(|| p.pow(e));
                        acc = &acc * &*pw;
                        if acc.is_zero() {
                            break;
                        }
                    }
                    None => rest.push((v, e)),
                }
            }
            out += &acc.mul_monomial(&Monomial(rest));
        }
        out
    }

    /// Sets every `q_i` to zero.
    pub fn at_q_zero(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.0.iter().any(|(v, _)| matches!(v, Var::Q(_))))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `q_i d/dq_i`, the derivative along `t_i` where `q_i = e^{t_i}`.
    pub fn t_derivative(&self, i: u8) -> Poly {
        let v = Var::Q(i);
        Poly::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let e = m.exponent(v);
            (e > 0).then(|| (m.clone(), c * rat(e as i64)))
        }))
    }

    /// Splits by powers of `h`: element `k` holds the coefficient of `h^k`.
    pub fn split_h(&self) -> Vec<Poly> {
        let mut out: Vec<Poly> = Vec::new();
        for (m, c) in &self.terms {
            let k = m.exponent(Var::H) as usize;
            if out.len() <= k {
                out.resize(k + 1, Poly::zero());
            }
            let (_, rest) = m.split(|v| v == Var::H);
            out[k].add_term(rest, c.clone());
        }
        out
    }

    /// Largest `k` with `h^k` dividing every term (0 for the zero polynomial).
    pub fn h_valuation(&self) -> u32 {
        self.terms.keys().map(|m| m.exponent(Var::H)).min().unwrap_or(0)
    }

    /// Exact division by `h^k`; `None` when some term has a smaller `h` power.
    pub fn div_h_power(&self, k: u32) -> Option<Poly> {
        if k == 0 {
            return Some(self.clone());
        }
        let hk = Monomial(vec![(Var::H, k)]);
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(m.div(&hk)?, c.clone());
        }
        Some(Poly { terms })
    }

    /// True when every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Canonical text form, e.g. `b2^2*b1 - q2*b1`.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors = m.render();
            if !abs.is_one() || factors.is_empty() {
                factors.insert(0, abs.to_string());
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// LaTeX form with the same term order as [`Poly::to_text`].
    pub fn to_latex(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if neg {
                out.push('-');
            } else if idx > 0 {
                out.push('+');
            }
            let factors = m.render_with(true).concat();
            let coeff = if abs.is_integer() {
                abs.to_string()
            } else {
                format!("\\frac{{{}}}{{{}}}", abs.numer(), abs.denom())
            };
            if !abs.is_one() || factors.is_empty() {
                out.push_str(&coeff);
            }
            out.push_str(&factors);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("polynomial serialization is infallible")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl From<Var> for Poly {
    fn from(v: Var) -> Self {
        Poly::var(v)
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl<'a> AddAssign<&'a Poly> for Poly {
    fn add_assign(&mut self, rhs: &'a Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<'a> SubAssign<&'a Poly> for Poly {
    fn sub_assign(&mut self, rhs: &'a Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unexpected character `{0}` at offset {1}")]
    Unexpected(char, usize),
    #[error("unexpected end of input")]
    Eof,
    #[error("invalid number `{0}`")]
    Number(String),
    #[error("invalid JSON term: {0}")]
    Json(String),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && f(self.src[self.pos]) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut acc = Poly::zero();
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            if sign < 0 {
                acc -= &t;
            } else {
                acc += &t;
            }
            match self.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                Some(b')') | None => return Ok(acc),
                Some(c) => return Err(ParseError::Unexpected(c as char, self.pos)),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<Poly, ParseError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly, ParseError> {
        let base = match self.peek() {
            None => return Err(ParseError::Eof),
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.peek().map_or(ParseError::Eof, |c| ParseError::Unexpected(c as char, self.pos)));
                }
                self.pos += 1;
                p
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.take_while(|c| c.is_ascii_digit() || c == b'/');
                let r: Rational = num.parse().map_err(|_| ParseError::Number(num.to_string()))?;
                Poly::constant(r)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.take_while(|c| c.is_ascii_alphanumeric());
                Poly::var(name.parse()?)
            }
            Some(c) => return Err(ParseError::Unexpected(c as char, self.pos)),
        };
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.take_while(|c| c.is_ascii_digit());
            let e: u32 = e.parse().map_err(|_| ParseError::Number(e.to_string()))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }
}

impl FromStr for Poly {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let out = p.expr()?;
        match p.peek() {
            None => Ok(out),
            Some(c) => Err(ParseError::Unexpected(c as char, p.pos)),
        }
    }
}

/// Convenience parser for literals known to be well formed.
pub fn poly(s: &str) -> Poly {
    s.parse().unwrap_or_else(|e| panic!("bad polynomial literal {s:?}: {e}"))
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    exponents: Vec<(String, u32)>,
    num: String,
    den: String,
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<JsonTerm> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| JsonTerm {
                exponents: m.0.iter().map(|(v, e)| (v.name(), *e)).collect(),
                num: c.numer().to_string(),
                den: c.denom().to_string(),
            })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let terms = Vec::<JsonTerm>::deserialize(d)?;
        let mut p = Poly::zero();
        for t in terms {
            let mut exps = Vec::new();
            for (v, e) in t.exponents {
                exps.push((v.parse::<Var>().map_err(D::Error::custom)?, e));
            }
            let num: BigInt = t.num.parse().map_err(|_| D::Error::custom(ParseError::Number(t.num.clone())))?;
            let den: BigInt = t.den.parse().map_err(|_| D::Error::custom(ParseError::Number(t.den.clone())))?;
            if den.is_zero() {
                return Err(D::Error::custom(ParseError::Json("zero denominator".into())));
            }
            p.add_term(Monomial::from_exponents(exps), Rational::new(num, den));
        }
        Ok(p)
    }
}

/// Converts a small integral rational to `i64`, for reporting.
pub fn rational_to_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn difference_of_squares() {
        assert_eq!(&poly("b1 + q1") * &poly("b1 - q1"), poly("b1^2 - q1^2"));
        assert!((&Poly::zero() * &poly("b1 + 3*q2")).is_zero());
        assert_eq!(&poly("b2^2 - q2") * &poly("b1"), poly("b2^2*b1 - q2*b1"));
    }

    #[test]
    fn degrees() {
        assert_eq!(poly("q1*b2").weighted_degree(), Degree::Homogeneous(6));
        assert_eq!(poly("b1^2 + q1").weighted_degree(), Degree::Homogeneous(4));
        assert_eq!(poly("b1 + q1").weighted_degree(), Degree::Mixed);
        assert_eq!(Poly::zero().weighted_degree(), Degree::Zero);
        assert!(Degree::Zero.admits(17));
    }

    #[test]
    fn substitution() {
        assert_eq!(poly("b2^2 - q2").at_q_zero(), poly("b2^2"));
        let p = poly("q1*q2 + q2^2");
        assert_eq!(p.substitute(&BTreeMap::new()), p);
        let b: BTreeMap<_, _> = [(Var::Q(1), Poly::zero())].into();
        assert_eq!(p.substitute(&b), poly("q2^2"));
        let b: BTreeMap<_, _> = [(Var::B(1), poly("b2 + q1"))].into();
        assert_eq!(poly("b1^2").substitute(&b), poly("b2^2 + 2*q1*b2 + q1^2"));
    }

    #[test]
    fn t_derivatives() {
        assert_eq!(poly("q1^2*q2").t_derivative(1), poly("2*q1^2*q2"));
        assert!(poly("q2").t_derivative(1).is_zero());
        assert_eq!(poly("q1*q2 + q2^2").t_derivative(2), poly("q1*q2 + 2*q2^2"));
    }

    #[test]
    fn grevlex_on_b() {
        let m = |s: &str| poly(s).leading_term().unwrap().0.clone();
        assert!(m("b2") < m("b1"));
        assert!(m("b2^2") < m("b2*b1"));
        assert!(m("b2*b1") < m("b1^2"));
        assert!(m("b3*b1") < m("b2^2"));
        assert!(m("b2*b1") > m("q1"));
    }

    #[test]
    fn text_rendering() {
        let p = poly("b2^2*b1 - q2*b1");
        assert_eq!(p.to_text(), "b2^2*b1 - q2*b1");
        assert_eq!(poly("-2*q1*q2*q3 + 1/2").to_text(), "-2*q1*q2*q3 + 1/2");
        assert_eq!(Poly::zero().to_text(), "0");
        assert_eq!(poly("(b1 - b2)^2"), poly("b1^2 - 2*b1*b2 + b2^2"));
        assert!("b0".parse::<Poly>().is_err());
        assert!("y1".parse::<Poly>().is_err());
        assert!("b1 +".parse::<Poly>().is_err());
    }

    #[test]
    fn h_split() {
        let p = poly("q1 + h*q2 + 3*h^2");
        let parts = p.split_h();
        assert_eq!(parts, vec![poly("q1"), poly("q2"), poly("3")]);
        assert_eq!(poly("h*q1 + h^2").div_h_power(1), Some(poly("q1 + h")));
        assert_eq!(poly("h*q1 + q2").div_h_power(1), None);
    }

    fn arb_var() -> impl Strategy<Value = Var> {
        prop_oneof![
            (1u8..=3).prop_map(Var::B),
            (1u8..=3).prop_map(Var::Q),
            Just(Var::H),
        ]
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec((prop::collection::vec((arb_var(), 0u32..3), 0..3), -5i64..6, 1i64..4), 0..5).prop_map(
            |terms| {
                Poly::from_terms(
                    terms
                        .into_iter()
                        .map(|(m, n, d)| (Monomial::from_exponents(m), rat_frac(n, d))),
                )
            },
        )
    }

    fn arb_q_poly() -> impl Strategy<Value = Poly> {
        arb_poly().prop_map(|p| {
            let b: BTreeMap<_, _> = [
                (Var::B(1), Poly::var(Var::Q(1))),
                (Var::B(2), Poly::var(Var::Q(2))),
                (Var::B(3), Poly::one()),
                (Var::H, Poly::int(2)),
            ]
            .into();
            p.substitute(&b)
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn degree_is_additive(a in arb_poly(), b in arb_poly()) {
            if let (Degree::Homogeneous(x), Degree::Homogeneous(y)) = (a.weighted_degree(), b.weighted_degree()) {
                prop_assert!((&a * &b).weighted_degree().admits(x + y));
            }
        }

        #[test]
        fn leibniz(a in arb_q_poly(), b in arb_q_poly(), i in 1u8..=2) {
            let lhs = (&a * &b).t_derivative(i);
            let rhs = &(&a * &b.t_derivative(i)) + &(&b * &a.t_derivative(i));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn substitution_commutes(a in arb_poly()) {
            let q1: BTreeMap<_, _> = [(Var::Q(1), Poly::zero())].into();
            let q2: BTreeMap<_, _> = [(Var::Q(2), Poly::zero())].into();
            let both: BTreeMap<_, _> = [(Var::Q(1), Poly::zero()), (Var::Q(2), Poly::zero())].into();
            prop_assert_eq!(a.substitute(&q1).substitute(&q2), a.substitute(&both));
        }

        #[test]
        fn text_and_json_round_trip(a in arb_poly()) {
            prop_assert_eq!(a.to_text().parse::<Poly>().unwrap(), a.clone());
            let back: Poly = serde_json::from_value(a.to_json()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
