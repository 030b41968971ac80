//! The Ore algebra of differential operators in `h∂1, .., h∂r` over `Q[q, h]`.
//!
//! Operators are written in the letters `D_i = h∂_i` where `∂_i = q_i d/dq_i`,
//! always in left normal form (coefficients to the left). The only
//! nontrivial commutation rule is `D_i · q_j = q_j · D_i + δ_ij · h · q_j`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::gb::{self, Algebra, Element, Exp, GbError};
use crate::poly::{rat, Monomial, Poly, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OreOp {
    nvars: usize,
    terms: Element,
}

impl OreOp {
    pub fn zero(nvars: usize) -> Self {
        OreOp { nvars, terms: Element::new() }
    }

    pub fn one(nvars: usize) -> Self {
        OreOp::coeff(nvars, Poly::one())
    }

    /// Multiplication by a function of `q` and `h`.
    pub fn coeff(nvars: usize, c: Poly) -> Self {
        let mut terms = Element::new();
        gb::add_into(&mut terms, Exp::zero(nvars), c);
        OreOp { nvars, terms }
    }

    /// The letter `D_i = h∂_i` (1-based).
    pub fn d(nvars: usize, i: usize) -> Self {
        OreOp::monomial(nvars, Exp::unit(nvars, i - 1))
    }

    pub fn monomial(nvars: usize, e: Exp) -> Self {
        assert_eq!(e.0.len(), nvars);
        let mut terms = Element::new();
        terms.insert(e, Poly::one());
        OreOp { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exp, Poly)>) -> Self {
        let mut out = Element::new();
        for (e, c) in terms {
            assert_eq!(e.0.len(), nvars);
            gb::add_into(&mut out, e, c);
        }
        OreOp { nvars, terms: out }
    }

    pub(crate) fn from_element(nvars: usize, terms: Element) -> Self {
        OreOp { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending order of the `D`-monomial.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exp, &Poly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &Exp) -> Poly {
        gb::coefficient(&self.terms, e)
    }

    pub fn leading_exponent(&self) -> Option<&Exp> {
        gb::leading(&self.terms).map(|(e, _)| e)
    }

    pub fn add(&self, other: &OreOp) -> OreOp {
        let mut t = self.terms.clone();
        for (e, c) in &other.terms {
            gb::add_into(&mut t, e.clone(), c.clone());
        }
        OreOp { nvars: self.nvars, terms: t }
    }

    pub fn sub(&self, other: &OreOp) -> OreOp {
        let mut t = self.terms.clone();
        gb::sub_assign(&mut t, &other.terms);
        OreOp { nvars: self.nvars, terms: t }
    }

    /// Left multiplication by a function.
    pub fn scale_left(&self, c: &Poly) -> OreOp {
        OreOp { nvars: self.nvars, terms: gb::scale(&self.terms, c) }
    }

    /// The symbol map `D_i ↦ b_i` (keeps `h`).
    pub fn symbol(&self) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            out += &c.mul_monomial(&crate::commalg::b_monomial(e));
        }
        out
    }

    /// `lim_{h→0}` of the symbol.
    pub fn classical_limit(&self) -> Poly {
        let hz: BTreeMap<Var, Poly> = [(Var::H, Poly::zero())].into();
        self.symbol().substitute(&hz)
    }

    /// Applies the operator to a function of `q` and `h`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let mut g = f.clone();
            for (i, &k) in e.0.iter().enumerate() {
                for _ in 0..k {
                    g = &g.t_derivative(i as u8 + 1) * &Poly::var(Var::H);
                }
            }
            out += &(c * &g);
        }
        out
    }

    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in self.terms.iter().rev() {
            let dmono: Vec<String> = e
                .0
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("d{}", i + 1) } else { format!("d{}^{}", i + 1, k) })
                .collect();
            let ctext = c.to_text();
            let (neg, body) = if c.len() == 1 {
                let t = ctext.strip_prefix('-');
                (t.is_some(), t.unwrap_or(&ctext).to_string())
            } else {
                (false, format!("({ctext})"))
            };
            let term = if dmono.is_empty() {
                body
            } else if body == "1" {
                dmono.join("*")
            } else {
                format!("{}*{}", body, dmono.join("*"))
            };
            if parts.is_empty() {
                parts.push(if neg { format!("-{term}") } else { term });
            } else {
                parts.push(format!("{} {}", if neg { "-" } else { "+" }, term));
            }
        }
        parts.join(" ")
    }

    /// Parses the left-normal-form text produced by [`OreOp::to_text`].
    pub fn parse(nvars: usize, s: &str) -> Result<OreOp, crate::poly::ParseError> {
        // `d_i` letters commute with each other, so a left normal form can be
        // read as a commutative polynomial with `d_i` mapped to spare variables.
        let mut buf = String::with_capacity(s.len());
        let bytes = s.as_bytes();
        for (i, &c) in bytes.iter().enumerate() {
            let prev_alnum = i > 0 && bytes[i - 1].is_ascii_alphanumeric();
            if c == b'd' && !prev_alnum {
                buf.push('x');
            } else if c == b'x' {
                return Err(crate::poly::ParseError::UnknownVariable("x".into()));
            } else {
                buf.push(c as char);
            }
        }
        let p: Poly = buf.parse()?;
        let mut out = Element::new();
        for (m, c) in p.terms() {
            let (xs, rest) = m.split(|v| matches!(v, Var::X(_)));
            let mut e = Exp::zero(nvars);
            for &(v, k) in xs.exponents() {
                let Var::X(i) = v else { unreachable!() };
                if i as usize > nvars {
                    return Err(crate::poly::ParseError::UnknownVariable(format!("d{i}")));
                }
                e.0[i as usize - 1] = k;
            }
            gb::add_into(&mut out, e, Poly::term(c.clone(), rest));
        }
        Ok(OreOp { nvars, terms: out })
    }
}

impl fmt::Display for OreOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Serialize, Deserialize)]
struct JsonOreTerm {
    d: Vec<u32>,
    coeff: Poly,
}

#[derive(Serialize, Deserialize)]
struct JsonOreOp {
    nvars: usize,
    terms: Vec<JsonOreTerm>,
}

impl Serialize for OreOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        JsonOreOp {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(e, c)| JsonOreTerm { d: e.0.clone(), coeff: c.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OreOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = JsonOreOp::deserialize(d)?;
        let mut out = Element::new();
        for t in j.terms {
            if t.d.len() != j.nvars {
                return Err(D::Error::custom("exponent vector length does not match nvars"));
            }
            gb::add_into(&mut out, Exp(t.d), t.coeff);
        }
        Ok(OreOp { nvars: j.nvars, terms: out })
    }
}

/// Multiplication rule of the Ore algebra.
#[derive(Clone, Copy, Debug)]
pub struct OreAlgebra {
    pub nvars: usize,
}

fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

impl Algebra for OreAlgebra {
    fn shift(&self, u: &Exp, f: &Element) -> Element {
        if u.is_zero() {
            return f.clone();
        }
        let mut out = Element::new();
        let h = Var::H;
        for (a, c) in f {
            for (m, coef) in c.terms() {
                // D_i q^e = q^e (D_i + h e_i), so D^u q^e = q^e Π_i (D_i + h e_i)^{u_i}
                let es: Vec<u32> = (0..self.nvars).map(|i| m.exponent(Var::Q(i as u8 + 1))).collect();
                let mut ks = vec![0u32; self.nvars];
                loop {
                    let mut weight = 1i64;
                    for i in 0..self.nvars {
                        weight *= binomial(u.0[i], ks[i]) * (es[i] as i64).pow(ks[i]);
                    }
                    if weight != 0 {
                        let hk: u32 = ks.iter().sum();
                        let mono = m.mul(&Monomial::from_exponents([(h, hk)]));
                        let e = Exp(a.0.iter().zip(&u.0).zip(&ks).map(|((x, y), k)| x + y - k).collect());
                        gb::add_into(&mut out, e, Poly::term(coef * rat(weight), mono));
                    }
                    let mut i = 0;
                    loop {
                        if i == self.nvars {
                            break;
                        }
                        ks[i] += 1;
                        if ks[i] <= u.0[i] {
                            break;
                        }
                        ks[i] = 0;
                        i += 1;
                    }
                    if i == self.nvars {
                        break;
                    }
                }
            }
        }
        out
    }

    fn commutative(&self) -> bool {
        false
    }
}

/// Product in the Ore algebra, in left normal form.
pub fn ore_mul(a: &OreOp, b: &OreOp) -> OreOp {
    assert_eq!(a.nvars, b.nvars);
    let alg = OreAlgebra { nvars: a.nvars };
    let mut out = Element::new();
    for (e, c) in &a.terms {
        for (k, v) in alg.shift(e, &b.terms) {
            gb::add_into(&mut out, k, c * &v);
        }
    }
    OreOp { nvars: a.nvars, terms: out }
}

/// Reduced left Gröbner basis, grevlex with `∂1 > .. > ∂r`.
#[derive(Clone, Debug)]
pub struct LeftIdealBasis {
    nvars: usize,
    elements: Vec<Element>,
}

impl LeftIdealBasis {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn generators(&self) -> Vec<OreOp> {
        self.elements.iter().map(|e| OreOp::from_element(self.nvars, e.clone())).collect()
    }

    pub fn leading_exponents(&self) -> Vec<Exp> {
        self.elements.iter().map(|g| gb::leading(g).unwrap().0.clone()).collect()
    }
}

pub fn left_buchberger(gens: &[OreOp]) -> Result<LeftIdealBasis, GbError> {
    let nvars = gens.first().ok_or(GbError::NoGenerators)?.nvars;
    let elems: Vec<Element> = gens.iter().map(|g| g.terms.clone()).collect();
    let elements = gb::buchberger(&OreAlgebra { nvars }, &elems)?;
    Ok(LeftIdealBasis { nvars, elements })
}

/// Left normal form of `op` modulo the left ideal.
pub fn left_normal_form(op: &OreOp, basis: &LeftIdealBasis) -> Result<OreOp, GbError> {
    let (r, k) = gb::reduce(&OreAlgebra { nvars: basis.nvars }, &op.terms, &basis.elements)?;
    let mut out = Element::new();
    for (e, c) in r {
        let c = c.div_h_power(k).ok_or(GbError::HDenominator(k))?;
        out.insert(e, c);
    }
    Ok(OreOp { nvars: basis.nvars, terms: out })
}

/// The standard monomials `P_i` (ascending) paired with their symbols `c_i`.
pub fn standard_operator_basis(basis: &LeftIdealBasis) -> Result<Vec<(OreOp, Poly)>, GbError> {
    let heads = basis.leading_exponents();
    let sm = gb::standard_monomials(&heads, basis.nvars)?;
    Ok(sm
        .into_iter()
        .map(|e| {
            let c = Poly::term(num_rational::BigRational::one(), crate::commalg::b_monomial(&e));
            (OreOp::monomial(basis.nvars, e), c)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::poly;
    use proptest::prelude::*;

    fn op(n: usize, s: &str) -> OreOp {
        OreOp::parse(n, s).unwrap()
    }

    #[test]
    fn commutation_rules() {
        let q1 = OreOp::coeff(2, poly("q1"));
        let q2 = OreOp::coeff(2, poly("q2"));
        let d1 = OreOp::d(2, 1);
        assert_eq!(ore_mul(&d1, &q1), op(2, "q1*d1 + h*q1"));
        assert_eq!(ore_mul(&d1, &q2), op(2, "q2*d1"));
        let lhs = ore_mul(&ore_mul(&d1, &d1), &q1);
        assert_eq!(lhs, op(2, "q1*d1^2 + 2*h*q1*d1 + h^2*q1"));
    }

    /// Acting on test functions `q^a` checks the commutation rule
    /// independently of the multiplication code.
    #[test]
    fn product_matches_action_on_monomials() {
        let d1 = OreOp::d(2, 1);
        let a = ore_mul(&ore_mul(&d1, &d1), &OreOp::coeff(2, poly("q1")));
        for f in ["q1^3*q2", "q2^2", "1", "q1*q2^4 + 5*q1^2"] {
            let f = poly(f);
            let direct = d1.apply(&d1.apply(&(&poly("q1") * &f)));
            assert_eq!(a.apply(&f), direct);
        }
        // (h∂_i)(q^a) = h·a_i·q^a
        assert_eq!(d1.apply(&poly("q1^3*q2")), poly("3*h*q1^3*q2"));
    }

    #[test]
    fn text_round_trip() {
        let p = op(2, "(q1 + h)*d1^2 - q2*d2 + 3");
        assert_eq!(op(2, &p.to_text()), p);
        let back: OreOp = serde_json::from_value(serde_json::to_value(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(OreOp::parse(2, "d3").is_err());
    }

    #[test]
    fn gl2_single_generator() {
        let g = op(1, "d1^2 - q1");
        let basis = left_buchberger(std::slice::from_ref(&g)).unwrap();
        assert_eq!(basis.generators(), vec![g]);
        let nf = left_normal_form(&op(1, "d1^2"), &basis).unwrap();
        assert_eq!(nf, op(1, "q1"));
        let p = op(1, "d1");
        assert_eq!(left_normal_form(&p, &basis).unwrap(), p);
        let sb = standard_operator_basis(&basis).unwrap();
        assert_eq!(sb.iter().map(|(p, _)| p.to_text()).collect::<Vec<_>>(), vec!["1", "d1"]);
        assert_eq!(sb.iter().map(|(_, c)| c.to_text()).collect::<Vec<_>>(), vec!["1", "b1"]);
    }

    fn gl3() -> LeftIdealBasis {
        left_buchberger(&[
            op(2, "d1^2 + d2^2 - d1*d2 - q1 - q2"),
            op(2, "d1*d2^2 - d1^2*d2 + q1*d2 - q2*d1"),
        ])
        .unwrap()
    }

    #[test]
    fn gl3_standard_monomials() {
        let sb = standard_operator_basis(&gl3()).unwrap();
        let ps: Vec<String> = sb.iter().map(|(p, _)| p.to_text()).collect();
        assert_eq!(ps, vec!["1", "d2", "d1", "d2^2", "d1*d2", "d1*d2^2"]);
        let cs: Vec<String> = sb.iter().map(|(_, c)| c.to_text()).collect();
        assert_eq!(cs, vec!["1", "b2", "b1", "b2^2", "b2*b1", "b2^2*b1"]);
    }

    #[test]
    fn gl3_sixth_column_of_second_direction() {
        let basis = gl3();
        let p = ore_mul(&OreOp::d(2, 2), &op(2, "d1*d2^2"));
        let nf = left_normal_form(&p, &basis).unwrap();
        let sb = standard_operator_basis(&basis).unwrap();
        let col: Vec<Poly> = sb
            .iter()
            .map(|(p, _)| nf.coefficient(p.leading_exponent().unwrap()).split_h().first().cloned().unwrap_or_default())
            .collect();
        let expect: Vec<Poly> = ["q1*q2 + q2^2", "0", "0", "-q2", "2*q2", "0"].iter().map(|s| poly(s)).collect();
        assert_eq!(col, expect);
    }

    #[test]
    fn generators_reduce_to_zero() {
        let basis = gl3();
        for g in basis.generators() {
            assert!(left_normal_form(&g, &basis).unwrap().is_zero());
        }
        let x = op(2, "(q1 + h)*d2 + q2^2");
        for g in basis.generators() {
            let m = ore_mul(&x, &g);
            assert!(left_normal_form(&m, &basis).unwrap().is_zero());
        }
    }

    fn arb_op() -> impl Strategy<Value = OreOp> {
        let coeff = prop::sample::select(vec!["1", "q1", "q2", "h", "q1*q2", "2*q1 - h", "q2^2"]);
        prop::collection::vec(((0u32..3, 0u32..3), coeff, -3i64..4), 1..4).prop_map(|ts| {
            OreOp::from_terms(
                2,
                ts.into_iter().map(|((a, b), c, k)| (Exp(vec![a, b]), poly(c).scale(&rat(k)))),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn associativity(a in arb_op(), b in arb_op(), c in arb_op()) {
            prop_assert_eq!(ore_mul(&ore_mul(&a, &b), &c), ore_mul(&a, &ore_mul(&b, &c)));
        }

        #[test]
        fn left_multiples_vanish(x in arb_op()) {
            let basis = gl3();
            for g in basis.generators() {
                prop_assert!(left_normal_form(&ore_mul(&x, &g), &basis).unwrap().is_zero());
            }
        }
    }
}
