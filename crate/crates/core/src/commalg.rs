//! Commutative Gröbner bases in `b1..br` with `q` (and `h`) as coefficient
//! parameters.
//!
//! Two coefficient modes are supported. In parametric mode the coefficients
//! stay in `Q[q]`; this works as long as every leading coefficient that shows
//! up is a rational, which holds for the flag-manifold relations in grevlex.
//! In specialized mode the `q`'s are replaced by rationals up front.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::gb::{self, Algebra, Element, Exp, GbError};
use crate::poly::{Monomial, Poly, Rational, Var};

/// Graded reverse lexicographic order on `b1 > b2 > .. > br`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    pub nvars: usize,
}

impl MonomialOrder {
    pub fn grevlex(nvars: usize) -> Self {
        MonomialOrder { nvars }
    }

    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        b_exp(a, self.nvars).cmp(&b_exp(b, self.nvars))
    }
}

/// `grevlex_compare` for monomials in the `b` variables.
pub fn grevlex_compare(a: &Monomial, b: &Monomial, nvars: usize) -> Ordering {
    MonomialOrder::grevlex(nvars).compare(a, b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoefficientMode {
    Parametric,
    /// Each listed `q` variable is replaced by the given rational.
    Specialized(BTreeMap<Var, Rational>),
}

impl CoefficientMode {
    /// All of `q1..qr` set to zero.
    pub fn classical(nvars: usize) -> Self {
        CoefficientMode::Specialized((1..=nvars as u8).map(|i| (Var::Q(i), Rational::from_integer(0.into()))).collect())
    }

    fn apply(&self, p: &Poly) -> Poly {
        match self {
            CoefficientMode::Parametric => p.clone(),
            CoefficientMode::Specialized(vals) => {
                let b: BTreeMap<Var, Poly> = vals.iter().map(|(v, c)| (*v, Poly::constant(c.clone()))).collect();
                p.substitute(&b)
            }
        }
    }
}

struct Commutative;

impl Algebra for Commutative {
    fn shift(&self, u: &Exp, f: &Element) -> Element {
        f.iter().map(|(e, c)| (e.add(u), c.clone())).collect()
    }

    fn commutative(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    pub generators: Vec<Poly>,
    pub order: MonomialOrder,
    pub mode: CoefficientMode,
    elements: Vec<Element>,
}

fn b_exp(m: &Monomial, nvars: usize) -> Exp {
    let mut e = Exp::zero(nvars);
    for &(v, k) in m.exponents() {
        if let Var::B(i) = v {
            e.0[i as usize - 1] = k;
        }
    }
    e
}

pub fn b_monomial(e: &Exp) -> Monomial {
    Monomial::from_exponents(e.0.iter().enumerate().map(|(i, &k)| (Var::B(i as u8 + 1), k)))
}

fn to_element(p: &Poly, nvars: usize) -> Element {
    let mut out = Element::new();
    for (m, c) in p.terms() {
        let (bpart, rest) = m.split(|v| matches!(v, Var::B(_)));
        gb::add_into(&mut out, b_exp(&bpart, nvars), Poly::term(c.clone(), rest));
    }
    out
}

fn from_element(f: &Element) -> Poly {
    let mut out = Poly::zero();
    for (e, c) in f {
        out += &c.mul_monomial(&b_monomial(e));
    }
    out
}

pub fn buchberger(gens: &[Poly], order: MonomialOrder, mode: CoefficientMode) -> Result<GroebnerBasis, GbError> {
    let elems: Vec<Element> = gens.iter().map(|g| to_element(&mode.apply(g), order.nvars)).collect();
    let elements = gb::buchberger(&Commutative, &elems)?;
    Ok(GroebnerBasis {
        generators: elements.iter().map(from_element).collect(),
        order,
        mode,
        elements,
    })
}

impl GroebnerBasis {
    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.elements.iter().map(|g| b_monomial(gb::leading(g).unwrap().0)).collect()
    }

    /// Remainder of `p` supported on standard monomials.
    pub fn normal_form(&self, p: &Poly) -> Poly {
        let f = to_element(&self.mode.apply(p), self.order.nvars);
        // leading coefficients are rationals, so no h-scaling can occur
        let (r, k) = gb::reduce(&Commutative, &f, &self.elements).expect("basis has unit leading coefficients");
        debug_assert_eq!(k, 0);
        from_element(&r)
    }

    /// Standard monomials in ascending grevlex order.
    pub fn standard_monomials(&self) -> Result<Vec<Monomial>, GbError> {
        let heads: Vec<Exp> = self.elements.iter().map(|g| gb::leading(g).unwrap().0.clone()).collect();
        Ok(gb::standard_monomials(&heads, self.order.nvars)?.iter().map(b_monomial).collect())
    }

    /// Coordinates of the normal form of `p` against `basis`.
    ///
    /// Panics if the normal form has support outside `basis`.
    pub fn coordinates(&self, p: &Poly, basis: &[Monomial]) -> Vec<Poly> {
        let f = to_element(&self.normal_form(p), self.order.nvars);
        let index: BTreeMap<Exp, usize> = basis.iter().enumerate().map(|(i, m)| (b_exp(m, self.order.nvars), i)).collect();
        let mut out = vec![Poly::zero(); basis.len()];
        for (e, c) in f {
            let i = *index.get(&e).expect("normal form outside the standard basis");
            out[i] = c;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::poly;

    fn classical3() -> GroebnerBasis {
        let gens = [poly("b1^2 + b2^2 - b1*b2 - q1 - q2"), poly("b1*b2^2 - b1^2*b2 + q1*b2 - q2*b1")];
        buchberger(&gens, MonomialOrder::grevlex(2), CoefficientMode::classical(2)).unwrap()
    }

    #[test]
    fn compare_examples() {
        let m = |s: &str| poly(s).leading_term().unwrap().0.clone();
        assert_eq!(grevlex_compare(&m("b2"), &m("b1"), 2), Ordering::Less);
        assert_eq!(grevlex_compare(&m("b2^2"), &m("b2*b1"), 2), Ordering::Less);
        assert_eq!(grevlex_compare(&m("b2*b1"), &m("b2*b1"), 2), Ordering::Equal);
    }

    #[test]
    fn single_generator_is_reduced() {
        let gb = buchberger(&[poly("b1^2 - q1")], MonomialOrder::grevlex(1), CoefficientMode::Parametric).unwrap();
        assert_eq!(gb.generators, vec![poly("b1^2 - q1")]);
        assert_eq!(gb.normal_form(&poly("b1^2")), poly("q1"));
        assert_eq!(gb.normal_form(&poly("b1")), poly("b1"));
        let sm = gb.standard_monomials().unwrap();
        assert_eq!(sm, vec![Monomial::one(), Monomial::var(Var::B(1))]);
    }

    #[test]
    fn linear_generator() {
        let gb = buchberger(&[poly("b1")], MonomialOrder::grevlex(1), CoefficientMode::Parametric).unwrap();
        assert_eq!(gb.generators, vec![poly("b1")]);
        assert_eq!(gb.normal_form(&poly("3*b1^4 + 2*b1 + 7")), poly("7"));
    }

    #[test]
    fn classical_gl3_standard_monomials() {
        let gb = classical3();
        let sm: Vec<String> = gb.standard_monomials().unwrap().iter().map(|m| Poly::term(crate::poly::rat(1), m.clone()).to_text()).collect();
        assert_eq!(sm, vec!["1", "b2", "b1", "b2^2", "b2*b1", "b2^2*b1"]);
    }

    #[test]
    fn parametric_gl3_matches_classical_staircase() {
        let gens = [poly("b1^2 + b2^2 - b1*b2 - q1 - q2"), poly("b1*b2^2 - b1^2*b2 + q1*b2 - q2*b1")];
        let gb = buchberger(&gens, MonomialOrder::grevlex(2), CoefficientMode::Parametric).unwrap();
        assert_eq!(gb.standard_monomials().unwrap(), classical3().standard_monomials().unwrap());
        for g in &gens {
            assert!(gb.normal_form(g).is_zero());
        }
    }

    #[test]
    fn non_finite_quotient() {
        let gb = buchberger(&[poly("b1^2")], MonomialOrder::grevlex(2), CoefficientMode::Parametric).unwrap();
        assert!(matches!(gb.standard_monomials(), Err(GbError::NotFinite(2))));
    }

    #[test]
    fn q_dependent_leading_coefficient_is_rejected() {
        let r = buchberger(&[poly("q1*b1 - 1")], MonomialOrder::grevlex(1), CoefficientMode::Parametric);
        assert!(matches!(r, Err(GbError::CoefficientDivision(_))));
        let vals = [(Var::Q(1), Rational::from_integer(2.into()))].into();
        let gb = buchberger(&[poly("q1*b1 - 1")], MonomialOrder::grevlex(1), CoefficientMode::Specialized(vals)).unwrap();
        assert_eq!(gb.normal_form(&poly("b1")), poly("1/2"));
    }

    /// Naive multivariate division of `b1 * b2^2*b1` using only the two
    /// classical relations (no basis completion), then finished against the
    /// reduced basis; both routes must agree on the remainder.
    #[test]
    fn classical_product_against_division() {
        let gb = classical3();
        let p = poly("b1 * b2^2*b1");
        let nf = gb.normal_form(&p);
        // b2^2*b1^2: b1^2 = b1*b2 - b2^2 at q = 0, so
        // b2^2*b1^2 = b2^3*b1 - b2^4, and b2^3 = 0 in the classical ring.
        let b2_cubed = gb.normal_form(&poly("b2^3"));
        assert!(b2_cubed.is_zero());
        assert!(nf.is_zero());
        let top = gb.normal_form(&poly("b1*b2*b1"));
        assert_eq!(top, poly("b2^2*b1"));
    }
}
