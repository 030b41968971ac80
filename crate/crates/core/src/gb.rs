//! Buchberger machinery shared by the commutative and Ore-algebra engines.
//!
//! An element is a finite sum `Σ c_a(q,h) · X^a` with coefficients on the
//! left of the main monomials `X^a`. The only difference between the two
//! algebras is how a main monomial is moved past a coefficient, which is
//! abstracted by [`Algebra::shift`].

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::One;
use thiserror::Error;

use crate::poly::{Poly, Rational, Var};

/// Exponent vector of the main variables. Index 0 is the highest-ranked
/// variable; `Ord` is graded reverse lexicographic with unit weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Exp(pub Vec<u32>);

impl Exp {
    pub fn zero(nvars: usize) -> Self {
        Exp(vec![0; nvars])
    }

    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = Exp::zero(nvars);
        e.0[i] = 1;
        e
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn divides(&self, other: &Exp) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &Exp) -> Exp {
        Exp(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Exp) -> Exp {
        Exp(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Exp) -> Exp {
        Exp(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Exp) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            if a != b {
                return b.cmp(a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub type Element = BTreeMap<Exp, Poly>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GbError {
    /// A leading coefficient is not a rational multiple of a power of `h`.
    #[error("cannot divide by leading coefficient `{0}`; use the specialized coefficient mode")]
    CoefficientDivision(String),
    #[error("quotient is not finite-dimensional (no pure power of variable {0} among leading monomials)")]
    NotFinite(usize),
    #[error("normal form has an h-denominator h^{0} that does not cancel")]
    HDenominator(u32),
    #[error("empty generator list")]
    NoGenerators,
}

pub trait Algebra {
    /// `X^u · f`, rewritten with coefficients on the left.
    fn shift(&self, u: &Exp, f: &Element) -> Element;
    /// Whether the main variables commute with coefficients.
    fn commutative(&self) -> bool;
}

pub fn add_into(acc: &mut Element, e: Exp, c: Poly) {
    if c.is_zero() {
        return;
    }
    match acc.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += &c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

pub fn leading(f: &Element) -> Option<(&Exp, &Poly)> {
    f.iter().next_back()
}

pub fn scale(f: &Element, c: &Poly) -> Element {
    let mut out = Element::new();
    for (e, a) in f {
        add_into(&mut out, e.clone(), a * c);
    }
    out
}

pub fn sub_assign(acc: &mut Element, f: &Element) {
    for (e, c) in f {
        add_into(acc, e.clone(), -c);
    }
}

fn h_pow(k: u32) -> Poly {
    Poly::var(Var::H).pow(k)
}

/// Splits a leading coefficient as `λ·h^k`.
pub fn unit_part(c: &Poly) -> Result<(Rational, u32), GbError> {
    if c.len() == 1 {
        let (m, a) = c.terms().next().unwrap();
        if m.exponents().iter().all(|(v, _)| *v == Var::H) {
            return Ok((a.clone(), m.exponent(Var::H)));
        }
    }
    Err(GbError::CoefficientDivision(c.to_text()))
}

/// Full reduction of `f` modulo `basis`. Returns the remainder scaled by
/// `h^k` together with `k`; the scaling only happens when some basis element
/// has an `h`-power in its leading coefficient.
pub fn reduce<A: Algebra>(alg: &A, f: &Element, basis: &[Element]) -> Result<(Element, u32), GbError> {
    let heads: Vec<(Exp, Rational, u32)> = basis
        .iter()
        .map(|g| {
            let (e, c) = leading(g).expect("zero element in basis");
            let (lam, k) = unit_part(c)?;
            Ok((e.clone(), lam, k))
        })
        .collect::<Result<_, GbError>>()?;
    let mut p = f.clone();
    let mut rem = Element::new();
    let mut shift = 0u32;
    while let Some((a, c)) = p.iter().next_back().map(|(a, c)| (a.clone(), c.clone())) {
        match heads.iter().position(|(e, _, _)| e.divides(&a)) {
            Some(idx) => {
                let (e, lam, k) = &heads[idx];
                if *k > 0 {
                    let hk = h_pow(*k);
                    p = scale(&p, &hk);
                    rem = scale(&rem, &hk);
                    shift += k;
                }
                let u = a.sub(e);
                let t = alg.shift(&u, &basis[idx]);
                let factor = c.scale(&(Rational::one() / lam));
                sub_assign(&mut p, &scale(&t, &factor));
            }
            None => {
                let c = p.remove(&a).unwrap();
                add_into(&mut rem, a, c);
            }
        }
    }
    Ok((rem, shift))
}

/// Removes the common `h`-power content and makes the leading rational 1.
pub fn normalize(f: &Element) -> Result<Element, GbError> {
    let Some((_, lc)) = leading(f) else {
        return Ok(Element::new());
    };
    let (lam, _) = unit_part(lc)?;
    let val = f.values().map(Poly::h_valuation).min().unwrap_or(0);
    let inv = Rational::one() / lam;
    Ok(f
        .iter()
        .map(|(e, c)| (e.clone(), c.div_h_power(val).unwrap().scale(&inv)))
        .collect())
}

fn s_element<A: Algebra>(alg: &A, f: &Element, g: &Element) -> Result<Element, GbError> {
    let (ef, cf) = leading(f).unwrap();
    let (eg, cg) = leading(g).unwrap();
    let (lf, kf) = unit_part(cf)?;
    let (lg, kg) = unit_part(cg)?;
    let l = ef.lcm(eg);
    // bring both leading coefficients to h^max(kf, kg)
    let k = kf.max(kg);
    let sf = scale(&alg.shift(&l.sub(ef), f), &Poly::term(Rational::one() / lf, h_mono(k - kf)));
    let sg = scale(&alg.shift(&l.sub(eg), g), &Poly::term(Rational::one() / lg, h_mono(k - kg)));
    let mut out = sf;
    sub_assign(&mut out, &sg);
    Ok(out)
}

fn h_mono(k: u32) -> crate::poly::Monomial {
    crate::poly::Monomial::from_exponents([(Var::H, k)])
}

/// Buchberger with the normal selection strategy (smallest lcm degree,
/// ties broken by pair index), followed by interreduction.
pub fn buchberger<A: Algebra>(alg: &A, gens: &[Element]) -> Result<Vec<Element>, GbError> {
    let mut basis: Vec<Element> = Vec::new();
    for g in gens {
        let n = normalize(g)?;
        if !n.is_empty() {
            basis.push(n);
        }
    }
    if basis.is_empty() {
        return Err(GbError::NoGenerators);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    while !pairs.is_empty() {
        let best = pairs
            .iter()
            .enumerate()
            .min_by_key(|(_, &(i, j))| {
                let l = leading(&basis[i]).unwrap().0.lcm(leading(&basis[j]).unwrap().0);
                (l.degree(), i, j)
            })
            .map(|(k, _)| k)
            .unwrap();
        let (i, j) = pairs.remove(best);
        let (ei, ej) = (leading(&basis[i]).unwrap().0, leading(&basis[j]).unwrap().0);
        if alg.commutative() && ei.coprime(ej) {
            continue;
        }
        let s = s_element(alg, &basis[i], &basis[j])?;
        let (r, _) = reduce(alg, &s, &basis)?;
        if r.is_empty() {
            continue;
        }
        let r = normalize(&r)?;
        let idx = basis.len();
        basis.push(r);
        for i in 0..idx {
            pairs.push((i, idx));
        }
    }
    interreduce(alg, basis)
}

/// Turns a Gröbner basis into the reduced one, sorted by leading monomial.
pub fn interreduce<A: Algebra>(alg: &A, mut basis: Vec<Element>) -> Result<Vec<Element>, GbError> {
    basis.sort_by(|a, b| leading(a).unwrap().0.cmp(leading(b).unwrap().0));
    let mut minimal: Vec<Element> = Vec::new();
    for g in basis {
        let e = leading(&g).unwrap().0;
        if minimal.iter().any(|m| leading(m).unwrap().0.divides(e)) {
            continue;
        }
        minimal.push(g);
    }
    let mut out = Vec::with_capacity(minimal.len());
    for idx in 0..minimal.len() {
        let (lead_e, lead_c) = leading(&minimal[idx]).map(|(e, c)| (e.clone(), c.clone())).unwrap();
        let mut tail = minimal[idx].clone();
        tail.remove(&lead_e);
        let others: Vec<Element> = minimal
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != idx)
            .map(|(_, g)| g.clone())
            .collect();
        let (r, k) = reduce(alg, &tail, &others)?;
        let mut g = r;
        add_into(&mut g, lead_e, &lead_c * &h_pow(k));
        out.push(normalize(&g)?);
    }
    Ok(out)
}

/// Monomials not divisible by any of `heads`, ascending.
pub fn standard_monomials(heads: &[Exp], nvars: usize) -> Result<Vec<Exp>, GbError> {
    let mut bounds = Vec::with_capacity(nvars);
    for i in 0..nvars {
        let b = heads
            .iter()
            .filter(|e| e.0.iter().enumerate().all(|(j, &x)| j == i || x == 0) && e.0[i] > 0)
            .map(|e| e.0[i])
            .min()
            .ok_or(GbError::NotFinite(i + 1))?;
        bounds.push(b);
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; nvars];
    loop {
        let e = Exp(cur.clone());
        if !heads.iter().any(|h| h.divides(&e)) {
            out.push(e);
        }
        let mut k = 0;
        loop {
            if k == nvars {
                out.sort();
                return Ok(out);
            }
            cur[k] += 1;
            if cur[k] < bounds[k] {
                break;
            }
            cur[k] = 0;
            k += 1;
        }
    }
}

/// Coefficient of `X^e` in `f`.
pub fn coefficient(f: &Element, e: &Exp) -> Poly {
    f.get(e).cloned().unwrap_or_else(Poly::zero)
}

pub fn is_zero_element(f: &Element) -> bool {
    f.values().all(Poly::is_zero)
}
