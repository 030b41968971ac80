//! Schubert polynomials, the change of basis to them and their quantum
//! deformations `R = Q₀⁻¹C`.

use std::collections::{BTreeMap, VecDeque};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::birkhoff::{solve_lplus, BirkhoffError, LPlus};
use crate::connection::{ConnectionData, ConnectionError, FlagContext};
use crate::matrix::{MatrixError, PolyMatrix, RatMatrix};
use crate::orealg::{left_normal_form, ore_mul, LeftIdealBasis, OreOp};
use crate::poly::{Monomial, Poly, Rational, Var};
use crate::quantum::{hatted, ClassicalRing, QuantumError};

#[derive(Debug, Error)]
pub enum SchubertError {
    #[error("divided differences disagree at {0:?}")]
    WordDependence(Vec<u8>),
    #[error("Schubert class {0:?} is not homogeneous of the expected degree")]
    Degree(Vec<u8>),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Birkhoff(#[from] BirkhoffError),
    #[error(transparent)]
    Gb(#[from] crate::gb::GbError),
}

/// Number of inversions of a permutation in one-line notation.
pub fn length(w: &[u8]) -> usize {
    (0..w.len()).map(|i| (i + 1..w.len()).filter(|&j| w[i] > w[j]).count()).sum()
}

pub fn longest(n: usize) -> Vec<u8> {
    (1..=n as u8).rev().collect()
}

pub fn inverse(w: &[u8]) -> Vec<u8> {
    let mut out = vec![0; w.len()];
    for (i, &v) in w.iter().enumerate() {
        out[v as usize - 1] = i as u8 + 1;
    }
    out
}

/// `w₀w` in one-line notation.
pub fn complement(w: &[u8]) -> Vec<u8> {
    let n = w.len() as u8;
    w.iter().map(|&v| n + 1 - v).collect()
}

/// `w₀w⁻¹w₀`, the ordering key within a length.
fn order_key(w: &[u8]) -> Vec<u8> {
    let n = w.len();
    let inv = inverse(w);
    (0..n).map(|i| n as u8 + 1 - inv[n - 1 - i]).collect()
}

/// `(f - s_i f)/(x_i - x_{i+1})`.
pub fn divided_difference(f: &Poly, i: u8) -> Poly {
    let (a, b) = (Var::X(i), Var::X(i + 1));
    let mut out = Poly::zero();
    for (m, c) in f.terms() {
        let (ea, eb) = (m.exponent(a), m.exponent(b));
        if ea == eb {
            continue;
        }
        let rest = Monomial::from_exponents(m.exponents().iter().copied().filter(|&(v, _)| v != a && v != b));
        let (lo, d, sign) = if ea > eb { (eb, ea - eb, c.clone()) } else { (ea, eb - ea, -c) };
        for k in 0..d {
            let mono = rest.mul(&Monomial::from_exponents([(a, lo + d - 1 - k), (b, lo + k)]));
            out.add_term(mono, sign.clone());
        }
    }
    out
}

/// `x_k ↦ b_{n-k} - b_{n-k+1}` with `b_n = 0`, and `q_k ↦ q_{n-k}`.
pub fn to_b_variables(p: &Poly, n: usize) -> Poly {
    let mut bind = BTreeMap::new();
    for k in 1..n {
        let mut v = Poly::var(Var::B((n - k) as u8));
        if k > 1 {
            v -= &Poly::var(Var::B((n - k + 1) as u8));
        }
        bind.insert(Var::X(k as u8), v);
        bind.insert(Var::Q(k as u8), Poly::var(Var::Q((n - k) as u8)));
    }
    p.substitute(&bind)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchubertClass {
    pub perm: Vec<u8>,
    pub x_form: Poly,
    pub b_form: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchubertFamily {
    pub n: usize,
    pub classes: Vec<SchubertClass>,
}

impl SchubertFamily {
    pub fn position(&self, w: &[u8]) -> Option<usize> {
        self.classes.iter().position(|c| c.perm == w)
    }
}

/// Descends from `𝔖_{w₀}` along every covering edge of the weak order and
/// asserts that all paths agree.
pub fn schubert_polynomials(n: usize) -> Result<SchubertFamily, SchubertError> {
    assert!(n >= 2);
    let w0 = longest(n);
    let top = Poly::from_terms([(Monomial::from_exponents((1..n).map(|k| (Var::X(k as u8), (n - k) as u32))), Rational::from_integer(1.into()))]);
    let mut found: BTreeMap<Vec<u8>, Poly> = BTreeMap::new();
    found.insert(w0.clone(), top);
    let mut queue = VecDeque::from([w0]);
    while let Some(w) = queue.pop_front() {
        let f = found[&w].clone();
        for i in 0..n - 1 {
            if w[i] < w[i + 1] {
                continue;
            }
            let mut v = w.clone();
            v.swap(i, i + 1);
            let g = divided_difference(&f, i as u8 + 1);
            match found.get(&v) {
                Some(prev) if *prev != g => return Err(SchubertError::WordDependence(v)),
                Some(_) => {}
                None => {
                    found.insert(v.clone(), g);
                    queue.push_back(v);
                }
            }
        }
    }
    let mut classes: Vec<SchubertClass> = found
        .into_iter()
        .map(|(perm, x_form)| {
            let b_form = to_b_variables(&x_form, n);
            SchubertClass { perm, x_form, b_form }
        })
        .collect();
    classes.sort_by_key(|c| (length(&c.perm), order_key(&c.perm)));
    for c in &classes {
        let deg = 2 * length(&c.perm) as u32;
        if !c.x_form.weighted_degree().admits(deg) || !c.b_form.weighted_degree().admits(deg) {
            return Err(SchubertError::Degree(c.perm.clone()));
        }
    }
    Ok(SchubertFamily { n, classes })
}

/// Column `i` expands the `i`-th Schubert class in the basis `c`.
pub fn change_of_basis(fam: &SchubertFamily, ring: &ClassicalRing) -> Result<RatMatrix, SchubertError> {
    let dim = fam.classes.len();
    let mut entries = vec![vec![Rational::zero(); dim]; dim];
    for (i, c) in fam.classes.iter().enumerate() {
        for (k, v) in ring.coordinates(&c.b_form)?.into_iter().enumerate() {
            entries[k][i] = v;
        }
    }
    let c = RatMatrix { n: dim, entries };
    c.inverse()?;
    Ok(c)
}

/// Schubert classes written in the standard monomials, `Σ_k C_{ki} c_k`.
pub fn reduced_forms(c: &RatMatrix, ctx: &FlagContext) -> Vec<Poly> {
    hatted(&c.to_poly_matrix(), ctx)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantumSchubert {
    pub r: PolyMatrix,
    pub polys: Vec<Poly>,
}

/// `R = Q₀⁻¹C` and `ĉ'_i = Σ_k R_{ki} c_k`.
pub fn quantum_schubert(c: &RatMatrix, lp: &LPlus, ctx: &FlagContext) -> QuantumSchubert {
    let r = &lp.q0_inv * &c.to_poly_matrix();
    let polys = hatted(&r, ctx);
    QuantumSchubert { r, polys }
}

/// Connection matrices for the basis `P'_j = Σ_k C_{kj} P_k`, recomputed from
/// normal forms of `D_i·P'_j`.
pub fn primed_connection(basis: &LeftIdealBasis, ctx: &FlagContext, c: &RatMatrix) -> Result<ConnectionData, SchubertError> {
    let dim = ctx.dim();
    let c_inv = c.inverse()?.to_poly_matrix();
    let primed: Vec<OreOp> = (0..dim)
        .map(|j| {
            let mut acc = OreOp::zero(ctx.r);
            for k in 0..dim {
                let x = &c.entries[k][j];
                if !x.is_zero() {
                    acc = acc.add(&ctx.operators[k].scale_left(&Poly::constant(x.clone())));
                }
            }
            acc
        })
        .collect();
    let mut mats = Vec::with_capacity(ctx.r);
    for i in 1..=ctx.r {
        let mut m = PolyMatrix::zero(dim, dim);
        for (j, p) in primed.iter().enumerate() {
            let nf = left_normal_form(&ore_mul(&OreOp::d(ctx.r, i), p), basis)?;
            let mut col = vec![Poly::zero(); dim];
            for (e, x) in nf.terms() {
                let k = ctx
                    .index_of(e)
                    .ok_or_else(|| ConnectionError::OutsideBasis { direction: i, column: j, exponent: e.0.clone() })?;
                col[k] = x.clone();
            }
            m.set_column(j, c_inv.apply(&col));
        }
        mats.push(m);
    }
    Ok(ConnectionData::from_h_omega(&mats, ctx.m))
}

/// Solves the primed system and compares `Q'₀` with `C⁻¹Q₀C`.
pub fn conjugation_check(basis: &LeftIdealBasis, ctx: &FlagContext, c: &RatMatrix, lp: &LPlus) -> Result<bool, SchubertError> {
    let cd = primed_connection(basis, ctx, c)?;
    let primed = solve_lplus(&cd, ctx)?;
    let c_inv = c.inverse()?.to_poly_matrix();
    let want = &(&c_inv * &lp.q0) * &c.to_poly_matrix();
    Ok(primed.q0 == want)
}

/// Failures of `⟨𝔖_w, 𝔖_v⟩ = δ_{v, w₀w}` over complementary lengths.
pub fn duality_failures(fam: &SchubertFamily, pairing: &RatMatrix, c: &RatMatrix) -> Vec<String> {
    let dim = fam.classes.len();
    let top = length(&longest(fam.n));
    let mut out = Vec::new();
    for (a, wa) in fam.classes.iter().enumerate() {
        for (b, wb) in fam.classes.iter().enumerate() {
            if length(&wa.perm) + length(&wb.perm) != top {
                continue;
            }
            let mut val = Rational::zero();
            for k in 0..dim {
                for l in 0..dim {
                    val += &c.entries[k][a] * &pairing.entries[k][l] * &c.entries[l][b];
                }
            }
            let want = if complement(&wa.perm) == wb.perm { 1 } else { 0 };
            if val != Rational::from_integer(want.into()) {
                out.push(format!("<S{:?}, S{:?}> = {val}, expected {want}", wa.perm, wb.perm));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::birkhoff::gauge_check;
    use crate::connection::connection_matrices;
    use crate::orealg::left_buchberger;
    use crate::poly::{poly, rat};
    use crate::quantum::{full_product_table, poincare_pairing, quantum_evaluation, QuantumAction};
    use crate::toda::{quantize, quantum_relations};
    use proptest::prelude::*;

    fn swap(f: &Poly, i: u8) -> Poly {
        let bind = BTreeMap::from([(Var::X(i), Poly::var(Var::X(i + 1))), (Var::X(i + 1), Poly::var(Var::X(i)))]);
        f.substitute(&bind)
    }

    fn arb_x_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec((0u32..4, 0u32..4, 0u32..3, -5i64..5), 0..6).prop_map(|ts| {
            Poly::from_terms(ts.into_iter().map(|(a, b, c, k)| {
                (Monomial::from_exponents([(Var::X(1), a), (Var::X(2), b), (Var::X(3), c)]), rat(k))
            }))
        })
    }

    proptest! {
        #[test]
        fn divided_difference_inverts_multiplication(f in arb_x_poly(), i in 1u8..3) {
            let d = divided_difference(&f, i);
            let lhs = &(&Poly::var(Var::X(i)) - &Poly::var(Var::X(i + 1))) * &d;
            prop_assert_eq!(lhs, &f - &swap(&f, i));
        }
    }

    #[test]
    fn gl2_family() {
        let fam = schubert_polynomials(2).unwrap();
        let xs: Vec<String> = fam.classes.iter().map(|c| c.x_form.to_text()).collect();
        assert_eq!(xs, vec!["1", "x1"]);
    }

    #[test]
    fn substitution() {
        assert_eq!(to_b_variables(&poly("x1"), 3), poly("b2"));
        assert_eq!(to_b_variables(&poly("x1*x2"), 3), poly("b2*b1 - b2^2"));
        assert_eq!(to_b_variables(&poly("7/3"), 3), poly("7/3"));
        assert_eq!(to_b_variables(&poly("q1*x2"), 3), poly("q2*b1 - q2*b2"));
    }

    #[test]
    fn gl3_family_order() {
        let s = setup(3);
        let want: Vec<Poly> = ["1", "b2", "b1", "-b2^2 + b2*b1", "b2^2", "b2^2*b1"].iter().map(|s| poly(s)).collect();
        assert_eq!(reduced_forms(&s.c, &s.ctx), want);
        assert_eq!(s.fam.classes[5].b_form, poly("b2^2*b1 - b2^3"));
        let perms: Vec<Vec<u8>> = s.fam.classes.iter().map(|c| c.perm.clone()).collect();
        assert_eq!(perms, vec![vec![1, 2, 3], vec![2, 1, 3], vec![1, 3, 2], vec![2, 3, 1], vec![3, 1, 2], vec![3, 2, 1]]);
    }

    /// Every reduced word from `w₀` down to `w` gives the same polynomial.
    #[test]
    fn gl4_reduced_words() {
        let fam = schubert_polynomials(4).unwrap();
        assert_eq!(fam.classes.len(), 24);
        fn walk(w: Vec<u8>, f: Poly, seen: &mut BTreeMap<Vec<u8>, Vec<Poly>>) {
            seen.entry(w.clone()).or_default().push(f.clone());
            for i in 0..w.len() - 1 {
                if w[i] > w[i + 1] {
                    let mut v = w.clone();
                    v.swap(i, i + 1);
                    walk(v, divided_difference(&f, i as u8 + 1), seen);
                }
            }
        }
        let mut seen = BTreeMap::new();
        walk(longest(4), poly("x1^3*x2^2*x3"), &mut seen);
        for c in &fam.classes {
            let all = &seen[&c.perm];
            assert!(all.iter().all(|p| *p == c.x_form), "{:?}", c.perm);
        }
        assert!(seen[&vec![1, 2, 3, 4]].len() > 1);
        assert_eq!(fam.classes[0].x_form, poly("1"));
    }

    struct Setup {
        ctx: FlagContext,
        basis: LeftIdealBasis,
        ring: ClassicalRing,
        lp: LPlus,
        fam: SchubertFamily,
        c: RatMatrix,
    }

    fn setup(n: usize) -> Setup {
        let rs = quantum_relations(n);
        let basis = left_buchberger(&quantize(&rs)).unwrap();
        let ctx = FlagContext::new(n, &basis).unwrap();
        let cd = connection_matrices(&basis, &ctx).unwrap();
        let lp = solve_lplus(&cd, &ctx).unwrap();
        let ring = ClassicalRing::new(&rs, &ctx).unwrap();
        let fam = schubert_polynomials(n).unwrap();
        let c = change_of_basis(&fam, &ring).unwrap();
        Setup { ctx, basis, ring, lp, fam, c }
    }

    #[test]
    fn gl3_change_of_basis_and_r() {
        let s = setup(3);
        let mut want = RatMatrix::identity(6);
        want.entries[3][3] = rat(-1);
        want.entries[3][4] = rat(1);
        want.entries[4][3] = rat(1);
        want.entries[4][4] = rat(0);
        assert_eq!(s.c, want);
        let qs = quantum_schubert(&s.c, &s.lp, &s.ctx);
        let want: Vec<Poly> = ["1", "b2", "b1", "-b2^2 + b2*b1 + q2", "b2^2 - q2", "b2^2*b1 - q2*b1"].iter().map(|p| poly(p)).collect();
        assert_eq!(qs.polys, want);
        assert_eq!(qs.r.map(Poly::at_q_zero), s.c.to_poly_matrix());
        assert_eq!(qs.r.get(0, 3), &poly("q2"));
        assert_eq!(qs.r.get(0, 4), &poly("-q2"));
    }

    #[test]
    fn gl3_conjugation() {
        let s = setup(3);
        assert!(conjugation_check(&s.basis, &s.ctx, &s.c, &s.lp).unwrap());
    }

    #[test]
    fn quantum_schubert_evaluate_to_classes() {
        for n in 2..=4 {
            let s = setup(n);
            let cd = connection_matrices(&s.basis, &s.ctx).unwrap();
            let (hat, _) = gauge_check(&s.lp, &cd, &s.ctx);
            let action = QuantumAction::new(&hat).unwrap();
            let qs = quantum_schubert(&s.c, &s.lp, &s.ctx);
            let reduced = reduced_forms(&s.c, &s.ctx);
            for (i, p) in qs.polys.iter().enumerate() {
                let got = action.evaluate(p);
                let want: Vec<Poly> = (0..s.ctx.dim()).map(|k| Poly::constant(s.c.entries[k][i].clone())).collect();
                assert_eq!(got, want, "n={n} class {i}");
                assert_eq!(p.at_q_zero(), reduced[i]);
                let diff = &s.fam.classes[i].b_form - &reduced[i];
                assert!(s.ring.coordinates(&diff).unwrap().iter().all(Zero::is_zero));
            }
            let g = poincare_pairing(&s.ring, &s.c.inverse().unwrap()).unwrap();
            assert!(duality_failures(&s.fam, &g, &s.c).is_empty(), "n={n}");
            let eval = quantum_evaluation(&s.lp.q0_inv, &s.ctx);
            let t = full_product_table(&hat, &eval, &s.ctx).unwrap();
            let gw = crate::quantum::gw_invariants(&t, &g, &s.ctx).unwrap();
            assert!(crate::quantum::gw_axiom_failures(&gw, &s.ctx).is_empty(), "n={n}");
        }
    }

    #[test]
    fn gl3_pairing_is_antidiagonal() {
        let s = setup(3);
        let g = poincare_pairing(&s.ring, &s.c.inverse().unwrap()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if s.ctx.alpha[i] + s.ctx.alpha[j] != s.ctx.m {
                    assert!(g.entries[i][j].is_zero());
                }
            }
        }
        assert_eq!(g.entries[0][5], rat(1));
    }

    #[test]
    fn gl2_point_class() {
        let s = setup(2);
        let g = poincare_pairing(&s.ring, &s.c.inverse().unwrap()).unwrap();
        assert_eq!(g.entries[0][1], rat(1));
    }
}
