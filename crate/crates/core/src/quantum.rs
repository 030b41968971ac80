//! Quantum evaluation, the quantum product table, the Poincaré pairing and
//! three-point genus-zero Gromov-Witten invariants.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::commalg::{buchberger, CoefficientMode, GroebnerBasis, MonomialOrder};
use crate::connection::{BlockMatForm, FlagContext};
use crate::gb::GbError;
use crate::matrix::{PolyMatrix, RatMatrix};
use crate::poly::{rational_to_i64, Degree, Monomial, Poly, Rational, Var};
use crate::toda::RelationSet;

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("omega-hat {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("non-integral invariant <c{i}, c{j}, c{k}>_{d:?} = {value}")]
    NonIntegral { i: usize, j: usize, k: usize, d: Vec<u32>, value: String },
    #[error("Poincaré pairing is degenerate")]
    DegeneratePairing,
    #[error("classical normal form has q-dependence: {0}")]
    QDependence(String),
    #[error(transparent)]
    Gb(#[from] GbError),
}

/// The hatted basis `ĉ_i = Σ_j (Q₀⁻¹)_{ji} c_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QEvaluation {
    pub hats: Vec<Poly>,
    pub q0_inv: PolyMatrix,
}

pub fn hatted(m: &PolyMatrix, ctx: &FlagContext) -> Vec<Poly> {
    (0..ctx.dim())
        .map(|i| {
            let mut acc = Poly::zero();
            for (j, c) in ctx.classes.iter().enumerate() {
                let e = m.get(j, i);
                if !e.is_zero() {
                    acc += &(e * c);
                }
            }
            acc
        })
        .collect()
}

pub fn quantum_evaluation(q0_inv: &PolyMatrix, ctx: &FlagContext) -> QEvaluation {
    QEvaluation { hats: hatted(q0_inv, ctx), q0_inv: q0_inv.clone() }
}

fn unit(dim: usize, k: usize) -> Vec<Poly> {
    let mut v = vec![Poly::zero(); dim];
    v[k] = Poly::one();
    v
}

/// `[[b_i]]∘[[c_j]]`: column `j` of `ω̂_i`.
pub fn product_by_generator(i: usize, j: usize, omega_hat: &BlockMatForm) -> Vec<Poly> {
    omega_hat.component(i).column(j)
}

/// Products `c_i ∘ c_j` as coordinate vectors in `[[c_0]]..[[c_s]]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QTable {
    pub dim: usize,
    pub products: Vec<Vec<Vec<Poly>>>,
}

impl QTable {
    pub fn get(&self, i: usize, j: usize) -> &[Poly] {
        &self.products[i][j]
    }

    /// `u ∘ v` by bilinearity over the table.
    pub fn multiply(&self, u: &[Poly], v: &[Poly]) -> Vec<Poly> {
        let mut out = vec![Poly::zero(); self.dim];
        for (a, ua) in u.iter().enumerate() {
            if ua.is_zero() {
                continue;
            }
            for (b, vb) in v.iter().enumerate() {
                if vb.is_zero() {
                    continue;
                }
                let coef = ua * vb;
                for (k, t) in self.products[a][b].iter().enumerate() {
                    if !t.is_zero() {
                        out[k] += &(&coef * t);
                    }
                }
            }
        }
        out
    }

    pub fn at_q_zero(&self) -> Vec<Vec<Vec<Poly>>> {
        self.products.iter().map(|r| r.iter().map(|v| v.iter().map(Poly::at_q_zero).collect()).collect()).collect()
    }
}

/// The `ω̂_a` as a commuting family acting on coordinate vectors.
pub struct QuantumAction<'a> {
    omega_hat: &'a BlockMatForm,
    r: usize,
}

impl<'a> QuantumAction<'a> {
    pub fn new(omega_hat: &'a BlockMatForm) -> Result<Self, QuantumError> {
        let r = omega_hat.components.len();
        for i in 0..r {
            for j in i + 1..r {
                if !omega_hat.components[i].commutator(&omega_hat.components[j]).is_zero() {
                    return Err(QuantumError::NonCommuting(i + 1, j + 1));
                }
            }
        }
        Ok(QuantumAction { omega_hat, r })
    }

    /// Applies `b^e ∘` to `v`.
    pub fn apply_monomial(&self, m: &Monomial, v: &[Poly]) -> Vec<Poly> {
        let mut v = v.to_vec();
        for a in 1..=self.r {
            for _ in 0..m.exponent(Var::B(a as u8)) {
                v = self.omega_hat.component(a).apply(&v);
            }
        }
        v
    }

    /// `p∘`: every `b`-monomial evaluated with the quantum product, `q`'s as scalars.
    pub fn evaluate(&self, p: &Poly) -> Vec<Poly> {
        let dim = self.omega_hat.components[0].rows();
        self.act(p, &unit(dim, 0))
    }

    /// `p∘v`.
    pub fn act(&self, p: &Poly, v: &[Poly]) -> Vec<Poly> {
        let dim = v.len();
        let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in p.terms() {
            let (bpart, rest) = m.split(|v| matches!(v, Var::B(_)));
            *groups.entry(bpart).or_default() += &Poly::term(c.clone(), rest);
        }
        let mut out = vec![Poly::zero(); dim];
        for (bm, coef) in groups {
            let w = self.apply_monomial(&bm, v);
            for (k, t) in w.iter().enumerate() {
                if !t.is_zero() {
                    out[k] += &(&coef * t);
                }
            }
        }
        out
    }
}

/// `W_k`, the matrix of `c_k∘` for the monomial `c_k`, built as `ω̂_a W_{k'}`
/// where `c_k = b_a c_{k'}`.
pub fn monomial_actions(omega_hat: &BlockMatForm, ctx: &FlagContext) -> Vec<PolyMatrix> {
    let monos: Vec<Monomial> = ctx.classes.iter().map(|c| c.leading_term().expect("basis class is a monomial").0.clone()).collect();
    let mut out: Vec<PolyMatrix> = vec![PolyMatrix::identity(ctx.dim())];
    for mono in monos.iter().skip(1) {
        let (a, prev) = (1..=ctx.r)
            .find_map(|a| {
                let rest = mono.div(&Monomial::var(Var::B(a as u8)))?;
                let k = monos.iter().position(|m| *m == rest)?;
                (k < out.len()).then_some((a, k))
            })
            .expect("standard monomials are closed under division");
        out.push(omega_hat.component(a) * &out[prev]);
    }
    out
}

/// `[[c_i]]∘[[c_j]] = ĉ_i∘[[c_j]]`, read off from `Σ_k (Q₀⁻¹)_{ki} W_k`.
pub fn full_product_table(omega_hat: &BlockMatForm, eval: &QEvaluation, ctx: &FlagContext) -> Result<QTable, QuantumError> {
    QuantumAction::new(omega_hat)?;
    let dim = ctx.dim();
    let w = monomial_actions(omega_hat, ctx);
    let upper: Vec<Vec<Vec<Poly>>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            (i..dim)
                .map(|j| {
                    let mut col = vec![Poly::zero(); dim];
                    for (k, wk) in w.iter().enumerate() {
                        let coef = eval.q0_inv.get(k, i);
                        if coef.is_zero() {
                            continue;
                        }
                        for (row, acc) in col.iter_mut().enumerate() {
                            let e = wk.get(row, j);
                            if !e.is_zero() {
                                *acc += &(coef * e);
                            }
                        }
                    }
                    col
                })
                .collect()
        })
        .collect();
    let mut products = vec![vec![Vec::new(); dim]; dim];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            if i != j {
                products[j][i] = v.clone();
            }
            products[i][j] = v;
        }
    }
    Ok(QTable { dim, products })
}

/// The classical ring `Q[b]/(R|_{q=0})` with coordinates in the basis `c`.
pub struct ClassicalRing {
    pub gb: GroebnerBasis,
    pub basis: Vec<Monomial>,
}

impl ClassicalRing {
    pub fn new(rs: &RelationSet, ctx: &FlagContext) -> Result<Self, QuantumError> {
        let gb = buchberger(&rs.relations, MonomialOrder::grevlex(ctx.r), CoefficientMode::classical(ctx.r))?;
        let basis = ctx.classes.iter().map(|c| c.leading_term().expect("basis class is a monomial").0.clone()).collect();
        Ok(ClassicalRing { gb, basis })
    }

    pub fn coordinates(&self, p: &Poly) -> Result<Vec<Rational>, QuantumError> {
        self.gb
            .coordinates(p, &self.basis)
            .into_iter()
            .map(|c| if c.is_zero() { Ok(Rational::zero()) } else { c.as_constant().ok_or_else(|| QuantumError::QDependence(c.to_text())) })
            .collect()
    }

    pub fn product(&self, i: usize, j: usize) -> Result<Vec<Rational>, QuantumError> {
        let p = Poly::term(Rational::from_integer(1.into()), self.basis[i].mul(&self.basis[j]));
        self.coordinates(&p)
    }
}

/// `⟨c_i, c_j⟩`: the coefficient of the top Schubert class in `c_i c_j`.
/// `c_inv` expands the basis `c` in Schubert classes; its last row is the
/// top class.
#[allow(clippy::needless_range_loop)]
pub fn poincare_pairing(ring: &ClassicalRing, c_inv: &RatMatrix) -> Result<RatMatrix, QuantumError> {
    let dim = ring.basis.len();
    let top = &c_inv.entries[dim - 1];
    let mut entries = vec![vec![Rational::zero(); dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let v = ring.product(i, j)?;
            let val: Rational = top.iter().zip(&v).map(|(a, b)| a * b).sum();
            entries[j][i] = val.clone();
            entries[i][j] = val;
        }
    }
    let g = RatMatrix { n: dim, entries };
    g.inverse().map_err(|_| QuantumError::DegeneratePairing)?;
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GWRecord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub d: Vec<u32>,
    pub value: i64,
}

/// All nonzero `⟨c_i, c_j, c_k⟩_d`, ordered by `(i, j, k, d)`.
pub fn gw_invariants(table: &QTable, pairing: &RatMatrix, ctx: &FlagContext) -> Result<Vec<GWRecord>, QuantumError> {
    let dim = ctx.dim();
    let mut out = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let prod = table.get(i, j);
            for k in 0..dim {
                let mut paired = Poly::zero();
                for (l, p) in prod.iter().enumerate() {
                    let g = &pairing.entries[l][k];
                    if !g.is_zero() && !p.is_zero() {
                        paired += &p.scale(g);
                    }
                }
                for (m, c) in paired.terms() {
                    let d: Vec<u32> = (1..=ctx.r).map(|a| m.exponent(Var::Q(a as u8))).collect();
                    let value = rational_to_i64(c)
                        .filter(|_| c.is_integer())
                        .ok_or_else(|| QuantumError::NonIntegral { i, j, k, d: d.clone(), value: c.to_string() })?;
                    out.push(GWRecord { i, j, k, d, value });
                }
            }
        }
    }
    Ok(out)
}

/// Failures of the symmetry and dimension axioms over a full record list.
pub fn gw_axiom_failures(records: &[GWRecord], ctx: &FlagContext) -> Vec<String> {
    let index: BTreeMap<(usize, usize, usize, Vec<u32>), i64> = records.iter().map(|r| ((r.i, r.j, r.k, r.d.clone()), r.value)).collect();
    let mut out = Vec::new();
    for r in records {
        let (i, j, k) = (r.i, r.j, r.k);
        for (a, b, c) in [(i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
            if index.get(&(a, b, c, r.d.clone())) != Some(&r.value) {
                out.push(format!("<c{i}, c{j}, c{k}>_{:?} not symmetric under ({a}, {b}, {c})", r.d));
            }
        }
        let lhs = 2 * (ctx.alpha[i] + ctx.alpha[j] + ctx.alpha[k]);
        let rhs = 2 * ctx.m + 4 * r.d.iter().sum::<u32>() as usize;
        if lhs != rhs {
            out.push(format!("<c{i}, c{j}, c{k}>_{:?} violates the dimension axiom", r.d));
        }
        if i == 0 && r.d.iter().any(|&x| x > 0) {
            out.push(format!("<c0, c{j}, c{k}>_{:?} is nonzero in positive degree", r.d));
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TableReport {
    pub failures: Vec<String>,
    pub checks: usize,
}

impl TableReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn expect(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(msg());
        }
    }
}

/// Ring laws of the product table: identity, commutativity, grading,
/// associativity on every triple, relation vanishing, classical limit and
/// the evaluation identity `ĉ_i∘ = [[c_i]]`. With `triples = Some(k)` only
/// `k` evenly spread triples are tested for associativity.
pub fn check_table(
    table: &QTable,
    omega_hat: &BlockMatForm,
    ctx: &FlagContext,
    rs: &RelationSet,
    ring: &ClassicalRing,
    eval: &QEvaluation,
    triples: Option<usize>,
) -> Result<TableReport, QuantumError> {
    let dim = ctx.dim();
    let action = QuantumAction::new(omega_hat)?;
    let mut rep = TableReport::default();
    for i in 0..dim {
        rep.expect(table.get(i, 0) == unit(dim, i).as_slice(), || format!("c{i}∘1 ≠ c{i}"));
        for j in 0..dim {
            rep.expect(table.get(i, j) == table.get(j, i), || format!("c{i}∘c{j} ≠ c{j}∘c{i}"));
            for (k, p) in table.get(i, j).iter().enumerate() {
                let want = 2 * (ctx.alpha[i] + ctx.alpha[j]) as i64 - 2 * ctx.alpha[k] as i64;
                let ok = match p.weighted_degree() {
                    Degree::Zero => true,
                    Degree::Homogeneous(d) => d as i64 == want,
                    Degree::Mixed => false,
                };
                rep.expect(ok, || format!("(c{i}∘c{j})_{k} = {p} has the wrong degree"));
            }
            let classical = ring.product(i, j)?;
            let limit: Vec<Poly> = table.get(i, j).iter().map(Poly::at_q_zero).collect();
            let want: Vec<Poly> = classical.into_iter().map(Poly::constant).collect();
            rep.expect(limit == want, || format!("(c{i}∘c{j})|q=0 differs from the cup product"));
        }
    }
    let total = dim * dim * dim;
    let picks: Vec<usize> = match triples {
        Some(k) if k < total => (0..k).map(|t| (t * 7919 + t / 3) % total).collect(),
        _ => (0..total).collect(),
    };
    for t in picks {
        let (i, j, k) = (t / (dim * dim), (t / dim) % dim, t % dim);
        let lhs = table.multiply(table.get(i, j), &unit(dim, k));
        let rhs = table.multiply(&unit(dim, i), table.get(j, k));
        rep.expect(lhs == rhs, || format!("(c{i}∘c{j})∘c{k} ≠ c{i}∘(c{j}∘c{k})"));
    }
    for (l, r) in rs.relations.iter().enumerate() {
        let v = action.evaluate(r);
        rep.expect(v.iter().all(Poly::is_zero), || format!("relation {} does not vanish under ∘", l + 1));
    }
    for (i, h) in eval.hats.iter().enumerate() {
        rep.expect(action.evaluate(h) == unit(dim, i), || format!("ĉ{i}∘ ≠ [[c{i}]]"));
        rep.expect(h.at_q_zero() == ctx.classes[i], || format!("ĉ{i}|q=0 ≠ c{i}"));
        rep.expect(h.weighted_degree().admits(2 * ctx.alpha[i] as u32), || format!("ĉ{i} not homogeneous"));
    }
    Ok(rep)
}

/// Expands a coordinate vector as a polynomial in the basis classes.
pub fn as_polynomial(v: &[Poly], ctx: &FlagContext) -> Poly {
    let mut out = Poly::zero();
    for (c, x) in ctx.classes.iter().zip(v) {
        if !x.is_zero() {
            out += &(c * x);
        }
    }
    out
}
