//! Quantum cohomology relations of `GL_n/B` from the tridiagonal Toda matrix,
//! and their quantization into conserved quantities of the quantum Toda
//! lattice.

use serde::{Deserialize, Serialize};

use crate::gb::Exp;
use crate::orealg::OreOp;
use crate::poly::{Degree, Poly, Var};

/// The matrix `Z` with `x_i` already eliminated in favour of `b_1..b_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TodaMatrix {
    pub n: usize,
    /// Row-major `n × n` entries.
    pub entries: Vec<Poly>,
}

impl TodaMatrix {
    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> Poly {
        let mut t = Poly::zero();
        for i in 0..self.n {
            t += self.get(i, i);
        }
        t
    }

    pub fn is_tridiagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i.abs_diff(j) <= 1 || self.get(i, j).is_zero()))
    }
}

/// `x_k` in terms of the `b`'s: `x_1 = b_1`, `x_k = b_k - b_{k-1}`, `x_n = -b_{n-1}`.
pub fn x_in_b(n: usize, k: usize) -> Poly {
    let b = |i: usize| Poly::var(Var::B(i as u8));
    match k {
        1 => b(1),
        k if k == n => -b(n - 1),
        k => &b(k) - &b(k - 1),
    }
}

pub fn toda_matrix(n: usize) -> TodaMatrix {
    assert!(n >= 2, "toda_matrix needs n >= 2");
    let mut entries = vec![Poly::zero(); n * n];
    for i in 0..n {
        entries[i * n + i] = x_in_b(n, i + 1);
        if i + 1 < n {
            entries[i * n + i + 1] = Poly::var(Var::Q(i as u8 + 1));
            entries[(i + 1) * n + i] = Poly::int(-1);
        }
    }
    TodaMatrix { n, entries }
}

/// The relations `R_1..R_{n-1}`; `R_i` has weighted degree `2(i+1)`.
/// At `q = 0`, `R_i` is minus the elementary symmetric function `e_{i+1}(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSet {
    pub n: usize,
    pub relations: Vec<Poly>,
}

/// `det(Z + λI)` as coefficients of `λ^0, λ^1, .., λ^n`, via the continuant
/// recurrence for tridiagonal matrices.
pub fn characteristic_coefficients(z: &TodaMatrix) -> Vec<Poly> {
    assert!(z.is_tridiagonal());
    let n = z.n;
    // polynomials in λ as coefficient vectors
    let mul_lin = |p: &[Poly], a: &Poly| -> Vec<Poly> {
        // (a + λ) p
        let mut out = vec![Poly::zero(); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            out[k] += &(a * c);
            out[k + 1] += c;
        }
        out
    };
    let mut prev: Vec<Poly> = vec![Poly::one()];
    let mut cur: Vec<Poly> = mul_lin(&prev, z.get(0, 0));
    for k in 1..n {
        let mut next = mul_lin(&cur, z.get(k, k));
        let off = z.get(k - 1, k) * z.get(k, k - 1);
        for (i, c) in prev.iter().enumerate() {
            next[i] -= &(&off * c);
        }
        prev = cur;
        cur = next;
    }
    cur
}

pub fn quantum_relations(n: usize) -> RelationSet {
    let z = toda_matrix(n);
    let coeffs = characteristic_coefficients(&z);
    assert!(coeffs[n - 1].is_zero(), "λ^(n-1) coefficient must vanish (trace zero)");
    assert_eq!(coeffs[n], Poly::one());
    // det(Z + λI) = λ^n - Σ R_i λ^(n-1-i)
    let relations = (1..n)
        .map(|i| {
            let c = -&coeffs[n - 1 - i];
            assert!(c.weighted_degree().admits(2 * (i as u32 + 1)));
            c
        })
        .collect();
    RelationSet { n, relations }
}

/// `b_i ↦ h∂_i`, coefficients to the left.
pub fn quantize(rs: &RelationSet) -> Vec<OreOp> {
    rs.relations.iter().map(|p| quantize_poly(p, rs.n - 1)).collect()
}

pub fn quantize_poly(p: &Poly, nvars: usize) -> OreOp {
    OreOp::from_terms(
        nvars,
        p.terms().map(|(m, c)| {
            let (bpart, rest) = m.split(|v| matches!(v, Var::B(_)));
            let mut e = Exp::zero(nvars);
            for &(v, k) in bpart.exponents() {
                if let Var::B(i) = v {
                    e.0[i as usize - 1] = k;
                }
            }
            (e, Poly::term(c.clone(), rest))
        }),
    )
}

/// Checks that every relation is homogeneous of the expected degree.
pub fn degrees_ok(rs: &RelationSet) -> bool {
    rs.relations
        .iter()
        .enumerate()
        .all(|(i, p)| p.weighted_degree() == Degree::Homogeneous(2 * (i as u32 + 2)))
}
