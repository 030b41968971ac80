//! Connection matrices of the quantum D-module: `[D_i P_j] = Σ_k (hΩ_i)_{kj} [P_k]`,
//! their split by powers of `h`, and the structural laws they obey.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gb::{Exp, GbError};
use crate::matrix::PolyMatrix;
use crate::orealg::{left_normal_form, ore_mul, standard_operator_basis, LeftIdealBasis, OreOp};
use crate::poly::{Degree, Poly, Var};

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error(transparent)]
    Gb(#[from] GbError),
    #[error("standard basis does not match the flag manifold: {0}")]
    BasisMismatch(String),
    #[error("normal form of D{direction}·P{column} leaves the standard basis at {exponent:?}")]
    OutsideBasis { direction: usize, column: usize, exponent: Vec<u32> },
}

/// Coefficients of `Π_{k=1}^{n-1} (1 + z + .. + z^k)`, i.e. the Betti numbers
/// of `GL_n/B` indexed by half the real degree.
pub fn poincare_block_sizes(n: usize) -> Vec<usize> {
    let mut acc = vec![1usize];
    for k in 1..n {
        let mut next = vec![0usize; acc.len() + k];
        for (i, a) in acc.iter().enumerate() {
            for slot in next.iter_mut().skip(i).take(k + 1) {
                *slot += a;
            }
        }
        acc = next;
    }
    acc
}

#[derive(Clone, Debug)]
pub struct FlagContext {
    pub n: usize,
    pub r: usize,
    /// Complex dimension `n(n-1)/2`.
    pub m: usize,
    pub block_sizes: Vec<usize>,
    /// Standard operators `P_i`, ascending.
    pub operators: Vec<OreOp>,
    /// Their symbols `c_i`.
    pub classes: Vec<Poly>,
    /// Block index of each basis element.
    pub alpha: Vec<usize>,
}

impl FlagContext {
    pub fn new(n: usize, basis: &LeftIdealBasis) -> Result<Self, ConnectionError> {
        let r = n - 1;
        if basis.nvars() != r {
            return Err(ConnectionError::BasisMismatch(format!("{} variables, expected {r}", basis.nvars())));
        }
        let sb = standard_operator_basis(basis)?;
        let (operators, classes): (Vec<OreOp>, Vec<Poly>) = sb.into_iter().unzip();
        let alpha: Vec<usize> = operators.iter().map(|p| p.leading_exponent().map_or(0, |e| e.degree() as usize)).collect();
        let block_sizes = poincare_block_sizes(n);
        let m = n * (n - 1) / 2;
        let mut counts = vec![0usize; m + 1];
        for &a in &alpha {
            if a > m {
                return Err(ConnectionError::BasisMismatch(format!("standard monomial of degree {a} exceeds {m}")));
            }
            counts[a] += 1;
        }
        if counts != block_sizes {
            return Err(ConnectionError::BasisMismatch(format!("block sizes {counts:?}, expected {block_sizes:?}")));
        }
        if alpha.windows(2).any(|w| w[0] > w[1]) {
            return Err(ConnectionError::BasisMismatch("basis is not ordered by degree".into()));
        }
        Ok(FlagContext { n, r, m, block_sizes, operators, classes, alpha })
    }

    /// `s + 1 = n!`.
    pub fn dim(&self) -> usize {
        self.operators.len()
    }

    /// `α(col) - α(row)`: entry `(row, col)` sits on this block diagonal.
    pub fn shift(&self, row: usize, col: usize) -> i64 {
        self.alpha[col] as i64 - self.alpha[row] as i64
    }

    /// The `k`-diagonal part of `a`.
    pub fn diagonal(&self, a: &PolyMatrix, k: i64) -> PolyMatrix {
        a.map_indexed(|i, j, p| if self.shift(i, j) == k { p.clone() } else { Poly::zero() })
    }

    /// Block diagonals present in a square matrix of this size.
    pub fn diagonals(&self) -> std::ops::RangeInclusive<i64> {
        -(self.m as i64)..=self.m as i64
    }

    /// Index of the basis element with symbol exponent `e`.
    pub fn index_of(&self, e: &Exp) -> Option<usize> {
        self.operators.iter().position(|p| p.leading_exponent().unwrap_or(&Exp::zero(self.r)) == e)
    }

    /// True when `a` vanishes below the `k`-diagonal.
    pub fn is_triangular(&self, a: &PolyMatrix, k: i64) -> bool {
        a.support().into_iter().all(|(i, j)| self.shift(i, j) >= k)
    }
}

/// One matrix per direction `dt_1..dt_r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMatForm {
    pub components: Vec<PolyMatrix>,
}

impl BlockMatForm {
    pub fn zero(r: usize, dim: usize) -> Self {
        BlockMatForm { components: vec![PolyMatrix::zero(dim, dim); r] }
    }

    /// Component along `dt_i`, 1-based.
    pub fn component(&self, i: usize) -> &PolyMatrix {
        &self.components[i - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(PolyMatrix::is_zero)
    }

    pub fn to_latex(&self, name: &str) -> String {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| format!("% {name} dt_{}\n{}", i + 1, c.to_latex()))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn to_text(&self, name: &str) -> String {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{name} dt{}:\n{}", i + 1, c.to_text()))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionData {
    pub omega: BlockMatForm,
    /// `θ^(0), θ^(1), ..`, padded with zeros up to index `m - 2`.
    pub theta: Vec<BlockMatForm>,
    /// Highest `j` with `θ^(j)` nonzero, if any.
    pub p: Option<usize>,
}

impl ConnectionData {
    pub fn r(&self) -> usize {
        self.omega.components.len()
    }

    pub fn dim(&self) -> usize {
        self.omega.components.first().map_or(0, PolyMatrix::rows)
    }

    /// `θ^(j)`, zero past the stored range.
    pub fn theta(&self, j: usize) -> BlockMatForm {
        self.theta.get(j).cloned().unwrap_or_else(|| BlockMatForm::zero(self.r(), self.dim()))
    }

    /// `hΩ_i = ω_i + hθ_i^(0) + h²θ_i^(1) + ..`, 1-based `i`.
    pub fn h_omega(&self, i: usize) -> PolyMatrix {
        let mut out = self.omega.component(i).clone();
        for (p, th) in self.theta.iter().enumerate() {
            let hp = Poly::var(Var::H).pow(p as u32 + 1);
            out = &out + &th.component(i).map(|c| c * &hp);
        }
        out
    }

    /// Splits assembled `hΩ_i` matrices by powers of `h`.
    pub fn from_h_omega(h_omega: &[PolyMatrix], m: usize) -> Self {
        let r = h_omega.len();
        let dim = h_omega.first().map_or(0, PolyMatrix::rows);
        let mut parts: Vec<BlockMatForm> = Vec::new();
        for (i, a) in h_omega.iter().enumerate() {
            for (row, col) in a.support() {
                for (k, c) in a.get(row, col).split_h().into_iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    while parts.len() <= k {
                        parts.push(BlockMatForm::zero(r, dim));
                    }
                    parts[k].components[i].set(row, col, c);
                }
            }
        }
        let mut parts = parts.into_iter();
        let omega = parts.next().unwrap_or_else(|| BlockMatForm::zero(r, dim));
        let mut theta: Vec<BlockMatForm> = parts.collect();
        let p = theta.iter().rposition(|t| !t.is_zero());
        while theta.len() < m.saturating_sub(1) {
            theta.push(BlockMatForm::zero(r, dim));
        }
        ConnectionData { omega, theta, p }
    }

    pub fn to_latex(&self) -> String {
        let mut out = vec![self.omega.to_latex("omega")];
        for (j, t) in self.theta.iter().enumerate() {
            out.push(t.to_latex(&format!("theta^({j})")));
        }
        out.join("\n")
    }

    pub fn to_text(&self) -> String {
        let mut out = vec![self.omega.to_text("omega")];
        for (j, t) in self.theta.iter().enumerate() {
            out.push(t.to_text(&format!("theta({j})")));
        }
        out.join("\n")
    }
}

/// Reads off `hΩ_i` column by column from left normal forms of `D_i·P_j`.
pub fn connection_matrices(basis: &LeftIdealBasis, ctx: &FlagContext) -> Result<ConnectionData, ConnectionError> {
    let dim = ctx.dim();
    let jobs: Vec<(usize, usize)> = (1..=ctx.r).flat_map(|i| (0..dim).map(move |j| (i, j))).collect();
    let columns: Vec<((usize, usize), Vec<Poly>)> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let op = ore_mul(&OreOp::d(ctx.r, i), &ctx.operators[j]);
            let nf = left_normal_form(&op, basis)?;
            let mut col = vec![Poly::zero(); dim];
            for (e, c) in nf.terms() {
                let k = ctx.index_of(e).ok_or_else(|| ConnectionError::OutsideBasis { direction: i, column: j, exponent: e.0.clone() })?;
                col[k] = c.clone();
            }
            Ok(((i, j), col))
        })
        .collect::<Result<_, ConnectionError>>()?;
    let mut mats = vec![PolyMatrix::zero(dim, dim); ctx.r];
    for ((i, j), col) in columns {
        mats[i - 1].set_column(j, col);
    }
    Ok(ConnectionData::from_h_omega(&mats, ctx.m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Law {
    /// `ω` entries homogeneous of degree `2(β-α+1)`.
    H1,
    /// `θ^(j)` entries homogeneous of degree `2(β-α-j)`.
    H2,
    /// `ω` is `(-1)`-triangular.
    F1,
    /// `θ^(j)` is `(j+2)`-triangular.
    F2,
    /// Vanishing of `ω^[even]` and of `θ^(i),[j]` with `j - i` odd.
    Parity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub law: Law,
    /// 1-based direction.
    pub direction: usize,
    /// `None` for `ω`, `Some(j)` for `θ^(j)`.
    pub theta: Option<usize>,
    pub row: usize,
    pub col: usize,
    pub entry: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub violations: Vec<Violation>,
    pub entries_checked: usize,
}

impl StructureReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, law: Law) -> usize {
        self.violations.iter().filter(|v| v.law == law).count()
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "structure ok ({} entries)", self.entries_checked);
        }
        for v in &self.violations {
            let which = v.theta.map_or("omega".to_string(), |j| format!("theta({j})"));
            writeln!(f, "{:?}: {which} dt{} ({}, {}) = {}", v.law, v.direction, v.row, v.col, v.entry)?;
        }
        Ok(())
    }
}

fn homogeneous_of(p: &Poly, d: i64) -> bool {
    match p.weighted_degree() {
        Degree::Zero => true,
        Degree::Homogeneous(k) => d >= 0 && k as i64 == d,
        Degree::Mixed => false,
    }
}

pub fn check_structure(cd: &ConnectionData, ctx: &FlagContext) -> StructureReport {
    let mut report = StructureReport::default();
    let mut push = |law, direction, theta, row, col, p: &Poly| {
        report.violations.push(Violation { law, direction, theta, row, col, entry: p.to_text() });
    };
    let mut checked = 0;
    for (idx, w) in cd.omega.components.iter().enumerate() {
        for (row, col) in w.support() {
            checked += 1;
            let p = w.get(row, col);
            let k = ctx.shift(row, col);
            if !homogeneous_of(p, 2 * (k + 1)) {
                push(Law::H1, idx + 1, None, row, col, p);
            }
            if k < -1 {
                push(Law::F1, idx + 1, None, row, col, p);
            }
            if k.rem_euclid(2) == 0 {
                push(Law::Parity, idx + 1, None, row, col, p);
            }
        }
    }
    for (j, th) in cd.theta.iter().enumerate() {
        for (idx, t) in th.components.iter().enumerate() {
            for (row, col) in t.support() {
                checked += 1;
                let p = t.get(row, col);
                let k = ctx.shift(row, col);
                if !homogeneous_of(p, 2 * (k - j as i64)) {
                    push(Law::H2, idx + 1, Some(j), row, col, p);
                }
                if k < j as i64 + 2 {
                    push(Law::F2, idx + 1, Some(j), row, col, p);
                }
                if (k - j as i64).rem_euclid(2) == 1 {
                    push(Law::Parity, idx + 1, Some(j), row, col, p);
                }
            }
        }
    }
    report.entries_checked = checked;
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurvatureFailure {
    pub i: usize,
    pub j: usize,
    pub row: usize,
    pub col: usize,
    pub residual: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FlatnessReport {
    pub pairs_checked: usize,
    pub failures: Vec<CurvatureFailure>,
}

impl FlatnessReport {
    pub fn is_flat(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Zero curvature in the form `h(∂_i A_j - ∂_j A_i) + [A_i, A_j] = 0` with `A = hΩ`.
pub fn flatness_check(cd: &ConnectionData) -> FlatnessReport {
    let r = cd.r();
    let a: Vec<PolyMatrix> = (1..=r).map(|i| cd.h_omega(i)).collect();
    let h = Poly::var(Var::H);
    let mut report = FlatnessReport::default();
    for i in 1..=r {
        for j in i + 1..=r {
            report.pairs_checked += 1;
            let d = &a[j - 1].t_derivative(i as u8) - &a[i - 1].t_derivative(j as u8);
            let curv = &d.map(|p| p * &h) + &a[i - 1].commutator(&a[j - 1]);
            for (row, col) in curv.support() {
                report.failures.push(CurvatureFailure { i, j, row, col, residual: curv.get(row, col).to_text() });
            }
        }
    }
    report
}
