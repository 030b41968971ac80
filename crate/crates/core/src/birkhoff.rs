//! Gauge fixing `L₊ = Q₀(I + hQ₁ + .. + h^{m-2}Q_{m-2})` by quadrature along
//! block diagonals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connection::{check_structure, BlockMatForm, ConnectionData, FlagContext};
use crate::matrix::PolyMatrix;
use crate::poly::{Degree, Monomial, Poly, Rational, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Owner {
    Q0,
    Q(usize),
    /// A slice of a matrix that is not one of the unknowns.
    Given,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Q0 => write!(f, "Q0"),
            Owner::Q(i) => write!(f, "Q{i}"),
            Owner::Given => write!(f, "A"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalSlice {
    pub owner: Owner,
    pub j: i64,
    pub value: PolyMatrix,
}

/// The nonzero block diagonals of `a`, ascending in `j`.
pub fn diagonal_parts(a: &PolyMatrix, ctx: &FlagContext) -> Vec<DiagonalSlice> {
    ctx.diagonals()
        .map(|j| DiagonalSlice { owner: Owner::Given, j, value: ctx.diagonal(a, j) })
        .filter(|s| !s.value.is_zero())
        .collect()
}

/// All symbols `(i, j)` with `1 <= i` and `i + 2 <= j <= m`, smallest first:
/// ascending in `j - i`, ties broken by larger `j` first.
pub fn solve_order(m: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (1..=m.saturating_sub(2)).flat_map(|i| (i + 2..=m).map(move |j| (i, j))).collect();
    out.sort_by(|a, b| (a.1 - a.0).cmp(&(b.1 - b.0)).then(b.1.cmp(&a.1)));
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntegrationError {
    #[error("form is not closed at entry ({row}, {col}): {detail}")]
    NotClosed { row: usize, col: usize, detail: String },
    #[error("constant term {value} at entry ({row}, {col})")]
    ConstantTermPresent { row: usize, col: usize, value: String },
}

/// Solves `t_derivative_a(Q) = A_a` for all `a` with `Q|_{q=0} = 0`.
pub fn integrate_closed_form(a: &[PolyMatrix]) -> Result<PolyMatrix, IntegrationError> {
    let r = a.len();
    let (rows, cols) = (a[0].rows(), a[0].cols());
    for x in 0..r {
        for y in x + 1..r {
            let lhs = a[y].t_derivative(x as u8 + 1);
            let rhs = a[x].t_derivative(y as u8 + 1);
            if let Some(&(row, col)) = (&lhs - &rhs).support().first() {
                return Err(IntegrationError::NotClosed {
                    row,
                    col,
                    detail: format!("d{}A{} - d{}A{} = {}", x + 1, y + 1, y + 1, x + 1, (lhs.get(row, col) - rhs.get(row, col))),
                });
            }
        }
    }
    let mut out = PolyMatrix::zero(rows, cols);
    for row in 0..rows {
        for col in 0..cols {
            let mut coeffs: BTreeMap<Monomial, Rational> = BTreeMap::new();
            for (axis, m) in a.iter().enumerate() {
                let v = Var::Q(axis as u8 + 1);
                for (mono, c) in m.get(row, col).terms() {
                    if mono.is_one() {
                        return Err(IntegrationError::ConstantTermPresent { row, col, value: c.to_string() });
                    }
                    let e = mono.exponent(v);
                    if e == 0 {
                        return Err(IntegrationError::NotClosed { row, col, detail: format!("q{} absent from a term of A{}", axis + 1, axis + 1) });
                    }
                    let val = c / Rational::from_integer(e.into());
                    match coeffs.get(mono) {
                        Some(prev) if *prev != val => {
                            return Err(IntegrationError::NotClosed { row, col, detail: format!("axes disagree on {}", Poly::term(Rational::from_integer(1.into()), mono.clone())) })
                        }
                        _ => {
                            coeffs.insert(mono.clone(), val);
                        }
                    }
                }
            }
            out.set(row, col, Poly::from_terms(coeffs));
        }
    }
    for (axis, m) in a.iter().enumerate() {
        let d = out.t_derivative(axis as u8 + 1);
        if let Some(&(row, col)) = (&d - m).support().first() {
            return Err(IntegrationError::NotClosed { row, col, detail: format!("derivative along t{} does not recover the form", axis + 1) });
        }
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum BirkhoffError {
    #[error("integrating {owner}^[{j}]: {source}")]
    Integration { owner: Owner, j: usize, source: IntegrationError },
    #[error("{owner}^[{j}] should vanish by parity but is nonzero")]
    Parity { owner: Owner, j: usize },
    #[error("connection fails structural checks:\n{0}")]
    Structure(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStep {
    pub owner: Owner,
    pub j: usize,
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPlus {
    pub q0: PolyMatrix,
    /// `Q_1..Q_{m-2}`.
    pub q: Vec<PolyMatrix>,
    pub q0_inv: PolyMatrix,
    /// Quadrature steps in the order they were taken.
    pub steps: Vec<SolveStep>,
}

impl LPlus {
    /// `Q_i` for `i >= 1`; zero past `m - 2`.
    pub fn q_i(&self, i: usize) -> PolyMatrix {
        assert!(i >= 1);
        self.q.get(i - 1).cloned().unwrap_or_else(|| PolyMatrix::zero(self.q0.rows(), self.q0.cols()))
    }

    /// `B_k = Q₀Q_k` (`B_0 = Q₀`).
    pub fn b(&self, k: usize) -> PolyMatrix {
        if k == 0 {
            self.q0.clone()
        } else {
            &self.q0 * &self.q_i(k)
        }
    }

    pub fn to_latex(&self) -> String {
        let mut out = vec![format!("% Q_0\n{}", self.q0.to_latex_slabs(12))];
        for (i, q) in self.q.iter().enumerate() {
            out.push(format!("% Q_{}\n{}", i + 1, q.to_latex_slabs(12)));
        }
        out.push(format!("% Q_0^{{-1}}\n{}", self.q0_inv.to_latex_slabs(12)));
        out.join("\n")
    }

    pub fn to_text(&self) -> String {
        let mut out = vec![format!("Q0:\n{}", self.q0.to_text())];
        for (i, q) in self.q.iter().enumerate() {
            out.push(format!("Q{}:\n{}", i + 1, q.to_text()));
        }
        out.push(format!("Q0^-1:\n{}", self.q0_inv.to_text()));
        out.join("\n")
    }
}

/// Diagonal slices of the known data, skipping zero ones.
struct Known {
    /// `ω_a^[l]` by direction, then `l`.
    omega: Vec<BTreeMap<i64, PolyMatrix>>,
    /// `θ_a^(p),[l]` by `p`, direction, then `l`.
    theta: Vec<Vec<BTreeMap<i64, PolyMatrix>>>,
}

fn slices(m: &PolyMatrix, ctx: &FlagContext) -> BTreeMap<i64, PolyMatrix> {
    diagonal_parts(m, ctx).into_iter().map(|s| (s.j, s.value)).collect()
}

impl Known {
    fn new(cd: &ConnectionData, ctx: &FlagContext) -> Self {
        Known {
            omega: cd.omega.components.iter().map(|c| slices(c, ctx)).collect(),
            theta: cd.theta.iter().map(|t| t.components.iter().map(|c| slices(c, ctx)).collect()).collect(),
        }
    }

    fn theta(&self, p: usize, a: usize) -> Option<&BTreeMap<i64, PolyMatrix>> {
        self.theta.get(p).map(|t| &t[a])
    }
}

/// Solved slices of the unknowns.
struct Store {
    m: usize,
    dim: usize,
    solved: BTreeMap<(usize, usize), PolyMatrix>,
}

impl Store {
    /// `Q_i^[j]`; `None` when the slice vanishes by triangularity or range.
    /// Panics when an in-range slice has not been solved yet.
    fn get(&self, i: usize, j: i64) -> Option<&PolyMatrix> {
        if i == 0 || i + 2 > self.m || j < i as i64 + 2 || j > self.m as i64 {
            return None;
        }
        match self.solved.get(&(i, j as usize)) {
            Some(v) => Some(v),
            None => panic!("slice Q{i}^[{j}] used before it was solved"),
        }
    }

    fn assemble(&self, i: usize) -> PolyMatrix {
        let mut out = PolyMatrix::zero(self.dim, self.dim);
        for ((k, _), v) in &self.solved {
            if *k == i {
                out = &out + v;
            }
        }
        out
    }
}

fn add_to(acc: &mut Option<PolyMatrix>, m: PolyMatrix) {
    *acc = Some(match acc.take() {
        Some(a) => &a + &m,
        None => m,
    });
}

/// `[Q_i, ω_a]^[j]` from solved slices.
fn bracket_with_omega(store: &Store, known: &Known, i: usize, a: usize, j: i64) -> Option<PolyMatrix> {
    let mut acc = None;
    for (&l, w) in &known.omega[a] {
        if let Some(q) = store.get(i, j - l) {
            add_to(&mut acc, &(q * w) - &(w * q));
        }
    }
    acc
}

/// Diagonal `j` of the right-hand side of `dQ_i` along direction `a`.
fn rhs(store: &Store, known: &Known, i: usize, a: usize, j: i64) -> Option<PolyMatrix> {
    let mut acc = None;
    if let Some(t) = known.theta(i, a).and_then(|t| t.get(&j)) {
        add_to(&mut acc, t.clone());
    }
    for k in 1..i {
        if let Some(t) = known.theta(i - k, a) {
            for (&l, th) in t {
                if let Some(q) = store.get(k, j - l) {
                    add_to(&mut acc, q * th);
                }
            }
        }
    }
    if let Some(t0) = known.theta(0, a) {
        for (&l, th) in t0 {
            if let Some(q) = store.get(i, j - l) {
                add_to(&mut acc, &(q * th) - &(th * q));
            }
        }
    }
    if let Some(b) = bracket_with_omega(store, known, i + 1, a, j) {
        add_to(&mut acc, b);
    }
    for s in 0..=j - (i as i64 + 2) {
        if let Some(b) = bracket_with_omega(store, known, 1, a, s) {
            if let Some(qi) = store.get(i, j - s) {
                add_to(&mut acc, -&(&b * qi));
            }
        }
    }
    acc
}

pub fn solve_lplus(cd: &ConnectionData, ctx: &FlagContext) -> Result<LPlus, BirkhoffError> {
    let report = check_structure(cd, ctx);
    if !report.is_ok() {
        return Err(BirkhoffError::Structure(report.to_string()));
    }
    let (m, r, dim) = (ctx.m, ctx.r, ctx.dim());
    let known = Known::new(cd, ctx);
    let mut store = Store { m, dim, solved: BTreeMap::new() };
    let mut steps = Vec::new();
    for (i, j) in solve_order(m) {
        let forms: Vec<PolyMatrix> =
            (0..r).map(|a| rhs(&store, &known, i, a, j as i64).unwrap_or_else(|| PolyMatrix::zero(dim, dim))).collect();
        let forms: Vec<PolyMatrix> = forms.iter().map(|f| ctx.diagonal(f, j as i64)).collect();
        let value = integrate_closed_form(&forms).map_err(|source| BirkhoffError::Integration { owner: Owner::Q(i), j, source })?;
        if (j - i) % 2 == 1 && !value.is_zero() {
            return Err(BirkhoffError::Parity { owner: Owner::Q(i), j });
        }
        steps.push(SolveStep { owner: Owner::Q(i), j, vanishes: value.is_zero() });
        store.solved.insert((i, j), value);
    }
    let q: Vec<PolyMatrix> = (1..=m.saturating_sub(2)).map(|i| store.assemble(i)).collect();
    let q1 = q.first().cloned().unwrap_or_else(|| PolyMatrix::zero(dim, dim));
    let q0 = solve_q0(cd, ctx, &q1, &mut steps)?;
    let q0_inv = unipotent_inverse(&q0);
    Ok(LPlus { q0, q, q0_inv, steps })
}

/// Solves `dQ₀ = Q₀(θ^(0) + [Q₁, ω])` diagonal by diagonal, `Q₀^[0] = I`.
pub fn solve_q0(cd: &ConnectionData, ctx: &FlagContext, q1: &PolyMatrix, steps: &mut Vec<SolveStep>) -> Result<PolyMatrix, BirkhoffError> {
    let (m, r, dim) = (ctx.m, ctx.r, ctx.dim());
    let mforms: Vec<BTreeMap<i64, PolyMatrix>> = (0..r)
        .map(|a| {
            let w = &cd.omega.components[a];
            let mut mm = q1.commutator(w);
            if let Some(t) = cd.theta.first() {
                mm = &mm + &t.components[a];
            }
            slices(&mm, ctx)
        })
        .collect();
    let mut q0_slices: BTreeMap<usize, PolyMatrix> = BTreeMap::new();
    q0_slices.insert(0, PolyMatrix::identity(dim));
    for j in 1..=m {
        let forms: Vec<PolyMatrix> = mforms
            .iter()
            .map(|ma| {
                let mut acc = PolyMatrix::zero(dim, dim);
                for (&k, mk) in ma {
                    if k < 1 || k as usize > j {
                        continue;
                    }
                    if let Some(prev) = q0_slices.get(&(j - k as usize)) {
                        acc = &acc + &(prev * mk);
                    }
                }
                ctx.diagonal(&acc, j as i64)
            })
            .collect();
        let value = integrate_closed_form(&forms).map_err(|source| BirkhoffError::Integration { owner: Owner::Q0, j, source })?;
        if j % 2 == 1 && !value.is_zero() {
            return Err(BirkhoffError::Parity { owner: Owner::Q0, j });
        }
        steps.push(SolveStep { owner: Owner::Q0, j, vanishes: value.is_zero() });
        q0_slices.insert(j, value);
    }
    let mut q0 = PolyMatrix::zero(dim, dim);
    for v in q0_slices.values() {
        q0 = &q0 + v;
    }
    Ok(q0)
}

/// Inverse of `I + N` with `N` nilpotent, as `Σ (-N)^k`.
pub fn unipotent_inverse(a: &PolyMatrix) -> PolyMatrix {
    let dim = a.rows();
    let id = PolyMatrix::identity(dim);
    let neg_n = &id - a;
    let mut out = id.clone();
    let mut power = id;
    for _ in 0..=dim {
        power = &power * &neg_n;
        if power.is_zero() {
            return out;
        }
        out = &out + &power;
    }
    panic!("matrix is not unipotent");
}

/// Violations of the triangularity, homogeneity, parity and base-point laws for `L₊`.
pub fn check_lplus(lp: &LPlus, ctx: &FlagContext) -> Vec<String> {
    let mut out = Vec::new();
    let id = PolyMatrix::identity(ctx.dim());
    let mut check = |name: String, a: &PolyMatrix, i: usize, min_shift: i64| {
        for (row, col) in a.support() {
            let k = ctx.shift(row, col);
            let p = a.get(row, col);
            if k < min_shift {
                out.push(format!("{name} ({row}, {col}) below diagonal {min_shift}"));
            }
            let want = 2 * (k - i as i64);
            let ok = matches!(p.weighted_degree(), Degree::Homogeneous(d) if want >= 0 && d as i64 == want);
            if !ok {
                out.push(format!("{name} ({row}, {col}) = {p} not homogeneous of degree {want}"));
            }
            if (k - i as i64) % 2 != 0 {
                out.push(format!("{name} ({row}, {col}) on an odd diagonal"));
            }
            if !p.at_q_zero().is_zero() {
                out.push(format!("{name} ({row}, {col}) does not vanish at q = 0"));
            }
        }
    };
    check("Q0 - I".into(), &(&lp.q0 - &id), 0, 2);
    for (idx, q) in lp.q.iter().enumerate() {
        check(format!("Q{}", idx + 1), q, idx + 1, idx as i64 + 3);
    }
    if &lp.q0 * &lp.q0_inv != id {
        out.push("Q0 * Q0^-1 is not the identity".into());
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GaugeReport {
    /// `(direction, h-power N, row, col)` where `ω̂B_N ≠ Σ B_kA_p - dB_{N-1}`.
    pub failures: Vec<(usize, usize, usize, usize)>,
    /// Pairs `(i, j)` where `∂_i ω̂_j ≠ ∂_j ω̂_i`.
    pub integrability_failures: Vec<(usize, usize)>,
    /// Laws of `ω` that `ω̂` breaks.
    pub structure_failures: Vec<String>,
    pub identities_checked: usize,
}

impl GaugeReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty() && self.integrability_failures.is_empty() && self.structure_failures.is_empty()
    }
}

/// `ω̂_a = Q₀ω_aQ₀⁻¹` together with a full check of the gauge identity.
pub fn gauge_check(lp: &LPlus, cd: &ConnectionData, ctx: &FlagContext) -> (BlockMatForm, GaugeReport) {
    let r = cd.r();
    let omega_hat = BlockMatForm { components: cd.omega.components.iter().map(|w| &(&lp.q0 * w) * &lp.q0_inv).collect() };
    let mut report = GaugeReport::default();
    let nb = lp.q.len() + 1;
    let bs: Vec<PolyMatrix> = (0..nb).map(|k| lp.b(k)).collect();
    let np = cd.theta.len() + 1;
    let top = nb + np;
    for a in 0..r {
        let parts: Vec<PolyMatrix> =
            std::iter::once(cd.omega.components[a].clone()).chain(cd.theta.iter().map(|t| t.components[a].clone())).collect();
        for n in 0..top {
            let lhs = if n < nb { &omega_hat.components[a] * &bs[n] } else { PolyMatrix::zero(ctx.dim(), ctx.dim()) };
            let mut rhs = PolyMatrix::zero(ctx.dim(), ctx.dim());
            for (k, b) in bs.iter().enumerate().take(n + 1) {
                if let Some(p) = parts.get(n - k) {
                    rhs = &rhs + &(b * p);
                }
            }
            if n >= 1 && n - 1 < nb {
                rhs = &rhs - &bs[n - 1].t_derivative(a as u8 + 1);
            }
            report.identities_checked += 1;
            for (row, col) in (&lhs - &rhs).support() {
                report.failures.push((a + 1, n, row, col));
            }
        }
    }
    for i in 0..r {
        for j in i + 1..r {
            let d = &omega_hat.components[j].t_derivative(i as u8 + 1) - &omega_hat.components[i].t_derivative(j as u8 + 1);
            if !d.is_zero() {
                report.integrability_failures.push((i + 1, j + 1));
            }
        }
    }
    let hat = ConnectionData { omega: omega_hat.clone(), theta: Vec::new(), p: None };
    report.structure_failures = check_structure(&hat, ctx).violations.iter().map(|v| format!("{v:?}")).collect();
    (omega_hat, report)
}

/// Symbols whose slices were found to vanish.
pub fn vanishing_symbols(lp: &LPlus) -> BTreeSet<(Owner, usize)> {
    lp.steps.iter().filter(|s| s.vanishes).map(|s| (s.owner, s.j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::connection_matrices;
    use crate::orealg::left_buchberger;
    use crate::poly::poly;
    use crate::toda::{quantize, quantum_relations};

    fn setup(n: usize) -> (FlagContext, ConnectionData) {
        let basis = left_buchberger(&quantize(&quantum_relations(n))).unwrap();
        let ctx = FlagContext::new(n, &basis).unwrap();
        let cd = connection_matrices(&basis, &ctx).unwrap();
        (ctx, cd)
    }

    #[test]
    fn order() {
        assert_eq!(solve_order(3), vec![(1, 3)]);
        let o = solve_order(6);
        assert_eq!(o[0], (4, 6));
        let pos = |s| o.iter().position(|&x| x == s).unwrap();
        let chain = [(4, 6), (3, 5), (2, 4), (1, 3), (2, 6), (1, 5)];
        for w in chain.windows(2) {
            assert!(pos(w[0]) < pos(w[1]));
        }
        for m in 3..=10 {
            let o = solve_order(m);
            assert_eq!(o[0], (m - 2, m));
            assert_eq!(o.len(), (m - 2) * (m - 1) / 2);
        }
        assert!(solve_order(1).is_empty());
    }

    #[test]
    fn integration() {
        let z = PolyMatrix::zero(2, 2);
        assert_eq!(integrate_closed_form(&[z.clone(), z.clone()]).unwrap(), z);
        let e = |p: &str| PolyMatrix::from_rows(vec![vec![Poly::zero(), poly(p)], vec![Poly::zero(), Poly::zero()]]);
        assert_eq!(integrate_closed_form(&[z.clone(), e("q2")]).unwrap(), e("q2"));
        assert_eq!(integrate_closed_form(&[e("2*q1^2*q2"), e("q1^2*q2")]).unwrap(), e("q1^2*q2"));
        assert!(matches!(integrate_closed_form(&[e("q1"), e("q1")]), Err(IntegrationError::NotClosed { .. })));
        assert!(matches!(integrate_closed_form(&[e("1"), z.clone()]), Err(IntegrationError::ConstantTermPresent { .. })));
        assert!(matches!(integrate_closed_form(&[e("q2"), z]), Err(IntegrationError::NotClosed { .. })));
    }

    #[test]
    fn diagonals() {
        let (ctx, cd) = setup(3);
        let id = diagonal_parts(&PolyMatrix::identity(6), &ctx);
        assert_eq!(id.len(), 1);
        assert_eq!(id[0].j, 0);
        let js: Vec<i64> = diagonal_parts(cd.omega.component(1), &ctx).iter().map(|s| s.j).collect();
        assert_eq!(js, vec![-1, 1, 3]);
        let mut sum = PolyMatrix::zero(6, 6);
        for s in diagonal_parts(cd.omega.component(2), &ctx) {
            sum = &sum + &s.value;
        }
        assert_eq!(&sum, cd.omega.component(2));
    }

    #[test]
    fn gl2_is_trivial() {
        let (ctx, cd) = setup(2);
        let lp = solve_lplus(&cd, &ctx).unwrap();
        assert_eq!(lp.q0, PolyMatrix::identity(2));
        assert!(lp.q.is_empty());
        let (hat, rep) = gauge_check(&lp, &cd, &ctx);
        assert!(rep.is_ok());
        assert_eq!(hat, cd.omega);
    }

    #[test]
    fn gl3() {
        let (ctx, cd) = setup(3);
        let lp = solve_lplus(&cd, &ctx).unwrap();
        assert_eq!(lp.q.len(), 1);
        assert!(lp.q[0].is_zero());
        let mut expect = PolyMatrix::identity(6);
        expect.set(0, 3, poly("q2"));
        expect.set(2, 5, poly("q2"));
        assert_eq!(lp.q0, expect);
        assert_eq!(&lp.q0 - &PolyMatrix::identity(6), cd.theta[0].component(2).clone());
        assert!(check_lplus(&lp, &ctx).is_empty());
        let (_, rep) = gauge_check(&lp, &cd, &ctx);
        assert!(rep.is_ok(), "{rep:?}");
    }

    #[test]
    fn gl4() {
        let (ctx, cd) = setup(4);
        let lp = solve_lplus(&cd, &ctx).unwrap();
        assert_eq!(lp.q.len(), 4);
        let theta1_3: Vec<PolyMatrix> = cd.theta[1].components.iter().map(|c| ctx.diagonal(c, 3)).collect();
        // Q_1 integrates θ^(1),[3]; it must agree with the slice itself along each direction
        for (a, t) in theta1_3.iter().enumerate() {
            assert_eq!(&ctx.diagonal(&lp.q[0], 3).t_derivative(a as u8 + 1), t);
        }
        assert_eq!(&lp.q[0], cd.theta[1].component(3));
        let js: Vec<i64> = diagonal_parts(&lp.q[0], &ctx).iter().map(|s| s.j).collect();
        assert_eq!(js, vec![3, 5]);
        // without its 5-diagonal, Q_1 leaves the Q_0 equation non-integrable
        let truncated = ctx.diagonal(&lp.q[0], 3);
        assert!(matches!(
            solve_q0(&cd, &ctx, &truncated, &mut Vec::new()),
            Err(BirkhoffError::Integration { owner: Owner::Q0, j: 4, .. })
        ));
        for q in &lp.q[1..] {
            assert!(q.is_zero());
        }
        let van = vanishing_symbols(&lp);
        for s in [(4, 6), (3, 5), (2, 4)] {
            assert!(van.contains(&(Owner::Q(s.0), s.1)));
        }
        assert!(check_lplus(&lp, &ctx).is_empty(), "{:?}", check_lplus(&lp, &ctx));
        let (_, rep) = gauge_check(&lp, &cd, &ctx);
        assert!(rep.is_ok(), "{rep:?}");
    }

    #[test]
    fn gauge_check_detects_tampering() {
        let (ctx, cd) = setup(3);
        let mut lp = solve_lplus(&cd, &ctx).unwrap();
        lp.q0.set(0, 3, poly("2*q2"));
        lp.q0_inv = unipotent_inverse(&lp.q0);
        let (_, rep) = gauge_check(&lp, &cd, &ctx);
        assert!(!rep.failures.is_empty());
    }

    #[test]
    #[should_panic(expected = "used before it was solved")]
    fn unsolved_slice_access_panics() {
        let store = Store { m: 6, dim: 1, solved: BTreeMap::new() };
        let _ = store.get(1, 3);
    }

    #[test]
    fn inverse() {
        let mut a = PolyMatrix::identity(3);
        a.set(0, 1, poly("q1"));
        a.set(1, 2, poly("q2"));
        let inv = unipotent_inverse(&a);
        assert_eq!(&a * &inv, PolyMatrix::identity(3));
        assert_eq!(inv.get(0, 2), &poly("q1*q2"));
    }
}
