//! Dense matrices over `Q[q, h]` and over `Q`.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{Poly, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Poly>>,
}

impl PolyMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        PolyMatrix { rows, cols, entries: vec![vec![Poly::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.entries[i][i] = Poly::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        PolyMatrix { rows: r, cols: c, entries: rows }
    }

    /// Builds a matrix from rows of polynomial strings; panics on parse errors.
    pub fn parse_rows(rows: &[&[&str]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|s| crate::poly::poly(s)).collect()).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly) -> Self {
        PolyMatrix { rows, cols, entries: (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.entries[i][j] = p;
    }

    pub fn row_slices(&self) -> &[Vec<Poly>] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<Poly> {
        self.entries.iter().map(|r| r[j].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, col: Vec<Poly>) {
        assert_eq!(col.len(), self.rows);
        for (i, p) in col.into_iter().enumerate() {
            self.entries[i][j] = p;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Poly::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        PolyMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    pub fn map_indexed(&self, f: impl Fn(usize, usize, &Poly) -> Poly) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| f(i, j, &self.entries[i][j]))
    }

    pub fn t_derivative(&self, i: u8) -> Self {
        self.map(|p| p.t_derivative(i))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.entries[j][i].clone())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Poly]) -> Vec<Poly> {
        assert_eq!(v.len(), self.cols);
        self.entries
            .iter()
            .map(|row| {
                let mut acc = Poly::zero();
                for (a, b) in row.iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect()
    }

    /// Positions of nonzero entries.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, r) in self.entries.iter().enumerate() {
            for (j, p) in r.iter().enumerate() {
                if !p.is_zero() {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn to_latex(&self) -> String {
        let body: Vec<String> = self.entries.iter().map(|r| r.iter().map(Poly::to_latex).collect::<Vec<_>>().join(" & ")).collect();
        format!("\\begin{{pmatrix}}\n{}\n\\end{{pmatrix}}", body.join(" \\\\\n"))
    }

    /// Same as [`PolyMatrix::to_latex`] but split into column slabs of at most `width`.
    pub fn to_latex_slabs(&self, width: usize) -> String {
        if width == 0 || self.cols <= width {
            return self.to_latex();
        }
        let mut out = Vec::new();
        let mut start = 0;
        while start < self.cols {
            let end = (start + width).min(self.cols);
            let slab = Self::from_fn(self.rows, end - start, |i, j| self.entries[i][start + j].clone());
            out.push(format!("% columns {start}..{}\n{}", end - 1, slab.to_latex()));
            start = end;
        }
        out.join("\n")
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|r| format!("[{}]", r.iter().map(Poly::to_text).collect::<Vec<_>>().join(", "))).collect::<Vec<_>>().join("\n")
    }
}

impl<'a> Add<&'a PolyMatrix> for &'a PolyMatrix {
    type Output = PolyMatrix;
    fn add(self, o: &'a PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        PolyMatrix::from_fn(self.rows, self.cols, |i, j| &self.entries[i][j] + &o.entries[i][j])
    }
}

impl<'a> Sub<&'a PolyMatrix> for &'a PolyMatrix {
    type Output = PolyMatrix;
    fn sub(self, o: &'a PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        PolyMatrix::from_fn(self.rows, self.cols, |i, j| &self.entries[i][j] - &o.entries[i][j])
    }
}

impl<'a> Mul<&'a PolyMatrix> for &'a PolyMatrix {
    type Output = PolyMatrix;
    fn mul(self, o: &'a PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut out = PolyMatrix::zero(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.entries[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o.entries[k][j];
                    if !b.is_zero() {
                        out.entries[i][j] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

impl Neg for &PolyMatrix {
    type Output = PolyMatrix;
    fn neg(self) -> PolyMatrix {
        self.map(|p| -p)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix is singular")]
    Singular,
}

/// Dense rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    pub n: usize,
    pub entries: Vec<Vec<Rational>>,
}

impl RatMatrix {
    pub fn identity(n: usize) -> Self {
        let entries = (0..n).map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect()).collect();
        RatMatrix { n, entries }
    }

    /// Reads a matrix of constant polynomials; `None` if any entry is not constant.
    pub fn from_poly_matrix(m: &PolyMatrix) -> Option<Self> {
        if m.rows != m.cols {
            return None;
        }
        let entries = m.entries.iter().map(|r| r.iter().map(Poly::as_constant).collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>()?;
        Some(RatMatrix { n: m.rows, entries })
    }

    pub fn to_poly_matrix(&self) -> PolyMatrix {
        PolyMatrix::from_fn(self.n, self.n, |i, j| Poly::constant(self.entries[i][j].clone()))
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<RatMatrix, MatrixError> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut inv = RatMatrix::identity(n).entries;
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(MatrixError::Singular)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            for j in 0..n {
                a[col][j] = &a[col][j] / &p;
                inv[col][j] = &inv[col][j] / &p;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for j in 0..n {
                        let t = &f * &a[col][j];
                        a[r][j] -= t;
                        let t = &f * &inv[col][j];
                        inv[r][j] -= t;
                    }
                }
            }
        }
        Ok(RatMatrix { n, entries: inv })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{poly, rat};

    #[test]
    fn products_and_commutators() {
        let a = PolyMatrix::parse_rows(&[&["0", "q1"], &["1", "0"]]);
        let sq = &a * &a;
        assert_eq!(sq, PolyMatrix::parse_rows(&[&["q1", "0"], &["0", "q1"]]));
        assert!(a.commutator(&sq).is_zero());
        assert_eq!(a.apply(&[poly("1"), poly("0")]), vec![poly("0"), poly("1")]);
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.t_derivative(1), PolyMatrix::parse_rows(&[&["0", "q1"], &["0", "0"]]));
    }

    #[test]
    fn rational_inverse() {
        let m = RatMatrix { n: 2, entries: vec![vec![rat(-1), rat(1)], vec![rat(1), rat(0)]] };
        let inv = m.inverse().unwrap();
        assert_eq!(inv.entries, vec![vec![rat(0), rat(1)], vec![rat(1), rat(1)]]);
        let prod = &m.to_poly_matrix() * &inv.to_poly_matrix();
        assert_eq!(prod, PolyMatrix::identity(2));
        let s = RatMatrix { n: 2, entries: vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]] };
        assert_eq!(s.inverse(), Err(MatrixError::Singular));
    }

    #[test]
    fn latex() {
        let a = PolyMatrix::parse_rows(&[&["q1*q2 + q2^2", "-1"], &["1/2*q1", "0"]]);
        assert_eq!(a.to_latex(), "\\begin{pmatrix}\nq_1q_2+q_2^2 & -1 \\\\\n\\frac{1}{2}q_1 & 0\n\\end{pmatrix}");
    }
}
