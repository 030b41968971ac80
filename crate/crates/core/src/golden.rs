//! Exact comparison of pipeline output against the fixtures in `golden/`.

use serde::Serialize;
use serde_json::Value;

use crate::matrix::PolyMatrix;
use crate::pipeline::Pipeline;
use crate::poly::Poly;
use crate::quantum::{as_polynomial, QuantumAction};
use crate::schubert::reduced_forms;

const GL2: &str = include_str!("../golden/gl2.json");
const GL3: &str = include_str!("../golden/gl3.json");
const GL4: &str = include_str!("../golden/gl4.json");

pub fn fixture(n: usize) -> Option<Value> {
    let text = match n {
        2 => GL2,
        3 => GL3,
        4 => GL4,
        _ => return None,
    };
    Some(serde_json::from_str(text).expect("fixture is valid JSON"))
}

/// Parses a fixture matrix of polynomial strings.
pub fn fixture_matrix(v: &Value) -> PolyMatrix {
    let rows: Vec<Vec<Poly>> = v
        .as_array()
        .expect("matrix")
        .iter()
        .map(|r| r.as_array().expect("row").iter().map(fixture_poly).collect())
        .collect();
    PolyMatrix::from_rows(rows)
}

pub fn fixture_poly(v: &Value) -> Poly {
    v.as_str().expect("polynomial string").parse().expect("fixture polynomial parses")
}

pub fn fixture_polys(v: &Value) -> Vec<Poly> {
    v.as_array().expect("list").iter().map(fixture_poly).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub key: String,
    /// Row or list index.
    pub row: Option<usize>,
    pub col: Option<usize>,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldenCheck {
    pub key: String,
    pub compared: usize,
    pub mismatches: Vec<Mismatch>,
    /// The stage producing this key was not run.
    pub skipped: bool,
}

impl GoldenCheck {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldenReport {
    pub n: usize,
    pub checks: Vec<GoldenCheck>,
}

impl GoldenReport {
    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(GoldenCheck::is_ok)
    }

    pub fn check(&self, key: &str) -> Option<&GoldenCheck> {
        self.checks.iter().find(|c| c.key == key)
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &Mismatch> {
        self.checks.iter().flat_map(|c| c.mismatches.iter())
    }
}

pub fn compare_matrices(key: &str, expected: &PolyMatrix, got: &PolyMatrix) -> GoldenCheck {
    let mut mismatches = Vec::new();
    if (expected.rows(), expected.cols()) != (got.rows(), got.cols()) {
        mismatches.push(Mismatch {
            key: key.into(),
            row: None,
            col: None,
            expected: format!("{}×{}", expected.rows(), expected.cols()),
            got: format!("{}×{}", got.rows(), got.cols()),
        });
        return GoldenCheck { key: key.into(), compared: 0, mismatches, skipped: false };
    }
    for i in 0..expected.rows() {
        for j in 0..expected.cols() {
            if expected.get(i, j) != got.get(i, j) {
                mismatches.push(Mismatch {
                    key: key.into(),
                    row: Some(i),
                    col: Some(j),
                    expected: expected.get(i, j).to_text(),
                    got: got.get(i, j).to_text(),
                });
            }
        }
    }
    GoldenCheck { key: key.into(), compared: expected.rows() * expected.cols(), mismatches, skipped: false }
}

pub fn compare_lists(key: &str, expected: &[Poly], got: &[Poly]) -> GoldenCheck {
    let mut mismatches = Vec::new();
    let len = expected.len().max(got.len());
    for i in 0..len {
        let (e, g) = (expected.get(i), got.get(i));
        if e != g {
            mismatches.push(Mismatch {
                key: key.into(),
                row: Some(i),
                col: None,
                expected: e.map_or("<missing>".into(), Poly::to_text),
                got: g.map_or("<missing>".into(), Poly::to_text),
            });
        }
    }
    GoldenCheck { key: key.into(), compared: len, mismatches, skipped: false }
}

fn flag(key: &str, ok: bool, what: &str) -> GoldenCheck {
    let mismatches = if ok { vec![] } else { vec![Mismatch { key: key.into(), row: None, col: None, expected: what.into(), got: "nonzero".into() }] };
    GoldenCheck { key: key.into(), compared: 1, mismatches, skipped: false }
}

fn skipped(key: &str) -> GoldenCheck {
    GoldenCheck { key: key.into(), compared: 0, mismatches: vec![], skipped: true }
}

fn direction(key: &str) -> usize {
    key.rsplit("dt").next().and_then(|s| s.parse().ok()).expect("key ends in dtK")
}

/// Compares every fixture key whose producing stage has been run.
pub fn verify_golden(n: usize, p: &Pipeline) -> GoldenReport {
    let Some(Value::Object(fx)) = fixture(n) else {
        return GoldenReport { n, checks: vec![] };
    };
    let mut checks = Vec::new();
    for (key, v) in &fx {
        let check = match key.as_str() {
            "n" => continue,
            "relations" => match &p.relations {
                Some(rs) => compare_lists(key, &fixture_polys(v), &rs.relations),
                None => skipped(key),
            },
            "basis" => match &p.ctx {
                Some(ctx) => compare_lists(key, &fixture_polys(v), &ctx.classes),
                None => skipped(key),
            },
            k if k.starts_with("omega.") => match &p.connection {
                Some(cd) => compare_matrices(key, &fixture_matrix(v), cd.omega.component(direction(k))),
                None => skipped(key),
            },
            k if k.starts_with("theta0.") => match &p.connection {
                Some(cd) => compare_matrices(key, &fixture_matrix(v), cd.theta(0).component(direction(k))),
                None => skipped(key),
            },
            "theta1" => match &p.connection {
                Some(cd) => flag(key, cd.theta(1).is_zero(), "zero"),
                None => skipped(key),
            },
            "theta_vanishing" => match &p.connection {
                Some(cd) => {
                    let js: Vec<usize> = serde_json::from_value(v.clone()).expect("index list");
                    let bad: Vec<Mismatch> = js
                        .iter()
                        .filter(|&&j| !cd.theta(j).is_zero())
                        .map(|j| Mismatch { key: key.clone(), row: Some(*j), col: None, expected: "zero".into(), got: "nonzero".into() })
                        .collect();
                    GoldenCheck { key: key.clone(), compared: js.len(), mismatches: bad, skipped: false }
                }
                None => skipped(key),
            },
            "q_vanishing" => match &p.lplus {
                Some(lp) => {
                    let js: Vec<usize> = serde_json::from_value(v.clone()).expect("index list");
                    let bad: Vec<Mismatch> = js
                        .iter()
                        .filter(|&&j| !lp.q_i(j).is_zero())
                        .map(|j| Mismatch { key: key.clone(), row: Some(*j), col: None, expected: "zero".into(), got: "nonzero".into() })
                        .collect();
                    GoldenCheck { key: key.clone(), compared: js.len(), mismatches: bad, skipped: false }
                }
                None => skipped(key),
            },
            "q1" => match (&p.lplus, &p.connection) {
                (Some(lp), Some(cd)) => match v.as_str() {
                    Some("zero") => flag(key, lp.q_i(1).is_zero(), "zero"),
                    Some("theta1.diag3") => {
                        let ctx = p.ctx();
                        let want = ctx.diagonal(cd.theta(1).component(ctx.r), 3);
                        compare_matrices(key, &want, &lp.q_i(1))
                    }
                    other => panic!("unknown q1 spec {other:?}"),
                },
                _ => skipped(key),
            },
            "q0" => match &p.lplus {
                Some(lp) => compare_matrices(key, &fixture_matrix(v), &lp.q0),
                None => skipped(key),
            },
            "q0_inv" => match &p.lplus {
                Some(lp) => compare_matrices(key, &fixture_matrix(v), &lp.q0_inv),
                None => skipped(key),
            },
            "hatted" => match &p.evaluation {
                Some(e) => compare_lists(key, &fixture_polys(v), &e.hats),
                None => skipped(key),
            },
            "products" => match (&p.table, &p.ctx) {
                (Some(t), Some(ctx)) => {
                    let rows = v.as_array().expect("list");
                    let mut mismatches = Vec::new();
                    for (idx, r) in rows.iter().enumerate() {
                        let r = fixture_polys(r);
                        let i = ctx.classes.iter().position(|c| *c == r[0]).expect("basis class");
                        let j = ctx.classes.iter().position(|c| *c == r[1]).expect("basis class");
                        let got = as_polynomial(t.get(i, j), ctx);
                        if got != r[2] {
                            mismatches.push(Mismatch { key: key.clone(), row: Some(idx), col: None, expected: r[2].to_text(), got: got.to_text() });
                        }
                    }
                    GoldenCheck { key: key.clone(), compared: rows.len(), mismatches, skipped: false }
                }
                _ => skipped(key),
            },
            "evaluations" => match (&p.omega_hat, &p.ctx) {
                (Some(hat), Some(ctx)) => {
                    let rows = v.as_array().expect("list");
                    let mut mismatches = Vec::new();
                    match QuantumAction::new(hat) {
                        Ok(action) => {
                            for (idx, r) in rows.iter().enumerate() {
                                let r = fixture_polys(r);
                                let got = as_polynomial(&action.evaluate(&r[0]), ctx);
                                if got != r[1] {
                                    mismatches.push(Mismatch { key: key.clone(), row: Some(idx), col: None, expected: r[1].to_text(), got: got.to_text() });
                                }
                            }
                        }
                        Err(e) => mismatches.push(Mismatch { key: key.clone(), row: None, col: None, expected: "commuting omega-hat".into(), got: e.to_string() }),
                    }
                    GoldenCheck { key: key.clone(), compared: rows.len(), mismatches, skipped: false }
                }
                _ => skipped(key),
            },
            "schubert" => match (&p.schubert, &p.ctx) {
                (Some(sd), Some(ctx)) => compare_lists(key, &fixture_polys(v), &reduced_forms(&sd.c, ctx)),
                _ => skipped(key),
            },
            "change_of_basis" => match &p.schubert {
                Some(sd) => compare_matrices(key, &fixture_matrix(v), &sd.c.to_poly_matrix()),
                None => skipped(key),
            },
            "r" => match &p.schubert {
                Some(sd) => compare_matrices(key, &fixture_matrix(v), &sd.quantum.r),
                None => skipped(key),
            },
            "quantum_schubert" => match &p.schubert {
                Some(sd) => compare_lists(key, &fixture_polys(v), &sd.quantum.polys),
                None => skipped(key),
            },
            other => panic!("unknown fixture key {other}"),
        };
        checks.push(check);
    }
    GoldenReport { n, checks }
}
