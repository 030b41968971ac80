//! Stage orchestration and the invariant suites run after each stage.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::birkhoff::{check_lplus, gauge_check, solve_lplus, BirkhoffError, GaugeReport, LPlus};
use crate::connection::{check_structure, connection_matrices, flatness_check, BlockMatForm, ConnectionData, ConnectionError, FlagContext};
use crate::gb::GbError;
use crate::golden::{verify_golden, GoldenReport};
use crate::matrix::RatMatrix;
use crate::orealg::{left_buchberger, LeftIdealBasis};
use crate::poly::Poly;
use crate::quantum::{
    check_table, full_product_table, gw_axiom_failures, gw_invariants, poincare_pairing, quantum_evaluation, ClassicalRing, GWRecord, QEvaluation,
    QTable, QuantumAction, QuantumError,
};
use crate::schubert::{
    change_of_basis, conjugation_check, duality_failures, quantum_schubert, schubert_polynomials, QuantumSchubert, SchubertError, SchubertFamily,
};
use crate::toda::{degrees_ok, quantize, quantum_relations, RelationSet};

pub const DEFAULT_MAX_N: usize = 5;
pub const EXIT_GOLDEN: i32 = 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Relations,
    Grobner,
    Connection,
    Lplus,
    Qprod,
    Schubert,
    Gw,
}

impl Stage {
    pub const ALL: [Stage; 7] = [Stage::Relations, Stage::Grobner, Stage::Connection, Stage::Lplus, Stage::Qprod, Stage::Schubert, Stage::Gw];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Relations => "relations",
            Stage::Grobner => "grobner",
            Stage::Connection => "connection",
            Stage::Lplus => "lplus",
            Stage::Qprod => "qprod",
            Stage::Schubert => "schubert",
            Stage::Gw => "gw",
        }
    }

    pub fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Relations => &[],
            Stage::Grobner => &[Stage::Relations],
            Stage::Connection => &[Stage::Grobner],
            Stage::Lplus => &[Stage::Connection],
            Stage::Qprod => &[Stage::Lplus],
            Stage::Schubert => &[Stage::Lplus],
            Stage::Gw => &[Stage::Qprod, Stage::Schubert],
        }
    }

    pub fn exit_code(self) -> i32 {
        10 + self as i32
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckLevel {
    None,
    Structural,
    Full,
}

impl CheckLevel {
    /// `full` where golden data exists, `structural` beyond.
    pub fn default_for(n: usize) -> Self {
        if n <= 4 {
            CheckLevel::Full
        } else {
            CheckLevel::Structural
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub n: usize,
    pub stages: BTreeSet<Stage>,
    pub check: CheckLevel,
    pub max_n: usize,
}

impl PipelineConfig {
    pub fn new(n: usize, stages: impl IntoIterator<Item = Stage>, check: CheckLevel) -> Self {
        PipelineConfig { n, stages: stages.into_iter().collect(), check, max_n: DEFAULT_MAX_N }
    }

    pub fn all(n: usize) -> Self {
        Self::new(n, Stage::ALL, CheckLevel::default_for(n))
    }

    /// Requested stages together with everything they depend on.
    pub fn closure(&self) -> BTreeSet<Stage> {
        let mut out = BTreeSet::new();
        let mut todo: Vec<Stage> = self.stages.iter().copied().collect();
        while let Some(s) = todo.pop() {
            if out.insert(s) {
                todo.extend_from_slice(s.prerequisites());
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("n = {0} is too small; need n ≥ 2")]
    TooSmall(usize),
    #[error("n = {n} exceeds the safety cap {cap}")]
    TooLarge { n: usize, cap: usize },
}

#[derive(Debug, Error)]
pub enum StageError {
    #[error(transparent)]
    Gb(#[from] GbError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Birkhoff(#[from] BirkhoffError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Schubert(#[from] SchubertError),
}

#[derive(Clone, Debug, Serialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub stage: Stage,
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub details: Vec<String>,
}

/// Everything computed so far; later stages are `None` until run.
#[derive(Default)]
pub struct Pipeline {
    pub relations: Option<RelationSet>,
    pub basis: Option<LeftIdealBasis>,
    pub ctx: Option<FlagContext>,
    pub connection: Option<ConnectionData>,
    pub lplus: Option<LPlus>,
    pub omega_hat: Option<BlockMatForm>,
    pub gauge: Option<GaugeReport>,
    pub evaluation: Option<QEvaluation>,
    pub table: Option<QTable>,
    pub ring: Option<ClassicalRing>,
    pub schubert: Option<SchubertData>,
    pub gw: Option<Vec<GWRecord>>,
}

pub struct SchubertData {
    pub family: SchubertFamily,
    pub c: RatMatrix,
    pub quantum: QuantumSchubert,
    pub pairing: RatMatrix,
}

pub struct RunReport {
    pub n: usize,
    pub stages: BTreeSet<Stage>,
    pub pipeline: Pipeline,
    pub checks: Vec<CheckOutcome>,
    pub golden: Option<GoldenReport>,
    pub failure: Option<StageFailure>,
    pub timings: Vec<(Stage, Duration)>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if let Some(f) = &self.failure {
            return f.stage.exit_code();
        }
        if let Some(c) = self.checks.iter().find(|c| !c.passed) {
            return c.stage.exit_code();
        }
        if self.golden.as_ref().is_some_and(|g| !g.is_ok()) {
            return EXIT_GOLDEN;
        }
        0
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Machine-readable summary of failures.
    pub fn failure_report(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "exit_code": self.exit_code(),
            "stage_failure": self.failure,
            "failed_checks": self.failed_checks().collect::<Vec<_>>(),
            "golden_mismatches": self.golden.as_ref().map(|g| g.mismatches().cloned().collect::<Vec<_>>()).unwrap_or_default(),
        })
    }
}

fn outcome(stage: Stage, name: &str, checked: usize, details: Vec<String>) -> CheckOutcome {
    CheckOutcome { stage, name: name.to_string(), passed: details.is_empty(), checked, details }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

impl Pipeline {
    pub fn ctx(&self) -> &FlagContext {
        self.ctx.as_ref().expect("grobner stage not run")
    }

    fn run_stage(&mut self, n: usize, stage: Stage) -> Result<(), StageError> {
        match stage {
            Stage::Relations => self.relations = Some(quantum_relations(n)),
            Stage::Grobner => {
                let rs = self.relations.as_ref().expect("prerequisite");
                let basis = left_buchberger(&quantize(rs))?;
                self.ctx = Some(FlagContext::new(n, &basis)?);
                self.basis = Some(basis);
            }
            Stage::Connection => {
                self.connection = Some(connection_matrices(self.basis.as_ref().expect("prerequisite"), self.ctx())?);
            }
            Stage::Lplus => {
                let cd = self.connection.as_ref().expect("prerequisite");
                let lp = solve_lplus(cd, self.ctx())?;
                let (hat, report) = gauge_check(&lp, cd, self.ctx());
                self.evaluation = Some(quantum_evaluation(&lp.q0_inv, self.ctx()));
                self.omega_hat = Some(hat);
                self.gauge = Some(report);
                self.lplus = Some(lp);
            }
            Stage::Qprod => {
                let hat = self.omega_hat.as_ref().expect("prerequisite");
                self.table = Some(full_product_table(hat, self.evaluation.as_ref().expect("prerequisite"), self.ctx())?);
            }
            Stage::Schubert => {
                let ring = ClassicalRing::new(self.relations.as_ref().expect("prerequisite"), self.ctx())?;
                let family = schubert_polynomials(n)?;
                let c = change_of_basis(&family, &ring)?;
                let quantum = quantum_schubert(&c, self.lplus.as_ref().expect("prerequisite"), self.ctx());
                let pairing = poincare_pairing(&ring, &c.inverse().map_err(SchubertError::from)?)?;
                self.schubert = Some(SchubertData { family, c, quantum, pairing });
                self.ring = Some(ring);
            }
            Stage::Gw => {
                let sd = self.schubert.as_ref().expect("prerequisite");
                self.gw = Some(gw_invariants(self.table.as_ref().expect("prerequisite"), &sd.pairing, self.ctx())?);
            }
        }
        Ok(())
    }

    fn checks(&self, n: usize, stage: Stage, level: CheckLevel) -> Result<Vec<CheckOutcome>, StageError> {
        let mut out = Vec::new();
        match stage {
            Stage::Relations => {
                let rs = self.relations.as_ref().expect("stage run");
                let mut d = Vec::new();
                if !degrees_ok(rs) {
                    d.push("relations are not homogeneous of degrees 4..2n".into());
                }
                if rs.relations.len() != n - 1 {
                    d.push(format!("{} relations, expected {}", rs.relations.len(), n - 1));
                }
                out.push(outcome(stage, "relation degrees", rs.relations.len(), d));
            }
            Stage::Grobner => {
                let ctx = self.ctx();
                let d = if ctx.dim() == factorial(n) { vec![] } else { vec![format!("quotient rank {}, expected {}", ctx.dim(), factorial(n))] };
                out.push(outcome(stage, "quotient rank n!", 1, d));
                // the census is enforced when the context is built
                out.push(outcome(stage, "block census", ctx.block_sizes.len(), vec![]));
            }
            Stage::Connection => {
                let cd = self.connection.as_ref().expect("stage run");
                let rep = check_structure(cd, self.ctx());
                out.push(outcome(stage, "H1 H2 F1 F2 and parity", rep.entries_checked, rep.violations.iter().map(|v| format!("{v:?}")).collect()));
                let flat = flatness_check(cd);
                out.push(outcome(stage, "flatness", flat.pairs_checked, flat.failures.iter().map(|f| format!("{f:?}")).collect()));
            }
            Stage::Lplus => {
                let lp = self.lplus.as_ref().expect("stage run");
                let ctx = self.ctx();
                out.push(outcome(stage, "triangularity and homogeneity of Q", lp.q.len() + 1, check_lplus(lp, ctx)));
                out.push(outcome(stage, "closed quadrature steps", lp.steps.len(), vec![]));
                let g = self.gauge.as_ref().expect("stage run");
                out.push(outcome(stage, "gauge identity", g.identities_checked, g.failures.iter().map(|f| format!("{f:?}")).collect()));
                out.push(outcome(
                    stage,
                    "integrability of omega-hat",
                    ctx.r * ctx.r.saturating_sub(1) / 2,
                    g.integrability_failures.iter().map(|f| format!("{f:?}")).collect(),
                ));
                out.push(outcome(stage, "omega-hat laws", 1, g.structure_failures.clone()));
            }
            Stage::Qprod => {
                let hat = self.omega_hat.as_ref().expect("stage run");
                let ctx = self.ctx();
                let commute = QuantumAction::new(hat).err().map(|e| vec![e.to_string()]).unwrap_or_default();
                out.push(outcome(stage, "omega-hat commute", ctx.r * ctx.r.saturating_sub(1) / 2, commute));
                let ring = ClassicalRing::new(self.relations.as_ref().expect("stage run"), ctx)?;
                let triples = if n <= 4 { None } else { Some(2000) };
                let rep = check_table(
                    self.table.as_ref().expect("stage run"),
                    hat,
                    ctx,
                    self.relations.as_ref().expect("stage run"),
                    &ring,
                    self.evaluation.as_ref().expect("stage run"),
                    triples,
                )?;
                out.push(outcome(stage, "product table ring laws", rep.checks, rep.failures));
            }
            Stage::Schubert => {
                let sd = self.schubert.as_ref().expect("stage run");
                let ctx = self.ctx();
                let d = if sd.quantum.r.map(Poly::at_q_zero) == sd.c.to_poly_matrix() { vec![] } else { vec!["R|q=0 ≠ C".into()] };
                out.push(outcome(stage, "R at q=0 equals C", 1, d));
                let action = QuantumAction::new(self.omega_hat.as_ref().expect("prerequisite"))?;
                let mut d = Vec::new();
                for (i, p) in sd.quantum.polys.iter().enumerate() {
                    let want: Vec<Poly> = (0..ctx.dim()).map(|k| Poly::constant(sd.c.entries[k][i].clone())).collect();
                    if action.evaluate(p) != want {
                        d.push(format!("quantum Schubert polynomial {i} does not evaluate to its class"));
                    }
                }
                out.push(outcome(stage, "quantum Schubert evaluation", ctx.dim(), d));
                out.push(outcome(stage, "Schubert duality", ctx.dim(), duality_failures(&sd.family, &sd.pairing, &sd.c)));
                if level == CheckLevel::Full && n <= 4 {
                    let ok = conjugation_check(self.basis.as_ref().expect("prerequisite"), ctx, &sd.c, self.lplus.as_ref().expect("prerequisite"))?;
                    out.push(outcome(stage, "primed basis conjugation", 1, if ok { vec![] } else { vec!["Q'0 ≠ C⁻¹Q0C".into()] }));
                }
            }
            Stage::Gw => {
                let gw = self.gw.as_ref().expect("stage run");
                out.push(outcome(stage, "GW symmetry and dimension axiom", gw.len(), gw_axiom_failures(gw, self.ctx())));
            }
        }
        Ok(out)
    }
}

pub fn run(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    if cfg.n < 2 {
        return Err(PipelineError::TooSmall(cfg.n));
    }
    if cfg.n > cfg.max_n {
        return Err(PipelineError::TooLarge { n: cfg.n, cap: cfg.max_n });
    }
    let stages = cfg.closure();
    let mut report = RunReport {
        n: cfg.n,
        stages: stages.clone(),
        pipeline: Pipeline::default(),
        checks: Vec::new(),
        golden: None,
        failure: None,
        timings: Vec::new(),
    };
    for &stage in &stages {
        let start = Instant::now();
        let res = report.pipeline.run_stage(cfg.n, stage).and_then(|()| {
            if cfg.check == CheckLevel::None {
                Ok(Vec::new())
            } else {
                report.pipeline.checks(cfg.n, stage, cfg.check)
            }
        });
        report.timings.push((stage, start.elapsed()));
        match res {
            Ok(checks) => report.checks.extend(checks),
            Err(e) => {
                report.failure = Some(StageFailure { stage, message: e.to_string() });
                return Ok(report);
            }
        }
    }
    if cfg.check == CheckLevel::Full && cfg.n <= 4 {
        report.golden = Some(verify_golden(cfg.n, &report.pipeline));
    }
    Ok(report)
}
