use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use flagqh::golden::GoldenReport;
use flagqh::pipeline::{run, CheckLevel, Pipeline, PipelineConfig, RunReport, Stage, DEFAULT_MAX_N};
use flagqh::poly::Poly;
use flagqh::quantum::as_polynomial;
use flagqh::schubert::reduced_forms;

#[derive(Parser)]
#[command(name = "flagqh", version, about = "Exact small quantum cohomology of GL_n/B")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Rank of the general linear group.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Defaults to `structural`, or `full` for `verify`.
    #[arg(long, value_enum)]
    check: Option<Check>,
    #[arg(long, default_value_t = DEFAULT_MAX_N)]
    max_n: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum relations R_1..R_{n-1} and their quantizations.
    Relations(Common),
    /// Left Gröbner basis of the quantized relations and the standard basis.
    Grobner(Common),
    /// Connection matrices omega and theta.
    Connection(Common),
    /// The gauge-fixed L+; by default only Q0 and its inverse.
    Lplus {
        #[command(flatten)]
        common: Common,
        /// Also print Q1..Q_{m-2} and the quadrature steps.
        #[arg(long)]
        dump_lplus: bool,
    },
    /// Quantum evaluation and products c_i∘c_j.
    Qprod {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "j")]
        i: Option<usize>,
        #[arg(long, requires = "i")]
        j: Option<usize>,
    },
    /// Three-point genus-zero Gromov-Witten invariants.
    Gw {
        #[command(flatten)]
        common: Common,
        /// Only this multidegree, e.g. `1,0,1`.
        #[arg(long, value_delimiter = ',')]
        degree: Option<Vec<u32>>,
    },
    /// Schubert polynomials in the b-variables.
    Schubert {
        #[command(flatten)]
        common: Common,
        /// Print the quantum Schubert polynomials instead.
        #[arg(long)]
        quantum: bool,
    },
    /// Runs every stage with its invariant suite and the golden comparisons.
    Verify(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Latex,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    None,
    Structural,
    Full,
}

impl From<Check> for CheckLevel {
    fn from(c: Check) -> Self {
        match c {
            Check::None => CheckLevel::None,
            Check::Structural => CheckLevel::Structural,
            Check::Full => CheckLevel::Full,
        }
    }
}

fn texts(ps: &[Poly]) -> Vec<String> {
    ps.iter().map(Poly::to_text).collect()
}

fn emit_list(format: Format, key: &str, latex_name: &str, ps: &[Poly]) -> String {
    match format {
        Format::Json => json!({ key: texts(ps) }).to_string(),
        Format::Text => ps.iter().enumerate().map(|(i, p)| format!("{key}[{i}] = {p}")).collect::<Vec<_>>().join("\n"),
        Format::Latex => ps.iter().enumerate().map(|(i, p)| format!("{latex_name}_{{{i}}} = {}", p.to_latex())).collect::<Vec<_>>().join(" \\\\\n"),
    }
}

fn relations(p: &Pipeline, format: Format) -> String {
    let rs = p.relations.as_ref().expect("stage run");
    let ops: Vec<String> = flagqh::toda::quantize(rs).iter().map(|o| o.to_text()).collect();
    match format {
        Format::Json => json!({ "n": rs.n, "relations": texts(&rs.relations), "operators": ops }).to_string(),
        Format::Text => {
            let mut out = String::new();
            for (i, (r, o)) in rs.relations.iter().zip(&ops).enumerate() {
                writeln!(out, "R{} = {r}", i + 1).unwrap();
                writeln!(out, "D{} = {o}", i + 1).unwrap();
            }
            out.trim_end().to_string()
        }
        Format::Latex => rs.relations.iter().enumerate().map(|(i, r)| format!("\\mathcal{{R}}_{{{}}} = {}", i + 1, r.to_latex())).collect::<Vec<_>>().join(" \\\\\n"),
    }
}

fn grobner(p: &Pipeline, format: Format) -> String {
    let gens: Vec<String> = p.basis.as_ref().expect("stage run").generators().iter().map(|o| o.to_text()).collect();
    let ctx = p.ctx();
    match format {
        Format::Json => json!({ "generators": gens, "standard_basis": texts(&ctx.classes), "block_sizes": ctx.block_sizes }).to_string(),
        Format::Text => {
            let mut out = String::new();
            for g in &gens {
                writeln!(out, "G: {g}").unwrap();
            }
            write!(out, "{}", emit_list(Format::Text, "c", "c", &ctx.classes)).unwrap();
            out
        }
        Format::Latex => emit_list(Format::Latex, "c", "c", &ctx.classes),
    }
}

fn connection(p: &Pipeline, format: Format) -> String {
    let cd = p.connection.as_ref().expect("stage run");
    match format {
        Format::Json => serde_json::to_string(cd).expect("serializable"),
        Format::Text => cd.to_text(),
        Format::Latex => cd.to_latex(),
    }
}

fn lplus(p: &Pipeline, format: Format, dump: bool) -> String {
    let lp = p.lplus.as_ref().expect("stage run");
    match (format, dump) {
        (Format::Json, true) => serde_json::to_string(lp).expect("serializable"),
        (Format::Json, false) => json!({ "q0": lp.q0, "q0_inv": lp.q0_inv }).to_string(),
        (Format::Text, true) => lp.to_text(),
        (Format::Text, false) => format!("Q0 =\n{}\nQ0^-1 =\n{}", lp.q0.to_text(), lp.q0_inv.to_text()),
        (Format::Latex, true) => lp.to_latex(),
        (Format::Latex, false) => format!("Q_0 = {}\n\nQ_0^{{-1}} = {}", lp.q0.to_latex_slabs(12), lp.q0_inv.to_latex_slabs(12)),
    }
}

fn qprod(p: &Pipeline, format: Format, pair: Option<(usize, usize)>) -> Result<String, String> {
    let ctx = p.ctx();
    let table = p.table.as_ref().expect("stage run");
    let dim = ctx.dim();
    let pairs: Vec<(usize, usize)> = match pair {
        Some((i, j)) if i < dim && j < dim => vec![(i, j)],
        Some((i, j)) => return Err(format!("index out of range: ({i}, {j}) with {dim} basis classes")),
        None => (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect(),
    };
    let hats = &p.evaluation.as_ref().expect("stage run").hats;
    Ok(match format {
        Format::Json => {
            let products: Vec<Value> = pairs
                .iter()
                .map(|&(i, j)| json!({ "i": i, "j": j, "coefficients": texts(table.get(i, j)), "product": as_polynomial(table.get(i, j), ctx).to_text() }))
                .collect();
            let mut obj = json!({ "basis": texts(&ctx.classes), "products": products });
            if pair.is_none() {
                obj["hatted"] = json!(texts(hats));
            }
            obj.to_string()
        }
        Format::Text => {
            let mut out = String::new();
            if pair.is_none() {
                for (h, c) in hats.iter().zip(&ctx.classes) {
                    writeln!(out, "({h})∘ = {c}").unwrap();
                }
            }
            for &(i, j) in &pairs {
                writeln!(out, "{} ∘ {} = {}", ctx.classes[i], ctx.classes[j], as_polynomial(table.get(i, j), ctx)).unwrap();
            }
            out.trim_end().to_string()
        }
        Format::Latex => {
            let mut lines = Vec::new();
            if pair.is_none() {
                for (h, c) in hats.iter().zip(&ctx.classes) {
                    lines.push(format!("({})^\\circ = {}", h.to_latex(), c.to_latex()));
                }
            }
            for &(i, j) in &pairs {
                lines.push(format!("{} \\circ {} = {}", ctx.classes[i].to_latex(), ctx.classes[j].to_latex(), as_polynomial(table.get(i, j), ctx).to_latex()));
            }
            lines.join(" \\\\\n")
        }
    })
}

fn gw(p: &Pipeline, format: Format, degree: Option<&[u32]>) -> Result<String, String> {
    let ctx = p.ctx();
    if let Some(d) = degree {
        if d.len() != ctx.r {
            return Err(format!("--degree needs {} entries, got {}", ctx.r, d.len()));
        }
    }
    let records: Vec<_> = p.gw.as_ref().expect("stage run").iter().filter(|r| degree.is_none_or(|d| r.d == d)).collect();
    Ok(match format {
        Format::Json => records.iter().map(|r| serde_json::to_string(r).expect("serializable")).collect::<Vec<_>>().join("\n"),
        Format::Text => records
            .iter()
            .map(|r| format!("<{}, {}, {}>_{:?} = {}", ctx.classes[r.i], ctx.classes[r.j], ctx.classes[r.k], r.d, r.value))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Latex => records
            .iter()
            .map(|r| {
                let d: Vec<String> = r.d.iter().map(u32::to_string).collect();
                format!(
                    "\\langle {}, {}, {} \\rangle_{{({})}} = {}",
                    ctx.classes[r.i].to_latex(),
                    ctx.classes[r.j].to_latex(),
                    ctx.classes[r.k].to_latex(),
                    d.join(","),
                    r.value
                )
            })
            .collect::<Vec<_>>()
            .join(" \\\\\n"),
    })
}

fn schubert(p: &Pipeline, format: Format, quantum: bool) -> String {
    let sd = p.schubert.as_ref().expect("stage run");
    let polys = if quantum { sd.quantum.polys.clone() } else { reduced_forms(&sd.c, p.ctx()) };
    let perms: Vec<String> = sd.family.classes.iter().map(|c| c.perm.iter().map(u8::to_string).collect()).collect();
    match format {
        Format::Json => {
            let mut obj = json!({ "permutations": perms, "polynomials": texts(&polys), "change_of_basis": sd.c.to_poly_matrix() });
            if quantum {
                obj["r"] = serde_json::to_value(&sd.quantum.r).expect("serializable");
            }
            obj.to_string()
        }
        Format::Text => perms.iter().zip(&polys).map(|(w, p)| format!("S[{w}] = {p}")).collect::<Vec<_>>().join("\n"),
        Format::Latex => {
            let name = if quantum { "\\mathfrak{S}^q" } else { "\\mathfrak{S}" };
            perms.iter().zip(&polys).map(|(w, p)| format!("{name}_{{{w}}} = {}", p.to_latex())).collect::<Vec<_>>().join(" \\\\\n")
        }
    }
}

fn golden_text(g: &GoldenReport) -> String {
    let mut out = String::new();
    for c in &g.checks {
        let status = if c.skipped {
            "skip"
        } else if c.is_ok() {
            "ok"
        } else {
            "MISMATCH"
        };
        writeln!(out, "golden gl{} {:<18} {:<8} {} compared", g.n, c.key, status, c.compared).unwrap();
        for m in &c.mismatches {
            let at = match (m.row, m.col) {
                (Some(r), Some(c)) => format!("({r},{c})"),
                (Some(r), None) => format!("[{r}]"),
                _ => String::new(),
            };
            writeln!(out, "    {}{at}: expected {}, got {}", m.key, m.expected, m.got).unwrap();
        }
    }
    out
}

fn verify(rep: &RunReport, format: Format) -> String {
    match format {
        Format::Json => json!({
            "n": rep.n,
            "exit_code": rep.exit_code(),
            "checks": rep.checks,
            "golden": rep.golden,
            "stage_failure": rep.failure,
        })
        .to_string(),
        _ => {
            let mut out = String::new();
            for c in &rep.checks {
                writeln!(out, "{:<10} {:<36} {} ({} checked)", c.stage, c.name, if c.passed { "ok" } else { "FAIL" }, c.checked).unwrap();
                for d in c.details.iter().take(10) {
                    writeln!(out, "    {d}").unwrap();
                }
            }
            if let Some(g) = &rep.golden {
                out.push_str(&golden_text(g));
            }
            out.trim_end().to_string()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, stage) = match &cli.command {
        Command::Relations(c) => (c, Some(Stage::Relations)),
        Command::Grobner(c) => (c, Some(Stage::Grobner)),
        Command::Connection(c) => (c, Some(Stage::Connection)),
        Command::Lplus { common, .. } => (common, Some(Stage::Lplus)),
        Command::Qprod { common, .. } => (common, Some(Stage::Qprod)),
        Command::Gw { common, .. } => (common, Some(Stage::Gw)),
        Command::Schubert { common, .. } => (common, Some(Stage::Schubert)),
        Command::Verify(c) => (c, None),
    };
    let default_check = if stage.is_none() { CheckLevel::default_for(common.n) } else { CheckLevel::Structural };
    let stages: BTreeSet<Stage> = stage.map_or_else(|| Stage::ALL.into_iter().collect(), |s| [s].into());
    let mut cfg = PipelineConfig::new(common.n, stages, common.check.map_or(default_check, CheckLevel::from));
    cfg.max_n = common.max_n;
    let rep = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if rep.failure.is_some() {
        eprintln!("{}", rep.failure_report());
        return ExitCode::from(rep.exit_code() as u8);
    }
    let p = &rep.pipeline;
    let f = common.format;
    let out = match &cli.command {
        Command::Relations(_) => Ok(relations(p, f)),
        Command::Grobner(_) => Ok(grobner(p, f)),
        Command::Connection(_) => Ok(connection(p, f)),
        Command::Lplus { dump_lplus, .. } => Ok(lplus(p, f, *dump_lplus)),
        Command::Qprod { i, j, .. } => qprod(p, f, i.zip(*j)),
        Command::Gw { degree, .. } => gw(p, f, degree.as_deref()),
        Command::Schubert { quantum, .. } => Ok(schubert(p, f, *quantum)),
        Command::Verify(_) => Ok(verify(&rep, f)),
    };
    match out {
        Ok(s) => {
            if !s.is_empty() {
                println!("{s}");
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let code = rep.exit_code();
    if code != 0 {
        if stage.is_some() {
            eprintln!("{}", rep.failure_report());
        } else if f != Format::Json {
            eprintln!("verification failed (exit {code})");
        }
    }
    ExitCode::from(code as u8)
}
