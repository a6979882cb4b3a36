use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ca_commlab::algebra::{is_subautomaton, rescale, simulates, RescaleParams, SimulationBounds};
use ca_commlab::audit::{self, AuditConfig, AuditReport, Rule218Decider, Rule94Decider};
use ca_commlab::commcomp::netpbm::{write_pbm, write_pgm};
use ca_commlab::commcomp::{
    build_matrix, cc_profile_splits, CcReport, Method, PredMatrix, Problem,
};
use ca_commlab::gallery;
use ca_commlab::problems::{
    cycle_length, invasion_with_deciders, pred, InvasionBudget, InvasionDecider, InvasionVerdict,
    Outcome,
};
use ca_commlab::sim::{spacetime_triangle, step_cyclic, step_perturbed, OrbitCache};
use ca_commlab::{CyclicWord, Error, PerturbedConfig, Rule, Word};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ca-commlab",
    version,
    about = "Cellular automata and communication complexity toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Space-time diagram of a finite, cyclic or perturbed configuration.
    Simulate(SimulateArgs),
    /// First cell of the fully collapsed word.
    Pred(PredArgs),
    /// Problem matrix at one split.
    Matrix(MatrixArgs),
    /// Communication cost profile over splits.
    Cc(CcArgs),
    /// Preperiod and period of a cyclic word.
    Cycle(CycleArgs),
    /// Invasion verdict with certificate.
    Invade(InvadeArgs),
    /// Structural audits of rules 218, 94 and 33.
    Audit(AuditArgs),
    /// Built-in example automata.
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
    /// Rescaled rule <F>^{m,t,z} as JSON.
    Rescale(RescaleArgs),
    /// Sub-automaton embedding or bounded simulation search.
    Embed(EmbedArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pbm,
    Pgm,
    Text,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemKind {
    Pred,
    Cycle,
    Invasion,
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "pred")]
    problem: ProblemKind,
    /// Cycle bound for the cycle problem.
    #[arg(short = 'k', long, default_value_t = 1)]
    k: usize,
    /// Background period for invasion.
    #[arg(long)]
    background: Option<String>,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = InvasionBudget::default().max_steps)]
    budget_steps: usize,
    #[arg(long, default_value_t = InvasionBudget::default().max_width)]
    budget_width: usize,
}

impl BudgetArgs {
    fn budget(&self) -> Result<InvasionBudget, CliError> {
        if self.budget_width == 0 {
            return Err(CliError::Usage("--budget-width must be positive".into()));
        }
        Ok(InvasionBudget {
            max_steps: self.budget_steps,
            max_width: self.budget_width,
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    rule: String,
    #[arg(long)]
    input: String,
    /// `all` (collapse the finite word) or a step count.
    #[arg(long, default_value = "all")]
    steps: String,
    /// Treat the input as the period of a cyclic configuration.
    #[arg(long)]
    cyclic: bool,
    /// Treat the input as a finite perturbation of this background period.
    #[arg(long, conflicts_with = "cyclic")]
    background: Option<String>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct PredArgs {
    rule: String,
    #[arg(long)]
    input: String,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct MatrixArgs {
    rule: String,
    #[arg(short = 'n')]
    n: usize,
    #[arg(short = 'i')]
    i: usize,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct CcArgs {
    rule: String,
    #[arg(short = 'n')]
    n: usize,
    /// Single split point; all splits when absent.
    #[arg(short = 'i', conflicts_with = "split")]
    i: Option<usize>,
    /// `all` (the default) evaluates every split 1..n-1.
    #[arg(long)]
    split: Option<String>,
    #[arg(long, default_value = "one-round")]
    method: String,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct CycleArgs {
    rule: String,
    #[arg(long)]
    input: String,
    /// Also report whether the period is at most k.
    #[arg(short = 'k')]
    k: Option<usize>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct InvadeArgs {
    rule: String,
    #[arg(long)]
    background: String,
    #[arg(long)]
    input: String,
    /// Consult the rule-specific deciders first.
    #[arg(long)]
    deciders: bool,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct AuditArgs {
    /// `eca:218`, `eca:94`, `eca:33` or `all`.
    subject: String,
    /// Word-length range for every exhaustive scan.
    #[arg(long)]
    range: Option<usize>,
    /// Run a single claim.
    #[arg(long)]
    claim: Option<String>,
    #[command(flatten)]
    out: Output,
}

#[derive(Subcommand)]
enum GalleryCommand {
    List {
        #[command(flatten)]
        out: Output,
    },
    Check {
        /// Entry id; every entry when absent.
        id: Option<String>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct RescaleArgs {
    rule: String,
    #[arg(short = 'm', default_value_t = 1)]
    m: usize,
    #[arg(short = 't', default_value_t = 1)]
    t: usize,
    #[arg(short = 'z', default_value_t = 0, allow_hyphen_values = true)]
    z: i64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct EmbedArgs {
    f: String,
    g: String,
    /// Search rescalings of both rules instead of a plain embedding.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 3)]
    max_m: usize,
    #[arg(long, default_value_t = 3)]
    max_t: usize,
    #[arg(long, default_value_t = 2)]
    max_z: i64,
    #[command(flatten)]
    out: Output,
}

enum CliError {
    Lib(Error),
    Usage(String),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(
                Error::CapExceeded { .. }
                | Error::DepthLimit(_)
                | Error::UnknownVerdict { .. }
                | Error::Inconclusive(_),
            ) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

/// Exit status of a successful run.
enum Status {
    Ok,
    Refuted,
    Undecided,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Refuted) => ExitCode::from(1),
        Ok(Status::Undecided) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CA_COMMLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "CA_COMMLAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(command: Command) -> Result<Status, CliError> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Pred(a) => pred_cmd(a),
        Command::Matrix(a) => matrix(a),
        Command::Cc(a) => cc(a),
        Command::Cycle(a) => cycle(a),
        Command::Invade(a) => invade(a),
        Command::Audit(a) => audit_cmd(a),
        Command::Gallery { command } => gallery_cmd(command),
        Command::Rescale(a) => rescale_cmd(a),
        Command::Embed(a) => embed(a),
    }
}

/// `eca:N`, a gallery id (optionally `gallery:`-prefixed) or a JSON file.
fn load_rule(src: &str) -> Result<Rule, CliError> {
    if let Some(code) = src.strip_prefix("eca:") {
        let code = code
            .parse()
            .map_err(|_| CliError::Usage(format!("bad elementary rule {src:?}")))?;
        return Ok(Rule::from_wolfram(code)?);
    }
    if let Some(e) = gallery::entry(src.trim_start_matches("gallery:")) {
        return Ok(e.rule);
    }
    let path = Path::new(src);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "unknown rule source {src:?} (expected eca:N, a gallery id or a JSON file)"
        )));
    }
    Ok(Rule::from_json(&fs::read_to_string(path)?)?)
}

fn emit(out: &Output, bytes: &[u8]) -> Result<(), CliError> {
    match &out.output {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json(out: &Output, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    emit(out, s.as_bytes())
}

fn format_or(out: &Output, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
    let f = out.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(
            "this subcommand does not support the requested --format".into(),
        ))
    }
}

fn simulate(a: SimulateArgs) -> Result<Status, CliError> {
    let rule = load_rule(&a.rule)?;
    let q = rule.states();
    let fmt = format_or(
        &a.out,
        Format::Text,
        &[Format::Text, Format::Json, Format::Csv],
    )?;
    let steps = match a.steps.as_str() {
        "all" => None,
        s => Some(
            s.parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad --steps {s:?}")))?,
        ),
    };
    let rows: Vec<String> = if let Some(bg) = &a.background {
        let steps =
            steps.ok_or_else(|| CliError::Usage("--background needs a numeric --steps".into()))?;
        let mut p =
            PerturbedConfig::instance(CyclicWord::parse(q, bg)?, Word::parse(q, &a.input)?)?;
        let mut cache = OrbitCache::new();
        let mut rows = vec![perturbed_row(&p)];
        for _ in 0..steps {
            p = step_perturbed(&rule, &p, &mut cache)?;
            rows.push(perturbed_row(&p));
        }
        rows
    } else if a.cyclic {
        let steps =
            steps.ok_or_else(|| CliError::Usage("--cyclic needs a numeric --steps".into()))?;
        let mut c = CyclicWord::parse(q, &a.input)?;
        let mut rows = vec![c.to_string()];
        for _ in 0..steps {
            c = step_cyclic(&rule, &c)?;
            rows.push(c.to_string());
        }
        rows
    } else {
        let all = spacetime_triangle(&rule, &Word::parse(q, &a.input)?)?;
        let keep = steps.map_or(all.len(), |s| (s + 1).min(all.len()));
        all.iter().take(keep).map(|w| w.to_string()).collect()
    };
    match fmt {
        Format::Json => emit_json(&a.out, &json!({ "rule": rule.label(), "rows": rows })),
        Format::Csv => {
            let mut s = String::from("t,row\n");
            for (t, r) in rows.iter().enumerate() {
                s.push_str(&format!("{t},{r}\n"));
            }
            emit(&a.out, s.as_bytes())
        }
        _ => emit(&a.out, (rows.join("\n") + "\n").as_bytes()),
    }?;
    Ok(Status::Ok)
}

fn perturbed_row(p: &PerturbedConfig) -> String {
    match p.extent() {
        Some((lo, _)) => format!("{lo}:{}", p.window()),
        None => "background".into(),
    }
}

fn pred_cmd(a: PredArgs) -> Result<Status, CliError> {
    let rule = load_rule(&a.rule)?;
    let w = Word::parse(rule.states(), &a.input)?;
    let value = pred(&rule, &w)?;
    match format_or(&a.out, Format::Text, &[Format::Text, Format::Json])? {
        Format::Json => emit_json(
            &a.out,
            &json!({ "rule": rule.label(), "input": w.to_string(), "value": value }),
        ),
        _ => emit(&a.out, format!("{value}\n").as_bytes()),
    }?;
    Ok(Status::Ok)
}

fn problem_of(rule: &Rule, p: &ProblemArgs) -> Result<Problem, CliError> {
    Ok(match p.problem {
        ProblemKind::Pred => Problem::Pred,
        ProblemKind::Cycle => {
            if p.k == 0 {
                return Err(CliError::Usage("-k must be positive".into()));
            }
            Problem::Cycle { k: p.k }
        }
        ProblemKind::Invasion => {
            let bg = p
                .background
                .as_deref()
                .ok_or_else(|| CliError::Usage("--problem invasion needs --background".into()))?;
            Problem::Invasion {
                background: CyclicWord::parse(rule.states(), bg)?,
                budget: p.budget.budget()?,
            }
        }
    })
}

fn matrix_json(m: &PredMatrix) -> serde_json::Value {
    let (n, i) = m.split();
    json!({
        "n": n,
        "i": i,
        "rows": m.rows(),
        "cols": m.cols(),
        "values": m.values(),
        "problem": m.problem(),
        "entries": (0..m.rows()).map(|r| m.row(r)).collect::<Vec<_>>(),
    })
}

fn matrix(a: MatrixArgs) -> Result<Status, CliError> {
    let rule = load_rule(&a.rule)?;
    let problem = problem_of(&rule, &a.problem)?;
    let fmt = format_or(
        &a.out,
        Format::Text,
        &[
            Format::Text,
            Format::Json,
            Format::Csv,
            Format::Pbm,
            Format::Pgm,
        ],
    )?;
    let m = build_matrix(&rule, a.n, a.i, &problem)?;
    let mut buf = Vec::new();
    match fmt {
        Format::Pbm => write_pbm(&m, &mut buf)?,
        Format::Pgm => write_pgm(&m, &mut buf)?,
        Format::Json => return emit_json(&a.out, &matrix_json(&m)).map(|_| Status::Ok),
        Format::Csv => {
            let header: Vec<String> = (0..m.cols()).map(|c| format!("c{c}")).collect();
            buf.extend_from_slice(format!("row,{}\n", header.join(",")).as_bytes());
            for r in 0..m.rows() {
                let cells: Vec<String> = m.row(r).iter().map(|v| v.to_string()).collect();
                buf.extend_from_slice(format!("{r},{}\n", cells.join(",")).as_bytes());
            }
        }
        Format::Text => buf.extend_from_slice(m.to_text().as_bytes()),
    }
    emit(&a.out, &buf)?;
    Ok(Status::Ok)
}

fn cc(a: CcArgs) -> Result<Status, CliError> {
    let rule = load_rule(&a.rule)?;
    let problem = problem_of(&rule, &a.problem)?;
    let method: Method = a
        .method
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    if let Some(s) = a.split.as_deref().filter(|&s| s != "all") {
        return Err(CliError::Usage(format!("--split takes `all`, got {s:?}")));
    }
    let splits: Vec<usize> = match a.i {
        Some(i) => vec![i],
        None => (1..a.n).collect(),
    };
    let report = cc_profile_splits(&rule, a.n, &problem, method, &splits)?;
    match format_or(
        &a.out,
        Format::Json,
        &[Format::Json, Format::Csv, Format::Text],
    )? {
        Format::Json => emit_json(&a.out, &report),
        Format::Csv => emit(&a.out, cc_csv(&report).as_bytes()),
        _ => {
            let mut s = String::new();
            for sp in &report.splits {
                s.push_str(&format!("i={} bits={}\n", sp.i, sp.bits));
            }
            s.push_str(&format!("max_bits={}\n", report.max_bits));
            emit(&a.out, s.as_bytes())
        }
    }?;
    Ok(Status::Ok)
}

fn cc_csv(report: &CcReport) -> String {
    let mut s = String::from("i,bits,messages,method\n");
    for sp in &report.splits {
        let messages = sp.messages.map(|m| m.to_string()).unwrap_or_default();
        let method = serde_json::to_value(sp.method).expect("method serializes");
        s.push_str(&format!(
            "{},{},{},{}\n",
            sp.i,
            sp.bits,
            messages,
            method.as_str().unwrap_or("")
        ));
    }
    s
}

fn cycle(a: CycleArgs) -> Result<Status, CliError> {
    let rule = load_rule(&a.rule)?;
    let u = CyclicWord::parse(rule.states(), &a.input)?;
    let (preperiod, period) = cycle_length(&rule, &u)?;
    let within = a.k.map(|k| period <= k);
    match format_or(&a.out, Format::Json, &[Format::Json, Format::Text])? {
        Format::Json => emit_json(
            &a.out,
            &json!({ "rule": rule.label(), "input": u.to_string(), "preperiod": preperiod, "period": period, "within_k": within }),
        ),
        _ => emit(
            &a.out,
            format!("preperiod={preperiod} period={period}\n").as_bytes(),
        ),
    }?;
    Ok(Status::Ok)
}

fn invade(a: InvadeArgs) -> Result<Status, CliError> {
    let rule = load_rule(&a.rule)?;
    let q = rule.states();
    let u = CyclicWord::parse(q, &a.background)?;
    let x = Word::parse(q, &a.input)?;
    let deciders: Vec<&dyn InvasionDecider> = if a.deciders {
        vec![&Rule218Decider, &Rule94Decider]
    } else {
        Vec::new()
    };
    let verdict: InvasionVerdict =
        invasion_with_deciders(&rule, &u, &x, a.budget.budget()?, &deciders)?;
    match format_or(&a.out, Format::Json, &[Format::Json, Format::Text])? {
        Format::Json => emit_json(&a.out, &verdict),
        _ => emit(&a.out, format!("{:?}\n", verdict.outcome).as_bytes()),
    }?;
    Ok(match verdict.outcome {
        Outcome::Unknown => Status::Undecided,
        _ => Status::Ok,
    })
}

fn audit_cmd(a: AuditArgs) -> Result<Status, CliError> {
    let cfg = a
        .range
        .map_or_else(AuditConfig::default, AuditConfig::with_range);
    let subjects: Vec<&str> = match a.subject.as_str() {
        "all" => audit::SUBJECTS.to_vec(),
        s => vec![s],
    };
    let reports = subjects
        .iter()
        .map(|s| match &a.claim {
            Some(id) => audit::audit_claim(s, id, &cfg),
            None => audit::audit(s, &cfg),
        })
        .collect::<Result<Vec<AuditReport>, _>>()?;
    let refuted = reports.iter().any(|r| r.refuted().next().is_some());
    match format_or(&a.out, Format::Json, &[Format::Json, Format::Text])? {
        Format::Json if reports.len() == 1 => emit_json(&a.out, &reports[0]),
        Format::Json => emit_json(&a.out, &reports),
        _ => {
            let mut s = String::new();
            for r in &reports {
                for c in &r.claims {
                    s.push_str(&format!("{} {:?}\n", c.id, c.status).to_lowercase());
                }
            }
            emit(&a.out, s.as_bytes())
        }
    }?;
    Ok(if refuted { Status::Refuted } else { Status::Ok })
}

fn gallery_cmd(command: GalleryCommand) -> Result<Status, CliError> {
    match command {
        GalleryCommand::List { out } => {
            let entries: Vec<_> = gallery::all_entries()
                .iter()
                .map(|e| {
                    json!({
                        "id": e.id,
                        "description": e.description,
                        "states": e.rule.states(),
                        "radius": e.rule.radius(),
                        "claims": e.claims.iter().map(|c| c.id).collect::<Vec<_>>(),
                    })
                })
                .collect();
            match format_or(&out, Format::Text, &[Format::Json, Format::Text])? {
                Format::Json => emit_json(&out, &entries)?,
                _ => {
                    let mut s = String::new();
                    for e in gallery::all_entries() {
                        s.push_str(&format!("{:<16} {}\n", e.id, e.description));
                    }
                    emit(&out, s.as_bytes())?;
                }
            }
            Ok(Status::Ok)
        }
        GalleryCommand::Check { id, out } => {
            let entries = match &id {
                Some(id) => vec![gallery::entry(id)
                    .ok_or_else(|| CliError::Usage(format!("no gallery entry {id:?}")))?],
                None => gallery::all_entries(),
            };
            let results: Vec<_> = entries.iter().map(|e| (e.id, e.check())).collect();
            let failed = results.iter().any(|(_, r)| r.iter().any(|c| !c.passed));
            match format_or(&out, Format::Text, &[Format::Json, Format::Text])? {
                Format::Json => {
                    let v: Vec<_> = results
                        .iter()
                        .map(|(id, r)| json!({ "id": id, "claims": r }))
                        .collect();
                    emit_json(&out, &v)?;
                }
                _ => {
                    let mut s = String::new();
                    for (id, r) in &results {
                        for c in r {
                            let mark = if c.passed { "pass" } else { "FAIL" };
                            s.push_str(&format!("{id} {} {mark}", c.id));
                            if let Some(cx) = &c.counterexample {
                                s.push_str(&format!(" ({cx})"));
                            }
                            s.push('\n');
                        }
                    }
                    emit(&out, s.as_bytes())?;
                }
            }
            Ok(if failed { Status::Refuted } else { Status::Ok })
        }
    }
}

fn rescale_cmd(a: RescaleArgs) -> Result<Status, CliError> {
    let rule = load_rule(&a.rule)?;
    let params = RescaleParams::new(a.m, a.t, a.z).map_err(|e| CliError::Usage(e.to_string()))?;
    let big = rescale(&rule, params)?;
    format_or(&a.out, Format::Json, &[Format::Json])?;
    emit(&a.out, (big.to_json() + "\n").as_bytes())?;
    Ok(Status::Ok)
}

fn embed(a: EmbedArgs) -> Result<Status, CliError> {
    let f = load_rule(&a.f)?;
    let g = load_rule(&a.g)?;
    format_or(&a.out, Format::Json, &[Format::Json])?;
    let value = if a.simulate {
        let bounds = SimulationBounds {
            max_m: a.max_m,
            max_t: a.max_t,
            max_z: a.max_z,
            ..SimulationBounds::default()
        };
        match simulates(&f, &g, bounds)? {
            Some(w) => json!({ "found": true, "witness": w }),
            None => json!({ "found": false }),
        }
    } else {
        match is_subautomaton(&f, &g)? {
            Some(e) => json!({ "found": true, "embedding": e }),
            None => json!({ "found": false }),
        }
    };
    emit_json(&a.out, &value)?;
    Ok(Status::Ok)
}
