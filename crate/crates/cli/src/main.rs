use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use toric_deform::campaign::{evaluate, run_campaign, DrawStatus, FuzzBounds};
use toric_deform::job::{run_stage, JobDocument, Stage, Status};
use toric_deform::oracle::DEFAULT_BUDGET;
use toric_deform::{hj_expand, hj_value, Chain, DvrSpec, Error, FieldSpec};

/// Deformations of cyclic quotient surface singularities over a truncated DVR.
#[derive(Parser)]
#[command(name = "toric-deform", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hirzebruch-Jung expansion of n/q, or the value of a chain.
    Hj(HjArgs),
    /// Run one stage of a job document.
    Pipeline(PipelineArgs),
    /// Random flat deformations checked end to end.
    Fuzz(FuzzArgs),
    /// Re-evaluate a saved draw report.
    Replay {
        file: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct HjArgs {
    /// Fraction `n/q` with 0 < q < n coprime.
    #[arg(long)]
    nq: Option<String>,
    /// Chain literal such as `[3,2]`.
    #[arg(long)]
    chain: Option<String>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    job: PathBuf,
    /// gens, check-syzygies, complete, normalize, analyze or oracle-scan.
    #[arg(long)]
    stage: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    truncation: Option<u32>,
    /// Cache directory for normalized forms.
    #[arg(long)]
    workspace: Option<PathBuf>,
    /// Largest number of points the oracle may enumerate.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    #[value(name = "equal-char-0")]
    EqualChar0,
    EqualCharP,
    MixedChar,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "equal-char-0")]
    kind: Kind,
    /// Residue characteristic for the equal-char-p and mixed-char bases.
    #[arg(long, default_value_t = 5)]
    p: u64,
    #[arg(long, default_value_t = 3)]
    truncation: u32,
    #[arg(long, default_value_t = 3)]
    max_entry: u32,
    #[arg(long, default_value_t = 4)]
    max_e: usize,
    #[arg(long, default_value_t = 1)]
    max_t_degree: u32,
    /// Random coordinate changes applied to each draw, at most.
    #[arg(long, default_value_t = 2)]
    changes: usize,
    /// Scan field `p` or `p^m`; repeat for several.
    #[arg(long = "field", default_values = ["5"])]
    fields: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Directory receiving one replayable file per failed draw.
    #[arg(long)]
    save: Option<PathBuf>,
    /// With `--save`, write every draw, not only failures.
    #[arg(long, requires = "save")]
    save_all: bool,
}

/// Errors reported with exit code 1.
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

impl From<std::io::Error> for Usage {
    fn from(e: std::io::Error) -> Self {
        Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Hj(a) => hj(a),
        Command::Pipeline(a) => pipeline(a),
        Command::Fuzz(a) => fuzz(a),
        Command::Replay { file } => replay(&file),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Write a line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn print(v: &Value) {
    emit(&serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn hj(a: HjArgs) -> Result<u8, Usage> {
    let chain = match (a.nq, a.chain) {
        (Some(nq), _) => {
            let (n, q) = nq.split_once('/').ok_or_else(|| Usage(format!("expected n/q, got {nq:?}")))?;
            let parse = |s: &str| s.trim().parse::<u64>().map_err(|_| Usage(format!("bad integer {s:?}")));
            hj_expand(parse(n)?, parse(q)?)?
        }
        (None, Some(c)) => Chain::parse(&c)?,
        (None, None) => unreachable!("clap requires one of --nq, --chain"),
    };
    let (n, q) = hj_value(&chain)?;
    let dual = if q < n { Some(hj_expand(n, n - q)?.to_string()) } else { None };
    let smooth = chain.entries().is_empty();
    eprintln!("{chain} = {n}/{q}, e = {}{}", chain.e(), if smooth { " (smooth)" } else { "" });
    print(&json!({
        "chain": chain.to_string(),
        "n": n,
        "q": q,
        "e": chain.e(),
        "dual": dual,
        "smooth": smooth,
    }));
    Ok(0)
}

fn pipeline(a: PipelineArgs) -> Result<u8, Usage> {
    let text = fs::read_to_string(&a.job).map_err(|e| Usage(format!("{}: {e}", a.job.display())))?;
    let mut job = JobDocument::from_json(&text)?;
    if let Some(n) = a.truncation {
        job = job.with_truncation(n)?;
    }
    if let Some(seed) = a.seed {
        job.seed = seed;
    }
    if let (Some(b), Some(an)) = (a.budget, job.analysis.as_mut()) {
        an.budget = b;
    }
    let stage: Stage = a.stage.parse()?;
    if let Some(ws) = &a.workspace {
        fs::create_dir_all(ws)?;
    }
    let report = run_stage(&job, stage, a.workspace.as_deref())?;
    eprintln!("{} {}: {:?}", job.chain, stage.name(), report.status);
    emit(&report.to_json());
    Ok(report.status.exit_code() as u8)
}

fn field_spec(s: &str) -> Result<FieldSpec, Usage> {
    let bad = || Usage(format!("bad field {s:?}; expected p or p^m"));
    let (p, m) = match s.split_once('^') {
        Some((p, m)) => (p.trim().parse().map_err(|_| bad())?, m.trim().parse().map_err(|_| bad())?),
        None => (s.trim().parse().map_err(|_| bad())?, 1),
    };
    Ok(FieldSpec::Finite { p, m })
}

fn fuzz(a: FuzzArgs) -> Result<u8, Usage> {
    let base = match a.kind {
        Kind::EqualChar0 => DvrSpec::equal_char_zero(a.truncation)?,
        Kind::EqualCharP => DvrSpec::equal_char_p(a.p, a.truncation)?,
        Kind::MixedChar => DvrSpec::mixed_char(a.p, a.truncation)?,
    };
    let bounds = FuzzBounds {
        base,
        max_entry: a.max_entry,
        max_e: a.max_e,
        max_t_degree: a.max_t_degree,
        coordinate_changes: a.changes,
        fields: a.fields.iter().map(|f| field_spec(f)).collect::<Result<_, _>>()?,
        budget: a.budget,
    };
    let (report, draws) = run_campaign(&bounds, a.seed, a.count)?;
    if let Some(dir) = &a.save {
        fs::create_dir_all(dir)?;
        let kept = if a.save_all { &draws } else { &report.failures };
        for d in kept {
            let name = if d.status == DrawStatus::Failed { "failure" } else { "draw" };
            let body = serde_json::to_string_pretty(d).expect("draw reports serialize");
            fs::write(dir.join(format!("{name}-{}.json", d.index)), body)?;
        }
    }
    let t = &report.tally;
    eprintln!(
        "{} draws: {} passed, {} obstructed, {} unstable, {} degenerate, {} over budget, {} failed",
        a.count, t.passed, t.obstructed, t.unstable, t.degenerate, t.over_budget, t.failed
    );
    emit(&report.to_json());
    Ok(if report.passed() { 0 } else { 3 })
}

fn replay(file: &Path) -> Result<u8, Usage> {
    let text = fs::read_to_string(file).map_err(|e| Usage(format!("{}: {e}", file.display())))?;
    let saved: Value = serde_json::from_str(&text).map_err(|e| Usage(e.to_string()))?;
    let index = saved.get("index").and_then(Value::as_u64).unwrap_or(0);
    let job_value = saved.get("job").ok_or_else(|| Usage("saved report has no job".into()))?;
    let job = JobDocument::from_json(&job_value.to_string())?;
    let report = evaluate(index, &job);
    let fresh = serde_json::to_value(&report).expect("draw reports serialize");
    let same = fresh == saved;
    eprintln!("draw {index}: {:?}, {}", report.status, if same { "reproduced" } else { "differs from saved report" });
    print(&fresh);
    Ok(if report.status == DrawStatus::Failed { Status::Violation.exit_code() as u8 } else { 0 })
}
