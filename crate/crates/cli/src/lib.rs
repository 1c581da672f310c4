//! Command-line front end: argument parsing, input loading and the
//! subcommands.

pub mod bench;
pub mod gen;
pub mod sql;

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dmtl_core::ingest::{self, IngestConfig, MetadataConfig};
use dmtl_core::sqlgen::{self, CoalesceVariant, RewriteOptions};
use dmtl_core::*;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "dmtl", version, about = "Query answering for datalogMTL over temporal data")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Round cap for the chase on recursive programs.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    /// Coalescing variant used in generated SQL.
    #[arg(long, global = true, default_value = "counting")]
    pub coalesce: CoalesceVariant,
    /// Worker threads for the engine (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long = "time-format", global = true, value_enum, default_value_t = TimeStyle::Seconds)]
    pub time_format: TimeStyle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// How answer endpoints are printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TimeStyle {
    /// Decimal seconds.
    Seconds,
    /// HH:MM:SS within the first day, seconds otherwise.
    Clock,
    /// Seconds since the Unix epoch as a UTC date and time.
    Datetime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum EngineChoice {
    /// Bottom-up evaluation for nonrecursive programs, the chase otherwise.
    #[default]
    Auto,
    Chase,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the maximal-interval answers to a query.
    Answer(AnswerArgs),
    /// Check consistency of a program with data.
    Check(CheckArgs),
    /// Print the normal form of a program.
    Normalize(NormalizeArgs),
    /// Rewrite a query over mapped predicates to SQL.
    RewriteSql(RewriteArgs),
    /// Turn a CSV log into facts.
    Ingest(IngestArgs),
    /// Time ingest and evaluation over replicated data.
    Bench(BenchArgs),
    /// Write QBF encodings with their expected verdicts.
    GenQbf(gen::GenQbfArgs),
    /// Write monotone circuit encodings with their expected verdicts.
    GenCircuit(gen::GenCircuitArgs),
}

/// Where facts come from.
#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Facts file; repeatable.
    #[arg(long = "data")]
    pub facts: Vec<PathBuf>,
    /// Timestamped CSV log.
    #[arg(long, requires = "ingest")]
    pub csv: Option<PathBuf>,
    /// Threshold configuration for `--csv`.
    #[arg(long, requires = "csv")]
    pub ingest: Option<PathBuf>,
    /// Atemporal CSV table.
    #[arg(long, requires = "metadata_config")]
    pub metadata: Option<PathBuf>,
    /// Column configuration for `--metadata`.
    #[arg(long = "metadata-config", requires = "metadata")]
    pub metadata_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnswerArgs {
    #[arg(long)]
    pub program: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
    pub engine: EngineChoice,
    /// When the round cap is reached, print the answers derived so far;
    /// they hold in every model but may not be maximal or complete.
    #[arg(long)]
    pub partial: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Query atom, e.g. `ActivePowerTrip(tb0)` or `HeatAffectedCounty(c)`.
    pub query: String,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub program: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = EngineChoice::Auto)]
    pub engine: EngineChoice,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    pub program: PathBuf,
    /// Keep diamonds and whole ranges, as the SQL rewriter expects.
    #[arg(long)]
    pub sql: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RewriteArgs {
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long)]
    pub mappings: PathBuf,
    /// Read mapped sources as they are, without coalescing them first.
    #[arg(long = "no-coalesce-mapped")]
    pub no_coalesce_mapped: bool,
    /// Write the script here and the plan summary next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run the plan, e.g. `sqlite::memory:` or `sqlite:weather.db`.
    #[arg(long)]
    pub execute: Option<String>,
    /// Load a CSV as a table before running: `NAME=PATH[:timecolumn]`.
    #[arg(long = "load", requires = "execute")]
    pub load: Vec<sql::LoadSpec>,
    pub query: String,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Copies of the data, each shifted past the previous one.
    #[arg(long, default_value_t = 1)]
    pub replicate: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub program: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Ascending replication factors.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub scales: Vec<usize>,
    /// Timed runs per scale; the fastest counts.
    #[arg(long, default_value_t = 3)]
    pub runs: usize,
    /// Per-scale timeout in seconds.
    #[arg(long, default_value_t = 300)]
    pub timeout: u64,
    /// Timing CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of evaluating a program over data.
#[derive(Debug)]
pub enum Outcome {
    Model(CanonicalModel),
    Inconsistent(Option<Interval>),
    /// The cap and the model reached so far.
    Unknown(usize, CanonicalModel),
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn located(path: &Path, e: ParseError) -> anyhow::Error {
    anyhow!("{}:{}:{}: {}", path.display(), e.line, e.col, e.msg)
}

pub fn load_program(path: &Path) -> Result<Program> {
    parse_program(&read_file(path)?).map_err(|e| located(path, e))
}

pub fn load_facts(path: &Path) -> Result<DataInstance> {
    parse_data(&read_file(path)?).map_err(|e| located(path, e))
}

/// Facts from all sources in `args`, in a deterministic order.
pub fn load_data(args: &DataArgs) -> Result<DataInstance> {
    let mut facts = Vec::new();
    for f in &args.facts {
        facts.extend(load_facts(f)?.facts);
    }
    if let (Some(csv), Some(cfg)) = (&args.csv, &args.ingest) {
        let config = IngestConfig::from_json(&read_file(cfg)?).with_context(|| format!("{}", cfg.display()))?;
        let tables = ingest::ingest_csv(csv, &config).with_context(|| format!("{}", csv.display()))?;
        facts.extend(ingest::tables_to_data(&tables).facts);
    }
    if let (Some(csv), Some(cfg)) = (&args.metadata, &args.metadata_config) {
        let config = MetadataConfig::from_json(&read_file(cfg)?).with_context(|| format!("{}", cfg.display()))?;
        let tables = ingest::ingest_metadata_csv(csv, &config).with_context(|| format!("{}", csv.display()))?;
        facts.extend(ingest::tables_to_data(&tables).facts);
    }
    Ok(DataInstance::new(facts))
}

pub fn load_query(text: &str) -> Result<Query> {
    parse_query(text).map_err(|e| anyhow!("query:{}: {}", e.col, e.msg))
}

/// Bottom-up evaluation when the program allows it, otherwise the chase.
pub fn evaluate(p: &Program, d: &DataInstance, cap: Option<usize>, engine: EngineChoice) -> Result<Outcome> {
    let np = normalize(p);
    if engine == EngineChoice::Auto && is_nonrecursive(&np) {
        let m = eval_nonrecursive(&np, d)?;
        if !m.is_consistent() {
            return Ok(Outcome::Inconsistent(m.witness().cloned()));
        }
        return Ok(Outcome::Model(m));
    }
    let cap = cap.unwrap_or_else(|| default_cap(&np, d));
    let (m, status) = chase(&np, d, cap)?;
    Ok(match status {
        EvalStatus::Fixpoint => Outcome::Model(m),
        EvalStatus::Inconsistent => Outcome::Inconsistent(m.witness().cloned()),
        EvalStatus::CapReached(n) => Outcome::Unknown(n, m),
    })
}

pub fn render_point(t: &TimePoint, style: TimeStyle) -> String {
    match style {
        TimeStyle::Seconds => t.to_string(),
        TimeStyle::Clock => t.to_clock(),
        TimeStyle::Datetime => match t.finite() {
            Some(d) => {
                let secs = d.floor();
                let whole: Option<i64> = secs.to_string().parse().ok();
                match whole.and_then(|s| chrono::DateTime::from_timestamp(s, 0)) {
                    Some(dt) => {
                        let mut s = dt.format("%Y-%m-%dT%H:%M:%S").to_string();
                        let frac = d.add(&Dyadic::new(-secs, 0));
                        if !frac.is_zero() {
                            s.push_str(&frac.to_decimal()[1..]);
                        }
                        s
                    }
                    None => t.to_string(),
                }
            }
            None => t.to_string(),
        },
    }
}

pub fn render_interval(iv: &Interval, style: TimeStyle) -> String {
    format!(
        "{}{},{}{}",
        if iv.lo_closed() { '[' } else { '(' },
        render_point(iv.lo(), style),
        render_point(iv.hi(), style),
        if iv.hi_closed() { ']' } else { ')' }
    )
}

/// The goal atom instantiated with an answer tuple.
pub fn render_atom(q: &Query, tuple: &[Constant]) -> String {
    let args = q.instantiate(tuple);
    if args.is_empty() {
        q.goal.pred.clone()
    } else {
        let a: Vec<String> = args.iter().map(|c| c.to_string()).collect();
        format!("{}({})", q.goal.pred, a.join(","))
    }
}

pub fn render_answers(q: &Query, rows: &[(Tuple, Interval)], g: &GlobalOpts) -> String {
    match g.format {
        Format::Text => {
            let mut s = String::new();
            for (t, iv) in rows {
                let _ = writeln!(s, "{}@{}", render_atom(q, t), render_interval(iv, g.time_format));
            }
            s
        }
        Format::Json => {
            let answers: Vec<_> = rows
                .iter()
                .map(|(t, iv)| {
                    json!({
                        "tuple": t.iter().map(|c| c.as_str()).collect::<Vec<_>>(),
                        "interval": render_interval(iv, g.time_format),
                    })
                })
                .collect();
            let v = json!({ "status": "ok", "query": q.goal.to_string(), "answers": answers });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
    }
}

fn render_status(status: &str, detail: serde_json::Value, text: String, g: &GlobalOpts) -> String {
    match g.format {
        Format::Text => text + "\n",
        Format::Json => {
            let mut v = json!({ "status": status });
            if let (Some(m), serde_json::Value::Object(d)) = (v.as_object_mut(), detail) {
                m.extend(d);
            }
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => out.write_all(text.as_bytes()).map_err(Into::into),
    }
}

fn non_answer(outcome: &Outcome, g: &GlobalOpts) -> Option<(String, i32)> {
    match outcome {
        Outcome::Model(_) => None,
        Outcome::Inconsistent(w) => {
            let ws = w.as_ref().map(|i| render_interval(i, g.time_format));
            let text = match &ws {
                Some(w) => format!("INCONSISTENT: witness {w}"),
                None => "INCONSISTENT".to_string(),
            };
            Some((render_status("inconsistent", json!({ "witness": ws }), text, g), EXIT_INCONSISTENT))
        }
        Outcome::Unknown(cap, _) => {
            let text = format!("UNKNOWN: round cap {cap} reached without a fixpoint");
            Some((render_status("unknown", json!({ "cap": cap }), text, g), EXIT_UNKNOWN))
        }
    }
}

pub fn cmd_answer(a: &AnswerArgs, g: &GlobalOpts, out: &mut dyn Write) -> Result<i32> {
    let p = load_program(&a.program)?;
    let d = load_data(&a.data)?;
    let q = load_query(&a.query)?;
    let outcome = evaluate(&p, &d, g.cap, a.engine)?;
    match (non_answer(&outcome, g), outcome) {
        (None, Outcome::Model(m)) => {
            emit(out, a.out.as_deref(), &render_answers(&q, &answers(&m, &q)?, g))?;
            Ok(EXIT_OK)
        }
        (Some((text, code)), Outcome::Unknown(_, m)) if a.partial => {
            eprint!("{text}");
            emit(out, a.out.as_deref(), &render_answers(&q, &answers(&m, &q)?, g))?;
            Ok(code)
        }
        (Some((text, code)), _) => {
            out.write_all(text.as_bytes())?;
            Ok(code)
        }
        (None, _) => unreachable!("only models have no status line"),
    }
}

pub fn cmd_check(a: &CheckArgs, g: &GlobalOpts, out: &mut dyn Write) -> Result<i32> {
    let p = load_program(&a.program)?;
    let d = load_data(&a.data)?;
    let outcome = evaluate(&p, &d, g.cap, a.engine)?;
    let (text, code) = non_answer(&outcome, g)
        .unwrap_or_else(|| (render_status("consistent", json!({}), "CONSISTENT".into(), g), EXIT_OK));
    out.write_all(text.as_bytes())?;
    Ok(code)
}

pub fn cmd_normalize(a: &NormalizeArgs, out: &mut dyn Write) -> Result<i32> {
    let p = load_program(&a.program)?;
    let n = if a.sql { normalize_for_sql(&p) } else { normalize(&p) };
    emit(out, a.out.as_deref(), &n.to_string())?;
    Ok(EXIT_OK)
}

pub fn cmd_rewrite_sql(a: &RewriteArgs, g: &GlobalOpts, out: &mut dyn Write) -> Result<i32> {
    let p = load_program(&a.program)?;
    let text = read_file(&a.mappings)?;
    let mappings = sqlgen::parse_mappings(&text).with_context(|| format!("{}", a.mappings.display()))?;
    let q = load_query(&a.query)?;
    let opts = RewriteOptions { variant: g.coalesce, coalesce_mapped: !a.no_coalesce_mapped };
    let plan = sqlgen::rewrite(&p, &mappings, &q, opts)?;
    if let Some(path) = &a.out {
        emit(out, Some(path), &plan.to_sql())?;
        emit(out, Some(&path.with_extension("plan.json")), &(plan.sidecar_json() + "\n"))?;
    }
    match &a.execute {
        Some(conn) => {
            let db = sql::open(conn)?;
            for spec in &a.load {
                sql::load_csv(&db, spec)?;
            }
            let rows = sql::execute_plan(&db, &plan)?;
            out.write_all(render_answers(&q, &rows, g).as_bytes())?;
        }
        None if a.out.is_none() => out.write_all(plan.to_sql().as_bytes())?,
        None => {}
    }
    Ok(EXIT_OK)
}

pub fn cmd_ingest(a: &IngestArgs, g: &GlobalOpts, out: &mut dyn Write) -> Result<i32> {
    let d = load_data(&a.data)?;
    let d = if a.replicate == 1 { d } else { ingest::replicate(&d, a.replicate, &bench::period(None, &d))? };
    let fmt = match g.time_format {
        TimeStyle::Clock => TimeFormat::Clock,
        _ => TimeFormat::Seconds,
    };
    emit(out, a.out.as_deref(), &d.to_text(fmt))?;
    Ok(EXIT_OK)
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    if a.scales.is_empty() || a.scales.windows(2).any(|w| w[0] >= w[1]) || a.scales[0] == 0 {
        bail!("scales must be positive and strictly ascending");
    }
    let p = load_program(&a.program)?;
    let start = std::time::Instant::now();
    let d = load_data(&a.data)?;
    let ingest_ms = start.elapsed().as_secs_f64() * 1e3;
    let cfg = bench::ScalingConfig {
        scales: a.scales.clone(),
        runs: a.runs.max(1),
        timeout: std::time::Duration::from_secs(a.timeout),
    };
    let results = bench::run_scaling(&p, &d, &cfg)?;
    emit(out, a.out.as_deref(), &bench::to_csv(&results))?;
    let report = format!("base ingest {ingest_ms:.1} ms\n{}", bench::slope_report(&results));
    if a.out.is_some() {
        out.write_all(report.as_bytes())?;
    } else {
        eprint!("{report}");
    }
    Ok(EXIT_OK)
}

/// Sets the engine thread count; only the first call takes effect.
pub fn set_threads(n: Option<usize>) {
    if let Some(n) = n {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    set_threads(cli.global.threads);
    let g = &cli.global;
    match &cli.command {
        Command::Answer(a) => cmd_answer(a, g, out),
        Command::Check(a) => cmd_check(a, g, out),
        Command::Normalize(a) => cmd_normalize(a, out),
        Command::RewriteSql(a) => cmd_rewrite_sql(a, g, out),
        Command::Ingest(a) => cmd_ingest(a, g, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::GenQbf(a) => gen::cmd_gen_qbf(a, g, out),
        Command::GenCircuit(a) => gen::cmd_gen_circuit(a, g, out),
    }
}

/// Parses `args` (without the program name) and runs the command, capturing
/// standard output.
pub fn run_args<I, S>(args: I) -> Result<(i32, String)>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("dmtl")).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv)?;
    let mut buf = Vec::new();
    let code = run(&cli, &mut buf)?;
    Ok((code, String::from_utf8(buf)?))
}

/// Parses, normalizes and evaluates a program over data, then rewrites every
/// intensional predicate to SQL when mappings are given; returns the number
/// of derived rows.
pub fn fixture_health(program: &Path, data: &DataArgs, mappings: Option<&Path>) -> Result<usize> {
    let p = load_program(program)?;
    if !is_normal_form(&normalize(&p)) {
        bail!("normalization did not produce a normal form");
    }
    let d = load_data(data)?;
    let m = match evaluate(&p, &d, None, EngineChoice::Auto)? {
        Outcome::Model(m) => m,
        Outcome::Inconsistent(_) => bail!("inconsistent"),
        Outcome::Unknown(cap, _) => bail!("no fixpoint within {cap} rounds"),
    };
    let derived = p.intensional().iter().map(|q| m.table(q).map_or(0, |t| t.len())).sum();
    if let Some(path) = mappings {
        let maps = sqlgen::parse_mappings(&read_file(path)?).with_context(|| format!("{}", path.display()))?;
        let sig = p.signature();
        for pred in p.intensional() {
            let vars = (0..sig[&pred]).map(|i| Term::var(&format!("v{i}"))).collect();
            sqlgen::rewrite(&p, &maps, &Query::new(Atom::new(&pred, vars)), RewriteOptions::default())
                .with_context(|| format!("rewriting {pred}"))?;
        }
    }
    Ok(derived)
}
