//! Command-line front end. Every run produces one document that echoes its
//! resolved configuration next to its results.
//!
//! Exit codes: 0 success, 1 input error, 2 resource limit, 3 invariant violation.

use std::ffi::OsString;
use std::fs;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde_json::{json, Map, Value};

use crate::bounds::{self, LambdaQuery};
use crate::detector::{self, MulticoloredFamily, DEFAULT_MULTICOLOR_BUDGET};
use crate::error::{Error, Result};
use crate::field_space::{format_point, FieldSpace, Point, PointSet};
use crate::search::{self, SearchBudget, DEFAULT_EXACT_LIMIT};
use crate::systems::ShapeSystem;

#[derive(Debug, Parser)]
#[command(name = "kstar", version, about = "Shape-free sets in F_p^n and their bounds")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,

    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for parallel counting.
    #[arg(long, default_value_t = 1, global = true)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    /// The document's table, if it has one.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeKind {
    Star,
    RelaxedStar,
    W,
    Mixed,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub n: u32,
    /// Number of 3-APs in a (relaxed) star.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ShapeKind::Star)]
    pub shape: ShapeKind,
    /// Custom system file (`v r` header, then r rows of v integers); overrides --shape.
    #[arg(long)]
    pub system: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Λ, the spade and club bounds, and the W-shape bound over a parameter grid.
    Bound {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<u64>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        k: Vec<usize>,
    },
    /// Minimize G(u) = u^(-alpha h)(1 + u + ... + u^(m h)) over (0, 1].
    Lambda {
        #[arg(long)]
        m: u32,
        /// A decimal or an exact fraction such as 1/3.
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        h: u32,
    },
    /// Test whether a set is shape-free.
    Check {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        set: PathBuf,
    },
    /// Count semishapes and list shapes in a set.
    Enumerate {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        set: PathBuf,
        /// Maximum number of shapes to list.
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
    /// Greedy maximal family of disjoint shapes.
    Pack {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        target: Option<usize>,
    },
    /// (i,j)-extendable pairs of a row family.
    Extend {
        #[command(flatten)]
        system: SystemArgs,
        /// One row per line: points separated by ';', residues by ','.
        #[arg(long)]
        rows: PathBuf,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
    },
    /// Check that only diagonal index choices of a row family give semishapes.
    Multicolor {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        rows: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MULTICOLOR_BUDGET)]
        budget: u64,
    },
    /// Replay one induction step of the k-star bound on a shape-free set.
    Replay {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        set: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MULTICOLOR_BUDGET)]
        budget: u64,
    },
    /// Find a large (or maximum) shape-free set.
    Search {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, conflicts_with = "heuristic")]
        exact: bool,
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long)]
        node_limit: Option<u64>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Write the witness in the point-set text format.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
}

/// What a run printed and how it exited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (program name first), runs the command and renders output.
pub fn run<I, T>(argv: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                RunOutput { code, stdout: text, stderr: String::new() }
            } else {
                RunOutput { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok((doc, code)) => match emit(&doc, cli.format) {
            Ok(text) => match &cli.output {
                Some(path) => match fs::write(path, &text) {
                    Ok(()) => RunOutput { code, stdout: String::new(), stderr: String::new() },
                    Err(source) => failure(&Error::Io { path: path.display().to_string(), source }),
                },
                None => RunOutput { code, stdout: text, stderr: String::new() },
            },
            Err(e) => failure(&e),
        },
        Err(e) => failure(&e),
    }
}

fn failure(e: &Error) -> RunOutput {
    RunOutput {
        code: e.exit_code(),
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    }
}

fn execute(cli: &Cli) -> Result<(Value, i32)> {
    if cli.threads == 0 {
        return Err(Error::input("threads", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Resource(format!("thread pool: {e}")))?;
    let (name, mut config, result, code) = pool.install(|| dispatch(&cli.command))?;
    config.insert("threads".into(), json!(cli.threads));
    config.insert("format".into(), json!(format!("{:?}", cli.format).to_lowercase()));
    let doc = json!({
        "command": name,
        "config": Value::Object(config),
        "result": result,
    });
    Ok((doc, code))
}

type Dispatched = (&'static str, Map<String, Value>, Value, i32);

fn dispatch(command: &Command) -> Result<Dispatched> {
    match command {
        Command::Bound { p, n, k } => cmd_bound(p, n, k),
        Command::Lambda { m, alpha, h } => cmd_lambda(*m, alpha, *h),
        Command::Check { system, set } => cmd_check(system, set),
        Command::Enumerate { system, set, limit } => cmd_enumerate(system, set, *limit),
        Command::Pack { system, set, target } => cmd_pack(system, set, *target),
        Command::Extend { system, rows, i, j } => cmd_extend(system, rows, *i, *j),
        Command::Multicolor { system, rows, budget } => cmd_multicolor(system, rows, *budget),
        Command::Replay { p, n, k, set, budget } => cmd_replay(*p, *n, *k, set, *budget),
        Command::Search {
            system,
            exact,
            heuristic,
            seed,
            iterations,
            node_limit,
            time_limit,
            witness,
        } => cmd_search(
            system,
            SearchMode::resolve(*exact, *heuristic),
            *seed,
            *iterations,
            *node_limit,
            *time_limit,
            witness.as_deref(),
        ),
    }
}

// ---------------------------------------------------------------------------
// Parameter handling
// ---------------------------------------------------------------------------

/// A real parameter given either as a decimal or as an exact fraction `a/b`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealArg {
    pub text: String,
    pub exact: Option<Ratio<i64>>,
    pub value: f64,
}

impl RealArg {
    pub fn parse(field: &str, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.contains('/') {
            let ratio: Ratio<i64> = text
                .parse()
                .map_err(|_| Error::input(field, format!("'{text}' is not a fraction a/b")))?;
            let value = *ratio.numer() as f64 / *ratio.denom() as f64;
            Ok(RealArg { text: text.to_string(), exact: Some(ratio), value })
        } else {
            let value: f64 = text
                .parse()
                .map_err(|_| Error::input(field, format!("'{text}' is not a number")))?;
            if !value.is_finite() {
                return Err(Error::input(field, format!("'{text}' is not finite")));
            }
            Ok(RealArg { text: text.to_string(), exact: None, value })
        }
    }

    fn echo(&self, field: &str, config: &mut Map<String, Value>) {
        config.insert(field.into(), json!(self.text));
        config.insert(
            format!("{field}_exact"),
            self.exact.map_or(Value::Null, |r| json!(format!("{}/{}", r.numer(), r.denom()))),
        );
        config.insert(format!("{field}_value"), num(self.value));
    }
}

/// A float rounded to 12 significant digits.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return json!(x.to_string());
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    json!(rounded)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn load_set(space: FieldSpace, path: &Path) -> Result<PointSet> {
    PointSet::parse_text(space, &read(path)?)
}

fn resolve_system(args: &SystemArgs) -> Result<(FieldSpace, ShapeSystem, Map<String, Value>)> {
    let space = FieldSpace::new(args.p, args.n)?;
    let p = space.p();
    let system = match &args.system {
        Some(path) => ShapeSystem::parse_custom(&read(path)?, p)?,
        None => match args.shape {
            ShapeKind::Star => ShapeSystem::star(args.k, p)?,
            ShapeKind::RelaxedStar => ShapeSystem::relaxed_star(args.k, p)?,
            ShapeKind::W => ShapeSystem::w_shape(p)?,
            ShapeKind::Mixed => ShapeSystem::mixed(p)?,
        },
    };
    let mut config = Map::new();
    config.insert("p".into(), json!(args.p));
    config.insert("n".into(), json!(args.n));
    config.insert("k".into(), json!(args.k));
    config.insert("shape".into(), json!(format!("{:?}", args.shape).to_lowercase()));
    config.insert(
        "system_file".into(),
        args.system.as_ref().map_or(Value::Null, |p| json!(p.display().to_string())),
    );
    config.insert("system".into(), json!(system.kind().to_string()));
    config.insert("system_rows".into(), json!(system.rows()));
    config.insert("system_rank".into(), json!(system.rank()));
    Ok((space, system, config))
}

fn point_json(space: &FieldSpace, x: Point) -> Value {
    json!(format_point(space, x))
}

fn tuple_json(space: &FieldSpace, tuple: &[Point]) -> Value {
    Value::Array(tuple.iter().map(|&x| point_json(space, x)).collect())
}

fn set_json(set: &PointSet) -> Value {
    let space = set.space();
    Value::Array(set.iter().map(|x| point_json(&space, x)).collect())
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_bound(ps: &[u64], ns: &[u32], ks: &[usize]) -> Result<Dispatched> {
    let mut rows = Vec::new();
    for &p in ps {
        let lam = bounds::lambda(&LambdaQuery::new(1, 1.0 / 3.0, FieldSpace::new(p, 1)?.p() - 1)?);
        let w = bounds::w_constant(p)?;
        for &n in ns {
            for &k in ks {
                rows.push(json!({
                    "p": p,
                    "n": n,
                    "k": k,
                    "lambda": num(lam.value),
                    "u_star": num(lam.u_star),
                    "spade": num(bounds::spade_bound(p, n)?),
                    "club": num(bounds::club_bound(p, n, k)?),
                    "w_constant": num(w.value),
                    "w_bound": num(w.bound(n)?),
                }));
            }
        }
    }
    let mut config = Map::new();
    config.insert("p".into(), json!(ps));
    config.insert("n".into(), json!(ns));
    config.insert("k".into(), json!(ks));
    Ok(("bound", config, json!({ "table": rows }), 0))
}

fn cmd_lambda(m: u32, alpha: &str, h: u32) -> Result<Dispatched> {
    let alpha = RealArg::parse("alpha", alpha)?;
    let query = LambdaQuery::new(m, alpha.value, h)?;
    let r = bounds::lambda(&query);
    let mut config = Map::new();
    config.insert("m".into(), json!(m));
    alpha.echo("alpha", &mut config);
    config.insert("h".into(), json!(h));
    let result = json!({
        "u_star": num(r.u_star),
        "lambda": num(r.value),
        "interior": r.interior,
    });
    Ok(("lambda", config, result, 0))
}

fn cmd_check(args: &SystemArgs, set: &Path) -> Result<Dispatched> {
    let (space, system, mut config) = resolve_system(args)?;
    config.insert("set".into(), json!(set.display().to_string()));
    let a = load_set(space, set)?;
    let shape = detector::find_shape(&a, &system);
    let result = json!({
        "shape-free": shape.is_none(),
        "size": a.len(),
        "shape": shape.map_or(Value::Null, |s| tuple_json(&space, &s)),
        "semishapes": detector::count_semishapes(&a, &system)?.to_string(),
    });
    Ok(("check", config, result, 0))
}

fn cmd_enumerate(args: &SystemArgs, set: &Path, limit: usize) -> Result<Dispatched> {
    let (space, system, mut config) = resolve_system(args)?;
    config.insert("set".into(), json!(set.display().to_string()));
    config.insert("limit".into(), json!(limit));
    let a = load_set(space, set)?;
    let mut listed = Vec::new();
    let mut shapes = 0u128;
    detector::for_each_shape(&a, &system, |s| {
        shapes += 1;
        if listed.len() < limit {
            listed.push(tuple_json(&space, s));
        }
        ControlFlow::Continue(())
    });
    let result = json!({
        "size": a.len(),
        "semishapes": detector::count_semishapes(&a, &system)?.to_string(),
        "shapes": shapes.to_string(),
        "listed": listed,
    });
    Ok(("enumerate", config, result, 0))
}

fn cmd_pack(args: &SystemArgs, set: &Path, target: Option<usize>) -> Result<Dispatched> {
    let (space, system, mut config) = resolve_system(args)?;
    config.insert("set".into(), json!(set.display().to_string()));
    config.insert("target".into(), json!(target));
    let a = load_set(space, set)?;
    let family = detector::greedy_disjoint_pack(&a, &system, target);
    let result = json!({
        "size": a.len(),
        "family_size": family.len(),
        "maximal": family.maximal,
        "covered": family.covered.len(),
        "family": family.shapes.iter().map(|s| tuple_json(&space, s)).collect::<Vec<_>>(),
    });
    Ok(("pack", config, result, 0))
}

fn load_rows(space: FieldSpace, system: &ShapeSystem, path: &Path) -> Result<MulticoloredFamily> {
    MulticoloredFamily::parse_text(space, system.num_vars(), &read(path)?)
}

fn cmd_extend(args: &SystemArgs, rows: &Path, i: usize, j: usize) -> Result<Dispatched> {
    let (space, system, mut config) = resolve_system(args)?;
    config.insert("rows".into(), json!(rows.display().to_string()));
    config.insert("i".into(), json!(i));
    config.insert("j".into(), json!(j));
    let family = load_rows(space, &system, rows)?;
    let relation = detector::extendable_pairs(&family, &system, i, j)?;
    let result = json!({
        "s": family.len(),
        "pairs": relation
            .pairs
            .iter()
            .map(|&(x, y)| json!([format_point(&space, x), format_point(&space, y)]))
            .collect::<Vec<_>>(),
        "count": relation.len(),
        "second_terms_distinct": detector::lemma_injectivity_check(&relation),
    });
    Ok(("extend", config, result, 0))
}

fn cmd_multicolor(args: &SystemArgs, rows: &Path, budget: u64) -> Result<Dispatched> {
    let (space, system, mut config) = resolve_system(args)?;
    config.insert("rows".into(), json!(rows.display().to_string()));
    config.insert("budget".into(), json!(budget));
    let family = load_rows(space, &system, rows)?;
    let outcome = detector::multicolor_check(&family, &system, budget)?;
    let lambda_n = bounds::spade_bound(args.p, args.n)?;
    let result = json!({
        "s": family.len(),
        "multicolored": outcome.holds,
        "nodes": outcome.nodes,
        "lambda_power": num(lambda_n),
        "s_within_lambda_power": family.len() as f64 <= lambda_n,
    });
    // A multicolored family larger than Λ^n would contradict the bound.
    let code = if outcome.holds && family.len() as f64 > lambda_n { 3 } else { 0 };
    Ok(("multicolor", config, result, code))
}

fn cmd_replay(p: u64, n: u32, k: usize, set: &Path, budget: u64) -> Result<Dispatched> {
    let space = FieldSpace::new(p, n)?;
    let a = load_set(space, set)?;
    let trace = detector::replay_with_budget(&a, k, budget)?;
    let mut config = Map::new();
    config.insert("p".into(), json!(p));
    config.insert("n".into(), json!(n));
    config.insert("k".into(), json!(k));
    config.insert("set".into(), json!(set.display().to_string()));
    config.insert("budget".into(), json!(budget));
    let checks: Vec<Value> = trace
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "statement": c.statement, "holds": c.holds }))
        .collect();
    let result = json!({
        "case": serde_json::to_value(trace.case).expect("enum serializes"),
        "size": trace.size,
        "t": trace.t,
        "lambda": num(trace.lambda),
        "family": trace.family.iter().map(|s| tuple_json(&space, s)).collect::<Vec<_>>(),
        "family_maximal": trace.family_maximal,
        "residual_size": trace.residual_size,
        "m_rows": trace.m_rows.iter().map(|r| tuple_json(&space, r)).collect::<Vec<_>>(),
        "extendable": trace
            .extendable
            .iter()
            .map(|&(x, y)| json!([format_point(&space, x), format_point(&space, y)]))
            .collect::<Vec<_>>(),
        "all_hold": trace.all_hold(),
        "checks": checks,
    });
    let code = if trace.all_hold() { 0 } else { 3 };
    Ok(("replay", config, result, code))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SearchMode {
    Exact,
    Heuristic,
    Auto,
}

impl SearchMode {
    fn resolve(exact: bool, heuristic: bool) -> Self {
        match (exact, heuristic) {
            (true, _) => SearchMode::Exact,
            (_, true) => SearchMode::Heuristic,
            _ => SearchMode::Auto,
        }
    }
}

fn cmd_search(
    args: &SystemArgs,
    mode: SearchMode,
    seed: u64,
    iterations: usize,
    node_limit: Option<u64>,
    time_limit: Option<f64>,
    witness_path: Option<&Path>,
) -> Result<Dispatched> {
    let (space, system, mut config) = resolve_system(args)?;
    let exact = match mode {
        SearchMode::Exact => true,
        SearchMode::Heuristic => false,
        SearchMode::Auto => space.size() <= DEFAULT_EXACT_LIMIT,
    };
    let time_limit = match time_limit {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(Error::input("time-limit", format!("{t} is not a positive number of seconds")))
        }
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    config.insert("method".into(), json!(if exact { "exact" } else { "heuristic" }));
    config.insert("seed".into(), json!(seed));
    config.insert("iterations".into(), json!(iterations));
    config.insert("node_limit".into(), json!(node_limit));
    config.insert("time_limit".into(), json!(time_limit.map(|d| d.as_secs_f64())));
    config.insert(
        "witness".into(),
        witness_path.map_or(Value::Null, |p| json!(p.display().to_string())),
    );

    let result = if exact {
        search::exact_max_shape_free(space, &system, SearchBudget { node_limit, time_limit })?
    } else {
        search::heuristic_max(space, &system, seed, iterations)?
    };
    if let Some(path) = witness_path {
        fs::write(path, result.witness.to_text())
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    }
    let mut out = json!({
        "size": result.size,
        "optimal": result.optimal,
        "nodes": result.nodes,
        "verified_shape_free": result.verified_shape_free,
        "set": set_json(&result.witness),
    });
    let star_k = match system.kind() {
        crate::SystemKind::Star { k } | crate::SystemKind::RelaxedStar { k } => Some(k),
        _ => None,
    };
    if let Some(k) = star_k {
        let report = search::validate_against_bounds(&result, k)?;
        out["club_bound"] = num(report.bound);
        out["slack"] = num(report.slack);
    }
    Ok(("search", config, out, 0))
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Serializes a run document. JSON keys are sorted; the human form is
/// `key: value` lines with tables for arrays of records.
pub fn emit(doc: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc).expect("values serialize");
            s.push('\n');
            Ok(s)
        }
        Format::Human => {
            let mut out = String::new();
            render_human(&mut out, "", doc);
            Ok(out)
        }
        Format::Csv => {
            let table = doc
                .pointer("/result/table")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::input("format", "csv output needs a command producing a table"))?;
            Ok(render_table(table, ","))
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(items) => format!(
            "[{}]",
            items.iter().map(scalar).collect::<Vec<_>>().join(" ")
        ),
        other => other.to_string(),
    }
}

fn is_record_list(items: &[Value]) -> bool {
    !items.is_empty() && items.iter().all(Value::is_object)
}

fn render_human(out: &mut String, prefix: &str, v: &Value) {
    match v {
        Value::Object(map) => {
            for (key, value) in map {
                let name = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                render_human(out, &name, value);
            }
        }
        Value::Array(items) if is_record_list(items) => {
            out.push_str(&format!("{prefix}:\n"));
            for line in render_table(items, "  ").lines() {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
        other => out.push_str(&format!("{prefix}: {}\n", scalar(other))),
    }
}

fn render_table(rows: &[Value], sep: &str) -> String {
    let Some(first) = rows.first().and_then(Value::as_object) else {
        return String::new();
    };
    let headers: Vec<&String> = first.keys().collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| headers.iter().map(|h| scalar(&r[h.as_str()])).collect())
        .collect();
    let pad = sep != ",";
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(c, h)| cells.iter().map(|r| r[c].len()).chain([h.len()]).max().unwrap_or(0))
        .collect();
    let line = |items: Vec<&str>| -> String {
        items
            .iter()
            .enumerate()
            .map(|(c, s)| if pad { format!("{s:>w$}", w = widths[c]) } else { s.to_string() })
            .collect::<Vec<_>>()
            .join(sep)
    };
    let mut out = line(headers.iter().map(|h| h.as_str()).collect());
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
