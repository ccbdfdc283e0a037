//! `friable`: tables and reports for the Dickman–de Bruijn function and
//! friable-integer counts.

mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use friable_core::consts::EXP_GAMMA;
use friable_core::counting::{
    buchstab_identity_check, estimate_bundle, hildebrand_identity_check, BundleConfig, PhiCounter,
    PsiCounter, DEFAULT_MAX_EXACT_X,
};
use friable_core::special_functions::{
    rho_laplace_numeric, rho_tau_squared, OmegaEvaluator, SigmaEvaluator, TauEvaluator, RHO_U_MAX,
};
use friable_core::stats::{
    golomb_dickman_rho, golomb_dickman_shepp_lloyd, longest_cycle_cdf, mu_exact, sum_log_p, sum_recip_p,
    Rational,
};
use friable_core::{xi, Cache, Error, PrimeTable};

use format::{format_sig, parse_count, parse_real, parse_small_count, Decimal};

const SCHEMA: &str = "friable-kit/1";
const MAX_GRID_POINTS: usize = 1_000_000;
const HILDEBRAND_TOLERANCE: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "friable", version, about = "Dickman-de Bruijn function and friable-integer counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Dat)]
    format: OutputFormat,
    /// Significant digits in dat and csv output.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=17))]
    precision: u32,
    /// Prime table limit; by default the next power of ten that is large enough.
    #[arg(long, global = true, value_parser = parse_count)]
    prime_limit: Option<u64>,
    /// Cache directory; falls back to $FRIABLE_CACHE_DIR, then ./.friable-cache.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Largest x for which exact counts are attempted.
    #[arg(long, global = true, value_parser = parse_real, default_value_t = DEFAULT_MAX_EXACT_X)]
    max_exact_x: f64,
    #[arg(long, global = true)]
    max_u: Option<Decimal>,
    #[arg(long, global = true)]
    step: Option<Decimal>,
    #[arg(long, global = true, value_parser = parse_real)]
    x: Option<f64>,
    #[arg(long, global = true, value_parser = parse_real)]
    y: Option<f64>,
    #[arg(long, global = true, value_parser = parse_real)]
    z: Option<f64>,
    #[arg(long, global = true)]
    u: Option<Decimal>,
    #[arg(long, global = true, value_parser = parse_real)]
    kappa: Option<f64>,
    #[arg(long, global = true, value_parser = parse_real)]
    delta: Option<f64>,
    #[arg(long, global = true, value_parser = parse_small_count)]
    n: Option<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Dat,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// ρ(u) at --u, or on the grid --step .. --max-u.
    Rho,
    /// ρ(u) on the grid 0, --step, …, --max-u (default 0.1 up to 4).
    RhoTable,
    /// ξ(u) and ξ'(u).
    Xi,
    /// Buchstab's ω(u).
    Omega,
    /// σ_κ(u), with κ from --kappa.
    Sigma,
    /// τ_δ(u), with δ from --delta.
    Tau,
    /// Exact Ψ(x, y).
    Psi,
    /// Exact Φ(x, y).
    Phi,
    /// Every Ψ(x, y) estimate next to the exact count.
    PsiReport {
        /// Comma-separated subset of the estimates to report.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        methods: Vec<Method>,
    },
    /// Check one of the functional identities numerically.
    IdentityCheck {
        #[arg(value_enum)]
        identity: Identity,
    },
    /// Print a constant with an independent cross-check.
    Constants {
        #[arg(value_enum)]
        name: Constant,
    },
    /// Largest-prime-factor and permutation statistics.
    Stats {
        #[arg(value_enum)]
        which: Stat,
    },
    /// Inspect or empty the cache directory.
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    All,
    Exact,
    Dickman,
    Lambda,
    Rankin,
    Binomial,
    Saddle,
    Z,
}

#[derive(Clone, Copy, ValueEnum)]
enum Identity {
    Buchstab,
    Hildebrand,
}

#[derive(Clone, Copy, ValueEnum)]
enum Constant {
    GolombDickman,
    EGamma,
    RhoTauSquared,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stat {
    #[value(name = "logP")]
    LogP,
    #[value(name = "recipP")]
    RecipP,
    Mu,
    CycleCdf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CacheAction {
    Info,
    Clear,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::Input(_) => EXIT_USAGE,
            Error::Bounds(_) | Error::Cost(_) | Error::Range(_) | Error::InsufficientTable { .. } => EXIT_GUARD,
            Error::Tolerance(_) => EXIT_TOLERANCE,
            _ => EXIT_OTHER,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Clone)]
enum Cell {
    Num(f64),
    Exact(Decimal),
    Int(u128),
    Text(String),
}

impl Cell {
    fn text(&self, precision: u32) -> String {
        match self {
            Cell::Num(v) => format_sig(*v, precision),
            Cell::Exact(d) => d.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json!(v),
            Cell::Exact(d) => json!(d.to_f64()),
            Cell::Int(v) => match u64::try_from(*v) {
                Ok(v) => json!(v),
                Err(_) => json!(v.to_string()),
            },
            Cell::Text(s) => json!(s),
        }
    }
}

struct Table {
    command: &'static str,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn render(&self, opts: &Opts) -> String {
        let mut out = String::new();
        match opts.format {
            OutputFormat::Dat => {
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|c| c.text(opts.precision)).collect();
                    out.push_str(&cells.join("\t"));
                    out.push('\n');
                }
            }
            OutputFormat::Csv => {
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|c| c.text(opts.precision)).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            OutputFormat::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let mut m = Map::new();
                        for (c, v) in self.columns.iter().zip(row) {
                            m.insert((*c).to_string(), v.json());
                        }
                        Value::Object(m)
                    })
                    .collect();
                out = render_json(json!({
                    "schema": SCHEMA,
                    "command": self.command,
                    "rows": rows,
                }));
            }
        }
        out
    }
}

fn render_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json value serializes");
    s.push('\n');
    s
}

/// Key/value output for the report-style commands.
fn render_record(opts: &Opts, record: Value) -> String {
    match opts.format {
        OutputFormat::Json => render_json(record),
        OutputFormat::Dat | OutputFormat::Csv => {
            let sep = if opts.format == OutputFormat::Dat { "\t" } else { "," };
            let mut out = String::new();
            if opts.format == OutputFormat::Csv {
                out.push_str("field,value\n");
            }
            flatten(&record, "", &mut |k, v| {
                out.push_str(&format!("{k}{sep}{}\n", scalar_text(v, opts.precision)));
            });
            out
        }
    }
}

fn flatten(v: &Value, prefix: &str, f: &mut dyn FnMut(&str, &Value)) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(v, &key, f);
            }
        }
        Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                flatten(v, &format!("{prefix}.{i}"), f);
            }
        }
        _ => f(prefix, v),
    }
}

fn scalar_text(v: &Value, precision: u32) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format_sig(n.as_f64().expect("f64"), precision),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| usage(format!("this command needs --{flag}")))
}

fn cache(opts: &Opts) -> Cache {
    Cache::resolve(opts.cache_dir.as_deref())
}

fn prime_table(opts: &Opts, needed: f64) -> CliResult<PrimeTable> {
    let needed = needed.max(2.0).ceil() as u64;
    let limit = match opts.prime_limit {
        Some(l) => l,
        None => {
            let mut l = 1000u64;
            while l < needed {
                l = l.saturating_mul(10);
            }
            l
        }
    };
    if limit < needed {
        return Err(Error::InsufficientTable { limit, needed }.into());
    }
    Ok(cache(opts).prime_table(limit)?)
}

/// The single point --u, or the grid 0, --step, …, --max-u.
fn points(opts: &Opts, default_max: Option<&str>) -> CliResult<Vec<Decimal>> {
    if let Some(u) = opts.u {
        return Ok(vec![u]);
    }
    let max = match (opts.max_u, default_max) {
        (Some(m), _) => m,
        (None, Some(d)) => d.parse().expect("default grid bound"),
        (None, None) => return Err(usage("this command needs --u or --max-u")),
    };
    let step = opts.step.unwrap_or_else(|| "0.1".parse().expect("default step"));
    if max.to_f64() > RHO_U_MAX {
        return Err(Error::Cost(format!("--max-u {max} exceeds the supported {RHO_U_MAX}")).into());
    }
    Decimal::grid(step, max, MAX_GRID_POINTS).map_err(usage)
}

fn top_of(points: &[Decimal]) -> f64 {
    points.iter().map(|d| d.to_f64()).fold(3.0, f64::max)
}

fn check_top(top: f64) -> CliResult<()> {
    if top > RHO_U_MAX {
        return Err(Error::Cost(format!("u = {top} exceeds the supported {RHO_U_MAX}")).into());
    }
    Ok(())
}

fn cmd_rho(opts: &Opts, default_max: Option<&str>, name: &'static str) -> CliResult<String> {
    let pts = points(opts, default_max)?;
    let top = top_of(&pts);
    check_top(top)?;
    // solve to a round bound so nearby requests share one cache file
    let eval = cache(opts).rho_evaluator(((top / 10.0).ceil() * 10.0).min(RHO_U_MAX))?;
    let mut t = Table::new(name, &["u", "rho"]);
    for u in pts {
        t.rows.push(vec![Cell::Exact(u), Cell::Num(eval.rho(u.to_f64())?)]);
    }
    Ok(t.render(opts))
}

fn cmd_xi(opts: &Opts) -> CliResult<String> {
    let mut t = Table::new("xi", &["u", "xi", "xi_prime"]);
    let single = opts.u.is_some();
    for u in points(opts, None)? {
        let uf = u.to_f64();
        if !single && uf <= 1.0 {
            continue;
        }
        let v = xi(uf)?;
        t.rows.push(vec![Cell::Exact(u), Cell::Num(v.xi), Cell::Num(v.xi_prime)]);
    }
    Ok(t.render(opts))
}

fn cmd_omega(opts: &Opts) -> CliResult<String> {
    let pts = points(opts, None)?;
    let top = top_of(&pts);
    check_top(top)?;
    let eval = OmegaEvaluator::new(top)?;
    let single = opts.u.is_some();
    let mut t = Table::new("omega", &["u", "omega"]);
    for u in pts {
        let uf = u.to_f64();
        if !single && uf < 1.0 {
            continue;
        }
        t.rows.push(vec![Cell::Exact(u), Cell::Num(eval.omega(uf)?)]);
    }
    Ok(t.render(opts))
}

fn cmd_sigma(opts: &Opts) -> CliResult<String> {
    let kappa = need(opts.kappa, "kappa")?;
    let pts = points(opts, None)?;
    let top = top_of(&pts);
    check_top(top)?;
    let eval = SigmaEvaluator::new(kappa, top)?;
    let mut t = Table::new("sigma", &["u", "sigma"]);
    for u in pts {
        t.rows.push(vec![Cell::Exact(u), Cell::Num(eval.sigma(u.to_f64())?)]);
    }
    Ok(t.render(opts))
}

fn cmd_tau(opts: &Opts) -> CliResult<String> {
    let delta = need(opts.delta, "delta")?;
    let pts = points(opts, None)?;
    let top = top_of(&pts);
    check_top(top)?;
    let eval = TauEvaluator::new(delta, top)?;
    let mut t = Table::new("tau", &["u", "tau"]);
    for u in pts {
        t.rows.push(vec![Cell::Exact(u), Cell::Num(eval.tau(u.to_f64())?)]);
    }
    Ok(t.render(opts))
}

fn cmd_count(opts: &Opts, phi: bool) -> CliResult<String> {
    let x = need(opts.x, "x")?;
    let y = need(opts.y, "y")?;
    if x > opts.max_exact_x {
        return Err(Error::Cost(format!("x = {x} exceeds --max-exact-x {:e}", opts.max_exact_x)).into());
    }
    let table = prime_table(opts, y.min(x))?;
    let (name, value) = if phi {
        ("phi", PhiCounter::new(&table).count(x, y)?)
    } else {
        ("psi", PsiCounter::with_max_x(&table, opts.max_exact_x).count(x, y)?)
    };
    let mut t = Table::new(name, &["x", "y", "u", name]);
    t.rows.push(vec![
        Cell::Num(x),
        Cell::Num(y),
        Cell::Num(x.ln() / y.ln()),
        Cell::Int(value as u128),
    ]);
    Ok(t.render(opts))
}

fn cmd_psi_report(opts: &Opts, methods: &[Method]) -> CliResult<String> {
    let x = need(opts.x, "x")?;
    let y = need(opts.y, "y")?;
    let all = methods.contains(&Method::All);
    let wants = |m: Method| all || methods.contains(&m);
    let config = BundleConfig {
        max_exact_x: if wants(Method::Exact) { opts.max_exact_x } else { 0.0 },
        lambda: wants(Method::Lambda),
    };
    let table = prime_table(opts, y)?;
    let bundle = estimate_bundle(x, y, &table, &config)?;
    let mut v = serde_json::to_value(&bundle).map_err(|e| Failure {
        code: EXIT_OTHER,
        message: e.to_string(),
    })?;
    let drop = [
        (Method::Dickman, "dickman"),
        (Method::Rankin, "rankin_upper"),
        (Method::Binomial, "binomial_lower"),
        (Method::Saddle, "saddle"),
        (Method::Z, "z_log"),
    ];
    let obj = v.as_object_mut().expect("bundle is an object");
    if !wants(Method::Exact) {
        obj.remove("exact_omitted");
    }
    for (m, key) in drop {
        if !wants(m) {
            obj.remove(key);
            if let Some(Value::Object(r)) = obj.get_mut("ratios") {
                r.remove(key);
            }
        }
    }
    let mut record = Map::new();
    record.insert("schema".into(), json!(SCHEMA));
    record.extend(std::mem::take(obj));
    Ok(render_record(opts, Value::Object(record)))
}

fn cmd_identity(opts: &Opts, identity: Identity) -> CliResult<(String, bool)> {
    let x = need(opts.x, "x")?;
    let y = need(opts.y, "y")?;
    match identity {
        Identity::Buchstab => {
            let z = need(opts.z, "z")?;
            let table = prime_table(opts, z)?;
            let r = buchstab_identity_check(x, y, z, &table)?;
            let record = json!({
                "schema": SCHEMA,
                "identity": "buchstab",
                "x": x, "y": y, "z": z,
                "residual": r,
                "passed": r == 0,
            });
            Ok((render_record(opts, record), r == 0))
        }
        Identity::Hildebrand => {
            let table = prime_table(opts, y.min(x).max(x.sqrt()))?;
            let r = hildebrand_identity_check(x, y, &table)?;
            let bound = HILDEBRAND_TOLERANCE * x * x.ln().max(1.0);
            let ok = r.abs() <= bound;
            let record = json!({
                "schema": SCHEMA,
                "identity": "hildebrand",
                "x": x, "y": y,
                "residual": r,
                "bound": bound,
                "passed": ok,
            });
            Ok((render_record(opts, record), ok))
        }
    }
}

fn cmd_constants(opts: &Opts, name: Constant) -> CliResult<String> {
    let (label, value, methods, other) = match name {
        Constant::GolombDickman => (
            "golomb-dickman",
            golomb_dickman_rho()?,
            ["integral of rho(u)/(1+u)^2", "integral of exp(-x-E1(x))"],
            golomb_dickman_shepp_lloyd()?,
        ),
        Constant::EGamma => (
            "e-gamma",
            EXP_GAMMA,
            ["exp of the Euler-Mascheroni constant", "integral of rho over [0, inf)"],
            rho_laplace_numeric(0.0)?,
        ),
        Constant::RhoTauSquared => (
            "rho-tau-squared",
            rho_tau_squared(),
            ["closed form at the squared golden ratio", "delay-equation solution"],
            friable_core::rho(friable_core::consts::GOLDEN_RATIO.powi(2))?,
        ),
    };
    let record = json!({
        "schema": SCHEMA,
        "name": label,
        "value": value,
        "methods": methods,
        "cross_check_value": other,
        "cross_check_delta": (value - other).abs(),
    });
    Ok(render_record(opts, record))
}

fn ratio_text(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn cmd_stats(opts: &Opts, which: Stat) -> CliResult<String> {
    match which {
        Stat::LogP => {
            let x = parse_x_count(opts)?;
            let table = prime_table(opts, (x as f64).sqrt())?;
            let s = sum_log_p(x, &table)?;
            let mut t = Table::new("stats-logP", &["x", "exact", "leading", "sharpened"]);
            t.rows.push(vec![
                Cell::Int(x as u128),
                Cell::Num(s.exact),
                Cell::Num(s.leading),
                Cell::Num(s.sharpened),
            ]);
            Ok(t.render(opts))
        }
        Stat::RecipP => {
            let x = parse_x_count(opts)?;
            let table = prime_table(opts, (x as f64).sqrt())?;
            let s = sum_recip_p(x, &table)?;
            let mut t = Table::new("stats-recipP", &["x", "exact", "estimate"]);
            t.rows.push(vec![Cell::Int(x as u128), Cell::Num(s.exact), Cell::Num(s.estimate)]);
            Ok(t.render(opts))
        }
        Stat::Mu => {
            let n = need(opts.n, "n")?;
            let s = mu_exact(n)?;
            let mut t = Table::new("stats-mu", &["n", "expected_longest", "mu", "mu_value"]);
            t.rows.push(vec![
                Cell::Int(n as u128),
                Cell::Text(ratio_text(&s.expected_longest)),
                Cell::Text(ratio_text(&s.mu)),
                Cell::Num(*s.mu.numer() as f64 / *s.mu.denom() as f64),
            ]);
            Ok(t.render(opts))
        }
        Stat::CycleCdf => {
            let n = need(opts.n, "n")?;
            let u = need(opts.u, "u")?;
            let c = longest_cycle_cdf(n, u.to_f64())?;
            let mut t = Table::new("stats-cycle-cdf", &["n", "u", "fraction", "value"]);
            t.rows.push(vec![
                Cell::Int(n as u128),
                Cell::Exact(u),
                Cell::Text(ratio_text(&c)),
                Cell::Num(*c.numer() as f64 / *c.denom() as f64),
            ]);
            Ok(t.render(opts))
        }
    }
}

fn parse_x_count(opts: &Opts) -> CliResult<u64> {
    let x = need(opts.x, "x")?;
    if x < 0.0 || x.fract() != 0.0 {
        return Err(usage(format!("--x {x} must be a non-negative integer here")));
    }
    Ok(x as u64)
}

fn cmd_cache(opts: &Opts, action: CacheAction) -> CliResult<String> {
    let c = cache(opts);
    let dir = c.dir().display().to_string();
    match action {
        CacheAction::Info => {
            let entries = c.entries()?;
            match opts.format {
                OutputFormat::Json => Ok(render_json(json!({
                    "schema": SCHEMA,
                    "dir": dir,
                    "entries": entries,
                }))),
                _ => {
                    let mut t = Table::new("cache-info", &["name", "bytes"]);
                    for e in entries {
                        t.rows.push(vec![Cell::Text(e.name), Cell::Int(e.bytes as u128)]);
                    }
                    Ok(t.render(opts))
                }
            }
        }
        CacheAction::Clear => {
            let removed = c.clear()?;
            Ok(render_record(
                opts,
                json!({ "schema": SCHEMA, "dir": dir, "removed": removed }),
            ))
        }
    }
}

fn run(cli: &Cli) -> CliResult<String> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Rho => cmd_rho(opts, None, "rho"),
        Command::RhoTable => cmd_rho(opts, Some("4"), "rho-table"),
        Command::Xi => cmd_xi(opts),
        Command::Omega => cmd_omega(opts),
        Command::Sigma => cmd_sigma(opts),
        Command::Tau => cmd_tau(opts),
        Command::Psi => cmd_count(opts, false),
        Command::Phi => cmd_count(opts, true),
        Command::PsiReport { methods } => cmd_psi_report(opts, methods),
        Command::IdentityCheck { identity } => {
            let (out, ok) = cmd_identity(opts, *identity)?;
            if ok {
                Ok(out)
            } else {
                print!("{out}");
                Err(Failure {
                    code: EXIT_TOLERANCE,
                    message: "identity residual exceeds its tolerance".into(),
                })
            }
        }
        Command::Constants { name } => cmd_constants(opts, *name),
        Command::Stats { which } => cmd_stats(opts, *which),
        Command::Cache { action } => cmd_cache(opts, *action),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("friable: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
