//! Front-end for the `keypoly` binary: argument and config handling, field
//! dispatch and report emission.

pub mod parse;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use keypoly::analysis::{character_trace, delta_epsilon, derivative_value_report, effective_bound};
use keypoly::augment::{run, RunConfig, RunStatus};
use keypoly::chain::{KPoly, KeyChain};
use keypoly::limits::{build_limit_candidate, LimitConfig, StallTrace};
use keypoly::oracle::{oracle_from_json, spec_field, OracleBackends};
use keypoly::scalars::{parse_rational, FieldDescriptor, FpT, MonomialField, PAdic, Value, ValuedField, QT};
use serde::Deserialize;
use serde_json::{json, Value as Json};

pub use parse::{parse_polynomial, print_polynomial, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] keypoly::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 3 for precision and budget failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_resource() => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "keypoly", version, about = "Key-polynomial chains for valuations on K[x]")]
pub struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Write `<command>.json` (and `newton.svg`) here instead of stdout.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ν_i(h), or the chain's value of h without --level.
    Value(PolyArgs),
    /// The standard expansion of h in Q_i.
    Expand(PolyArgs),
    /// The Newton polygon of h at level i, as JSON and SVG.
    Newton(PolyArgs),
    /// Build the chain of an oracle.
    Trace(TraceArgs),
    /// Derivative bounds and (δ, ε) characters of probes along a chain.
    Analyze(AnalyzeArgs),
    /// A weakly affine candidate from a stalled trace.
    Limit(LimitArgs),
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    #[arg(long, value_name = "FILE")]
    pub chain: Option<PathBuf>,
    #[arg(long, value_name = "EXPR")]
    pub poly: Option<String>,
    /// 1-based level; defaults to the top level.
    #[arg(long, value_name = "N")]
    pub level: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, value_name = "FILE")]
    pub oracle: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub probes: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub max_steps: Option<usize>,
    #[arg(long, value_name = "V")]
    pub value_threshold: Option<String>,
    #[arg(long, value_name = "N")]
    pub max_entries: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_name = "FILE")]
    pub chain: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub probes: Option<PathBuf>,
    #[arg(long, value_name = "EXPR")]
    pub poly: Vec<String>,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Output of `trace`, or a chain file.
    #[arg(long, value_name = "FILE")]
    pub trace: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub probes: Option<PathBuf>,
    #[arg(long, value_name = "T")]
    pub window: Option<usize>,
    #[arg(long, value_name = "D")]
    pub degree_cap: Option<usize>,
    /// Declared β̄; estimated from the trace when absent.
    #[arg(long, value_name = "V")]
    pub bound: Option<String>,
}

/// The `--config` file. Inputs are inline JSON or paths relative to the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub chain: Option<Json>,
    pub oracle: Option<Json>,
    pub probes: Option<Json>,
    pub trace: Option<Json>,
    pub poly: Option<String>,
    pub level: Option<usize>,
    pub max_steps: Option<usize>,
    pub value_threshold: Option<Json>,
    pub max_entries: Option<usize>,
    pub window: Option<usize>,
    pub degree_cap: Option<usize>,
    pub bound: Option<Json>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    base: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let mut c: Config = serde_json::from_value(read_json(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        c.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    fn input(&self, flag: &Option<PathBuf>, inline: &Option<Json>) -> Result<Option<Json>> {
        if let Some(p) = flag {
            return read_json(p).map(Some);
        }
        match inline {
            Some(Json::String(p)) => read_json(&self.base.join(p)).map(Some),
            Some(v) => Ok(Some(v.clone())),
            None => Ok(None),
        }
    }

    fn require(&self, flag: &Option<PathBuf>, inline: &Option<Json>, what: &str) -> Result<Json> {
        self.input(flag, inline)?.ok_or_else(|| CliError::Usage(format!("missing --{what}")))
    }
}

fn read_json(path: &Path) -> Result<Json> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn value_arg(text: &str) -> Result<Value> {
    if text == "inf" {
        return Ok(Value::Infinity);
    }
    Ok(Value::rat(parse_rational(text)?))
}

fn value_json(v: &Json) -> Result<Value> {
    Ok(Value::from_json(v)?)
}

/// A finished command: its JSON report and, for `newton`, an SVG drawing.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: &'static str,
    pub json: Json,
    pub svg: Option<String>,
    /// 3 when the report was written but a budget ran out, else 0.
    pub exit_code: i32,
}

impl Output {
    pub fn text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Writes into `dir` when given and returns what belongs on stdout.
    pub fn emit(&self, dir: Option<&Path>) -> Result<String> {
        let Some(dir) = dir else { return Ok(self.text()) };
        let io = |path: PathBuf| move |source| CliError::Io { path, source };
        std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        let jp = dir.join(format!("{}.json", self.name));
        std::fs::write(&jp, self.text()).map_err(io(jp.clone()))?;
        let mut msg = format!("{}\n", jp.display());
        if let Some(svg) = &self.svg {
            let sp = dir.join(format!("{}.svg", self.name));
            std::fs::write(&sp, svg).map_err(io(sp.clone()))?;
            msg += &format!("{}\n", sp.display());
        }
        Ok(msg)
    }
}

macro_rules! with_field {
    ($desc:expr, $f:ident => $body:expr) => {
        match $desc {
            FieldDescriptor::PAdic { p } => {
                let $f = PAdic::new(p)?;
                $body
            }
            FieldDescriptor::FpT { p } => {
                let $f = FpT::fp(p)?;
                $body
            }
            FieldDescriptor::QT => {
                let $f = QT::q();
                $body
            }
            FieldDescriptor::FpUV { p } => {
                let $f = MonomialField::new(p)?;
                $body
            }
        }
    };
}

/// Replaces expression strings under polynomial keys by encoded polynomials,
/// so input files may write `"Q": "x^2 + t^20*x + t^8"`.
pub fn encode_expressions<F: ValuedField>(field: &F, v: &Json) -> Result<Json> {
    Ok(match v {
        Json::Object(m) => {
            let mut out = serde_json::Map::new();
            for (key, x) in m {
                let x = match (key.as_str(), x) {
                    ("Q" | "min_poly" | "stall_witness", Json::String(s)) => field.encode_poly(&parse_polynomial(field, s)?),
                    _ => encode_expressions(field, x)?,
                };
                out.insert(key.clone(), x);
            }
            Json::Object(out)
        }
        Json::Array(a) => Json::Array(a.iter().map(|x| encode_expressions(field, x)).collect::<Result<_>>()?),
        other => other.clone(),
    })
}

fn chain_field(v: &Json) -> Result<FieldDescriptor> {
    let f = v.get("field").ok_or_else(|| CliError::Usage("chain file needs a \"field\"".into()))?;
    Ok(FieldDescriptor::from_json(f)?)
}

fn level_index<F: ValuedField>(chain: &KeyChain<F>, level: Option<usize>) -> Result<usize> {
    match level {
        None => Ok(chain.top()),
        Some(n) if n >= 1 && n <= chain.len() => Ok(n - 1),
        Some(n) => Err(keypoly::Error::NoSuchLevel(n).into()),
    }
}

/// Reads a probe list: `[p, …]` or `{"probes": [p, …]}`, each an expression
/// string or an encoded polynomial.
pub fn read_probes<F: ValuedField>(field: &F, v: &Json) -> Result<Vec<KPoly<F>>> {
    let list = v.get("probes").unwrap_or(v);
    let list = list.as_array().ok_or_else(|| CliError::Usage("probes must be a list".into()))?;
    list.iter()
        .map(|p| match p {
            Json::String(s) => Ok(parse_polynomial(field, s)?),
            other => Ok(field.decode_poly(other)?),
        })
        .collect()
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<Output> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    match &cli.command {
        Command::Value(a) => poly_command("value", a, &config),
        Command::Expand(a) => poly_command("expand", a, &config),
        Command::Newton(a) => poly_command("newton", a, &config),
        Command::Trace(a) => trace_command(a, &config, seed),
        Command::Analyze(a) => analyze_command(a, &config),
        Command::Limit(a) => limit_command(a, &config),
    }
}

/// The output directory: `--out`, else the config's `out`.
pub fn out_dir(cli: &Cli) -> Result<Option<PathBuf>> {
    if cli.out.is_some() {
        return Ok(cli.out.clone());
    }
    match &cli.config {
        Some(p) => {
            let c = Config::load(p)?;
            Ok(c.out.map(|o| c.base.join(o)))
        }
        None => Ok(None),
    }
}

fn poly_command(name: &'static str, a: &PolyArgs, config: &Config) -> Result<Output> {
    let cj = config.require(&a.chain, &config.chain, "chain")?;
    let text = a.poly.clone().or_else(|| config.poly.clone()).ok_or_else(|| CliError::Usage("missing --poly".into()))?;
    let level = a.level.or(config.level);
    with_field!(chain_field(&cj)?, k => {
        let chain = KeyChain::from_json(k.clone(), &encode_expressions(&k, &cj)?)?;
        let h = parse_polynomial(&k, &text)?;
        poly_report(name, &chain, &h, level)
    })
}

fn poly_report<F: ValuedField>(name: &'static str, chain: &KeyChain<F>, h: &KPoly<F>, level: Option<usize>) -> Result<Output> {
    let k = chain.field();
    let i = level_index(chain, level)?;
    let mut out = Output { name, json: Json::Null, svg: None, exit_code: 0 };
    match name {
        "value" => {
            let v = if level.is_some() { chain.truncation_value(h, i) } else { chain.value(h) };
            out.json = json!({"level": level, "poly": print_polynomial(k, h), "value": v.to_json()});
        }
        "expand" => {
            let ds = chain.standard_expansion(h, i)?;
            let terms: Vec<Json> = ds
                .iter()
                .enumerate()
                .filter(|(_, d)| !d.is_zero())
                .map(|(j, d)| {
                    json!({
                        "j": j,
                        "coeff": k.encode_poly(d),
                        "text": print_polynomial(k, d),
                        "value": chain.coefficient_value(d, i).to_json(),
                        "term_value": chain.coefficient_value(d, i).add(&chain.beta(i).mul_int(j as i64)).to_json(),
                    })
                })
                .collect();
            out.json = json!({
                "level": i + 1,
                "poly": print_polynomial(k, h),
                "Q": print_polynomial(k, chain.q(i)),
                "terms": terms,
                "value": chain.truncation_value(h, i).to_json(),
            });
        }
        _ => {
            let np = chain.newton_polygon(h, i)?;
            let vertices: Vec<Json> = np.points.iter().filter(|p| np.hull.contains(&p.0)).map(|(j, v)| json!([j, v.to_json()])).collect();
            let mut j = np.to_json();
            j["level"] = json!(i + 1);
            j["poly"] = json!(print_polynomial(k, h));
            j["vertices"] = json!(vertices);
            out.svg = Some(svg::newton_svg(&np));
            out.json = j;
        }
    }
    Ok(out)
}

fn trace_command(a: &TraceArgs, config: &Config, seed: u64) -> Result<Output> {
    let spec = config.require(&a.oracle, &config.oracle, "oracle")?;
    let probes = config.input(&a.probes, &config.probes)?;
    let mut rc = RunConfig { seed, ..RunConfig::default() };
    if let Some(n) = a.max_steps.or(config.max_steps) {
        rc.max_steps = n;
    }
    if let Some(n) = a.max_entries.or(config.max_entries) {
        rc.max_entries = n;
    }
    match (&a.value_threshold, &config.value_threshold) {
        (Some(t), _) => rc.value_threshold = value_arg(t)?,
        (None, Some(t)) => rc.value_threshold = value_json(t)?,
        _ => {}
    }
    with_field!(spec_field(&spec)?, k => trace_report(&k, &spec, probes.as_ref(), &rc))
}

fn trace_report<F: OracleBackends>(k: &F, spec: &Json, probes: Option<&Json>, rc: &RunConfig) -> Result<Output> {
    let spec = &encode_expressions(k, spec)?;
    let oracle = oracle_from_json(k, spec)?;
    let probes = match probes {
        Some(p) => read_probes(k, p)?,
        None => match spec.get("min_poly") {
            Some(m) => vec![k.decode_poly(m)?],
            None => Vec::new(),
        },
    };
    let outcome = run(k, oracle.as_ref(), &probes, rc)?;
    let mut j = outcome.to_json();
    j["oracle"] = oracle.describe();
    j["probes"] = json!(probes.iter().map(|p| k.encode_poly(p)).collect::<Vec<_>>());
    j["config"] = json!({
        "max_steps": rc.max_steps,
        "value_threshold": rc.value_threshold.to_json(),
        "max_entries": rc.max_entries,
        "seed": rc.seed,
    });
    let exit_code = if outcome.status == RunStatus::BudgetExhausted { 3 } else { 0 };
    Ok(Output { name: "trace", json: j, svg: None, exit_code })
}

fn analyze_command(a: &AnalyzeArgs, config: &Config) -> Result<Output> {
    let cj = config.require(&a.chain, &config.chain, "chain")?;
    let probes = config.input(&a.probes, &config.probes)?;
    with_field!(chain_field(&cj)?, k => {
        let chain = KeyChain::from_json(k.clone(), &encode_expressions(&k, &cj)?)?;
        let mut hs = match &probes {
            Some(p) => read_probes(&k, p)?,
            None => Vec::new(),
        };
        for t in a.poly.iter().chain(config.poly.iter()) {
            hs.push(parse_polynomial(&k, t)?);
        }
        if hs.is_empty() {
            hs = (0..chain.len()).map(|i| chain.q(i).clone()).collect();
        }
        analyze_report(&chain, &hs)
    })
}

fn nullable<T>(r: keypoly::Result<T>, f: impl FnOnce(T) -> Json) -> Result<Json> {
    match r {
        Ok(x) => Ok(f(x)),
        Err(keypoly::Error::InfiniteValue) => Ok(Json::Null),
        Err(e) => Err(e.into()),
    }
}

fn analyze_report<F: ValuedField>(chain: &KeyChain<F>, probes: &[KPoly<F>]) -> Result<Output> {
    let k = chain.field();
    let mut reports = Vec::new();
    for h in probes.iter().filter(|h| !h.is_zero()) {
        let trace = character_trace(h, chain)?;
        let mut levels = Vec::new();
        for i in 0..chain.len() {
            let eb = nullable(effective_bound(chain, i), |b| b.to_json())?;
            let dr = match derivative_value_report(h, chain, i, None) {
                Ok(r) => Some(r),
                Err(keypoly::Error::InfiniteValue) => None,
                Err(e) => return Err(e.into()),
            };
            let ch = delta_epsilon(h, chain, i)?;
            let tc = trace.checks.iter().find(|c| c.level + 1 == i);
            let opt = |b: Option<bool>| b.map_or(Json::Null, Json::Bool);
            levels.push(json!({
                "level": i + 1,
                "beta": chain.beta(i).to_json(),
                "value": chain.truncation_value(h, i).to_json(),
                "bound": eb,
                "delta": ch.delta,
                "epsilon": ch.epsilon.map_or(json!("inf"), |e| json!(e)),
                "pivotal": [ch.pivotal.0.to_json(), ch.pivotal.1],
                "characteristic": ch.characteristic.as_ref().map(|(v, t)| json!([v.to_json(), t])),
                "derivatives": dr.as_ref().map(|r| r.to_json()),
                "checks": {
                    "derivative_bound": opt(dr.as_ref().map(|r| r.bound_holds())),
                    "derivative_equality": opt(dr.as_ref().map(|r| r.equality_holds())),
                    "exact_derivatives": opt(dr.as_ref().map(|r| r.exact_derivatives_hold())),
                    "reconstruction": opt(dr.as_ref().map(|r| r.reconstruction_holds())),
                    "lex_monotone": opt(tc.map(|c| c.lex_monotone)),
                    "alpha_delta": opt(tc.map(|c| c.alpha_delta)),
                    "delta_decomposition": opt(tc.map(|c| c.delta_decomposition)),
                    "characteristic_above": opt(tc.map(|c| c.characteristic_above)),
                },
            }));
        }
        reports.push(json!({"poly": print_polynomial(k, h), "levels": levels}));
    }
    Ok(Output { name: "analyze", json: json!({"field": k.descriptor().to_json(), "probes": reports}), svg: None, exit_code: 0 })
}

fn limit_command(a: &LimitArgs, config: &Config) -> Result<Output> {
    let tj = config.require(&a.trace, &config.trace, "trace")?;
    let probes = config.input(&a.probes, &config.probes)?;
    let cj = if tj.get("status").is_some() { tj["chain"].clone() } else { tj.clone() };
    let mut lc = LimitConfig::default();
    if let Some(w) = a.window.or(config.window) {
        lc.window = w;
    }
    if let Some(d) = a.degree_cap.or(config.degree_cap) {
        lc.degree_cap = d;
    }
    let bound = match (&a.bound, &config.bound) {
        (Some(b), _) => Some(value_arg(b)?),
        (None, Some(b)) => Some(value_json(b)?),
        _ => None,
    };
    with_field!(chain_field(&cj)?, k => {
        let chain = KeyChain::from_json(k.clone(), &encode_expressions(&k, &cj)?)?;
        let mut hs = match &probes {
            Some(p) => read_probes(&k, p)?,
            None => Vec::new(),
        };
        if let Some(w) = tj.get("stall_witness").filter(|w| !w.is_null()) {
            hs.push(match w {
                Json::String(s) => parse_polynomial(&k, s)?,
                w => k.decode_poly(w)?,
            });
        }
        limit_report(&chain, &hs, bound, &lc)
    })
}

fn limit_report<F: ValuedField>(chain: &KeyChain<F>, probes: &[KPoly<F>], bound: Option<Value>, lc: &LimitConfig) -> Result<Output> {
    if lc.window == 0 || lc.window > chain.len() {
        return Err(CliError::Usage(format!("--window must lie in 1..={}", chain.len())));
    }
    let out = build_limit_candidate(chain, probes, bound, lc)?;
    let mut j = out.to_json();
    j["text"] = json!(print_polynomial(chain.field(), &out.candidate.polynomial));
    let trace = StallTrace::new(chain.clone(), out.probe.clone(), Some(out.candidate.bound.clone()))?;
    j["trace"] = trace.to_json();
    Ok(Output { name: "limit", json: j, svg: None, exit_code: 0 })
}
