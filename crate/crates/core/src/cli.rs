//! Command-line front end. Flags override values from the JSON config file.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical refusal,
//! 4 output failure.

use crate::cones::{classify, partition, PartitionKind};
use crate::error::RuinError;
use crate::models::{adjustment, scale_to_canonical, ClaimDriver, Distribution, TwoLineModel};
use crate::montecarlo::{default_tilt, estimate, Horizon, SimConfig};
use crate::twodim::{cone_for, evaluate, Diagnostics, Event, Method, RuinQuery};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REFUSAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<RuinError> for CliError {
    fn from(e: RuinError) -> Self {
        CliError {
            code: if e.is_numerical_refusal() {
                EXIT_REFUSAL
            } else {
                EXIT_CONFIG
            },
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverKind {
    Cpe,
    Brownian,
    Renewal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum TiltValue {
    Shift(f64),
    Named(TiltWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TiltWord {
    Auto,
}

/// Shift for importance sampling: a number, or `auto` for `-γ` of the relevant line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TiltSpec {
    Auto,
    Shift(f64),
}

impl From<TiltValue> for TiltSpec {
    fn from(v: TiltValue) -> Self {
        match v {
            TiltValue::Shift(c) => TiltSpec::Shift(c),
            TiltValue::Named(TiltWord::Auto) => TiltSpec::Auto,
        }
    }
}

fn parse_tilt(s: &str) -> Result<TiltSpec, String> {
    if s == "auto" {
        return Ok(TiltSpec::Auto);
    }
    s.parse::<f64>()
        .map(TiltSpec::Shift)
        .map_err(|_| format!("expected a number or 'auto', got '{s}'"))
}

fn parse_event(s: &str) -> Result<Event, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown event '{s}', expected or, sim, and, line1 or line2"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("unknown method '{s}', expected exact, two_term, leading or mc"))
}

/// `kind:params`, e.g. `exponential:2`, `deterministic:1`, `gamma:2,4`, `pareto:3,1`.
pub fn parse_distribution(s: &str) -> Result<Distribution, String> {
    let (kind, params) = s
        .split_once(':')
        .ok_or_else(|| format!("expected kind:params, got '{s}'"))?;
    let nums = params
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| format!("bad parameters in '{s}'"))?;
    let d = match (kind, nums.as_slice()) {
        ("exponential", [rate]) => Distribution::Exponential { rate: *rate },
        ("deterministic", [value]) => Distribution::Deterministic { value: *value },
        ("gamma", [shape, rate]) => Distribution::Gamma {
            shape: *shape,
            rate: *rate,
        },
        ("pareto", [shape, scale]) => Distribution::Pareto {
            shape: *shape,
            scale: *scale,
        },
        _ => return Err(format!("unknown distribution '{s}'")),
    };
    d.validate().map_err(|e| e.to_string())?;
    Ok(d)
}

#[derive(Debug, Parser)]
#[command(
    name = "quadrant-ruin",
    version,
    about = "Ruin probabilities of the degenerate two-dimensional risk process"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One row per (event, method) at the given reserves or ray points.
    Compute(Args),
    /// Rows along the ray (aK, K) for each K.
    Sweep(Args),
    /// Cone slopes and adjustment coefficients, optionally with a label grid.
    Cones {
        #[command(flatten)]
        args: Args,
        /// Grid size per axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Largest reserve on the grid.
        #[arg(long, default_value_t = 10.0)]
        grid_max: f64,
    },
    /// Monte Carlo estimates with confidence intervals.
    Mc(Args),
    /// Side-by-side methods with ratios to the exact value.
    Compare(Args),
}

#[derive(Debug, Clone, Default, clap::Args)]
struct Args {
    /// JSON config with blocks model, query, mc, output.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    driver: Option<DriverKind>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    /// Renewal interarrival law, e.g. deterministic:1.
    #[arg(long)]
    interarrival: Option<String>,
    /// Renewal claim law, e.g. exponential:2.
    #[arg(long)]
    claim: Option<String>,
    #[arg(long)]
    u1: Option<f64>,
    #[arg(long)]
    u2: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta2: Option<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_event)]
    event: Vec<Event>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    method: Vec<Method>,
    #[arg(long)]
    x1: Option<f64>,
    #[arg(long)]
    x2: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    fixed_time: Option<f64>,
    #[arg(long)]
    safe_level: Option<f64>,
    #[arg(long, value_parser = parse_tilt, allow_negative_numbers = true)]
    tilt: Option<TiltSpec>,
    #[arg(long)]
    ci_level: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    model: ModelBlock,
    query: QueryBlock,
    mc: McBlock,
    output: OutputBlock,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModelBlock {
    driver: Option<DriverKind>,
    lambda: Option<f64>,
    mu: Option<f64>,
    p1: Option<f64>,
    p2: Option<f64>,
    interarrival: Option<String>,
    claim: Option<String>,
    raw: Option<RawBlock>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    u1: f64,
    u2: f64,
    c1: f64,
    c2: f64,
    delta1: f64,
    delta2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct QueryBlock {
    event: Option<OneOrMany<Event>>,
    method: Option<OneOrMany<Method>>,
    x1: Option<f64>,
    x2: Option<f64>,
    ray: Option<RayBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RayBlock {
    a: f64,
    k: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct McBlock {
    n: Option<u64>,
    seed: Option<u64>,
    fixed_time: Option<f64>,
    safe_level: Option<f64>,
    tilt: Option<TiltValue>,
    ci_level: Option<f64>,
    workers: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OutputBlock {
    format: Option<Format>,
    path: Option<PathBuf>,
}

/// A query location: plain reserves, or a point `(aK, K)` on a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x1: f64,
    pub x2: f64,
    pub a: Option<f64>,
    pub k: Option<f64>,
}

/// Everything a subcommand needs after merging flags over the config file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: TwoLineModel,
    pub points: Vec<Point>,
    pub ray_mode: bool,
    pub events: Vec<Event>,
    pub methods: Vec<Method>,
    pub sim: SimConfig,
    pub tilt: Option<TiltSpec>,
    pub format: Format,
    pub output: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
}

fn need(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::config(format!("missing --{name}")))
}

fn raw_from_flags(a: &Args) -> Result<Option<RawBlock>, CliError> {
    let parts = [a.u1, a.u2, a.c1, a.c2, a.delta1, a.delta2];
    match parts.iter().filter(|p| p.is_some()).count() {
        0 => Ok(None),
        6 => Ok(Some(RawBlock {
            u1: a.u1.unwrap_or_default(),
            u2: a.u2.unwrap_or_default(),
            c1: a.c1.unwrap_or_default(),
            c2: a.c2.unwrap_or_default(),
            delta1: a.delta1.unwrap_or_default(),
            delta2: a.delta2.unwrap_or_default(),
        })),
        _ => Err(CliError::config(
            "the raw triple needs all of --u1 --u2 --c1 --c2 --delta1 --delta2",
        )),
    }
}

fn build_driver(kind: DriverKind, a: &Args, m: &ModelBlock) -> Result<ClaimDriver, CliError> {
    let driver = match kind {
        DriverKind::Cpe => ClaimDriver::CompoundPoissonExp {
            lambda: need(a.lambda.or(m.lambda), "lambda")?,
            mu: need(a.mu.or(m.mu), "mu")?,
        },
        DriverKind::Brownian => ClaimDriver::StandardBrownian,
        DriverKind::Renewal => {
            let spec = |flag: &Option<String>,
                        file: &Option<String>,
                        name: &str|
             -> Result<Distribution, CliError> {
                let s = flag
                    .clone()
                    .or_else(|| file.clone())
                    .ok_or_else(|| CliError::config(format!("missing --{name}")))?;
                parse_distribution(&s).map_err(|e| CliError::config(format!("--{name}: {e}")))
            };
            ClaimDriver::Renewal {
                interarrival: spec(&a.interarrival, &m.interarrival, "interarrival")?,
                claim: spec(&a.claim, &m.claim, "claim")?,
            }
        }
    };
    driver.validate()?;
    Ok(driver)
}

fn resolve(a: &Args, kind: &str) -> Result<Resolved, CliError> {
    let file = match &a.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let m = &file.model;
    let driver_kind = a
        .driver
        .or(m.driver)
        .ok_or_else(|| CliError::config("missing --driver"))?;
    let driver = build_driver(driver_kind, a, m)?;

    let raw = match raw_from_flags(a)? {
        Some(r) => Some(r),
        None => m.raw,
    };
    let mut raw_reserves = None;
    let (p1, p2) = match raw {
        Some(r) => {
            if a.p1.is_some() || a.p2.is_some() {
                return Err(CliError::config(
                    "give either --p1/--p2 or the raw triple, not both",
                ));
            }
            let (x1, x2, p1, p2) = scale_to_canonical(r.u1, r.u2, r.c1, r.c2, r.delta1, r.delta2)?;
            raw_reserves = Some((x1, x2));
            (p1, p2)
        }
        None => (need(a.p1.or(m.p1), "p1")?, need(a.p2.or(m.p2), "p2")?),
    };
    let model = TwoLineModel::new(driver, p1, p2)?;
    model.check_net_profit()?;

    // flags win key by key; a ray from flags drops file reserves and vice versa
    let q = &file.query;
    let flag_ray = a.a.is_some() || !a.k.is_empty();
    let flag_reserves = a.x1.is_some() || a.x2.is_some();
    let (x1, x2, ray) = if flag_ray {
        let file_ray = q.ray.as_ref();
        let slope = a.a.or(file_ray.map(|r| r.a));
        let ks = if a.k.is_empty() {
            file_ray.map(|r| r.k.clone()).unwrap_or_default()
        } else {
            a.k.clone()
        };
        let ray = match slope {
            Some(slope) if !ks.is_empty() => RayBlock { a: slope, k: ks },
            _ => return Err(CliError::config("a ray needs both --a and --k")),
        };
        (a.x1, a.x2, Some(ray))
    } else if flag_reserves {
        (a.x1.or(q.x1), a.x2.or(q.x2), None)
    } else {
        (q.x1, q.x2, q.ray.clone())
    };
    let (points, ray_mode) = match (x1, x2, ray) {
        (Some(x1), Some(x2), None) => (
            vec![Point {
                x1,
                x2,
                a: None,
                k: None,
            }],
            false,
        ),
        (None, None, Some(r)) => {
            if r.k.is_empty() || !(r.a > 0.0) {
                return Err(CliError::config("a ray needs a > 0 and at least one K"));
            }
            let pts =
                r.k.iter()
                    .map(|&k| Point {
                        x1: r.a * k,
                        x2: k,
                        a: Some(r.a),
                        k: Some(k),
                    })
                    .collect();
            (pts, true)
        }
        (None, None, None) => match raw_reserves {
            Some((x1, x2)) => (
                vec![Point {
                    x1,
                    x2,
                    a: None,
                    k: None,
                }],
                false,
            ),
            None if kind == "cones" => (Vec::new(), false),
            None => return Err(CliError::config("give reserves --x1 --x2 or a ray --a --k")),
        },
        (Some(_), Some(_), Some(_)) => {
            return Err(CliError::config("give either reserves or a ray, not both"))
        }
        _ => return Err(CliError::config("reserves need both --x1 and --x2")),
    };
    if kind == "sweep" && !ray_mode {
        return Err(CliError::config("sweep needs a ray: --a and --k"));
    }
    for p in &points {
        if !(p.x1 >= 0.0 && p.x2 >= 0.0 && p.x1.is_finite() && p.x2.is_finite()) {
            return Err(CliError::config(format!(
                "reserves must be finite and nonnegative, got ({}, {})",
                p.x1, p.x2
            )));
        }
    }

    let events = if !a.event.is_empty() {
        a.event.clone()
    } else {
        q.event
            .as_ref()
            .map(|e| e.to_vec())
            .unwrap_or_else(|| vec![Event::Or, Event::Sim, Event::And])
    };
    let default_methods = match kind {
        "mc" => vec![Method::Mc],
        "compare" => vec![Method::Exact, Method::TwoTerm, Method::Leading, Method::Mc],
        _ => vec![Method::Exact],
    };
    let methods = if kind == "mc" {
        vec![Method::Mc]
    } else if !a.method.is_empty() {
        a.method.clone()
    } else {
        q.method
            .as_ref()
            .map(|m| m.to_vec())
            .unwrap_or(default_methods)
    };

    let mc = &file.mc;
    let fixed = a.fixed_time.or(mc.fixed_time);
    let safe = a.safe_level.or(mc.safe_level);
    let horizon = match (fixed, safe) {
        (Some(_), Some(_)) if a.fixed_time.is_some() && a.safe_level.is_none() => {
            Horizon::FixedTime {
                t: fixed.unwrap_or_default(),
            }
        }
        (Some(_), Some(_)) if a.safe_level.is_some() && a.fixed_time.is_none() => {
            Horizon::SafeLevel { level: safe }
        }
        (Some(_), Some(_)) => {
            return Err(CliError::config(
                "give either a fixed time or a safe level, not both",
            ))
        }
        (Some(t), None) => Horizon::FixedTime { t },
        (None, level) => Horizon::SafeLevel { level },
    };
    let defaults = SimConfig::default();
    let sim = SimConfig {
        n: a.n.or(mc.n).unwrap_or(defaults.n),
        seed: a.seed.or(mc.seed).unwrap_or(defaults.seed),
        horizon,
        tilt: None,
        ci_level: a.ci_level.or(mc.ci_level).unwrap_or(defaults.ci_level),
        workers: a.workers.or(mc.workers),
    };
    sim.validate()?;
    let tilt = a.tilt.or(mc.tilt.map(TiltSpec::from));

    let out = &file.output;
    Ok(Resolved {
        model,
        points,
        ray_mode,
        events,
        methods,
        sim,
        tilt,
        format: a.format.or(out.format).unwrap_or_default(),
        output: a.output.clone().or_else(|| out.path.clone()),
    })
}

/// One emitted result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRow {
    pub x1: f64,
    pub x2: f64,
    pub a: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub event: Event,
    pub method: Method,
    pub value: Option<f64>,
    pub cone: Option<String>,
    /// `-ln(value)/K` in ray mode.
    pub exponent: Option<f64>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    #[serde(flatten)]
    pub row: OutputRow,
    /// `value / exact`.
    pub ratio: Option<f64>,
    /// Exact value inside `p̂ ± 3 std_err`, for Monte Carlo rows.
    pub agree: Option<bool>,
    /// Refusal reason when the method does not apply.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeRow {
    pub kind: &'static str,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub s3: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub gamma3: Option<f64>,
    pub sim_cone: Option<String>,
    pub and_cone: Option<String>,
}

pub trait CsvRow {
    fn header() -> Vec<&'static str>;
    fn fields(&self) -> Vec<String>;
}

/// `%.12g`-style decimal with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{}", trim(mant), exp)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig12).unwrap_or_default()
}

fn diag_string(d: &Diagnostics) -> String {
    d.iter()
        .map(|(k, v)| format!("{k}={}", format_sig12(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

impl CsvRow for OutputRow {
    fn header() -> Vec<&'static str> {
        vec![
            "x1",
            "x2",
            "a",
            "K",
            "event",
            "method",
            "value",
            "cone",
            "exponent",
            "diagnostics",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            format_sig12(self.x1),
            format_sig12(self.x2),
            opt(self.a),
            opt(self.k),
            self.event.as_str().into(),
            self.method.as_str().into(),
            opt(self.value),
            self.cone.clone().unwrap_or_default(),
            opt(self.exponent),
            diag_string(&self.diagnostics),
        ]
    }
}

impl CsvRow for CompareRow {
    fn header() -> Vec<&'static str> {
        let mut h = OutputRow::header();
        h.extend(["ratio", "agree", "note"]);
        h
    }

    fn fields(&self) -> Vec<String> {
        let mut f = self.row.fields();
        f.push(opt(self.ratio));
        f.push(self.agree.map(|b| b.to_string()).unwrap_or_default());
        f.push(self.note.clone().unwrap_or_default());
        f
    }
}

impl CsvRow for ConeRow {
    fn header() -> Vec<&'static str> {
        vec![
            "kind", "x1", "x2", "s1", "s2", "s3", "gamma1", "gamma2", "gamma3", "sim_cone",
            "and_cone",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.kind.into(),
            opt(self.x1),
            opt(self.x2),
            opt(self.s1),
            opt(self.s2),
            opt(self.s3),
            opt(self.gamma1),
            opt(self.gamma2),
            opt(self.gamma3),
            self.sim_cone.clone().unwrap_or_default(),
            self.and_cone.clone().unwrap_or_default(),
        ]
    }
}

/// Writes rows as CSV (header, LF line endings) or as a JSON array.
pub fn emit<T: Serialize + CsvRow>(
    rows: &[T],
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let io = |e: &dyn std::fmt::Display| CliError::io(format!("cannot write output: {e}"));
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows).map_err(|e| io(&e))?;
            writeln!(out).map_err(|e| io(&e))?;
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut *out);
            w.write_record(T::header()).map_err(|e| io(&e))?;
            for r in rows {
                w.write_record(r.fields()).map_err(|e| io(&e))?;
            }
            w.flush().map_err(|e| io(&e))?;
        }
    }
    Ok(())
}

fn emit_to<T: Serialize + CsvRow>(
    rows: &[T],
    r: &Resolved,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match &r.output {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))?;
            emit(rows, r.format, &mut f)
        }
        None => emit(rows, r.format, out),
    }
}

fn sim_for(r: &Resolved, event: Event) -> Result<SimConfig, CliError> {
    let tilt = match r.tilt {
        None => None,
        Some(TiltSpec::Shift(c)) => Some(c),
        Some(TiltSpec::Auto) => Some(default_tilt(&r.model, event)?),
    };
    Ok(SimConfig { tilt, ..r.sim })
}

fn base_row(p: &Point, event: Event, method: Method) -> OutputRow {
    OutputRow {
        x1: p.x1,
        x2: p.x2,
        a: p.a,
        k: p.k,
        event,
        method,
        value: None,
        cone: None,
        exponent: None,
        diagnostics: Diagnostics::new(),
    }
}

/// Evaluates one (point, event, method) cell.
pub fn compute_row(
    r: &Resolved,
    p: &Point,
    event: Event,
    method: Method,
) -> Result<OutputRow, CliError> {
    let mut row = base_row(p, event, method);
    match method {
        Method::Mc => {
            let sim = sim_for(r, event)?;
            let e = estimate(&r.model, p.x1, p.x2, event, &sim)?;
            row.value = Some(e.p_hat);
            row.cone = cone_for(&r.model, p.x1, p.x2, event)
                .ok()
                .map(|c| c.as_str().to_string());
            let d = &mut row.diagnostics;
            d.insert("std_err".into(), e.std_err);
            d.insert("ci_low".into(), e.ci.0);
            d.insert("ci_high".into(), e.ci.1);
            d.insert("n".into(), e.n as f64);
            if let Some(b) = e.bias_bound {
                d.insert("bias_bound".into(), b);
            }
            if let Some(c) = sim.tilt {
                d.insert("tilt".into(), c);
            }
        }
        _ => {
            let q = RuinQuery {
                event,
                x1: p.x1,
                x2: p.x2,
                method,
            };
            let e = evaluate(&r.model, &q)?;
            row.value = Some(e.value);
            row.cone = e.cone.map(|c| c.as_str().to_string());
            row.diagnostics = e.diagnostics;
        }
    }
    if let (Some(k), Some(v)) = (p.k, row.value) {
        row.exponent = Some(-v.ln() / k);
    }
    Ok(row)
}

fn compute_rows(r: &Resolved) -> Result<Vec<OutputRow>, CliError> {
    let mut rows = Vec::new();
    for p in &r.points {
        for &event in &r.events {
            for &method in &r.methods {
                rows.push(compute_row(r, p, event, method)?);
            }
        }
    }
    Ok(rows)
}

fn compare_rows(r: &Resolved) -> Result<Vec<CompareRow>, CliError> {
    let mut rows = Vec::new();
    for p in &r.points {
        for &event in &r.events {
            let exact = compute_row(r, p, event, Method::Exact);
            if let Err(e) = &exact {
                if e.code != EXIT_REFUSAL {
                    return Err(e.clone());
                }
            }
            let exact_value = exact.as_ref().ok().and_then(|row| row.value);
            for &method in &r.methods {
                let result = if method == Method::Exact {
                    exact.clone()
                } else {
                    compute_row(r, p, event, method)
                };
                let row = match result {
                    Ok(row) => {
                        let ratio = match (row.value, exact_value) {
                            (Some(v), Some(x)) if x != 0.0 => Some(v / x),
                            _ => None,
                        };
                        let agree = match (method, exact_value) {
                            (Method::Mc, Some(x)) => row
                                .value
                                .zip(row.diagnostics.get("std_err"))
                                .map(|(v, se)| (v - x).abs() <= 3.0 * se),
                            _ => None,
                        };
                        CompareRow {
                            row,
                            ratio,
                            agree,
                            note: None,
                        }
                    }
                    Err(e) if e.code == EXIT_REFUSAL => CompareRow {
                        row: base_row(p, event, method),
                        ratio: None,
                        agree: None,
                        note: Some(e.message),
                    },
                    Err(e) => return Err(e),
                };
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn cone_rows(r: &Resolved, grid: Option<usize>, grid_max: f64) -> Result<Vec<ConeRow>, CliError> {
    let part = partition(&r.model)?;
    let adj = adjustment(&r.model)?;
    let mut rows = vec![ConeRow {
        kind: "summary",
        x1: None,
        x2: None,
        s1: Some(part.s1),
        s2: Some(part.s2),
        s3: Some(part.s3),
        gamma1: Some(adj.gamma1),
        gamma2: Some(adj.gamma2),
        gamma3: Some(adj.gamma3),
        sim_cone: None,
        and_cone: None,
    }];
    if let Some(g) = grid {
        if g == 0 || !(grid_max > 0.0) {
            return Err(CliError::config(
                "--grid needs at least one point and --grid-max > 0",
            ));
        }
        let label = |x1: f64, x2: f64, kind| -> Result<String, CliError> {
            Ok(classify(&r.model, x1, x2, kind)?.as_str().to_string())
        };
        for i in 1..=g {
            for j in 1..=g {
                let (x1, x2) = (
                    grid_max * i as f64 / g as f64,
                    grid_max * j as f64 / g as f64,
                );
                rows.push(ConeRow {
                    kind: "grid",
                    x1: Some(x1),
                    x2: Some(x2),
                    s1: None,
                    s2: None,
                    s3: None,
                    gamma1: None,
                    gamma2: None,
                    gamma3: None,
                    sim_cone: Some(label(x1, x2, PartitionKind::Sim)?),
                    and_cone: Some(label(x1, x2, PartitionKind::And)?),
                });
            }
        }
    }
    Ok(rows)
}

fn run_command(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let (kind, a) = match &cli.command {
        Command::Compute(a) => ("compute", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Mc(a) => ("mc", a),
        Command::Compare(a) => ("compare", a),
        Command::Cones {
            args,
            grid,
            grid_max,
        } => {
            let r = resolve(args, "cones")?;
            return emit_to(&cone_rows(&r, *grid, *grid_max)?, &r, out);
        }
    };
    let r = resolve(a, kind)?;
    if kind == "compare" {
        emit_to(&compare_rows(&r)?, &r, out)
    } else {
        emit_to(&compute_rows(&r)?, &r, out)
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_CONFIG
                }
            };
        }
    };
    match run_command(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
