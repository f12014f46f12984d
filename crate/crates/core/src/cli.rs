//! The `hsf` command line: JSON inputs, JSON or CSV outputs.
//!
//! Input arguments (`--system`, `--cocycle`, `--params`, `--model`, `--orbit`)
//! take a file path or, when the text starts with `{` or `[`, the document
//! itself. Every command that samples requires `--seed`; identical inputs and
//! seeds give byte-identical output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::domination::{check_n_domination, finest_dominated_splitting, invariant_splittings};
use crate::estimators::{
    box_counting_dimension, fit_slope, katok_entropy_estimate, tail_entropy_estimate, topological_entropy_estimate,
    GridWindow, SampleSource, ScaleCount,
};
use crate::exponents::{delta, delta_with_splitting, SplittingLabel};
use crate::horseshoe::{
    assemble_model, conformal_hausdorff_dimension, derive_scales, entropy_gap, verify_markov_crossings_with,
    AffineHorseshoeModel, ConstructionParams, MarkovReport, RectangleFamily, VerificationMode, VerifyOptions,
};
use crate::linalg::{lyapunov_exponents_periodic, top_k_log_growth, CocycleDoc, ExponentSpectrum, PeriodicCocycle};
use crate::systems::{find_periodic_orbit, periodic_orbit_cocycle, HorseshoeSource, ShiftSystem, System, SystemSpec};
use crate::{report, Error, Result};

/// Largest number of words enumerated for a shift.
const MAX_WORDS: f64 = 4_194_304.0;

#[derive(Parser, Debug)]
#[command(name = "hsf", version, about = "Entropy, exponents and horseshoes of periodic cocycles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the output to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lyapunov exponents of a periodic cocycle or of a periodic orbit.
    Lyapunov(CocycleArgs),
    /// Δ⁺, Δ⁻ and Δ of a spectrum, optionally per splitting block.
    Delta(DeltaArgs),
    /// Dominated splittings of each cocycle in a file, one report per line.
    DominationScan(ScanArgs),
    /// Growth of the top-k exterior power: a_n, inf a_n/n and the slope.
    SigmaK(SigmaArgs),
    /// Derived scales, entropy and dimension of the affine horseshoe.
    BuildHorseshoe(BuildArgs),
    /// Markov crossing check of a horseshoe model.
    VerifyHorseshoe(VerifyArgs),
    /// Growth rates of separated sets per scale.
    EntropyEstimate(EstimateArgs),
    /// Two-scale counts s(n, δ, ε) and the tail entropy estimate.
    TailEntropy(TailArgs),
    /// Katok counts: Bowen balls covering half of a sampled measure.
    KatokEntropy(KatokArgs),
    /// Box-counting dimension of a point cloud or horseshoe attractor.
    BoxDim(BoxArgs),
    /// Run the acceptance suite and report one line per criterion.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
pub struct CocycleArgs {
    /// Cocycle document {"dim", "period", "factors"}.
    #[arg(long, conflicts_with = "system")]
    pub cocycle: Option<String>,
    /// System document {"kind", "params"}; the cocycle is taken along a periodic orbit.
    #[arg(long)]
    pub system: Option<String>,
    /// Orbit points as a JSON array; searched for when absent.
    #[arg(long, requires = "system")]
    pub orbit: Option<String>,
    /// Period of the searched orbit.
    #[arg(long, default_value_t = 1)]
    pub period: usize,
    /// Seed of the orbit search.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    /// Exponents as a JSON array, e.g. "[-1,2]".
    #[arg(long, allow_hyphen_values = true)]
    pub spectrum: Option<String>,
    #[command(flatten)]
    pub source: CocycleArgs,
    /// Cut indices of a splitting, e.g. "[1]"; adds one restricted Δ per block.
    #[arg(long)]
    pub cuts: Option<String>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// One cocycle document or an array of them.
    #[arg(long)]
    pub cocycle: String,
    /// Largest N tried; the ratios are computed up to 2·nmax.
    #[arg(long, default_value_t = 16)]
    pub nmax: usize,
}

#[derive(Args, Debug)]
pub struct SigmaArgs {
    #[command(flatten)]
    pub source: CocycleArgs,
    /// Exterior power.
    #[arg(long)]
    pub k: usize,
    /// Largest iterate n of a_n.
    #[arg(long, default_value_t = 30)]
    pub nmax: usize,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub params: String,
    /// Check the Markov crossings.
    #[arg(long)]
    pub verify: bool,
    /// Slice cap for the check; 0 checks every slice (sampled beyond 2^16).
    #[arg(long, default_value_t = 64)]
    pub cap: u64,
    /// Write the assembled model, with its affine pieces, to this file.
    #[arg(long)]
    pub emit_model: Option<PathBuf>,
    /// Seed of the sampled check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// A model written by `build-horseshoe --emit-model`.
    #[arg(long, conflicts_with = "params")]
    pub model: Option<String>,
    /// Parameters; the model is assembled from them.
    #[arg(long)]
    pub params: Option<String>,
    /// Take the branch count L from these parameters instead.
    #[arg(long)]
    pub l_from: Option<String>,
    /// Slice cap; checks every slice when absent (sampled beyond 2^16).
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SamplingArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub seed: u64,
    /// Torus systems: grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Torus systems: corner of the sampled window (default 0.2, 0.6, 0.2, …).
    #[arg(long)]
    pub origin: Option<String>,
    /// Torus systems: side of the sampled window (default: the smallest scale).
    #[arg(long)]
    pub window: Option<f64>,
    /// Random samples for measures and horseshoe attractors.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Scales ε, decreasing, e.g. "[0.25,0.125]".
    #[arg(long)]
    pub eps: String,
    /// Largest n; the slope is fitted over [nmax/2, nmax].
    #[arg(long, default_value_t = 12)]
    pub nmax: usize,
}

#[derive(Args, Debug)]
pub struct TailArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Closeness scales ε.
    #[arg(long)]
    pub eps: String,
    /// Separation scales δ; pairs with δ ≥ ε are skipped.
    #[arg(long)]
    pub delta: String,
    /// Largest n; the slope is fitted over [nmax/2, nmax].
    #[arg(long, default_value_t = 10)]
    pub nmax: usize,
}

#[derive(Args, Debug)]
pub struct KatokArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Bowen ball radius.
    #[arg(long)]
    pub eps: f64,
    /// Largest n; the slope is fitted over [nmax/2, nmax].
    #[arg(long, default_value_t = 10)]
    pub nmax: usize,
    /// Full shifts: symbol weights of the Bernoulli measure (default uniform).
    #[arg(long)]
    pub probs: Option<String>,
}

#[derive(Args, Debug)]
pub struct BoxArgs {
    /// A uniform horseshoe system whose attractor is sampled.
    #[arg(long, conflicts_with = "cloud")]
    pub system: Option<String>,
    /// A point cloud as a JSON array of points.
    #[arg(long)]
    pub cloud: Option<String>,
    /// Box sides, at least four spanning a decade.
    #[arg(long)]
    pub scales: String,
    #[arg(long, default_value_t = 200_000)]
    pub points: usize,
    /// Random digits per coordinate of each attractor point.
    #[arg(long, default_value_t = 36)]
    pub depth: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Only these criteria, e.g. "[1,2,4]" or "1,2,4".
    #[arg(long)]
    pub only: Option<String>,
}

/// Rows of a CSV table.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// What a command produced: JSON documents (one per output line) and,
/// for tabular commands, a CSV table.
pub struct Output {
    pub json: Vec<Value>,
    pub table: Option<Table>,
    /// Exit status when the command ran but its verdict is negative.
    pub status: i32,
}

impl Output {
    fn one(v: Value) -> Self {
        Self { json: vec![v], table: None, status: 0 }
    }

    fn with_table(v: Value, table: Table) -> Self {
        Self { json: vec![v], table: Some(table), status: 0 }
    }
}

/// Parse `args` (including the program name), run the command and write
/// its output to `out` (or `--out`), diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    configure_threads();
    match execute(&cli).and_then(|o| emit(&cli, &o, out).map(|_| o.status)) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Cap the worker count at `HSF_THREADS` when set.
fn configure_threads() {
    if let Some(n) = std::env::var("HSF_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // The global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

pub fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Lyapunov(a) => lyapunov_cmd(a),
        Command::Delta(a) => delta_cmd(a),
        Command::DominationScan(a) => scan_cmd(a),
        Command::SigmaK(a) => sigma_cmd(a),
        Command::BuildHorseshoe(a) => build_cmd(a),
        Command::VerifyHorseshoe(a) => verify_cmd(a),
        Command::EntropyEstimate(a) => estimate_cmd(a),
        Command::TailEntropy(a) => tail_cmd(a),
        Command::KatokEntropy(a) => katok_cmd(a),
        Command::BoxDim(a) => box_cmd(a),
        Command::Report(a) => report_cmd(a),
    }
}

fn emit(cli: &Cli, o: &Output, out: &mut dyn Write) -> Result<()> {
    let bytes = match cli.format {
        Format::Json => {
            let mut s = String::new();
            for v in &o.json {
                s.push_str(&serde_json::to_string(&integral_numbers(v.clone()))?);
                s.push('\n');
            }
            s.into_bytes()
        }
        Format::Csv => {
            let table = match &o.table {
                Some(t) => Table { header: t.header.clone(), rows: t.rows.clone() },
                None => flatten_table(&o.json),
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
            w.write_record(&table.header).map_err(csv_err)?;
            for r in &table.rows {
                w.write_record(r).map_err(csv_err)?;
            }
            w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?
        }
    };
    match &cli.out {
        Some(path) => write_atomically(path, &bytes),
        None => Ok(out.write_all(&bytes)?),
    }
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Floats with integral values below 2^53 print as integers.
fn integral_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if x.fract() == 0.0 && x.abs() < 9_007_199_254_740_992.0 {
                json!(x as i64)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(integral_numbers).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, integral_numbers(v))).collect()),
        other => other,
    }
}

/// `(document, key, value)` rows of the scalar leaves of each document.
fn flatten_table(docs: &[Value]) -> Table {
    fn walk(prefix: String, v: &Value, rows: &mut Vec<(String, String)>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    walk(if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") }, x, rows);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(if prefix.is_empty() { i.to_string() } else { format!("{prefix}.{i}") }, x, rows);
                }
            }
            Value::String(s) => rows.push((prefix, s.clone())),
            other => rows.push((prefix, integral_numbers(other.clone()).to_string())),
        }
    }
    let mut rows = Vec::new();
    for (i, d) in docs.iter().enumerate() {
        let mut leaves = Vec::new();
        walk(String::new(), d, &mut leaves);
        rows.extend(leaves.into_iter().map(|(k, v)| vec![i.to_string(), k, v]));
    }
    Table { header: vec!["document", "key", "value"], rows }
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        String::new()
    }
}

/// The text of an input argument: inline JSON or the contents of a file.
fn read_input(arg: &str) -> Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Error::pre(format!("cannot read {arg}: {e}")))
}

/// Deserialize with the path of the failing field in the error.
fn parse<T: DeserializeOwned>(what: &str, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::pre(format!("{what}: field `{path}`: {}", e.into_inner()))
    })
}

fn load<T: DeserializeOwned>(what: &str, arg: &str) -> Result<T> {
    parse(what, &read_input(arg)?)
}

/// A list of reals: a JSON array, a single number or comma-separated values.
fn reals(what: &str, s: &str) -> Result<Vec<f64>> {
    if let Ok(v) = serde_json::from_str::<Vec<f64>>(s) {
        return Ok(v);
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::pre(format!("{what}: cannot read `{s}` as reals"))))
        .collect()
}

/// Criterion numbers: a JSON array, a single integer or comma-separated values.
fn criterion_ids(s: &str) -> Result<Vec<u32>> {
    if let Ok(v) = serde_json::from_str::<Vec<u32>>(s) {
        return Ok(v);
    }
    s.split(',')
        .map(|p| {
            p.trim().parse::<u32>().map_err(|_| Error::pre(format!("only: cannot read `{s}` as criterion numbers")))
        })
        .collect()
}

fn load_system(arg: &str) -> Result<(SystemSpec, System)> {
    let spec: SystemSpec = load("system", arg)?;
    let sys = System::new(&spec)?;
    Ok((spec, sys))
}

/// The cocycle of the arguments, with a note on where it came from.
fn load_cocycle(a: &CocycleArgs) -> Result<(PeriodicCocycle, Value)> {
    match (&a.cocycle, &a.system) {
        (Some(c), None) => {
            let doc: CocycleDoc = load("cocycle", c)?;
            Ok((PeriodicCocycle::from_doc(&doc)?, json!({"source": "cocycle"})))
        }
        (None, Some(s)) => {
            let (_, sys) = load_system(s)?;
            let orbit: Vec<Vec<f64>> = match &a.orbit {
                Some(o) => load("orbit", o)?,
                None => find_periodic_orbit(&sys, a.period, 64, a.seed)?,
            };
            let c = periodic_orbit_cocycle(&sys, &orbit)?;
            Ok((c, json!({"source": "orbit", "orbit": orbit})))
        }
        _ => Err(Error::pre("give --cocycle or --system")),
    }
}

fn lyapunov_cmd(a: &CocycleArgs) -> Result<Output> {
    let (c, _) = load_cocycle(a)?;
    let spec = lyapunov_exponents_periodic(&c)?;
    let rows = spec.exponents().iter().enumerate().map(|(i, x)| vec![i.to_string(), num(*x)]).collect();
    Ok(Output::with_table(serde_json::to_value(&spec)?, Table { header: vec!["index", "exponent"], rows }))
}

fn delta_cmd(a: &DeltaArgs) -> Result<Output> {
    let spec = match &a.spectrum {
        Some(s) => ExponentSpectrum::new(reals("spectrum", s)?)?,
        None => lyapunov_exponents_periodic(&load_cocycle(&a.source)?.0)?,
    };
    let report = match &a.cuts {
        Some(c) => {
            let cuts: Vec<usize> = parse("cuts", c)?;
            delta_with_splitting(&spec, &SplittingLabel::from_cuts(spec.dim(), &cuts)?)?
        }
        None => delta(&spec),
    };
    Ok(Output::one(serde_json::to_value(&report)?))
}

fn scan_cmd(a: &ScanArgs) -> Result<Output> {
    let text = read_input(&a.cocycle)?;
    let docs: Vec<CocycleDoc> =
        if text.trim_start().starts_with('[') { parse("cocycle", &text)? } else { vec![parse("cocycle", &text)?] };
    let mut json = Vec::new();
    let mut rows = Vec::new();
    for (i, doc) in docs.iter().enumerate() {
        let c = PeriodicCocycle::from_doc(doc).map_err(|e| Error::pre(format!("cocycle {i}: {e}")))?;
        let found = invariant_splittings(&c)?;
        let reports = found
            .candidates
            .iter()
            .map(|s| check_n_domination(&c, s, a.nmax, 2 * a.nmax))
            .collect::<Result<Vec<_>>>()?;
        let finest = finest_dominated_splitting(&c, a.nmax)?;
        for r in &reports {
            rows.push(vec![
                i.to_string(),
                r.index.to_string(),
                serde_json::to_value(r.status)?.as_str().unwrap_or_default().to_string(),
                r.smallest_n.map(|n| n.to_string()).unwrap_or_default(),
            ]);
        }
        json.push(json!({
            "cocycle": i,
            "dim": c.dim(),
            "period": c.period(),
            "exponents": lyapunov_exponents_periodic(&c)?,
            "candidates": reports,
            "unresolvable": found.unresolvable,
            "finest": finest,
        }));
    }
    Ok(Output { json, table: Some(Table { header: vec!["cocycle", "index", "status", "smallestN"], rows }), status: 0 })
}

fn sigma_cmd(a: &SigmaArgs) -> Result<Output> {
    let (c, _) = load_cocycle(&a.source)?;
    if a.nmax < 3 {
        return Err(Error::pre("sigma-k needs nmax ≥ 3"));
    }
    let an: Vec<f64> = (1..=a.nmax).map(|n| top_k_log_growth(&c, a.k, n)).collect::<Result<_>>()?;
    let rates: Vec<f64> = an.iter().enumerate().map(|(i, v)| v / (i + 1) as f64).collect();
    let inf_rate = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let lo = a.nmax / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=a.nmax).map(|n| (n as f64, an[n - 1])).unzip();
    let (slope, residual) = fit_slope(&xs, &ys)?;
    let mut worst = f64::NEG_INFINITY;
    for m in 1..a.nmax {
        for n in 1..=a.nmax - m {
            worst = worst.max(an[m + n - 1] - an[m - 1] - an[n - 1]);
        }
    }
    let spec = lyapunov_exponents_periodic(&c)?;
    let top: f64 = spec.exponents().iter().rev().take(a.k).sum();
    let rows = an.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), num(*v), num(rates[i])]).collect();
    Ok(Output::with_table(
        json!({
            "k": a.k,
            "nmax": a.nmax,
            "an": an,
            "infRate": inf_rate,
            "slope": slope,
            "residual": residual,
            "exponentSum": top,
            "subadditivityExcess": worst,
            "submultiplicative": worst <= 1e-9,
        }),
        Table { header: vec!["n", "an", "rate"], rows },
    ))
}

/// `"all-ones"` with the way the check was run.
pub fn markov_summary(r: &MarkovReport, full: &BigUint) -> String {
    match r.mode {
        VerificationMode::Sampled => "all-ones (sampled)".to_string(),
        VerificationMode::Exhaustive if &r.slices < full => format!("all-ones (capped {})", r.slices),
        VerificationMode::Exhaustive => "all-ones".to_string(),
    }
}

/// Dimension parts `h/|λ^s|` and `h/λ^u` from the model's return exponents.
fn model_dimension(model: &AffineHorseshoeModel, h: f64) -> Result<Value> {
    let ex = model.return_exponents();
    let (ls, lu) = (ex[0], ex[ex.len() - 1]);
    Ok(json!({
        "lambdaS": ls,
        "lambdaU": lu,
        "stable": h / ls.abs(),
        "unstable": h / lu,
        "total": conformal_hausdorff_dimension(h, ls, lu)?,
    }))
}

fn build_cmd(a: &BuildArgs) -> Result<Output> {
    let p: ConstructionParams = load("params", &a.params)?;
    p.validate()?;
    let s = derive_scales(&p)?;
    let model = assemble_model(&p, &s)?;
    let gap = entropy_gap(&p, &s);
    let mut doc = json!({
        "l": s.l.to_string(),
        "logL": s.log_l,
        "returnTime": s.return_time,
        "entropy": gap.entropy,
        "delta": gap.delta,
        "gap": gap.gap,
        "conservative": model.is_conservative(),
        "dimension": model_dimension(&model, s.entropy)?,
        "markov": "unverified",
    });
    if a.verify {
        let rects = RectangleFamily::new(&p, &s, (a.cap > 0).then_some(a.cap))?;
        let opts = VerifyOptions { seed: a.seed, ..VerifyOptions::default() };
        let r = verify_markov_crossings_with(&model, &rects, &opts)?;
        doc["markov"] = json!(markov_summary(&r, &s.l));
        doc["verification"] = json!({
            "slices": r.slices.to_string(),
            "mode": r.mode,
            "rowsChecked": r.rows_checked,
            "margins": r.margins,
        });
    }
    if let Some(path) = &a.emit_model {
        let mut m = serde_json::to_value(&model)?;
        m["affinePieces"] = serde_json::to_value(model.affine_pieces())?;
        write_atomically(path, format!("{}\n", serde_json::to_string(&m)?).as_bytes())?;
    }
    Ok(Output::one(doc))
}

fn verify_cmd(a: &VerifyArgs) -> Result<Output> {
    let model: AffineHorseshoeModel = match (&a.model, &a.params) {
        (Some(m), None) => load("model", m)?,
        (None, Some(p)) => {
            let p: ConstructionParams = load("params", p)?;
            assemble_model(&p, &derive_scales(&p)?)?
        }
        _ => return Err(Error::pre("give --model or --params")),
    };
    let p = &model.params.clone();
    let mut s = derive_scales(p)?;
    if let Some(q) = &a.l_from {
        let q: ConstructionParams = load("l-from", q)?;
        let other = derive_scales(&q)?;
        s.l = other.l;
        s.log_l = other.log_l;
    }
    let model = if s.l != model.l { assemble_model(p, &s)? } else { model };
    let rects = RectangleFamily::new(p, &s, a.cap)?;
    let opts = VerifyOptions { seed: a.seed, ..VerifyOptions::default() };
    let r = verify_markov_crossings_with(&model, &rects, &opts)?;
    let mut doc = serde_json::to_value(&r)?;
    doc["markov"] = json!(markov_summary(&r, &s.l));
    Ok(Output::one(doc))
}

/// Positions `−r..` reached by a ball: least `j` with `2^{−j}` inside it, less one.
fn shift_reach(radius: f64, open: bool) -> i64 {
    let mut j = 0i64;
    while !(if open { 2f64.powi(-j as i32) < radius } else { 2f64.powi(-j as i32) <= radius }) {
        j += 1;
    }
    (j - 1).max(0)
}

/// Every word on the window the finest ball needs, one spare symbol on each
/// side unless the shift is full.
fn shift_words(s: &ShiftSystem, radius: f64, open: bool, nmax: usize) -> Result<Vec<crate::symbolic::ShiftPoint>> {
    let reach = shift_reach(radius, open);
    let pad = if s.matrix().is_all_ones() { 0 } else { 1 };
    let (lo, hi) = (-reach - pad, nmax as i64 - 1 + reach + pad);
    let h = crate::symbolic::sft_entropy(s.matrix())?.entropy;
    let expected = (h * (hi - lo + 1) as f64).exp();
    if expected > MAX_WORDS {
        return Err(Error::pre(format!(
            "about {expected:.3e} words on positions {lo}..={hi}; lower --nmax or raise the scales"
        )));
    }
    s.exhaustive_words(lo, hi)
}

fn torus_grid(sys: &System, args: &SamplingArgs, finest: f64) -> Result<GridWindow> {
    let d = sys.dim();
    let origin = match &args.origin {
        Some(o) => reals("origin", o)?,
        None => (0..d).map(|i| if i % 2 == 0 { 0.2 } else { 0.6 }).collect(),
    };
    let default_res = (MAX_WORDS.powf(1.0 / d as f64).floor() as usize).min(2048);
    GridWindow::new(origin, args.window.unwrap_or(finest), args.resolution.unwrap_or(default_res))
}

fn uniform_horseshoe(spec: &SystemSpec) -> Option<&crate::systems::UniformHorseshoe> {
    match spec {
        SystemSpec::AffineHorseshoe(HorseshoeSource::Uniform(u)) => Some(u),
        _ => None,
    }
}

/// Samples of a point system for counting at the finest `radius`.
enum PointSamples {
    Grid(GridWindow),
    Cloud(Vec<Vec<f64>>),
}

fn point_samples(spec: &SystemSpec, sys: &System, args: &SamplingArgs, finest: f64) -> Result<PointSamples> {
    if sys.is_torus() {
        return Ok(PointSamples::Grid(torus_grid(sys, args, finest)?));
    }
    match uniform_horseshoe(spec) {
        Some(u) => Ok(PointSamples::Cloud(u.attractor_cloud(args.samples, 40, args.seed)?)),
        None => Err(Error::pre("sampling is defined for torus systems, shifts and uniform horseshoes")),
    }
}

fn count_row(c: &ScaleCount, slope: f64) -> Vec<String> {
    vec![c.n.to_string(), num(c.eps), c.delta.map(num).unwrap_or_default(), c.count.to_string(), num(slope)]
}

const COUNT_HEADER: [&str; 5] = ["n", "eps", "delta", "count", "slope"];

fn with_samples<R>(
    spec: &SystemSpec,
    sys: &System,
    args: &SamplingArgs,
    finest: f64,
    open: bool,
    nmax: usize,
    shift: impl FnOnce(&ShiftSystem, &[crate::symbolic::ShiftPoint]) -> Result<R>,
    points: impl FnOnce(&System, &dyn SampleSourceDyn) -> Result<R>,
) -> Result<R> {
    if let Some(s) = spec.as_shift() {
        let words = shift_words(&s, finest, open, nmax)?;
        return shift(&s, &words);
    }
    match point_samples(spec, sys, args, finest)? {
        PointSamples::Grid(g) => points(sys, &g),
        PointSamples::Cloud(c) => points(sys, &c),
    }
}

/// Object-safe view of a point sample source.
pub trait SampleSourceDyn: Sync {
    fn len(&self) -> usize;
    fn get(&self, i: usize) -> Vec<f64>;
}

impl<T: SampleSource<Vec<f64>> + Sync + ?Sized> SampleSourceDyn for T {
    fn len(&self) -> usize {
        SampleSource::len(self)
    }
    fn get(&self, i: usize) -> Vec<f64> {
        SampleSource::get(self, i)
    }
}

impl SampleSource<Vec<f64>> for &dyn SampleSourceDyn {
    fn len(&self) -> usize {
        SampleSourceDyn::len(*self)
    }
    fn get(&self, i: usize) -> Vec<f64> {
        SampleSourceDyn::get(*self, i)
    }
}

fn estimate_cmd(a: &EstimateArgs) -> Result<Output> {
    let (spec, sys) = load_system(&a.sampling.system)?;
    let scales = reals("eps", &a.eps)?;
    let finest = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let seed = a.sampling.seed;
    let est = with_samples(
        &spec,
        &sys,
        &a.sampling,
        finest,
        false,
        a.nmax,
        |s, w| topological_entropy_estimate(s, w, &scales, a.nmax, seed),
        |s, p| topological_entropy_estimate(s, &p, &scales, a.nmax, seed),
    )?;
    let rows = est.scales.iter().flat_map(|sc| sc.counts.iter().map(|c| count_row(c, sc.slope))).collect();
    let mut doc = serde_json::to_value(&est)?;
    doc["entropy"] = json!(est.finest());
    Ok(Output::with_table(doc, Table { header: COUNT_HEADER.to_vec(), rows }))
}

fn tail_cmd(a: &TailArgs) -> Result<Output> {
    let (spec, sys) = load_system(&a.sampling.system)?;
    let eps = reals("eps", &a.eps)?;
    let deltas = reals("delta", &a.delta)?;
    let finest = eps.iter().chain(&deltas).copied().fold(f64::INFINITY, f64::min);
    let seed = a.sampling.seed;
    let t = with_samples(
        &spec,
        &sys,
        &a.sampling,
        finest,
        false,
        a.nmax,
        |s, w| tail_entropy_estimate(s, w, &eps, &deltas, a.nmax, seed),
        |s, p| tail_entropy_estimate(s, &p, &eps, &deltas, a.nmax, seed),
    )?;
    let rows = t.cells.iter().flat_map(|cell| cell.counts.iter().map(|c| count_row(c, cell.slope))).collect();
    Ok(Output::with_table(serde_json::to_value(&t)?, Table { header: COUNT_HEADER.to_vec(), rows }))
}

fn katok_cmd(a: &KatokArgs) -> Result<Output> {
    let (spec, sys) = load_system(&a.sampling.system)?;
    let args = &a.sampling;
    let k = if let Some(s) = spec.as_shift() {
        let size = s.matrix().size();
        let probs = match &a.probs {
            Some(p) => reals("probs", p)?,
            None => vec![1.0 / size as f64; size],
        };
        let reach = shift_reach(a.eps, true);
        let words = s.bernoulli_words(&probs, -reach, a.nmax as i64 - 1 + reach, args.samples, args.seed)?;
        katok_entropy_estimate(&s, &words, a.eps, a.nmax)?
    } else if sys.is_torus() {
        if !sys.is_conservative() {
            return Err(Error::pre(
                "Katok samples on the torus come from Lebesgue measure, which needs a conservative map",
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let pts: Vec<Vec<f64>> =
            (0..args.samples).map(|_| (0..sys.dim()).map(|_| rng.random::<f64>()).collect()).collect();
        katok_entropy_estimate(&sys, &pts, a.eps, a.nmax)?
    } else {
        match point_samples(&spec, &sys, args, a.eps)? {
            PointSamples::Cloud(c) => katok_entropy_estimate(&sys, &c, a.eps, a.nmax)?,
            PointSamples::Grid(g) => katok_entropy_estimate(&sys, &g, a.eps, a.nmax)?,
        }
    };
    let rows = k
        .counts
        .iter()
        .map(|(n, c)| vec![n.to_string(), num(k.eps), String::new(), c.to_string(), num(k.slope)])
        .collect();
    Ok(Output::with_table(serde_json::to_value(&k)?, Table { header: COUNT_HEADER.to_vec(), rows }))
}

fn box_cmd(a: &BoxArgs) -> Result<Output> {
    let scales = reals("scales", &a.scales)?;
    let cloud: Vec<Vec<f64>> = match (&a.system, &a.cloud) {
        (Some(s), None) => {
            let seed = a.seed.ok_or_else(|| Error::pre("--seed is required to sample an attractor"))?;
            let (spec, _) = load_system(s)?;
            let u = uniform_horseshoe(&spec).ok_or_else(|| Error::pre("box-dim samples uniform horseshoes only"))?;
            u.attractor_cloud(a.points, a.depth, seed)?
        }
        (None, Some(c)) => load("cloud", c)?,
        _ => return Err(Error::pre("give --system or --cloud")),
    };
    let d = box_counting_dimension(&cloud, &scales)?;
    let rows = d.counts.iter().map(|(r, n)| vec![num(*r), n.to_string(), num(d.dimension)]).collect();
    Ok(Output::with_table(serde_json::to_value(&d)?, Table { header: vec!["r", "count", "dimension"], rows }))
}

fn report_cmd(a: &ReportArgs) -> Result<Output> {
    let only: Option<Vec<u32>> = a.only.as_deref().map(criterion_ids).transpose()?;
    let outcomes = report::run_criteria(only.as_deref())?;
    let rows = outcomes
        .iter()
        .flat_map(|c| {
            c.checks.iter().map(move |k| {
                vec![c.id.to_string(), c.title.to_string(), k.name.clone(), k.pass.to_string(), k.detail.clone()]
            })
        })
        .collect();
    let status = if outcomes.iter().all(|c| c.pass()) { 0 } else { 3 };
    let json = outcomes.iter().map(serde_json::to_value).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Output {
        json,
        table: Some(Table { header: vec!["criterion", "title", "check", "pass", "detail"], rows }),
        status,
    })
}

/// Convenience for tests and the report: run a command line and capture stdout.
pub fn run_captured(args: &[&str]) -> (i32, Vec<u8>, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<&str> = std::iter::once("hsf").chain(args.iter().copied()).collect();
    let code = run(argv, &mut out, &mut err);
    (code, out, String::from_utf8_lossy(&err).into_owned())
}
