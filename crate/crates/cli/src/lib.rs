//! Command implementations behind the `dqi` binary.
//!
//! JSON outputs carry `schema_version` and the full `config` of the run.
//! CSV outputs start with a `# dqi schema_version=1 config=<json>` line.
//! Files are written to a temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dqi_core::analytics;
use dqi_core::bench;
use dqi_core::dqi_sim::{self, Budgets, MaxLinsatInstance};
use dqi_core::opi::{self, OpiInstance, Profile};
use dqi_core::verify;
use dqi_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Contract(String),
}

impl CliError {
    /// 2 contract violation, 3 budget, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_budget() => 3,
            CliError::Io { .. } => 4,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "dqi", version, about = "DQI simulation, Reed-Solomon decoding benchmarks and analysis")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Largest dense state, in amplitudes.
    #[arg(long, global = true, default_value_t = dqi_sim::DEFAULT_AMPLITUDE_BUDGET as u64)]
    pub budget_amps: u64,
    /// Largest number of enumerated error vectors.
    #[arg(long, global = true, default_value_t = dqi_sim::DEFAULT_ERROR_BUDGET as u64)]
    pub budget_errors: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Run the pipeline on an instance and sample from the final state.
    Simulate(SimulateArgs),
    /// Run the truncation heuristic.
    Baseline(BaselineArgs),
    /// Time the fast and quadratic decoders.
    DecodeBench(DecodeBenchArgs),
    /// Sweep the asymptotic ratio and the finite-m bounds.
    Analyze(AnalyzeArgs),
    /// Run the self-check battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileArg {
    Canonical,
    Custom,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Canonical)]
    pub profile: ProfileArg,
    /// Polynomial length for the custom profile.
    #[arg(long)]
    pub n: Option<usize>,
    /// Set size for the custom profile.
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum WeightsArg {
    /// Binomial when its mean lies in (0, 1), otherwise optimal.
    Auto,
    Binomial,
    Optimal,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Weight cap; defaults to min(floor(d/2) - 1, floor(m (1 - r/p))).
    #[arg(long)]
    pub ell: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = WeightsArg::Auto)]
    pub weights: WeightsArg,
    #[arg(long, default_value_t = 1000)]
    pub shots: usize,
    /// Sample CSV path; defaults to `<out>.samples.csv` when `--out` is set.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BaselineArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecodeBenchArgs {
    /// Comma-separated primes.
    #[arg(long, value_delimiter = ',', default_value = "193,769,3457,12289,65537")]
    pub primes: Vec<u64>,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// The quadratic decoder only runs for `p` up to this value.
    #[arg(long, default_value_t = 12289)]
    pub naive_max_p: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Comma-separated values of ell/m; an empty string gives an empty sweep.
    #[arg(long, value_parser = parse_list, default_value = "0.05,0.1,0.2,0.25,0.3,0.4,0.5")]
    pub lambdas: FloatList,
    #[arg(long, value_parser = parse_list, default_value = "0.1,0.3,0.5,0.7")]
    pub rhos: FloatList,
    #[arg(long, default_value_t = 2000)]
    pub m: usize,
    #[arg(long, default_value_t = 0.01)]
    pub c: f64,
    /// Also write the weight distribution at (`--dump-m`, `--dump-ell`) here.
    #[arg(long)]
    pub weights_out: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub dump_m: usize,
    #[arg(long, default_value_t = 200)]
    pub dump_ell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

fn parse_list(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("{t}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(FloatList)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultArg {
    Decoder,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
    pub level: LevelArg,
    /// Corrupt a component to check that the battery notices.
    #[arg(long, value_enum)]
    pub inject_fault: Option<FaultArg>,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_instance(path: &Path) -> CliResult<OpiInstance> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(OpiInstance::from_json(&text)?)
}

fn envelope(config: &Value, body: Value) -> String {
    let mut obj = json!({ "schema_version": SCHEMA_VERSION, "config": config });
    if let (Some(dst), Value::Object(src)) = (obj.as_object_mut(), body) {
        dst.extend(src);
    }
    serde_json::to_string_pretty(&obj).expect("json serializes") + "\n"
}

/// CSV text with the schema comment line.
pub fn csv_text(config: &Value, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 csv");
    format!("# dqi schema_version={SCHEMA_VERSION} config={}\n{body}", serde_json::to_string(config).expect("json"))
}

fn config_of<T: Serialize>(common: &Common, verb: &str, args: &T) -> Value {
    json!({ "command": verb, "common": common, "args": args })
}

fn budgets(common: &Common) -> Budgets {
    Budgets { amplitudes: common.budget_amps as u128, errors: common.budget_errors as u128 }
}

fn mean_stderr(vals: &[f64]) -> (f64, Option<f64>) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, None);
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let c = &cli.common;
    match &cli.command {
        Command::Gen(a) => cmd_gen(c, a),
        Command::Simulate(a) => cmd_simulate(c, a),
        Command::Baseline(a) => cmd_baseline(c, a),
        Command::DecodeBench(a) => cmd_decode_bench(c, a),
        Command::Analyze(a) => cmd_analyze(c, a),
        Command::Verify(a) => cmd_verify(c, a),
    }
}

/// Writes the instance file; the format is exactly the instance JSON.
pub fn cmd_gen(common: &Common, a: &GenArgs) -> CliResult<()> {
    let profile = match a.profile {
        ProfileArg::Canonical => Profile::Canonical,
        ProfileArg::Custom => Profile::Custom {
            n: a.n.ok_or_else(|| CliError::Contract("--n is required for the custom profile".into()))?,
            r: a.r.ok_or_else(|| CliError::Contract("--r is required for the custom profile".into()))?,
        },
    };
    let inst = opi::random_instance(a.p, profile, common.seed)?;
    emit(common.out.as_deref(), &(inst.to_json() + "\n"))
}

struct ChosenWeights {
    kind: &'static str,
    w: Vec<f64>,
    epsilon: Option<f64>,
    q: Option<f64>,
    regime_warning: Option<String>,
}

fn choose_weights(ml: &MaxLinsatInstance, r: usize, ell: usize, a: &SimulateArgs) -> CliResult<ChosenWeights> {
    let m = ml.m();
    let p = ml.field().modulus();
    let binomial = || -> CliResult<ChosenWeights> {
        let ws = dqi_sim::make_weights(m, ell, a.c)?;
        Ok(ChosenWeights {
            kind: "binomial",
            w: ws.w,
            epsilon: Some(ws.epsilon),
            q: Some(ws.q),
            regime_warning: ws.regime_warning,
        })
    };
    let optimal = || ChosenWeights {
        kind: "optimal",
        w: dqi_sim::optimal_weights(m, ell, r, p),
        epsilon: None,
        q: None,
        regime_warning: None,
    };
    Ok(match a.weights {
        WeightsArg::Binomial => binomial()?,
        WeightsArg::Optimal => optimal(),
        WeightsArg::Auto => {
            let q = analytics::weight_mean(m, ell, a.c);
            if q > 0.0 && q < 1.0 {
                binomial()?
            } else {
                optimal()
            }
        }
    })
}

pub fn cmd_simulate(common: &Common, a: &SimulateArgs) -> CliResult<()> {
    let inst = read_instance(&a.instance)?;
    let ml = opi::reduce_to_maxlinsat(&inst);
    let r = inst
        .common_size()
        .ok_or_else(|| CliError::Contract("simulation needs sets of one common size".into()))?;
    let ell = match a.ell {
        Some(l) => l,
        None => ml.default_ell()?,
    };
    if ell > ml.distance_ell() {
        return Err(CliError::Contract(format!(
            "ell = {ell} exceeds floor(d/2) - 1 = {}",
            ml.distance_ell()
        )));
    }
    let weights = choose_weights(&ml, r, ell, a)?;
    let run = dqi_sim::run_pipeline(&ml, &weights.w, budgets(common))?;
    let config = config_of(common, "simulate", a);
    let (sample_mean, sample_stderr) = if a.shots > 0 {
        let samples = dqi_sim::sample_solutions(&ml, &run.final_state, a.shots, common.seed)?;
        let vals: Vec<f64> = samples.iter().map(|s| s.1 as f64).collect();
        let path = a
            .samples_out
            .clone()
            .or_else(|| common.out.as_ref().map(|o| o.with_extension("samples.csv")));
        if let Some(path) = path {
            let rows: Vec<Vec<String>> = samples
                .iter()
                .enumerate()
                .map(|(i, (x, f))| {
                    let xs: Vec<String> = x.iter().map(u64::to_string).collect();
                    vec![i.to_string(), f.to_string(), xs.join(" ")]
                })
                .collect();
            write_atomic(&path, csv_text(&config, &["shot", "f", "x"], &rows).as_bytes())?;
        }
        let (m, s) = mean_stderr(&vals);
        (Some(m), s)
    } else {
        (None, None)
    };
    let body = json!({
        "p": inst.field().modulus(),
        "n": inst.n(),
        "m": ml.m(),
        "r": r,
        "ell": ell,
        "weight_kind": weights.kind,
        "weights": weights.w,
        "q": weights.q,
        "epsilon": weights.epsilon,
        "regime_warning": weights.regime_warning,
        "error_terms": run.error_terms,
        "formula_expectation": run.formula,
        "statevector_expectation": run.statevector,
        "abs_difference": (run.formula - run.statevector).abs(),
        "shots": a.shots,
        "seed": common.seed,
        "sample_mean": sample_mean,
        "sample_stderr": sample_stderr,
    });
    emit(common.out.as_deref(), &envelope(&config, body))
}

pub fn cmd_baseline(common: &Common, a: &BaselineArgs) -> CliResult<()> {
    if a.trials == 0 {
        return Err(CliError::Contract("--trials must be positive".into()));
    }
    let inst = read_instance(&a.instance)?;
    let mut rows = Vec::with_capacity(a.trials);
    let mut vals = Vec::with_capacity(a.trials);
    for i in 0..a.trials {
        let trial_seed = dqi_core::seed::derive_seed(common.seed, &format!("baseline-trial-{i}"));
        let (_, v) = opi::truncation_heuristic(&inst, trial_seed)?;
        vals.push(v as f64);
        rows.push(vec![i.to_string(), v.to_string()]);
    }
    let (mean, stderr) = mean_stderr(&vals);
    let config = config_of(common, "baseline", a);
    emit(common.out.as_deref(), &csv_text(&config, &["trial", "objective"], &rows))?;
    let m = (inst.field().modulus() - 1) as f64;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "trials": a.trials,
        "mean": mean,
        "stderr": stderr,
        "mean_fraction": mean / m,
        "expected": inst.common_size().map(|r| opi::heuristic_expectation(inst.field().modulus(), inst.n(), r)),
    });
    eprintln!("{summary}");
    Ok(())
}

pub fn cmd_decode_bench(common: &Common, a: &DecodeBenchArgs) -> CliResult<()> {
    let mut rows = Vec::new();
    let mut fast = Vec::new();
    let mut naive = Vec::new();
    let mut failures = 0;
    for &p in &a.primes {
        let row = bench::bench_prime(p, a.trials.max(1), common.seed, p <= a.naive_max_p)?;
        failures += row.failures;
        fast.push((p as f64, row.fast_median_s));
        if let Some(t) = row.naive_median_s {
            naive.push((p as f64, t));
        }
        rows.push(vec![
            row.p.to_string(),
            row.n.to_string(),
            row.t.to_string(),
            row.trials.to_string(),
            row.failures.to_string(),
            format!("{:.6e}", row.fast_median_s),
            row.naive_median_s.map(|t| format!("{t:.6e}")).unwrap_or_default(),
        ]);
    }
    let config = config_of(common, "decode-bench", a);
    emit(
        common.out.as_deref(),
        &csv_text(&config, &["p", "n", "t", "trials", "failures", "fast_median_s", "naive_median_s"], &rows),
    )?;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "fast_exponent": bench::loglog_slope(&fast),
        "naive_exponent": bench::loglog_slope(&naive),
        "failures": failures,
    });
    eprintln!("{summary}");
    if failures > 0 {
        return Err(CliError::Contract(format!("{failures} decoding failures")));
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12}")).unwrap_or_default()
}

/// Rows `(lambda, rho, m, ell, asymptotic, eigen_upper, binom_lower, binom_actual)`, all
/// divided by `m`; finite-m columns are blank outside their regime.
pub fn cmd_analyze(common: &Common, a: &AnalyzeArgs) -> CliResult<()> {
    let mut rows = Vec::new();
    for &lambda in &a.lambdas.0 {
        for &rho in &a.rhos.0 {
            let asym = analytics::asymptotic_ratio(lambda, rho)?;
            let ell = (lambda * a.m as f64).round() as usize;
            let mf = a.m as f64;
            let upper = (lambda + rho <= 1.0).then(|| {
                let d = (1.0 - 2.0 * rho) / (rho * (1.0 - rho)).sqrt();
                rho + (rho * (1.0 - rho)).sqrt() * analytics::eigenvalue_upper_bound(a.m, ell, d) / mf
            });
            let (lower, actual) = match analytics::binomial_lower_bound(a.m, ell, rho, a.c, lambda) {
                Ok(b) => (Some(b.lower / mf), Some(b.actual / mf)),
                Err(Error::RegimeViolation(_)) => (None, None),
                Err(e) => return Err(e.into()),
            };
            rows.push(vec![
                lambda.to_string(),
                rho.to_string(),
                a.m.to_string(),
                ell.to_string(),
                format!("{asym:.12}"),
                fmt_opt(upper),
                fmt_opt(lower),
                fmt_opt(actual),
            ]);
        }
    }
    let config = config_of(common, "analyze", a);
    let header = ["lambda", "rho", "m", "ell", "asymptotic", "eigen_upper", "binom_lower", "binom_actual"];
    emit(common.out.as_deref(), &csv_text(&config, &header, &rows))?;
    if let Some(path) = &a.weights_out {
        let dist = analytics::weight_distribution(a.dump_m, a.dump_ell, a.c)?;
        let rows: Vec<Vec<String>> = dist
            .iter()
            .map(|r| {
                vec![
                    r.k.to_string(),
                    format!("{:.12e}", r.binomial),
                    format!("{:.12e}", r.truncated),
                    format!("{:.12e}", r.uniform),
                ]
            })
            .collect();
        write_atomic(path, csv_text(&config, &["k", "binomial", "truncated", "uniform"], &rows).as_bytes())?;
    }
    Ok(())
}

pub fn cmd_verify(common: &Common, a: &VerifyArgs) -> CliResult<()> {
    let level = match a.level {
        LevelArg::Fast => verify::Level::Fast,
        LevelArg::Full => verify::Level::Full,
    };
    let fault = a.inject_fault.map(|FaultArg::Decoder| verify::Fault::Decoder);
    let report = verify::run(level, fault, common.seed);
    let config = config_of(common, "verify", a);
    let body = serde_json::to_value(&report).expect("report serializes");
    emit(common.out.as_deref(), &envelope(&config, body))?;
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.detail);
    }
    if report.passed {
        Ok(())
    } else {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        Err(CliError::Contract(format!("{failed} checks failed")))
    }
}
