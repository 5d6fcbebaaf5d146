//! Command-line front end. `main` is a thin wrapper around [`main_with`].
//!
//! Every verb takes its options as flags or from a JSON `--config` file
//! whose keys mirror the long flag names; flags win. `SYRISK_SEED`
//! overrides `--seed`. Errors go to stderr as a JSON document and map to
//! exit status 2 (input problems) or 3 (numerical failures).

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dm::{
    adjust_level, comparative_backtest, dm_degenerate, dm_two_sided, hac_cov, score_diff_series, DmResult, Kernel,
    ScoreDiffSeries, Side, TrafficZone,
};
use crate::error::{Error, Result};
use crate::experiments::{
    cxls_report, level_table, run_dm_null_check, run_mc_calibration, run_mc_dm, CalibrationConfig, StudyConfig,
};
use crate::forecast::{rolling_forecast, ForecastConfig, Measure};
use crate::identification::{calibration_test, IdKind, IdVariant};
use crate::measures::RiskLevels;
use crate::models::{fit_model, simulate_dgp, CopulaFamily, GarchFamily, Innovation, ModelParamsDoc, ModelSpec};
use crate::numerics::rng_stream;
use crate::report::traffic_svg;
use crate::scoring::{ForecastTuple, Functional, ScoreSpec};
use crate::series::{read_dated_forecasts, read_observations_file, write_forecasts, write_observations, LossSeries, Rejected};

pub const SEED_ENV: &str = "SYRISK_SEED";

#[derive(Debug, Parser)]
#[command(name = "syrisk", version, about = "Backtests and comparisons of systemic risk forecasts")]
pub struct Cli {
    /// JSON file with option values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
pub enum Command {
    /// Simulate the GARCH / GAS-copula model to an observations CSV.
    Simulate(SimulateArgs),
    /// Fit the marginal and copula models and write a parameter document.
    Fit(FitArgs),
    /// Rolling-window VaR / CoVaR / CoES / MES forecasts.
    Forecast(ForecastArgs),
    /// Comparative backtest of two forecast files.
    Compare(CompareArgs),
    /// Wald calibration test of one forecast file.
    Calibrate(CalibrateArgs),
    /// Traffic-light decision with an optional SVG figure.
    Traffic(CompareArgs),
    /// Monte Carlo studies.
    Study(StudyArgs),
    /// Significance level corrections of the one-and-a-half-sided test.
    Levels(LevelsArgs),
    /// Convex-level-sets demonstration for MES and CoVaR.
    Cxls(CxlsArgs),
}

impl Command {
    pub fn verb(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Forecast(_) => "forecast",
            Command::Compare(_) => "compare",
            Command::Calibrate(_) => "calibrate",
            Command::Traffic(_) => "traffic",
            Command::Study(_) => "study",
            Command::Levels(_) => "levels",
            Command::Cxls(_) => "cxls",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct LevelArgs {
    /// CoVaR / CoES level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// VaR level of the conditioning variable.
    #[arg(long)]
    pub beta: Option<f64>,
}

impl LevelArgs {
    fn levels(&self) -> Result<RiskLevels> {
        RiskLevels::new(self.alpha.unwrap_or(0.95), self.beta.unwrap_or(0.95))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateArgs {
    /// Parameter document (JSON); defaults to the reference model.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Innovation law of x: normal or t<df>.
    #[arg(long)]
    pub innovation_x: Option<String>,
    #[arg(long)]
    pub innovation_y: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelArgs {
    /// garch or gjr.
    #[arg(long)]
    pub margin: Option<String>,
    /// gaussian or t.
    #[arg(long)]
    pub copula: Option<String>,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        let margin = match self.margin.as_deref().unwrap_or("garch") {
            "garch" => GarchFamily::Garch,
            "gjr" | "gjr-garch" | "gjr_garch" => GarchFamily::GjrGarch,
            other => return Err(Error::Usage(format!("--margin: unknown family '{other}'"))),
        };
        let copula = match self.copula.as_deref().unwrap_or("t") {
            "t" | "student-t" | "student_t" => CopulaFamily::StudentT,
            "gaussian" | "normal" => CopulaFamily::Gaussian,
            other => return Err(Error::Usage(format!("--copula: unknown family '{other}'"))),
        };
        Ok(ModelSpec { margin_x: margin, margin_y: margin, copula })
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct FitArgs {
    #[arg(long)]
    pub obs: Option<PathBuf>,
    /// Input columns are prices; convert to log-losses.
    #[arg(long)]
    pub prices: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecastArgs {
    #[arg(long)]
    pub obs: Option<PathBuf>,
    #[arg(long)]
    pub prices: bool,
    #[arg(long)]
    pub window: Option<usize>,
    /// Refit period in days, or "never".
    #[arg(long)]
    pub refit_every: Option<String>,
    /// Comma-separated subset of var,covar,coes,mes.
    #[arg(long)]
    pub measures: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON run report (failures, warnings).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareArgs {
    /// var-covar, var-covar-coes or var-mes.
    #[arg(long)]
    pub scores: Option<String>,
    /// zero-hom (default) or canonical.
    #[arg(long)]
    pub variant: Option<String>,
    /// Benchmark forecasts.
    #[arg(long)]
    pub f1: Option<PathBuf>,
    /// Internal (challenger) forecasts.
    #[arg(long)]
    pub f2: Option<PathBuf>,
    #[arg(long)]
    pub obs: Option<PathBuf>,
    #[arg(long)]
    pub prices: bool,
    /// Significance level ν.
    #[arg(long)]
    pub level: Option<f64>,
    /// HAC truncation lag.
    #[arg(long)]
    pub lag: Option<usize>,
    /// flat or bartlett.
    #[arg(long)]
    pub kernel: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-period score differences as CSV.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub forecasts: Option<PathBuf>,
    #[arg(long)]
    pub obs: Option<PathBuf>,
    #[arg(long)]
    pub prices: bool,
    /// var, var-covar, var-covar-coes or var-mes.
    #[arg(long)]
    pub kind: Option<String>,
    /// strict (default) or nonstrict.
    #[arg(long)]
    pub variant: Option<String>,
    /// CSV of instrument columns, one row per period.
    #[arg(long)]
    pub instruments: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyArgs {
    /// dm, calibration or dm-null.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Comma-separated var-covar,var-covar-coes.
    #[arg(long)]
    pub functionals: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct LevelsArgs {
    #[arg(long)]
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct CxlsArgs {
    #[arg(long)]
    pub rho: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub levels: LevelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a successful command printed and wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: Value,
    pub written: Vec<PathBuf>,
}

/// Parses argv (including the program name) and merges the `--config` file.
pub fn parse_args<I, T>(argv: I) -> Result<Command>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string().trim().to_string()))?;
    let Some(path) = cli.config else {
        return Ok(cli.command);
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::Usage(format!("--config {}: {e}", path.display())))?;
    let config: Value = serde_json::from_str(&text)?;
    let verb = cli.command.verb();
    let section = match config.get(verb) {
        Some(v @ Value::Object(_)) => v.clone(),
        _ => config,
    };
    merge(cli.command, &section)
}

fn normalize(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(m.iter().map(|(k, v)| (k.replace('-', "_"), v.clone())).collect()),
        other => other.clone(),
    }
}

fn merge_args<T: Serialize + DeserializeOwned>(cli: &T, config: &Value) -> Result<T> {
    let mut base = match normalize(config) {
        Value::Object(m) => m,
        _ => return Err(Error::Usage("--config must hold a JSON object".into())),
    };
    let Value::Object(flags) = serde_json::to_value(cli)? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in flags {
        // unset flags serialize as null or false and leave the config value alone
        if !v.is_null() && v != Value::Bool(false) {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| Error::Usage(format!("--config: {e}")))
}

fn merge(cmd: Command, config: &Value) -> Result<Command> {
    Ok(match cmd {
        Command::Simulate(a) => Command::Simulate(merge_args(&a, config)?),
        Command::Fit(a) => Command::Fit(merge_args(&a, config)?),
        Command::Forecast(a) => Command::Forecast(merge_args(&a, config)?),
        Command::Compare(a) => Command::Compare(merge_args(&a, config)?),
        Command::Calibrate(a) => Command::Calibrate(merge_args(&a, config)?),
        Command::Traffic(a) => Command::Traffic(merge_args(&a, config)?),
        Command::Study(a) => Command::Study(merge_args(&a, config)?),
        Command::Levels(a) => Command::Levels(merge_args(&a, config)?),
        Command::Cxls(a) => Command::Cxls(merge_args(&a, config)?),
    })
}

fn require(flags: &[(&str, bool)]) -> Result<()> {
    let missing: Vec<&str> = flags.iter().filter(|f| !f.1).map(|f| f.0).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Usage(format!("missing required flags: {}", missing.join(", "))))
    }
}

fn seed(flag: Option<u64>, fallback: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Error::Usage(format!("{SEED_ENV} must be an unsigned integer, got '{s}'"))),
        Err(_) => Ok(flag.unwrap_or(fallback)),
    }
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, f: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut file = fs::File::create(&tmp)?;
        f(&mut file)?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<()> {
    write_atomic(path, |f| {
        serde_json::to_writer_pretty(&mut *f, v)?;
        writeln!(f)?;
        Ok(())
    })
}

fn rejected_json(rows: &[Rejected]) -> Value {
    Value::Array(rows.iter().map(|r| json!({"line": r.line, "reason": r.reason})).collect())
}

fn load_obs(path: &Path, prices: bool) -> Result<(LossSeries, Vec<Rejected>)> {
    let (s, rej) = read_observations_file(path, prices)?;
    if s.is_empty() {
        return Err(Error::InsufficientData(format!("{} holds no usable observations", path.display())));
    }
    Ok((s, rej))
}

fn parse_innovation(s: Option<&str>, default: Innovation) -> Result<Innovation> {
    match s {
        None => Ok(default),
        Some("normal") => Ok(Innovation::StdNormal),
        Some(t) if t.starts_with('t') => {
            let df: f64 = t[1..].parse().map_err(|_| Error::Usage(format!("bad innovation law '{t}'")))?;
            if !(df > 2.0) {
                return Err(Error::Usage("standardized t innovations need df > 2".into()));
            }
            Ok(Innovation::StandardizedT { df })
        }
        Some(other) => Err(Error::Usage(format!("bad innovation law '{other}'; use normal or t<df>"))),
    }
}

fn run_simulate(a: &SimulateArgs) -> Result<Outcome> {
    require(&[("--out", a.out.is_some())])?;
    let doc: ModelParamsDoc = match &a.params {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => ModelParamsDoc::reference(),
    };
    let seed = seed(a.seed, doc.seed.unwrap_or(1))?;
    let n = a.n.unwrap_or(2000);
    let innov = (
        parse_innovation(a.innovation_x.as_deref(), Innovation::StdNormal)?,
        parse_innovation(a.innovation_y.as_deref(), Innovation::StandardizedT { df: 5.0 })?,
    );
    let sim = simulate_dgp((doc.margin_x(), doc.margin_y()), doc.copula()?, innov, n, &mut rng_stream(seed, 0))?;
    let out = a.out.as_ref().expect("checked");
    write_atomic(out, |f| write_observations(f, &sim.series))?;
    Ok(Outcome { stdout: json!({"n": n, "seed": seed, "warnings": sim.warnings, "out": out}), written: vec![out.clone()] })
}

fn run_fit(a: &FitArgs) -> Result<Outcome> {
    require(&[("--obs", a.obs.is_some())])?;
    let (obs, rejected) = load_obs(a.obs.as_ref().expect("checked"), a.prices)?;
    let fitted = fit_model(&obs, &a.model.spec()?)?;
    let doc = ModelParamsDoc::from_parts(fitted.margin_x.params, Some(fitted.margin_y.params), fitted.copula.params, None);
    let summary = json!({
        "params": doc,
        "loglik": {"x": fitted.margin_x.loglik, "y": fitted.margin_y.loglik, "copula": fitted.copula.loglik},
        "converged": fitted.margin_x.converged && fitted.margin_y.converged && fitted.copula.converged,
        "next": fitted.next_state(),
        "n": obs.len(),
        "rejected": rejected_json(&rejected),
        "warnings": fitted.warnings,
    });
    let mut written = vec![];
    if let Some(out) = &a.out {
        write_json(out, &doc)?;
        written.push(out.clone());
    }
    Ok(Outcome { stdout: summary, written })
}

fn parse_measures(s: Option<&str>) -> Result<Vec<Measure>> {
    s.unwrap_or("var,covar,coes")
        .split(',')
        .map(|m| match m.trim().to_ascii_lowercase().as_str() {
            "var" => Ok(Measure::VaR),
            "covar" => Ok(Measure::CoVaR),
            "coes" => Ok(Measure::CoES),
            "mes" => Ok(Measure::MES),
            other => Err(Error::Usage(format!("--measures: unknown measure '{other}'"))),
        })
        .collect()
}

fn run_forecast(a: &ForecastArgs) -> Result<Outcome> {
    require(&[("--obs", a.obs.is_some()), ("--out", a.out.is_some())])?;
    let (obs, rejected) = load_obs(a.obs.as_ref().expect("checked"), a.prices)?;
    let refit_every = match a.refit_every.as_deref() {
        None => 1,
        Some("never") | Some("inf") => usize::MAX,
        Some(s) => s.parse().map_err(|_| Error::Usage(format!("--refit-every: '{s}' is not a day count")))?,
    };
    let cfg = ForecastConfig {
        levels: a.levels.levels()?,
        window: a.window.unwrap_or(1000),
        refit_every,
        measures: parse_measures(a.measures.as_deref())?,
    };
    let r = rolling_forecast(&obs, &cfg, &a.model.spec()?)?;
    let out = a.out.as_ref().expect("checked");
    write_atomic(out, |f| write_forecasts(f, &r.forecasts, &r.dates))?;
    let mut written = vec![out.clone()];
    let missing = r.forecasts.iter().filter(|f| f.is_none()).count();
    let summary = json!({
        "forecasts": r.forecasts.len(),
        "missing": missing,
        "refits": r.refits,
        "failures": r.failures,
        "warnings": r.warnings,
        "rejected": rejected_json(&rejected),
        "out": out,
    });
    if let Some(p) = &a.report {
        write_json(p, &summary)?;
        written.push(p.clone());
    }
    Ok(Outcome { stdout: summary, written })
}

/// Joins forecasts to observations on the date column when the forecast
/// file has one, and by position otherwise.
fn align(
    rows: &[Vec<(Option<String>, ForecastTuple)>],
    obs: &LossSeries,
) -> Result<(Vec<Vec<ForecastTuple>>, LossSeries, Vec<String>)> {
    let dated = rows.iter().all(|r| !r.is_empty() && r.iter().all(|(d, _)| d.is_some()));
    if !dated {
        let n = obs.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!(
                "undated forecast files need one row per observation ({n}); got {:?}",
                rows.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        let labels = (0..n).map(|t| obs.date_label(t)).collect();
        return Ok((rows.iter().map(|r| r.iter().map(|x| x.1).collect()).collect(), obs.clone(), labels));
    }
    let maps: Vec<HashMap<&str, ForecastTuple>> =
        rows.iter().map(|r| r.iter().map(|(d, f)| (d.as_deref().expect("dated"), *f)).collect()).collect();
    let keep: Vec<usize> =
        (0..obs.len()).filter(|&t| maps.iter().all(|m| m.contains_key(obs.date_label(t).as_str()))).collect();
    if keep.is_empty() {
        return Err(Error::Validation("no dates shared by the forecast files and the observations".into()));
    }
    let labels: Vec<String> = keep.iter().map(|&t| obs.date_label(t)).collect();
    let f = maps.iter().map(|m| labels.iter().map(|l| m[l.as_str()]).collect()).collect();
    let x = keep.iter().map(|&t| obs.x[t]).collect();
    let y = keep.iter().map(|&t| obs.y[t]).collect();
    Ok((f, LossSeries::new(x, y)?, labels))
}

fn read_forecast_file(path: &Path, levels: RiskLevels) -> Result<(Vec<(Option<String>, ForecastTuple)>, Vec<Rejected>)> {
    read_dated_forecasts(fs::File::open(path)?, Some(levels))
}

fn score_spec(scores: Option<&str>, variant: Option<&str>) -> Result<ScoreSpec> {
    let functional = Functional::parse(scores.unwrap_or("var-covar"))?;
    let spec = match variant.unwrap_or("zero-hom") {
        "zero-hom" | "zero_hom" | "zerohom" => ScoreSpec::zero_hom(functional),
        "canonical" => ScoreSpec::canonical(functional),
        other => return Err(Error::Usage(format!("--variant: unknown score variant '{other}'"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn decision(zone: TrafficZone) -> &'static str {
    match zone {
        TrafficZone::Green => "systemic risk forecasts of f2 are superior with comparable VaR forecasts; f2 passes",
        TrafficZone::Yellow => "no significant difference; heightened attention and close monitoring",
        TrafficZone::Orange => "VaR forecasts comparable, systemic risk forecasts of f1 superior; revise f2's systemic risk model",
        TrafficZone::Red => "VaR forecasts of f2 inferior; compare systemic risk with f1's VaR model",
        TrafficZone::Grey => "VaR forecasts of f2 superior; compare systemic risk with f2's VaR model",
    }
}

/// Zone for identical VaR forecasts from the one-sided statistic.
fn degenerate_zone(r: &DmResult, nu: f64) -> TrafficZone {
    let z = crate::numerics::special::norm_quantile(1.0 - nu);
    if r.statistic > z {
        TrafficZone::Green
    } else if r.statistic < -z {
        TrafficZone::Red
    } else {
        TrafficZone::Yellow
    }
}

fn run_compare(a: &CompareArgs, traffic: bool) -> Result<Outcome> {
    require(&[("--f1", a.f1.is_some()), ("--f2", a.f2.is_some()), ("--obs", a.obs.is_some())])?;
    let levels = a.levels.levels()?;
    let nu = a.level.unwrap_or(0.05);
    let m = a.lag.unwrap_or(0);
    let kernel = match a.kernel.as_deref().unwrap_or("flat") {
        "flat" => Kernel::Flat,
        "bartlett" => Kernel::Bartlett,
        other => return Err(Error::Usage(format!("--kernel: unknown kernel '{other}'"))),
    };
    let spec = score_spec(a.scores.as_deref(), a.variant.as_deref())?;
    let (f1, rej1) = read_forecast_file(a.f1.as_ref().expect("checked"), levels)?;
    let (f2, rej2) = read_forecast_file(a.f2.as_ref().expect("checked"), levels)?;
    let (obs, rej_obs) = load_obs(a.obs.as_ref().expect("checked"), a.prices)?;
    let (f, obs, labels) = align(&[f1, f2], &obs)?;
    let diffs = score_diff_series(&f[0], &f[1], &obs, &spec)?;
    let identical_var = diffs.diffs.iter().all(|d| d.0 == 0.0);
    let main = comparative_backtest(&diffs, m, kernel, nu)?;
    let zone = match main.zone {
        Some(z) => z,
        None => degenerate_zone(&main, nu),
    };
    let omega = hac_cov(&diffs, m, kernel)?;
    let two_sided = if identical_var {
        dm_degenerate(&diffs, Side::TwoSided, m, kernel).ok()
    } else {
        dm_two_sided(&diffs, &omega).ok()
    };
    let adj = adjust_level(nu)?;
    let mut report = json!({
        "scores": spec.functional.name(),
        "n": diffs.n(),
        "level": nu,
        "nu_tilde": adj.nu_tilde,
        "identical_var": identical_var,
        "dbar": [main.dbar.0, main.dbar.1],
        "omega": {"s11": omega.s11, "s12": omega.s12, "s22": omega.s22, "m": m, "repaired": omega.repaired},
        "test": main.hypothesis,
        "statistic": main.statistic,
        "p_value": main.p_value,
        "reject": main.rejects(nu),
        "zone": zone,
        "two_sided": two_sided.map(|r| json!({"statistic": r.statistic, "p_value": r.p_value, "reject": r.rejects(nu)})),
        "rejected": {"f1": rejected_json(&rej1), "f2": rejected_json(&rej2), "obs": rejected_json(&rej_obs)},
        "metadata": {"tool": "syrisk", "version": env!("CARGO_PKG_VERSION"), "verb": if traffic { "traffic" } else { "compare" }},
    });
    if traffic {
        report["decision"] = json!(decision(zone));
    }
    let mut written = vec![];
    if let Some(p) = &a.table {
        write_atomic(p, |file| write_diff_table(file, &diffs, &labels))?;
        written.push(p.clone());
    }
    if let Some(p) = &a.svg {
        let svg = traffic_svg(main.dbar, &omega, diffs.n(), nu, Some(zone))?;
        write_atomic(p, |file| Ok(file.write_all(svg.as_bytes())?))?;
        written.push(p.clone());
    }
    if let Some(p) = &a.out {
        write_json(p, &report)?;
        written.push(p.clone());
    }
    Ok(Outcome { stdout: report, written })
}

fn write_diff_table(w: impl Write, diffs: &ScoreDiffSeries, labels: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["date", "d1", "d2"])?;
    for (l, d) in labels.iter().zip(&diffs.diffs) {
        out.write_record([l.clone(), d.0.to_string(), d.1.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn read_instruments(path: &Path, labels: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(fs::File::open(path)?);
    let headers = rdr.headers()?.clone();
    let date_col = headers.iter().position(|h| h.eq_ignore_ascii_case("date"));
    let mut by_date = HashMap::new();
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != date_col)
            .map(|(_, s)| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::Validation(format!("instruments line {}: non-numeric or non-finite value", k + 2)))?;
        match date_col.and_then(|i| rec.get(i)) {
            Some(d) if !d.is_empty() => {
                by_date.insert(d.to_string(), vals);
            }
            _ => rows.push(vals),
        }
    }
    if by_date.is_empty() {
        if rows.len() != labels.len() {
            return Err(Error::Validation(format!("{} instrument rows for {} periods", rows.len(), labels.len())));
        }
        return Ok(rows);
    }
    labels
        .iter()
        .map(|l| by_date.remove(l).ok_or_else(|| Error::Validation(format!("no instruments for date {l}"))))
        .collect()
}

fn run_calibrate(a: &CalibrateArgs) -> Result<Outcome> {
    require(&[("--forecasts", a.forecasts.is_some()), ("--obs", a.obs.is_some())])?;
    let levels = a.levels.levels()?;
    let kind = match a.kind.as_deref().unwrap_or("var-covar") {
        "var" => IdKind::VaR,
        "var-covar" => IdKind::VarCoVar,
        "var-covar-coes" => IdKind::VarCoVarCoEs,
        "var-mes" => IdKind::VarMes,
        other => return Err(Error::Usage(format!("--kind: unknown identification kind '{other}'"))),
    };
    let variant = match a.variant.as_deref().unwrap_or("strict") {
        "strict" => IdVariant::Strict,
        "nonstrict" | "non-strict" => IdVariant::NonStrictBr,
        other => return Err(Error::Usage(format!("--variant: unknown variant '{other}'"))),
    };
    let (rows, rej) = read_forecast_file(a.forecasts.as_ref().expect("checked"), levels)?;
    let (obs, rej_obs) = load_obs(a.obs.as_ref().expect("checked"), a.prices)?;
    let (f, obs, labels) = align(&[rows], &obs)?;
    let instruments = a.instruments.as_ref().map(|p| read_instruments(p, &labels)).transpose()?;
    let r = calibration_test(&f[0], &obs, kind, variant, instruments.as_deref())?;
    let report = json!({
        "kind": kind,
        "variant": variant,
        "result": r,
        "rejected": {"forecasts": rejected_json(&rej), "obs": rejected_json(&rej_obs)},
    });
    let mut written = vec![];
    if let Some(p) = &a.out {
        write_json(p, &report)?;
        written.push(p.clone());
    }
    Ok(Outcome { stdout: report, written })
}

fn run_study(a: &StudyArgs) -> Result<Outcome> {
    let levels = a.levels.levels()?;
    let seed = seed(a.seed, 1)?;
    let nu = a.nu.unwrap_or(0.05);
    let mut written = vec![];
    let kind = a.kind.as_deref().unwrap_or("dm");
    let (summary, csv_writer): (Value, Option<Box<dyn Fn(&mut fs::File) -> Result<()>>>) = match kind {
        "dm" => {
            let mut cfg = StudyConfig { levels, seed, nu, jobs: a.jobs, ..Default::default() };
            cfg.replications = a.replications.unwrap_or(cfg.replications);
            cfg.n = a.n.unwrap_or(cfg.n);
            cfg.window = a.window.unwrap_or(cfg.window);
            if let Some(s) = &a.functionals {
                cfg.functionals = s.split(',').map(|f| Functional::parse(f.trim())).collect::<Result<_>>()?;
            }
            let r = run_mc_dm(&cfg)?;
            let v = serde_json::to_value(&r)?;
            (v, Some(Box::new(move |f: &mut fs::File| r.write_csv(f))))
        }
        "calibration" => {
            let mut cfg = CalibrationConfig { levels, seed, nu, jobs: a.jobs, ..Default::default() };
            cfg.replications = a.replications.unwrap_or(cfg.replications);
            cfg.n = a.n.unwrap_or(cfg.n);
            let r = run_mc_calibration(&cfg)?;
            let v = serde_json::to_value(&r)?;
            (v, Some(Box::new(move |f: &mut fs::File| r.write_csv(f))))
        }
        "dm-null" => {
            let r = run_dm_null_check(a.n.unwrap_or(1000), a.replications.unwrap_or(5000), seed, nu)?;
            (serde_json::to_value(&r)?, None)
        }
        other => return Err(Error::Usage(format!("--kind: unknown study '{other}'; use dm, calibration or dm-null"))),
    };
    if let (Some(p), Some(w)) = (&a.out_csv, csv_writer) {
        write_atomic(p, |f| w(f))?;
        written.push(p.clone());
    }
    if let Some(p) = &a.out_json {
        write_json(p, &summary)?;
        written.push(p.clone());
    }
    Ok(Outcome { stdout: summary, written })
}

fn run_levels(a: &LevelsArgs) -> Result<Outcome> {
    let row = |l: crate::dm::LevelAdjustment| json!({"nu": l.nu, "nu_tilde": l.nu_tilde, "nu_prime": l.nu_prime});
    let stdout = match a.nu {
        Some(nu) => row(adjust_level(nu)?),
        None => Value::Array(level_table()?.into_iter().map(row).collect()),
    };
    Ok(Outcome { stdout, written: vec![] })
}

fn run_cxls(a: &CxlsArgs) -> Result<Outcome> {
    let r = cxls_report(a.rho.unwrap_or(0.8), a.levels.levels()?)?;
    let mut written = vec![];
    if let Some(p) = &a.out {
        write_atomic(p, |f| {
            let mut w = csv::Writer::from_writer(f);
            w.write_record(["measure", "f0", "f1", "mixture", "mixture_joint"])?;
            for row in &r.rows {
                w.write_record([row.measure.clone(), row.f0.to_string(), row.f1.to_string(), row.mixture.to_string(), row.mixture_joint.to_string()])?;
            }
            w.flush()?;
            Ok(())
        })?;
        written.push(p.clone());
    }
    Ok(Outcome { stdout: serde_json::to_value(&r)?, written })
}

pub fn run_command(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Simulate(a) => run_simulate(a),
        Command::Fit(a) => run_fit(a),
        Command::Forecast(a) => run_forecast(a),
        Command::Compare(a) => run_compare(a, false),
        Command::Traffic(a) => run_compare(a, true),
        Command::Calibrate(a) => run_calibrate(a),
        Command::Study(a) => run_study(a),
        Command::Levels(a) => run_levels(a),
        Command::Cxls(a) => run_cxls(a),
    }
}

pub fn error_json(e: &Error) -> Value {
    json!({"error": {"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()}})
}

/// Runs one invocation and returns the process exit status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    // help and version go to stdout with status 0
    if let Err(e) = Cli::try_parse_from(&argv) {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            print!("{e}");
            return 0;
        }
    }
    match parse_args(argv).and_then(|c| run_command(&c)) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.stdout).unwrap_or_default());
            0
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_compare_and_levels() {
        let c = parse_args(["syrisk", "compare", "--scores", "var-covar", "--f1", "a.csv", "--f2", "b.csv", "--obs", "o.csv", "--level", "0.05"]).unwrap();
        match c {
            Command::Compare(a) => {
                assert_eq!(a.f1.unwrap(), PathBuf::from("a.csv"));
                assert_eq!(a.level, Some(0.05));
            }
            _ => panic!("wrong verb"),
        }
        assert!(matches!(parse_args(["syrisk", "levels", "--nu", "0.05"]).unwrap(), Command::Levels(LevelsArgs { nu: Some(_) })));
    }

    #[test]
    fn missing_inputs_are_listed() {
        let c = parse_args(["syrisk", "compare"]).unwrap();
        let e = run_command(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let msg = e.to_string();
        assert!(msg.contains("--f1") && msg.contains("--f2") && msg.contains("--obs"), "{msg}");
    }

    #[test]
    fn unknown_flag_names_the_flag() {
        let e = parse_args(["syrisk", "levels", "--bogus", "1"]).unwrap_err();
        assert!(matches!(e, Error::Usage(_)));
        assert!(e.to_string().contains("--bogus"));
    }

    #[test]
    fn config_fills_unset_flags_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"compare": {"f1": "x.csv", "f2": "y.csv", "level": 0.1, "refit-every": 3}}"#).unwrap();
        let c = parse_args(["syrisk", "compare", "--config", p.to_str().unwrap(), "--f2", "z.csv"]).unwrap();
        let Command::Compare(a) = c else { panic!() };
        assert_eq!(a.f1.unwrap(), PathBuf::from("x.csv"));
        assert_eq!(a.f2.unwrap(), PathBuf::from("z.csv"));
        assert_eq!(a.level, Some(0.1));
    }

    #[test]
    fn levels_output() {
        let out = run_command(&Command::Levels(LevelsArgs { nu: Some(0.05) })).unwrap();
        assert!((out.stdout["nu_tilde"].as_f64().unwrap() - 0.0766).abs() < 5e-5);
        assert!((out.stdout["nu_prime"].as_f64().unwrap() - 0.0117).abs() < 1e-4);
    }
}
