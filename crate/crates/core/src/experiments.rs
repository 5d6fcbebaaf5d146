//! Reproducible study harnesses: the DM Monte Carlo on the GARCH/GAS
//! copula model, the calibration study on a bivariate normal, a DM null
//! check on i.i.d. score differences, the level table and the CxLS report.
//!
//! Every replication draws from `rng_stream(seed, replication)`, so results
//! do not depend on the worker count.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Weibull};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dm::{
    adjust_level, dm_degenerate, dm_one_half_sided, dm_two_sided, hac_cov, score_diff_series, Kernel, LevelAdjustment,
    ScoreDiffSeries, Side,
};
use crate::error::{Error, Result};
use crate::forecast::{fixed_window_forecasts, Measure};
use crate::identification::{calibration_test, IdKind, IdVariant};
use crate::measures::{
    cxls_probe, AnalyticBivariate, Bivariate, CxlsKind, Margin, MixtureRule, RiskLevels, SystemicKind,
};
use crate::models::{simulate_dgp, Innovation, ModelParamsDoc, ModelSpec};
use crate::numerics::rng::std_normal;
use crate::numerics::special::{chi2_cdf, norm_quantile};
use crate::numerics::{rng_stream, CopulaKind, DistKind};
use crate::scoring::{ForecastTuple, Functional, ScoreSpec};
use crate::series::LossSeries;

pub const NOISE_SHAPE: f64 = 10.0;
pub const NOISE_SCALE: f64 = 0.3;
/// A cell is invalid when more than this share of replications failed.
pub const MAX_FAILURE_SHARE: f64 = 0.02;

/// Multiplies every present component by an independent Weibull(k, λ) draw.
pub fn contaminate(forecasts: &[ForecastTuple], shape: f64, scale: f64, rng: &mut impl Rng) -> Result<Vec<ForecastTuple>> {
    let noise = Weibull::new(scale, shape).map_err(|e| Error::domain(format!("weibull noise: {e}")))?;
    let mut draw = |v: f64| -> Result<f64> {
        if !(v > 0.0) {
            return Err(Error::domain(format!("multiplicative noise needs positive forecasts, got {v}")));
        }
        Ok(v * noise.sample(rng))
    };
    forecasts
        .iter()
        .map(|f| {
            Ok(ForecastTuple {
                v: draw(f.v)?,
                c: f.c.map(&mut draw).transpose()?,
                e: f.e.map(&mut draw).transpose()?,
                mu: f.mu.map(&mut draw).transpose()?,
                levels: f.levels,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarMode {
    /// Both forecasts carry the first forecaster's VaR.
    Identical,
    Distinct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    /// Two equally contaminated forecasts.
    NullEqual,
    /// A contaminated systemic forecast against the clean one.
    AltSystemic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullHypothesis {
    Equal,
    Lex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub replications: usize,
    pub n: usize,
    pub window: usize,
    pub levels: RiskLevels,
    pub seed: u64,
    pub nu: f64,
    pub functionals: Vec<Functional>,
    pub var_modes: Vec<VarMode>,
    pub designs: Vec<Design>,
    pub noise_shape: f64,
    pub noise_scale: f64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub keep_records: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            replications: 1000,
            n: 500,
            window: 1000,
            levels: RiskLevels { alpha: 0.95, beta: 0.95 },
            seed: 1,
            nu: 0.05,
            functionals: vec![Functional::VarCoVar, Functional::VarCoVarCoEs],
            var_modes: vec![VarMode::Identical, VarMode::Distinct],
            designs: vec![Design::NullEqual, Design::AltSystemic],
            noise_shape: NOISE_SHAPE,
            noise_scale: NOISE_SCALE,
            jobs: None,
            keep_records: false,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.levels.validate()?;
        if self.replications == 0 || self.n < 2 || self.window < 2 {
            return Err(Error::Validation("replications, n and window must be positive".into()));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::Validation(format!("nu must lie in (0, 1), got {}", self.nu)));
        }
        if let Some(f) = self.functionals.iter().find(|f| !matches!(f, Functional::VarCoVar | Functional::VarCoVarCoEs)) {
            return Err(Error::Validation(format!("the study compares var-covar or var-covar-coes, not {}", f.name())));
        }
        if self.functionals.is_empty() || self.var_modes.is_empty() || self.designs.is_empty() {
            return Err(Error::Validation("empty study design".into()));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for &functional in &self.functionals {
            for &var_mode in &self.var_modes {
                for &design in &self.designs {
                    for hypothesis in [NullHypothesis::Equal, NullHypothesis::Lex] {
                        out.push(CellKey { functional, var_mode, design, hypothesis });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellKey {
    pub functional: Functional,
    pub var_mode: VarMode,
    pub design: Design,
    pub hypothesis: NullHypothesis,
}

impl CellKey {
    pub fn test_name(&self) -> &'static str {
        match (self.var_mode, self.hypothesis) {
            (VarMode::Distinct, NullHypothesis::Equal) => "T_n",
            (VarMode::Distinct, NullHypothesis::Lex) => "T_n_os",
            (VarMode::Identical, NullHypothesis::Equal) => "T_2n_two_sided",
            (VarMode::Identical, NullHypothesis::Lex) => "T_2n_one_sided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rejections: usize,
    pub valid: usize,
    pub rate: f64,
    pub se: f64,
}

impl RateEstimate {
    pub fn from_counts(rejections: usize, valid: usize) -> Self {
        let rate = if valid == 0 { f64::NAN } else { rejections as f64 / valid as f64 };
        RateEstimate { rejections, valid, rate, se: (rate * (1.0 - rate) / valid as f64).sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    #[serde(flatten)]
    pub key: CellKey,
    pub test: String,
    #[serde(flatten)]
    pub estimate: RateEstimate,
    pub invalid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    /// One entry per cell, in cell order; `None` where the test failed.
    pub outcomes: Vec<Option<TestOutcome>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub cells: Vec<CellResult>,
    pub failed_replications: usize,
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<ReplicationRecord>>,
}

impl StudyResult {
    pub fn cell(&self, functional: Functional, var_mode: VarMode, design: Design, hypothesis: NullHypothesis) -> Option<&CellResult> {
        let key = CellKey { functional, var_mode, design, hypothesis };
        self.cells.iter().find(|c| c.key == key)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["functional", "var_mode", "design", "hypothesis", "test", "valid", "rejections", "rate", "se", "invalid"])?;
        for c in &self.cells {
            out.write_record([
                tag(&c.key.functional),
                tag(&c.key.var_mode),
                tag(&c.key.design),
                tag(&c.key.hypothesis),
                c.test.clone(),
                c.estimate.valid.to_string(),
                c.estimate.rejections.to_string(),
                format!("{:.6}", c.estimate.rate),
                format!("{:.6}", c.estimate.se),
                c.invalid.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Serde name of a unit enum variant.
fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| Error::Validation(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// The reference data generating process: GARCH(1,1) margins with normal
/// and standardized t₅ innovations, GAS-driven t₅ copula.
pub fn reference_dgp(n_total: usize, rng: &mut impl Rng) -> Result<LossSeries> {
    let d = ModelParamsDoc::reference();
    let sim = simulate_dgp(
        (d.margin_x(), d.margin_y()),
        d.copula()?,
        (Innovation::StdNormal, Innovation::StandardizedT { df: 5.0 }),
        n_total,
        rng,
    )?;
    Ok(sim.series)
}

fn restrict(f: &ForecastTuple, functional: Functional) -> ForecastTuple {
    match functional {
        Functional::VarCoVar => ForecastTuple { e: None, mu: None, ..*f },
        _ => ForecastTuple { mu: None, ..*f },
    }
}

fn run_test(d: &ScoreDiffSeries, key: &CellKey, nu: f64) -> Result<TestOutcome> {
    let r = match (key.var_mode, key.hypothesis) {
        (VarMode::Distinct, h) => {
            let omega = hac_cov(d, 0, Kernel::Flat)?;
            match h {
                NullHypothesis::Equal => dm_two_sided(d, &omega)?,
                NullHypothesis::Lex => dm_one_half_sided(d, &omega)?,
            }
        }
        (VarMode::Identical, NullHypothesis::Equal) => dm_degenerate(d, Side::TwoSided, 0, Kernel::Flat)?,
        (VarMode::Identical, NullHypothesis::Lex) => dm_degenerate(d, Side::OneSided, 0, Kernel::Flat)?,
    };
    Ok(TestOutcome { statistic: r.statistic, p_value: r.p_value, rejected: r.rejects(nu) })
}

fn dm_replication(cfg: &StudyConfig, cells: &[CellKey], rep: usize) -> Result<Vec<Option<TestOutcome>>> {
    let mut rng = rng_stream(cfg.seed, rep as u64);
    let series = reference_dgp(cfg.window + cfg.n, &mut rng)?;
    let mut measures = vec![Measure::VaR, Measure::CoVaR];
    if cfg.functionals.contains(&Functional::VarCoVarCoEs) {
        measures.push(Measure::CoES);
    }
    let (_, clean) = fixed_window_forecasts(&series, cfg.window, cfg.levels, &measures, &ModelSpec::default())?;
    let obs = series.slice(cfg.window, series.len());
    let mut out = Vec::with_capacity(cells.len());
    // both hypotheses of a column share the forecasts; noise is fresh per column
    for pair in cells.chunks(2) {
        let key = pair[0];
        let spec = ScoreSpec::zero_hom(key.functional);
        let base: Vec<ForecastTuple> = clean.iter().map(|f| restrict(f, key.functional)).collect();
        let c1 = contaminate(&base, cfg.noise_shape, cfg.noise_scale, &mut rng)?;
        let c2 = contaminate(&base, cfg.noise_shape, cfg.noise_scale, &mut rng)?;
        let f2: Vec<ForecastTuple> = (0..base.len())
            .map(|t| {
                let v = match key.var_mode {
                    VarMode::Identical => c1[t].v,
                    VarMode::Distinct => c2[t].v,
                };
                let sr = match key.design {
                    Design::NullEqual => &c2[t],
                    Design::AltSystemic => &base[t],
                };
                ForecastTuple { v, ..*sr }
            })
            .collect();
        let diffs = score_diff_series(&c1, &f2, &obs, &spec);
        for key in pair {
            out.push(diffs.as_ref().ok().and_then(|d| run_test(d, key, cfg.nu).ok()));
        }
    }
    Ok(out)
}

/// DM Monte Carlo: simulate, fit on the first `window` periods, forecast
/// the next `n`, contaminate and test, for every requested cell.
pub fn run_mc_dm(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let cells = config.cells();
    let reps: Vec<Result<Vec<Option<TestOutcome>>>> = with_pool(config.jobs, || {
        (0..config.replications).into_par_iter().map(|r| dm_replication(config, &cells, r)).collect()
    })?;
    let mut failures = Vec::new();
    let mut counts = vec![(0usize, 0usize); cells.len()];
    let mut records = Vec::new();
    for (r, res) in reps.into_iter().enumerate() {
        match res {
            Err(e) => failures.push(format!("replication {r}: {e}")),
            Ok(outcomes) => {
                for (c, o) in counts.iter_mut().zip(&outcomes) {
                    if let Some(o) = o {
                        c.1 += 1;
                        c.0 += o.rejected as usize;
                    }
                }
                if config.keep_records {
                    records.push(ReplicationRecord { replication: r, outcomes });
                }
            }
        }
    }
    let limit = MAX_FAILURE_SHARE * config.replications as f64;
    let cells = cells
        .iter()
        .zip(counts)
        .map(|(key, (rej, valid))| CellResult {
            key: *key,
            test: key.test_name().to_string(),
            estimate: RateEstimate::from_counts(rej, valid),
            invalid: (config.replications - valid) as f64 > limit,
        })
        .collect();
    Ok(StudyResult {
        config: config.clone(),
        cells,
        failed_replications: failures.len(),
        failures,
        records: config.keep_records.then_some(records),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalibrationConfig {
    pub replications: usize,
    pub n: usize,
    pub levels: RiskLevels,
    pub seed: u64,
    pub nu: f64,
    /// Covariance of the i.i.d. normal pair.
    pub cov: [[f64; 2]; 2],
    pub alpha_primes: Vec<f64>,
    pub beta_prime: f64,
    pub jobs: Option<usize>,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            replications: 1000,
            n: 1000,
            levels: RiskLevels { alpha: 0.95, beta: 0.95 },
            seed: 1,
            nu: 0.05,
            cov: [[1.0, 0.5], [0.5, 2.0]],
            alpha_primes: (0..=12).map(|i| 0.75 + 0.02 * i as f64).collect(),
            beta_prime: 0.99,
            jobs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub alpha_prime: f64,
    pub beta_prime: f64,
    pub var: f64,
    pub covar: f64,
    pub strict: RateEstimate,
    pub nonstrict: RateEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub config: CalibrationConfig,
    /// Forecasts at the true levels.
    pub correct: CalibrationRow,
    /// One row per α′ of the grid.
    pub rows: Vec<CalibrationRow>,
}

impl CalibrationResult {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["alpha_prime", "beta_prime", "var", "covar", "strict_rate", "strict_se", "nonstrict_rate", "nonstrict_se"])?;
        for r in std::iter::once(&self.correct).chain(&self.rows) {
            out.write_record([r.alpha_prime, r.beta_prime, r.var, r.covar, r.strict.rate, r.strict.se, r.nonstrict.rate, r.nonstrict.se].map(|v| format!("{v:.6}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

fn normal_pair(cov: [[f64; 2]; 2]) -> Result<(AnalyticBivariate, f64, f64, f64)> {
    let (sx, sy) = (cov[0][0].sqrt(), cov[1][1].sqrt());
    let rho = cov[0][1] / (sx * sy);
    if !(sx > 0.0 && sy > 0.0 && rho.abs() < 1.0) {
        return Err(Error::Validation("covariance must be positive definite".into()));
    }
    let law = AnalyticBivariate {
        margin_x: Margin::location_scale(DistKind::StdNormal, 0.0, sx),
        margin_y: Margin::location_scale(DistKind::StdNormal, 0.0, sy),
        copula: CopulaKind::Gaussian { rho },
    };
    Ok((law, sx, sy, rho))
}

/// VaR_β(X) and CoVaR_{α|β}(Y|X) of a centered normal pair.
pub fn normal_var_covar(cov: [[f64; 2]; 2], levels: RiskLevels) -> Result<(f64, f64)> {
    let (law, sx, _, _) = normal_pair(cov)?;
    let covar = crate::measures::systemic_measure(SystemicKind::CoVaR, &Bivariate::Analytic(law), levels)?;
    Ok((sx * norm_quantile(levels.beta), covar))
}

/// Calibration study: strict and non-strict Wald tests of constant
/// forecasts on i.i.d. normal pairs, for the true levels and a misspecified
/// (α′, β′) grid. All grid points are evaluated on the same draws.
pub fn run_mc_calibration(config: &CalibrationConfig) -> Result<CalibrationResult> {
    config.levels.validate()?;
    if config.replications == 0 || config.n < 4 {
        return Err(Error::Validation("replications must be positive and n at least 4".into()));
    }
    let (_, sx, sy, rho) = normal_pair(config.cov)?;
    let mut points = vec![(config.levels.alpha, config.levels.beta)];
    points.extend(config.alpha_primes.iter().map(|&a| (a, config.beta_prime)));
    let forecasts: Vec<(f64, f64)> = points
        .iter()
        .map(|&(a, b)| normal_var_covar(config.cov, RiskLevels::new(a, b)?))
        .collect::<Result<_>>()?;
    let lv = config.levels;
    let one = |rep: usize| -> Vec<(Option<bool>, Option<bool>)> {
        let mut rng = rng_stream(config.seed, rep as u64);
        let (mut x, mut y) = (Vec::with_capacity(config.n), Vec::with_capacity(config.n));
        for _ in 0..config.n {
            let (z1, z2) = (std_normal(&mut rng), std_normal(&mut rng));
            x.push(sx * z1);
            y.push(sy * (rho * z1 + (1.0 - rho * rho).sqrt() * z2));
        }
        let obs = LossSeries::new(x, y).expect("equal lengths");
        forecasts
            .iter()
            .map(|&(v, c)| {
                let f = vec![ForecastTuple::var_covar(v, c, lv); config.n];
                let test = |variant| {
                    calibration_test(&f, &obs, IdKind::VarCoVar, variant, None).ok().map(|r| r.p_value < config.nu)
                };
                (test(IdVariant::Strict), test(IdVariant::NonStrictBr))
            })
            .collect()
    };
    let reps: Vec<Vec<(Option<bool>, Option<bool>)>> =
        with_pool(config.jobs, || (0..config.replications).into_par_iter().map(one).collect())?;
    let mut rows: Vec<CalibrationRow> = points
        .iter()
        .zip(&forecasts)
        .enumerate()
        .map(|(i, (&(a, b), &(v, c)))| {
            let tally = |pick: fn(&(Option<bool>, Option<bool>)) -> Option<bool>| {
                let outcomes: Vec<bool> = reps.iter().filter_map(|r| pick(&r[i])).collect();
                RateEstimate::from_counts(outcomes.iter().filter(|&&b| b).count(), outcomes.len())
            };
            CalibrationRow { alpha_prime: a, beta_prime: b, var: v, covar: c, strict: tally(|p| p.0), nonstrict: tally(|p| p.1) }
        })
        .collect();
    let correct = rows.remove(0);
    Ok(CalibrationResult { config: config.clone(), correct, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmNullCheck {
    pub n: usize,
    pub replications: usize,
    pub rejection: RateEstimate,
    /// Kolmogorov–Smirnov distance of the T_n sample from χ²₂.
    pub ks_distance: f64,
}

/// T_n under the null on i.i.d. standard normal score differences.
pub fn run_dm_null_check(n: usize, replications: usize, seed: u64, nu: f64) -> Result<DmNullCheck> {
    if n < 2 || replications == 0 {
        return Err(Error::Validation("n ≥ 2 and at least one replication are required".into()));
    }
    let stats: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rng_stream(seed, rep as u64);
            let d = (0..n).map(|_| (std_normal(&mut rng), std_normal(&mut rng))).collect();
            let d = ScoreDiffSeries::new(d)?;
            Ok(dm_two_sided(&d, &hac_cov(&d, 0, Kernel::Flat)?)?.statistic)
        })
        .collect::<Result<_>>()?;
    let crit = -2.0 * nu.ln();
    let rejections = stats.iter().filter(|&&t| t > crit).count();
    let mut sorted = stats.clone();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let ks_distance = sorted
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = chi2_cdf(t, 2.0);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max);
    Ok(DmNullCheck { n, replications, rejection: RateEstimate::from_counts(rejections, replications), ks_distance })
}

/// Level corrections for ν ∈ {1%, 5%, 10%}.
pub fn level_table() -> Result<Vec<LevelAdjustment>> {
    [0.01, 0.05, 0.10].into_iter().map(adjust_level).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CxlsRow {
    pub measure: String,
    pub f0: f64,
    pub f1: f64,
    /// Mixture of the component conditional tail laws.
    pub mixture: f64,
    /// Tail law of the mixed joint distribution.
    pub mixture_joint: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CxlsSummary {
    pub rho: f64,
    pub levels: RiskLevels,
    pub rows: Vec<CxlsRow>,
    pub mes_coefficients: (f64, f64),
}

/// Standard normal pairs with correlation ρ whose X is shifted by ∓1,
/// mixed half and half.
pub fn cxls_report(rho: f64, levels: RiskLevels) -> Result<CxlsSummary> {
    let shifted = |shift: f64| {
        let mut a = AnalyticBivariate::std_normal_pair(rho);
        a.margin_x = Margin::location_scale(DistKind::StdNormal, shift, 1.0);
        Bivariate::Analytic(a)
    };
    let (f0, f1) = (shifted(-1.0), shifted(1.0));
    let mut rows = Vec::new();
    for (name, kind) in [("VaR", CxlsKind::VaR), ("MES", CxlsKind::MES), ("CoVaR", CxlsKind::CoVaR)] {
        let cond = cxls_probe(kind, &f0, &f1, 0.5, levels, MixtureRule::ConditionalLaws)?;
        let joint = cxls_probe(kind, &f0, &f1, 0.5, levels, MixtureRule::JointCdf)?;
        rows.push(CxlsRow { measure: name.into(), f0: cond.value_f0, f1: cond.value_f1, mixture: cond.value_mix, mixture_joint: joint.value_mix });
    }
    let mes = &rows[1];
    let mes_coefficients = (mes.f0 / rho, mes.mixture / rho);
    Ok(CxlsSummary { rho, levels, rows, mes_coefficients })
}
