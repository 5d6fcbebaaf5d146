//! One-step-ahead VaR, CoVaR, CoES and MES forecasts from a fitted
//! GARCH + GAS-copula model, and the rolling-window driver.
//!
//! The standardized residual laws are the window's empirical cdfs, so the
//! conditional law of ε_y given the X tail is discrete on the residuals.
//! Its atom weights come from the copula survival function evaluated at
//! the ecdf breakpoints, which gives CoVaR, CoES and MES exactly up to the
//! quadrature of that survival function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ecdf::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::measures::RiskLevels;
use crate::models::{fit_model, FittedModel, ModelSpec, OneStepState};
use crate::numerics::quadrature::GaussLegendre;
use crate::numerics::special::{norm_cdf, t_cdf};
use crate::numerics::{find_root, CopulaKind};
use crate::scoring::ForecastTuple;
use crate::series::LossSeries;

const GRID_PANELS: [f64; 4] = [0.0, 0.25, 0.5, 0.75];
const GRID_NODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    VaR,
    CoVaR,
    CoES,
    MES,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastConfig {
    pub levels: RiskLevels,
    pub window: usize,
    /// Refit period in days; `usize::MAX` keeps the first fit throughout.
    pub refit_every: usize,
    pub measures: Vec<Measure>,
}

impl ForecastConfig {
    pub fn new(levels: RiskLevels, window: usize) -> Self {
        ForecastConfig { levels, window, refit_every: 1, measures: vec![Measure::VaR, Measure::CoVaR, Measure::CoES] }
    }

    fn wants(&self, m: Measure) -> bool {
        self.measures.contains(&m)
    }
}

/// σ̂·q̂_β(ε̂) with the lower empirical quantile.
pub fn forecast_var(sigma: f64, residuals: &EmpiricalCdf, beta: f64) -> f64 {
    sigma * residuals.quantile(beta)
}

/// P(X₁ > q, X₂ > x₂) in copula score space on a fixed Gauss–Legendre grid
/// over the X₁ tail, with weights renormalized to the exact tail mass.
#[derive(Debug, Clone)]
pub struct TailGrid {
    copula: CopulaKind,
    x1: Vec<f64>,
    w: Vec<f64>,
    scale: Vec<f64>,
}

impl TailGrid {
    pub fn new(copula: CopulaKind, beta: f64) -> Self {
        let q = copula.to_score(beta);
        let gl = GaussLegendre::cached(GRID_NODES);
        let (mut x1, mut w) = (Vec::new(), Vec::new());
        for (i, &lo) in GRID_PANELS.iter().enumerate() {
            let hi = GRID_PANELS.get(i + 1).copied().unwrap_or(1.0);
            let half = 0.5 * (hi - lo);
            for (z, gw) in gl.nodes.iter().zip(&gl.weights) {
                let t = lo + half * (z + 1.0);
                let x = q + t / (1.0 - t);
                x1.push(x);
                w.push(half * gw * copula.score_pdf(x) / ((1.0 - t) * (1.0 - t)));
            }
        }
        let mass: f64 = w.iter().sum();
        let target = 1.0 - beta;
        w.iter_mut().for_each(|v| *v *= target / mass);
        let scale = x1
            .iter()
            .map(|&x| match copula {
                CopulaKind::Gaussian { rho } => (1.0 - rho * rho).sqrt(),
                CopulaKind::StudentT { rho, df } => ((df + x * x) * (1.0 - rho * rho) / (df + 1.0)).sqrt(),
            })
            .collect();
        TailGrid { copula, x1, w, scale }
    }

    pub fn survival(&self, x2: f64) -> f64 {
        if x2 == f64::NEG_INFINITY {
            return self.w.iter().sum();
        }
        if x2 == f64::INFINITY {
            return 0.0;
        }
        let mut s = 0.0;
        match self.copula {
            CopulaKind::Gaussian { rho } => {
                for j in 0..self.x1.len() {
                    s += self.w[j] * norm_cdf((rho * self.x1[j] - x2) / self.scale[j]);
                }
            }
            CopulaKind::StudentT { rho, df } => {
                for j in 0..self.x1.len() {
                    s += self.w[j] * t_cdf((rho * self.x1[j] - x2) / self.scale[j], df + 1.0);
                }
            }
        }
        s
    }
}

/// Solves 1 − β − u₂ + C(β, u₂) = (1−α)(1−β), i.e. P(U₁ > β, U₂ > u₂) =
/// (1−α)(1−β), in score space with the exact copula survival function.
pub fn solve_covar_level(copula: CopulaKind, levels: RiskLevels) -> Result<f64> {
    copula.validate()?;
    levels.validate()?;
    let (a, b) = (levels.alpha, levels.beta);
    if b == 0.0 {
        return Ok(a);
    }
    let x1 = copula.to_score(b);
    let target = (1.0 - a) * (1.0 - b);
    let lo = copula.to_score(1e-12);
    let hi = copula.to_score(1.0 - 1e-12);
    let g = |x2: f64| copula.survival_score(x1, x2).unwrap_or(f64::NAN) - target;
    let x2 = find_root(g, lo, hi, 1e-15)?;
    Ok(copula.score_cdf(x2))
}

/// Per-fit quantities shared by all forecast dates of that fit.
pub struct ForecastContext<'a> {
    fitted: &'a FittedModel,
    levels: RiskLevels,
    qx: f64,
    y: &'a [f64],
    /// Copula score of k/n for k = 0..=n.
    breaks: Vec<f64>,
}

impl<'a> ForecastContext<'a> {
    pub fn new(fitted: &'a FittedModel, levels: RiskLevels) -> Result<Self> {
        levels.validate()?;
        let ey = fitted.margin_y.ecdf();
        let n = ey.len();
        let probe = fitted.copula.params.kind(0.0);
        let breaks = (0..=n)
            .map(|k| match k {
                0 => f64::NEG_INFINITY,
                k if k == n => f64::INFINITY,
                k => probe.to_score(k as f64 / n as f64),
            })
            .collect();
        Ok(ForecastContext {
            fitted,
            levels,
            qx: fitted.margin_x.ecdf().quantile(levels.beta),
            y: ey.sorted(),
            breaks,
        })
    }

    /// Forecast tuple for one period; unrequested measures stay `None`.
    pub fn forecast(&self, state: &OneStepState, measures: &[Measure]) -> Result<ForecastTuple> {
        let RiskLevels { alpha, beta } = self.levels;
        let v = state.sigma_x * self.qx;
        let mut out = ForecastTuple::var(v, self.levels);
        let want = |m| measures.contains(&m);
        if !(want(Measure::CoVaR) || want(Measure::CoES) || want(Measure::MES)) {
            return Ok(out);
        }
        let grid = TailGrid::new(self.fitted.copula.params.kind(state.rho), beta);
        let n = self.y.len();
        let tail = 1.0 - beta;
        // S(k) = P(U₁ > β, U₂ > k/n), decreasing in k
        let surv = |k: usize| grid.survival(self.breaks[k]);
        if want(Measure::CoVaR) || want(Measure::CoES) {
            let target = (1.0 - alpha) * tail;
            // smallest k with S(k) ≤ target
            let (mut lo, mut hi) = (0usize, n);
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if surv(mid) <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let k = if surv(lo) <= target { lo.max(1) } else { hi };
            out.c = Some(state.sigma_y * self.y[k - 1]);
            if want(Measure::CoES) {
                // ES_α of the discrete tail law
                let mut acc = 0.0;
                let mut s_hi = 0.0;
                for j in (k..n).rev() {
                    let s_lo = surv(j);
                    acc += self.y[j] * (s_lo - s_hi);
                    s_hi = s_lo;
                }
                let s_k = surv(k);
                acc += self.y[k - 1] * (target - s_k);
                out.e = Some(state.sigma_y * acc / target);
            }
        }
        if want(Measure::MES) {
            let mut acc = 0.0;
            let mut s_prev = tail;
            for j in 1..=n {
                let s = surv(j);
                acc += self.y[j - 1] * (s_prev - s);
                s_prev = s;
            }
            out.mu = Some(state.sigma_y * acc / tail);
        }
        Ok(out)
    }
}

/// One-step-ahead forecast for the period after the estimation window.
pub fn forecast_systemic(fitted: &FittedModel, levels: RiskLevels, measures: &[Measure]) -> Result<ForecastTuple> {
    ForecastContext::new(fitted, levels)?.forecast(&fitted.next_state(), measures)
}

/// Fits once on `series[..window]` and forecasts every later period with
/// the parameters held fixed.
pub fn fixed_window_forecasts(
    series: &LossSeries,
    window: usize,
    levels: RiskLevels,
    measures: &[Measure],
    spec: &ModelSpec,
) -> Result<(FittedModel, Vec<ForecastTuple>)> {
    if series.len() <= window {
        return Err(Error::InsufficientData(format!("series of {} periods with window {window}", series.len())));
    }
    let fitted = fit_model(&series.slice(0, window), spec)?;
    let states = fitted.forward(&series.slice(window, series.len()));
    let ctx = ForecastContext::new(&fitted, levels)?;
    let out = states.iter().map(|s| ctx.forecast(s, measures)).collect::<Result<Vec<_>>>()?;
    Ok((fitted, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingForecasts {
    /// Aligned with periods window..len; `None` where the fit failed.
    pub forecasts: Vec<Option<ForecastTuple>>,
    pub dates: Vec<String>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
    pub refits: usize,
}

/// Rolling scheme: refit on the trailing window every `refit_every` days
/// and filter forward with fixed parameters in between.
pub fn rolling_forecast(series: &LossSeries, config: &ForecastConfig, spec: &ModelSpec) -> Result<RollingForecasts> {
    config.levels.validate()?;
    let (w, len) = (config.window, series.len());
    if w == 0 || len <= w {
        return Err(Error::InsufficientData(format!("series of {len} periods with window {w}")));
    }
    if config.refit_every == 0 {
        return Err(Error::Validation("refit_every must be at least 1".into()));
    }
    let mut measures = config.measures.clone();
    if !config.wants(Measure::VaR) {
        measures.push(Measure::VaR);
    }
    let starts: Vec<usize> = (w..len).step_by(config.refit_every.min(len)).collect();
    let blocks: Vec<(usize, usize)> =
        starts.iter().map(|&s| (s, s.saturating_add(config.refit_every).min(len))).collect();
    type Block = (Vec<Option<ForecastTuple>>, Vec<String>, Vec<String>);
    let results: Vec<Block> = blocks
        .par_iter()
        .map(|&(s, e)| {
            let run = || -> Result<(Vec<ForecastTuple>, Vec<String>)> {
                let fitted = fit_model(&series.slice(s - w, s), spec)?;
                let states = fitted.forward(&series.slice(s, e));
                let ctx = ForecastContext::new(&fitted, config.levels)?;
                let f = states.iter().map(|st| ctx.forecast(st, &measures)).collect::<Result<Vec<_>>>()?;
                Ok((f, fitted.warnings.clone()))
            };
            match run() {
                Ok((f, warn)) => (f.into_iter().map(Some).collect(), vec![], warn),
                Err(err) => (vec![None; e - s], vec![format!("window ending {}: {err}", series.date_label(s - 1))], vec![]),
            }
        })
        .collect();
    let mut out = RollingForecasts {
        forecasts: Vec::with_capacity(len - w),
        dates: (w..len).map(|t| series.date_label(t)).collect(),
        failures: vec![],
        warnings: vec![],
        refits: blocks.len(),
    };
    for (f, fail, warn) in results {
        out.forecasts.extend(f);
        out.failures.extend(fail);
        out.warnings.extend(warn);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{systemic_measure, AnalyticBivariate, Bivariate, DiscreteLaw, SystemicKind};
    use crate::models::{inv_link, link, CopulaFit, GarchParams, GasCopulaParams, GasPath, MarginFit};
    use crate::numerics::rng::std_normal;
    use crate::numerics::rng_stream;
    use approx::assert_abs_diff_eq;

    const LV: RiskLevels = RiskLevels { alpha: 0.95, beta: 0.95 };

    #[test]
    fn covar_level_examples() {
        let u = solve_covar_level(CopulaKind::Gaussian { rho: 0.0 }, LV).unwrap();
        assert_abs_diff_eq!(u, 0.95, epsilon = 1e-9);
        let u = solve_covar_level(CopulaKind::Gaussian { rho: 0.8 }, LV).unwrap();
        assert_abs_diff_eq!(u, norm_cdf(2.7728), epsilon = 5e-5);
        let u = solve_covar_level(CopulaKind::Gaussian { rho: 0.9999 }, LV).unwrap();
        assert_abs_diff_eq!(u, 1.0 - 0.05 * 0.05, epsilon = 5e-4);
        // increasing in α
        let a = solve_covar_level(CopulaKind::StudentT { rho: 0.5, df: 4.0 }, RiskLevels { alpha: 0.9, beta: 0.95 }).unwrap();
        let b = solve_covar_level(CopulaKind::StudentT { rho: 0.5, df: 4.0 }, LV).unwrap();
        assert!(a < b);
    }

    #[test]
    fn grid_matches_adaptive_survival() {
        for kind in [
            CopulaKind::Gaussian { rho: 0.0 },
            CopulaKind::Gaussian { rho: 0.8 },
            CopulaKind::Gaussian { rho: -0.6 },
            CopulaKind::StudentT { rho: 0.05, df: 5.0 },
            CopulaKind::StudentT { rho: 0.7, df: 3.0 },
        ] {
            let grid = TailGrid::new(kind, 0.95);
            let q = kind.to_score(0.95);
            for &u2 in &[0.5, 0.9, 0.99, 0.999] {
                let x2 = kind.to_score(u2);
                let exact = kind.survival_score(q, x2).unwrap();
                assert_abs_diff_eq!(grid.survival(x2), exact, epsilon = 1e-7);
            }
        }
    }

    /// A fitted model with unit volatility, constant ρ and given residuals.
    fn synthetic(ex: Vec<f64>, ey: Vec<f64>, copula: GasCopulaParams) -> FittedModel {
        let margin = |e: Vec<f64>| MarginFit {
            params: GarchParams::garch(1.0, 0.0, 0.0),
            sigma: vec![1.0; e.len()],
            next_var: 1.0,
            ecdf: Some(EmpiricalCdf::new(&e).unwrap()),
            residuals: e,
            loglik: 0.0,
            converged: true,
        };
        let rho = link(copula.omega);
        FittedModel {
            margin_x: margin(ex),
            margin_y: margin(ey),
            copula: CopulaFit {
                params: copula,
                path: GasPath { f: vec![copula.omega], rho: vec![rho], clamped: false },
                loglik: 0.0,
                converged: true,
            },
            warnings: vec![],
        }
    }

    fn normal_sample(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng_stream(seed, 0);
        (0..n).map(|_| std_normal(&mut r)).collect()
    }

    #[test]
    fn independence_gives_marginal_quantile() {
        let ex = normal_sample(2000, 1);
        let ey = normal_sample(2000, 2);
        let m = synthetic(ex, ey.clone(), GasCopulaParams { omega: 0.0, alpha: 0.0, beta: 0.0, df: None });
        let f = forecast_systemic(&m, LV, &[Measure::VaR, Measure::CoVaR, Measure::CoES, Measure::MES]).unwrap();
        let e = EmpiricalCdf::new(&ey).unwrap();
        assert_eq!(f.c.unwrap(), e.quantile(0.95));
        assert_abs_diff_eq!(f.mu.unwrap(), e.mean(), epsilon = 1e-6);
        assert!(f.e.unwrap() >= f.c.unwrap());
    }

    #[test]
    fn gaussian_pair_reproduces_closed_values() {
        let n = 100_000;
        let ex = normal_sample(n, 3);
        let ey = normal_sample(n, 4);
        // ρ = Δ(f) = 0.8
        let f = inv_link(0.8);
        let m = synthetic(ex, ey, GasCopulaParams { omega: f, alpha: 0.0, beta: 0.0, df: None });
        let r = forecast_systemic(&m, LV, &[Measure::CoVaR, Measure::CoES, Measure::MES]).unwrap();
        assert_abs_diff_eq!(r.v, 1.6449, epsilon = 0.02);
        assert_abs_diff_eq!(r.c.unwrap(), 2.7728, epsilon = 0.02);
        assert_abs_diff_eq!(r.mu.unwrap(), 1.6502, epsilon = 0.02);
        let exact = Bivariate::Analytic(AnalyticBivariate::std_normal_pair(0.8));
        let coes = systemic_measure(SystemicKind::CoES, &exact, LV).unwrap();
        assert_abs_diff_eq!(r.e.unwrap(), coes, epsilon = 0.03);
    }

    #[test]
    fn discrete_tail_law_by_enumeration() {
        // small residual sample: compare with direct enumeration of atom weights
        let ey = vec![-1.0, 0.2, 0.5, 1.3, 2.0, 3.1, 4.4, 0.0, -0.4, 1.1];
        let ex = normal_sample(50, 9);
        let kind = CopulaKind::Gaussian { rho: 0.6 };
        let m = synthetic(ex, ey.clone(), GasCopulaParams { omega: inv_link(0.6), alpha: 0.0, beta: 0.0, df: None });
        let lv = RiskLevels { alpha: 0.7, beta: 0.8 };
        let r = forecast_systemic(&m, lv, &[Measure::CoVaR, Measure::CoES, Measure::MES]).unwrap();
        let mut y = ey.clone();
        y.sort_by(f64::total_cmp);
        let n = y.len();
        let q = kind.to_score(0.8);
        let s = |k: usize| if k == 0 { 0.2 } else if k == n { 0.0 } else { kind.survival_score(q, kind.to_score(k as f64 / n as f64)).unwrap() };
        let probs: Vec<f64> = (1..=n).map(|k| (s(k - 1) - s(k)) / 0.2).collect();
        let law = DiscreteLaw::new(y.iter().copied().zip(probs.iter().copied())).unwrap();
        assert_abs_diff_eq!(r.c.unwrap(), law.quantile(0.7), epsilon = 1e-12);
        assert_abs_diff_eq!(r.e.unwrap(), law.expected_shortfall(0.7), epsilon = 1e-6);
        assert_abs_diff_eq!(r.mu.unwrap(), law.mean(), epsilon = 1e-6);
    }

    fn reference_series(n: usize, seed: u64) -> LossSeries {
        let d = crate::models::ModelParamsDoc::reference();
        crate::models::simulate_dgp(
            (d.margin_x(), d.margin_y()),
            d.copula().unwrap(),
            (crate::models::Innovation::StdNormal, crate::models::Innovation::StandardizedT { df: 5.0 }),
            n,
            &mut rng_stream(seed, 0),
        )
        .unwrap()
        .series
    }

    #[test]
    fn rolling_counts_and_homogeneity() {
        let s = reference_series(1100, 11);
        let mut cfg = ForecastConfig::new(LV, 1000);
        cfg.refit_every = usize::MAX;
        let spec = ModelSpec::default();
        let r = rolling_forecast(&s, &cfg, &spec).unwrap();
        assert_eq!(r.forecasts.len(), 100);
        assert_eq!(r.refits, 1);
        assert!(r.failures.is_empty());
        for f in r.forecasts.iter().flatten() {
            assert!(f.e.unwrap() >= f.c.unwrap());
        }
        let scaled = rolling_forecast(&s.scaled(3.0), &cfg, &spec).unwrap();
        for (a, b) in r.forecasts.iter().flatten().zip(scaled.forecasts.iter().flatten()) {
            assert_abs_diff_eq!(b.v, 3.0 * a.v, epsilon = 1e-6 * a.v.abs().max(1.0));
            assert_abs_diff_eq!(b.c.unwrap(), 3.0 * a.c.unwrap(), epsilon = 1e-6 * a.c.unwrap().abs().max(1.0));
        }
        let (_, fixed) = fixed_window_forecasts(&s, 1000, LV, &cfg.measures, &spec).unwrap();
        assert_eq!(fixed.len(), 100);
        assert_eq!(fixed[7], r.forecasts[7].clone().unwrap());
    }

    #[test]
    fn too_short_series() {
        let s = reference_series(50, 1);
        let cfg = ForecastConfig::new(LV, 50);
        assert!(matches!(rolling_forecast(&s, &cfg, &ModelSpec::default()), Err(Error::InsufficientData(_))));
    }
}
