//! GARCH-type marginals with a GAS-driven Gaussian or t copula: simulation,
//! Gaussian QMLE for the margins, empirical PITs and copula likelihood fits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ecdf::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::numerics::copula::t_copula_const;
use crate::numerics::optimize::{minimize_with_restarts, nelder_mead, NelderMeadOptions};
use crate::numerics::rng::std_normal;
use crate::numerics::special::{norm_cdf, norm_quantile, t_cdf, t_quantile};
use crate::numerics::CopulaKind;
use crate::series::LossSeries;

pub const BURN_IN: usize = 500;
const RESTARTS: usize = 5;
const SCORE_STEP: f64 = 1e-5;
const F_CLAMP: f64 = 50.0;
const RHO_MAX: f64 = 1.0 - 1e-10;
const DF_RANGE: (f64, f64) = (2.0, 100.0);

/// Δ(f) = (1 − e^{−f})/(1 + e^{−f}) = tanh(f/2).
pub fn link(f: f64) -> f64 {
    (0.5 * f).tanh()
}

pub fn inv_link(rho: f64) -> f64 {
    2.0 * rho.atanh()
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GarchFamily {
    #[default]
    Garch,
    GjrGarch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub family: GarchFamily,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub leverage: f64,
}

impl GarchParams {
    pub fn garch(omega: f64, alpha: f64, beta: f64) -> Self {
        GarchParams { family: GarchFamily::Garch, omega, alpha, beta, leverage: 0.0 }
    }

    pub fn gjr(omega: f64, alpha: f64, beta: f64, leverage: f64) -> Self {
        GarchParams { family: GarchFamily::GjrGarch, omega, alpha, beta, leverage }
    }

    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta + 0.5 * self.lev()
    }

    fn lev(&self) -> f64 {
        match self.family {
            GarchFamily::Garch => 0.0,
            GarchFamily::GjrGarch => self.leverage,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !(self.alpha >= 0.0) || !(self.beta >= 0.0) || !(self.leverage >= 0.0) {
            return Err(Error::Validation(format!("invalid GARCH parameters {self:?}")));
        }
        Ok(())
    }

    pub fn is_stationary(&self) -> bool {
        self.persistence() < 1.0
    }

    pub fn unconditional_variance(&self) -> Option<f64> {
        self.is_stationary().then(|| self.omega / (1.0 - self.persistence()))
    }

    /// σ²_{t+1} from σ²_t and the loss z_t; large positive losses carry the
    /// leverage term.
    #[inline]
    pub fn next_variance(&self, var: f64, z: f64) -> f64 {
        let z2 = z * z;
        let lev = if z > 0.0 { self.lev() * z2 } else { 0.0 };
        self.omega + self.alpha * z2 + lev + self.beta * var
    }

    /// Conditional variances σ²_1..σ²_{n+1} given σ²_1 = `var0`.
    pub fn variance_path(&self, z: &[f64], var0: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(z.len() + 1);
        let mut v = var0;
        out.push(v);
        for &zt in z {
            v = self.next_variance(v, zt);
            out.push(v);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFamily {
    Gaussian,
    #[default]
    StudentT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasCopulaParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Degrees of freedom; `None` is the Gaussian copula.
    pub df: Option<f64>,
}

impl GasCopulaParams {
    pub fn family(&self) -> CopulaFamily {
        if self.df.is_some() {
            CopulaFamily::StudentT
        } else {
            CopulaFamily::Gaussian
        }
    }

    pub fn kind(&self, rho: f64) -> CopulaKind {
        match self.df {
            Some(df) => CopulaKind::StudentT { rho, df },
            None => CopulaKind::Gaussian { rho },
        }
    }

    pub fn f0(&self) -> f64 {
        self.omega / (1.0 - self.beta)
    }

    pub fn validate(&self) -> Result<()> {
        let df_ok = self.df.is_none_or(|d| d > 0.0);
        if !self.omega.is_finite() || !(self.alpha >= 0.0) || !(self.beta.abs() < 1.0) || !df_ok {
            return Err(Error::Validation(format!("invalid GAS copula parameters {self:?}")));
        }
        Ok(())
    }
}

/// Innovation law of a margin, standardized to unit variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Innovation {
    StdNormal,
    StandardizedT { df: f64 },
}

impl Innovation {
    /// Inverse cdf of the unit-variance innovation law.
    pub fn from_uniform(&self, u: f64) -> f64 {
        match *self {
            Innovation::StdNormal => norm_quantile(u),
            Innovation::StandardizedT { df } => t_quantile(u, df) * ((df - 2.0) / df).sqrt(),
        }
    }

    pub fn cdf(&self, e: f64) -> f64 {
        match *self {
            Innovation::StdNormal => norm_cdf(e),
            Innovation::StandardizedT { df } => t_cdf(e / ((df - 2.0) / df).sqrt(), df),
        }
    }
}

/// Copula log-density as a function of ρ, with the ρ-free parts of a
/// pair precomputed.
#[derive(Debug, Clone, Copy)]
struct PreparedPair {
    sq: f64,
    cross: f64,
    marg: f64,
}

fn prepare(pits: &[(f64, f64)], df: Option<f64>) -> Vec<PreparedPair> {
    pits.iter()
        .map(|&(u1, u2)| {
            let (x1, x2, marg) = match df {
                None => (norm_quantile(u1), norm_quantile(u2), 0.0),
                Some(v) => {
                    let (a, b) = (t_quantile(u1, v), t_quantile(u2, v));
                    (a, b, t_copula_const(v) + 0.5 * (v + 1.0) * ((a * a / v).ln_1p() + (b * b / v).ln_1p()))
                }
            };
            PreparedPair { sq: x1 * x1 + x2 * x2, cross: x1 * x2, marg }
        })
        .collect()
}

#[inline]
fn log_c(p: &PreparedPair, rho: f64, df: Option<f64>) -> f64 {
    let r2 = 1.0 - rho * rho;
    match df {
        None => -0.5 * r2.ln() - (rho * rho * p.sq - 2.0 * rho * p.cross) / (2.0 * r2),
        Some(v) => p.marg - 0.5 * r2.ln() - 0.5 * (v + 2.0) * ((p.sq - 2.0 * rho * p.cross) / (r2 * v)).ln_1p(),
    }
}

#[inline]
fn clamp_rho(r: f64) -> f64 {
    r.clamp(-RHO_MAX, RHO_MAX)
}

/// Numerical derivative of the log-density in f at the pair.
#[inline]
fn gas_score(p: &PreparedPair, f: f64, df: Option<f64>) -> f64 {
    let up = log_c(p, clamp_rho(link(f + SCORE_STEP)), df);
    let dn = log_c(p, clamp_rho(link(f - SCORE_STEP)), df);
    (up - dn) / (2.0 * SCORE_STEP)
}

/// One GAS step; returns the next f and whether it had to be clamped.
#[inline]
fn gas_step(params: &GasCopulaParams, f: f64, p: &PreparedPair) -> (f64, bool) {
    let next = params.omega + params.alpha * gas_score(p, f, params.df) + params.beta * f;
    if !next.is_finite() || next.abs() > F_CLAMP {
        let c = if next.is_nan() { 0.0 } else { next.clamp(-F_CLAMP, F_CLAMP) };
        return (c, true);
    }
    (next, false)
}

/// Log-likelihood of the filter and its f path (n + 1 values, the last
/// being the one-step-ahead state).
fn gas_run(params: &GasCopulaParams, pre: &[PreparedPair]) -> (f64, Vec<f64>, bool) {
    let mut f = params.f0();
    let mut path = Vec::with_capacity(pre.len() + 1);
    let mut ll = 0.0;
    let mut clamped = false;
    for p in pre {
        path.push(f);
        ll += log_c(p, clamp_rho(link(f)), params.df);
        let (next, c) = gas_step(params, f, p);
        clamped |= c;
        f = next;
    }
    path.push(f);
    (ll, path, clamped)
}

fn gas_loglik(params: &GasCopulaParams, pre: &[PreparedPair]) -> f64 {
    let mut f = params.f0();
    let mut ll = 0.0;
    for p in pre {
        ll += log_c(p, clamp_rho(link(f)), params.df);
        f = gas_step(params, f, p).0;
    }
    ll
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasPath {
    /// f_1..f_{n+1}; f_{n+1} is the state for the next period.
    pub f: Vec<f64>,
    pub rho: Vec<f64>,
    pub clamped: bool,
}

/// Filters f_t = ω + α s_{t−1} + β f_{t−1} from f_1 = ω/(1−β).
pub fn gas_filter(params: &GasCopulaParams, pits: &[(f64, f64)]) -> Result<GasPath> {
    params.validate()?;
    if pits.iter().any(|&(a, b)| !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
        return Err(Error::domain("PITs must lie strictly inside (0, 1)"));
    }
    let pre = prepare(pits, params.df);
    let (_, f, clamped) = gas_run(params, &pre);
    let rho = f.iter().map(|&v| clamp_rho(link(v))).collect();
    Ok(GasPath { f, rho, clamped })
}

/// Û_t = rank(ε̂_t)/(n+1).
pub fn pit_transform(residuals: &[f64]) -> Result<Vec<f64>> {
    if residuals.len() < 2 {
        return Err(Error::InsufficientData("PITs need at least 2 residuals".into()));
    }
    let e = EmpiricalCdf::new(residuals)?;
    Ok(residuals.iter().map(|&r| e.pit(r)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginFit {
    pub params: GarchParams,
    /// σ_1..σ_n over the estimation window.
    pub sigma: Vec<f64>,
    /// σ²_{n+1}.
    pub next_var: f64,
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub ecdf: Option<EmpiricalCdf>,
    pub loglik: f64,
    pub converged: bool,
}

impl MarginFit {
    pub fn ecdf(&self) -> &EmpiricalCdf {
        self.ecdf.as_ref().expect("margin fit carries its residual ecdf")
    }

    pub fn next_sigma(&self) -> f64 {
        self.next_var.sqrt()
    }

    /// Volatilities σ_{n+1}, σ_{n+2}, ... for the new observations, each
    /// using data up to the previous period only.
    pub fn forward(&self, new: &[f64]) -> Vec<f64> {
        let mut v = self.next_var;
        new.iter()
            .map(|&z| {
                let s = v.sqrt();
                v = self.params.next_variance(v, z);
                s
            })
            .collect()
    }
}

fn qmle_negloglik(params: &GarchParams, z: &[f64], var0: f64) -> f64 {
    let mut v = var0;
    let mut nll = 0.0;
    for &zt in z {
        if !(v > 0.0) || !v.is_finite() {
            return f64::INFINITY;
        }
        nll += v.ln() + zt * zt / v;
        v = params.next_variance(v, zt);
    }
    0.5 * nll
}

/// Maps unconstrained θ to (ω, α, β, γ) with persistence strictly below 1.
fn garch_from_theta(theta: &[f64], family: GarchFamily, scale2: f64) -> GarchParams {
    let omega = theta[0].exp() * scale2;
    let pers = logistic(theta[1]);
    match family {
        GarchFamily::Garch => {
            let share = logistic(theta[2]);
            GarchParams::garch(omega, pers * share, pers * (1.0 - share))
        }
        GarchFamily::GjrGarch => {
            let (ea, eg) = (theta[2].exp(), theta[3].exp());
            let tot = 1.0 + ea + eg;
            GarchParams::gjr(omega, pers * ea / tot, pers / tot, 2.0 * pers * eg / tot)
        }
    }
}

/// Gaussian QMLE of a GARCH(1,1) or GJR-GARCH(1,1) margin.
pub fn fit_marginal(z: &[f64], family: GarchFamily) -> Result<MarginFit> {
    if z.len() < 250 {
        return Err(Error::InsufficientData(format!("{} observations; at least 250 are needed", z.len())));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite loss"));
    }
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var0 = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if !(var0 > 0.0) {
        return Err(Error::domain("constant loss series"));
    }
    // fit in units of the sample standard deviation
    let zs: Vec<f64> = z.iter().map(|v| v / var0.sqrt()).collect();
    let start = match family {
        GarchFamily::Garch => vec![(0.05f64).ln(), (0.95f64 / 0.05).ln(), (0.1f64 / 0.85).ln()],
        GarchFamily::GjrGarch => vec![(0.05f64).ln(), (0.95f64 / 0.05).ln(), (0.05f64 / 0.85).ln(), (0.05f64 / 0.85).ln()],
    };
    let objective = |th: &[f64]| {
        let p = garch_from_theta(th, family, 1.0);
        let v = qmle_negloglik(&p, &zs, 1.0);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let opts = NelderMeadOptions { diameter_tol: 1e-8, max_evals: 20_000, initial_step: 0.5 };
    let best = minimize_with_restarts(objective, &start, &opts, RESTARTS, 0.5);
    if !best.value.is_finite() {
        return Err(Error::Estimation {
            message: "GARCH quasi-likelihood is not finite anywhere visited".into(),
            diagnostics: vec![format!("evals = {}", best.evals)],
        });
    }
    let params = garch_from_theta(&best.x, family, var0);
    let path = params.variance_path(z, var0);
    let sigma: Vec<f64> = path[..z.len()].iter().map(|v| v.sqrt()).collect();
    let residuals: Vec<f64> = z.iter().zip(&sigma).map(|(v, s)| v / s).collect();
    let ecdf = EmpiricalCdf::new(&residuals)?;
    Ok(MarginFit {
        params,
        sigma,
        next_var: path[z.len()],
        residuals,
        ecdf: Some(ecdf),
        loglik: -(best.value + 0.5 * n * var0.ln()) - 0.5 * n * (2.0 * std::f64::consts::PI).ln(),
        converged: best.converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaFit {
    pub params: GasCopulaParams,
    pub path: GasPath,
    pub loglik: f64,
    pub converged: bool,
}

impl CopulaFit {
    pub fn next_rho(&self) -> f64 {
        *self.path.rho.last().expect("non-empty path")
    }

    /// ρ for each new pair, continuing the filter from the end of the window.
    pub fn forward(&self, new_pits: &[(f64, f64)]) -> Vec<f64> {
        let pre = prepare(new_pits, self.params.df);
        let mut f = *self.path.f.last().expect("non-empty path");
        pre.iter()
            .map(|p| {
                let r = clamp_rho(link(f));
                f = gas_step(&self.params, f, p).0;
                r
            })
            .collect()
    }
}

fn gas_from_theta(th: &[f64], df: Option<f64>) -> GasCopulaParams {
    GasCopulaParams { omega: th[0], alpha: th[1].exp(), beta: th[2].tanh(), df }
}

/// Starts from the Gaussian-score correlation with β = 0.95.
fn gas_start(pits: &[(f64, f64)]) -> Vec<f64> {
    let z: Vec<(f64, f64)> = pits.iter().map(|&(a, b)| (norm_quantile(a), norm_quantile(b))).collect();
    let (sa, sb, sab) = z.iter().fold((0.0, 0.0, 0.0), |acc, p| (acc.0 + p.0 * p.0, acc.1 + p.1 * p.1, acc.2 + p.0 * p.1));
    let r = (sab / (sa * sb).sqrt()).clamp(-0.95, 0.95);
    let beta: f64 = 0.95;
    vec![inv_link(r) * (1.0 - beta), (0.05f64).ln(), beta.atanh()]
}

fn fit_gas_fixed_df(pre: &[PreparedPair], df: Option<f64>, start: &[f64], opts: &NelderMeadOptions, restarts: usize) -> (Vec<f64>, f64, bool) {
    let obj = |th: &[f64]| {
        let p = gas_from_theta(th, df);
        let ll = gas_loglik(&p, pre);
        if ll.is_finite() {
            -ll
        } else {
            f64::INFINITY
        }
    };
    let m = if restarts == 0 { nelder_mead(obj, start, opts) } else { minimize_with_restarts(obj, start, opts, restarts, 0.3) };
    (m.x, m.value, m.converged)
}

/// Maximum likelihood for the GAS copula. For the t family the degrees of
/// freedom are profiled out by a golden-section search in log ϑ.
pub fn fit_copula(pits: &[(f64, f64)], family: CopulaFamily) -> Result<CopulaFit> {
    if pits.len() < 250 {
        return Err(Error::InsufficientData(format!("{} pairs; at least 250 are needed", pits.len())));
    }
    if pits.iter().any(|&(a, b)| !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
        return Err(Error::domain("PITs must lie strictly inside (0, 1)"));
    }
    let coarse = NelderMeadOptions { diameter_tol: 1e-5, max_evals: 3_000, initial_step: 0.3 };
    let fine = NelderMeadOptions { diameter_tol: 1e-8, max_evals: 20_000, initial_step: 0.3 };
    let gauss_pre = prepare(pits, None);
    let start = gas_start(pits);
    let (df, pre, start) = match family {
        CopulaFamily::Gaussian => (None, gauss_pre, start),
        CopulaFamily::StudentT => {
            let mut warm = start;
            let profile = |ldf: f64, warm: &mut Vec<f64>| {
                let pre = prepare(pits, Some(ldf.exp()));
                let (x, v, _) = fit_gas_fixed_df(&pre, Some(ldf.exp()), warm, &coarse, 0);
                if v.is_finite() {
                    *warm = x;
                }
                v
            };
            let (mut a, mut b) = (DF_RANGE.0.ln(), DF_RANGE.1.ln());
            let g = 0.5 * (5f64.sqrt() - 1.0);
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let mut fc = profile(c, &mut warm);
            let mut fd = profile(d, &mut warm);
            for _ in 0..18 {
                if fc <= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = profile(c, &mut warm);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = profile(d, &mut warm);
                }
            }
            let df = (0.5 * (a + b)).exp();
            (Some(df), prepare(pits, Some(df)), warm)
        }
    };
    let (x, value, converged) = fit_gas_fixed_df(&pre, df, &start, &fine, RESTARTS);
    if !value.is_finite() {
        return Err(Error::Estimation {
            message: "copula likelihood is not finite anywhere visited".into(),
            diagnostics: vec![format!("start = {start:?}")],
        });
    }
    let params = gas_from_theta(&x, df);
    let (loglik, f, clamped) = gas_run(&params, &pre);
    let rho = f.iter().map(|&v| clamp_rho(link(v))).collect();
    Ok(CopulaFit { params, path: GasPath { f, rho, clamped }, loglik, converged })
}

/// Copula log-likelihood of given parameters on a PIT sample.
pub fn copula_loglik(params: &GasCopulaParams, pits: &[(f64, f64)]) -> f64 {
    gas_loglik(params, &prepare(pits, params.df))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub margin_x: GarchFamily,
    pub margin_y: GarchFamily,
    pub copula: CopulaFamily,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec { margin_x: GarchFamily::Garch, margin_y: GarchFamily::Garch, copula: CopulaFamily::StudentT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub margin_x: MarginFit,
    pub margin_y: MarginFit,
    pub copula: CopulaFit,
    pub warnings: Vec<String>,
}

/// Predictive state for one period: volatilities and copula correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneStepState {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
}

fn clamped_pit(e: &EmpiricalCdf, x: f64) -> f64 {
    let n = e.len() as f64;
    e.pit(x).clamp(1.0 / (n + 1.0), n / (n + 1.0))
}

impl FittedModel {
    pub fn next_state(&self) -> OneStepState {
        OneStepState {
            sigma_x: self.margin_x.next_sigma(),
            sigma_y: self.margin_y.next_sigma(),
            rho: self.copula.next_rho(),
        }
    }

    /// States for each of the new observations with parameters held fixed;
    /// out-of-sample PITs use the window's residual ecdfs.
    pub fn forward(&self, new: &LossSeries) -> Vec<OneStepState> {
        let sx = self.margin_x.forward(&new.x);
        let sy = self.margin_y.forward(&new.y);
        let pits: Vec<(f64, f64)> = (0..new.len())
            .map(|t| {
                (
                    clamped_pit(self.margin_x.ecdf(), new.x[t] / sx[t]),
                    clamped_pit(self.margin_y.ecdf(), new.y[t] / sy[t]),
                )
            })
            .collect();
        let rho = self.copula.forward(&pits);
        (0..new.len()).map(|t| OneStepState { sigma_x: sx[t], sigma_y: sy[t], rho: rho[t] }).collect()
    }
}

/// Two-step estimation: QMLE margins, empirical PITs, copula ML.
pub fn fit_model(series: &LossSeries, spec: &ModelSpec) -> Result<FittedModel> {
    let mx = fit_marginal(&series.x, spec.margin_x)?;
    let my = fit_marginal(&series.y, spec.margin_y)?;
    let ux = pit_transform(&mx.residuals)?;
    let uy = pit_transform(&my.residuals)?;
    let pits: Vec<(f64, f64)> = ux.into_iter().zip(uy).collect();
    let copula = fit_copula(&pits, spec.copula)?;
    let mut warnings = Vec::new();
    for (name, m) in [("x", &mx), ("y", &my)] {
        if !m.converged {
            warnings.push(format!("{name} margin optimizer hit its evaluation limit"));
        }
    }
    if copula.path.clamped {
        warnings.push("GAS filter clamped |f| at 50".into());
    }
    if !copula.converged {
        warnings.push("copula optimizer hit its evaluation limit".into());
    }
    Ok(FittedModel { margin_x: mx, margin_y: my, copula, warnings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulated {
    pub series: LossSeries,
    /// ρ_t used for each period.
    pub rho: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub sigma_y: Vec<f64>,
    pub warnings: Vec<String>,
}

fn sample_copula(params: &GasCopulaParams, rho: f64, rng: &mut impl Rng) -> ((f64, f64), (f64, f64)) {
    let z1 = std_normal(rng);
    let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * std_normal(rng);
    match params.df {
        None => ((norm_cdf(z1), norm_cdf(z2)), (z1, z2)),
        Some(df) => {
            // W ~ χ²_ϑ via a gamma draw
            let w: f64 = rand_distr::Distribution::sample(&rand_distr::ChiSquared::new(df).expect("df > 0"), rng);
            let s = (w / df).sqrt();
            let (t1, t2) = (z1 / s, z2 / s);
            ((t_cdf(t1, df), t_cdf(t2, df)), (t1, t2))
        }
    }
}

fn innovation(inn: &Innovation, u: f64, score: f64, cop_df: Option<f64>) -> f64 {
    match (inn, cop_df) {
        (Innovation::StdNormal, None) => score,
        (Innovation::StandardizedT { df }, Some(c)) if *df == c => score * ((df - 2.0) / df).sqrt(),
        _ => inn.from_uniform(u.clamp(1e-300, 1.0 - 1e-16)),
    }
}

/// Simulates n_total periods after discarding `BURN_IN` warm-up periods.
pub fn simulate_dgp(
    margins: (GarchParams, GarchParams),
    copula: GasCopulaParams,
    innovations: (Innovation, Innovation),
    n_total: usize,
    rng: &mut impl Rng,
) -> Result<Simulated> {
    margins.0.validate()?;
    margins.1.validate()?;
    copula.validate()?;
    let mut warnings = Vec::new();
    for (name, m) in [("x", &margins.0), ("y", &margins.1)] {
        if !m.is_stationary() {
            warnings.push(format!("{name} margin is not covariance stationary"));
        }
    }
    let var0 = |m: &GarchParams| m.unconditional_variance().unwrap_or(m.omega);
    let (mut vx, mut vy) = (var0(&margins.0), var0(&margins.1));
    let mut f = copula.f0();
    let total = n_total + BURN_IN;
    let (mut x, mut y, mut rho, mut sx, mut sy) = (vec![], vec![], vec![], vec![], vec![]);
    let mut clamped = false;
    for t in 0..total {
        let r = clamp_rho(link(f));
        let ((u1, u2), (s1, s2)) = sample_copula(&copula, r, rng);
        let ex = innovation(&innovations.0, u1, s1, copula.df);
        let ey = innovation(&innovations.1, u2, s2, copula.df);
        let (xt, yt) = (vx.sqrt() * ex, vy.sqrt() * ey);
        if t >= BURN_IN {
            x.push(xt);
            y.push(yt);
            rho.push(r);
            sx.push(vx.sqrt());
            sy.push(vy.sqrt());
        }
        let (u1, u2) = (u1.clamp(1e-16, 1.0 - 1e-16), u2.clamp(1e-16, 1.0 - 1e-16));
        let pre = prepare(&[(u1, u2)], copula.df)[0];
        let (nf, c) = gas_step(&copula, f, &pre);
        clamped |= c;
        f = nf;
        vx = margins.0.next_variance(vx, xt);
        vy = margins.1.next_variance(vy, yt);
    }
    if clamped {
        warnings.push("GAS recursion clamped |f| at 50".into());
    }
    Ok(Simulated { series: LossSeries::new(x, y)?, rho, sigma_x: sx, sigma_y: sy, warnings })
}

/// Flat JSON parameter document shared by the simulate and fit verbs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParamsDoc {
    pub family: GarchFamily,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub leverage: f64,
    #[serde(rename = "copula.family")]
    pub copula_family: CopulaFamily,
    #[serde(rename = "copula.omega")]
    pub copula_omega: f64,
    #[serde(rename = "copula.alpha")]
    pub copula_alpha: f64,
    #[serde(rename = "copula.beta")]
    pub copula_beta: f64,
    #[serde(rename = "copula.df", default)]
    pub copula_df: Option<f64>,
    #[serde(rename = "copula.link", default = "default_link")]
    pub copula_link: String,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Separate y-margin parameters; absent means y shares the x margin.
    #[serde(rename = "y", default, skip_serializing_if = "Option::is_none")]
    pub margin_y: Option<GarchParams>,
}

fn default_link() -> String {
    "tanh_half".into()
}

impl ModelParamsDoc {
    /// The simulation design: (0.001, 0.2, 0.79) margins and a
    /// (0.001, 0.1, 0.99, 5) GAS t copula.
    pub fn reference() -> Self {
        ModelParamsDoc::from_parts(
            GarchParams::garch(0.001, 0.2, 0.79),
            None,
            GasCopulaParams { omega: 0.001, alpha: 0.1, beta: 0.99, df: Some(5.0) },
            None,
        )
    }

    pub fn from_parts(mx: GarchParams, my: Option<GarchParams>, c: GasCopulaParams, seed: Option<u64>) -> Self {
        ModelParamsDoc {
            family: mx.family,
            omega: mx.omega,
            alpha: mx.alpha,
            beta: mx.beta,
            leverage: mx.leverage,
            copula_family: c.family(),
            copula_omega: c.omega,
            copula_alpha: c.alpha,
            copula_beta: c.beta,
            copula_df: c.df,
            copula_link: default_link(),
            seed,
            margin_y: my.filter(|m| *m != mx),
        }
    }

    pub fn margin_x(&self) -> GarchParams {
        GarchParams { family: self.family, omega: self.omega, alpha: self.alpha, beta: self.beta, leverage: self.leverage }
    }

    pub fn margin_y(&self) -> GarchParams {
        self.margin_y.unwrap_or_else(|| self.margin_x())
    }

    pub fn copula(&self) -> Result<GasCopulaParams> {
        if self.copula_link != "tanh_half" {
            return Err(Error::Validation(format!("unsupported link '{}'", self.copula_link)));
        }
        let df = match self.copula_family {
            CopulaFamily::Gaussian => None,
            CopulaFamily::StudentT => {
                Some(self.copula_df.ok_or_else(|| Error::Validation("t copula needs copula.df".into()))?)
            }
        };
        let c = GasCopulaParams { omega: self.copula_omega, alpha: self.copula_alpha, beta: self.copula_beta, df };
        c.validate()?;
        Ok(c)
    }
}
