//! Two-component scores ordered lexicographically.
//!
//! The first component scores the VaR of X, the second the systemic
//! component given the reported VaR. A forecast is better when its expected
//! first component is smaller, or equal with a smaller second component.
//!
//! The univariate functionals `VarEs` and `MeanVar` act on the x coordinate
//! of the observation and use the β level.

use std::cmp::Ordering;
use std::ops::Sub;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RiskLevels;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoScore {
    pub s1: f64,
    pub s2: f64,
}

impl Sub for MoScore {
    type Output = MoScore;

    fn sub(self, rhs: MoScore) -> MoScore {
        MoScore { s1: self.s1 - rhs.s1, s2: self.s2 - rhs.s2 }
    }
}

/// Lexicographic comparison: first components decide unless they are equal.
pub fn lex_compare(a: &MoScore, b: &MoScore) -> Result<Ordering> {
    if [a.s1, a.s2, b.s1, b.s2].iter().any(|v| v.is_nan()) {
        return Err(Error::domain("NaN score in lexicographic comparison"));
    }
    Ok(a.s1.total_cmp(&b.s1).then(a.s2.total_cmp(&b.s2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    #[serde(rename = "var-covar")]
    VarCoVar,
    #[serde(rename = "var-covar-coes")]
    VarCoVarCoEs,
    VarMes,
    VarEs,
    MeanVar,
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::VarCoVar => "var-covar",
            Functional::VarCoVarCoEs => "var-covar-coes",
            Functional::VarMes => "var-mes",
            Functional::VarEs => "var-es",
            Functional::MeanVar => "mean-var",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "var-covar" => Ok(Functional::VarCoVar),
            "var-covar-coes" => Ok(Functional::VarCoVarCoEs),
            "var-mes" => Ok(Functional::VarMes),
            "var-es" => Ok(Functional::VarEs),
            "mean-var" => Ok(Functional::MeanVar),
            _ => Err(Error::Usage(format!("unknown score functional '{s}'"))),
        }
    }
}

/// Strictly increasing transform (h or g).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Increasing {
    Identity,
    Log,
}

impl Increasing {
    fn eval(&self, z: f64, what: &str) -> Result<f64> {
        match self {
            Increasing::Identity => Ok(z),
            Increasing::Log => log(z, what),
        }
    }
}

/// Strictly convex φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convex {
    Square,
    NegLog,
}

impl Convex {
    /// −φ(r) + φ′(r)(r − t): the Bregman-type score for a mean target t.
    fn bregman(&self, r: f64, t: f64, what: &str) -> Result<f64> {
        match self {
            Convex::Square => Ok(r * r - 2.0 * r * t),
            Convex::NegLog => Ok(log(r, what)? - 1.0 + t / r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transforms {
    pub h: Increasing,
    pub g: Increasing,
    pub phi: Convex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    Canonical(Transforms),
    /// Log transforms making score differences scale free.
    ZeroHom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSpec {
    pub functional: Functional,
    pub variant: Variant,
}

impl ScoreSpec {
    /// Identity h and g with φ(z) = −log z for CoES and φ(z) = z² otherwise.
    pub fn canonical(functional: Functional) -> Self {
        let phi = if functional == Functional::VarCoVarCoEs { Convex::NegLog } else { Convex::Square };
        ScoreSpec {
            functional,
            variant: Variant::Canonical(Transforms { h: Increasing::Identity, g: Increasing::Identity, phi }),
        }
    }

    pub fn zero_hom(functional: Functional) -> Self {
        ScoreSpec { functional, variant: Variant::ZeroHom }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.functional, self.variant) {
            (Functional::VarCoVarCoEs, Variant::Canonical(t)) if t.phi != Convex::NegLog => {
                Err(Error::Validation("the CoES score needs a convex φ with negative derivative (neg_log)".into()))
            }
            (Functional::MeanVar, Variant::ZeroHom) => {
                Err(Error::Validation("the (mean, variance) score has no zero-homogeneous variant".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Reported values for one period. Which of c, e, mu are needed depends on
/// the functional; for `MeanVar`, mu is the mean and e the variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastTuple {
    pub v: f64,
    pub c: Option<f64>,
    pub e: Option<f64>,
    pub mu: Option<f64>,
    pub levels: RiskLevels,
}

impl ForecastTuple {
    pub fn var(v: f64, levels: RiskLevels) -> Self {
        ForecastTuple { v, c: None, e: None, mu: None, levels }
    }

    pub fn var_covar(v: f64, c: f64, levels: RiskLevels) -> Self {
        ForecastTuple { v, c: Some(c), e: None, mu: None, levels }
    }

    pub fn var_covar_coes(v: f64, c: f64, e: f64, levels: RiskLevels) -> Self {
        ForecastTuple { v, c: Some(c), e: Some(e), mu: None, levels }
    }

    pub fn var_mes(v: f64, mu: f64, levels: RiskLevels) -> Self {
        ForecastTuple { v, c: None, e: None, mu: Some(mu), levels }
    }

    pub fn field(&self, name: &'static str) -> Result<f64> {
        let v = match name {
            "c" => self.c,
            "e" => self.e,
            "mu" => self.mu,
            _ => Some(self.v),
        };
        v.ok_or_else(|| Error::Validation(format!("forecast is missing the '{name}' component")))
    }
}

fn log(z: f64, what: &str) -> Result<f64> {
    if z > 0.0 && z.is_finite() {
        Ok(z.ln())
    } else {
        Err(Error::ScoreDomain { period: 0, message: format!("log of nonpositive {what} = {z}") })
    }
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Quantile-implied tail mean target (1/(1−a))[y·1{y>q} + q(1{y≤q} − a)].
fn tail_target(q: f64, y: f64, a: f64) -> f64 {
    (ind(y > q) * y + q * (ind(y <= q) - a)) / (1.0 - a)
}

/// First component: the generalized piecewise linear score for VaR_β(X).
pub fn score_var(v: f64, obs: (f64, f64), beta: f64, spec: &ScoreSpec) -> Result<f64> {
    let x = obs.0;
    let hit = ind(x <= v);
    match spec.variant {
        Variant::Canonical(t) => {
            let hx = if hit > 0.0 { t.h.eval(x, "x")? } else { 0.0 };
            Ok((hit - beta) * t.h.eval(v, "VaR forecast")? - hit * hx)
        }
        // h = log and a(x, y) = log x; the log x terms cancel unless x > v
        Variant::ZeroHom => {
            let lx = if hit > 0.0 { 0.0 } else { log(x, "x")? };
            Ok((hit - beta) * log(v, "VaR forecast")? + lx)
        }
    }
}

/// Second component of the multi-objective score.
pub fn score_systemic(f: &ForecastTuple, obs: (f64, f64), spec: &ScoreSpec) -> Result<f64> {
    spec.validate()?;
    let (x, y) = obs;
    let alpha = f.levels.alpha;
    let beta = f.levels.beta;
    match spec.functional {
        Functional::VarEs => {
            let e = f.field("e")?;
            let phi = match spec.variant {
                Variant::Canonical(t) => t.phi,
                Variant::ZeroHom => Convex::NegLog,
            };
            return phi.bregman(e, tail_target(f.v, x, beta), "ES forecast");
        }
        Functional::MeanVar => {
            let (m, s2) = (f.field("mu")?, f.field("e")?);
            let phi = match spec.variant {
                Variant::Canonical(t) => t.phi,
                Variant::ZeroHom => unreachable!(),
            };
            return phi.bregman(s2, (x - m) * (x - m), "variance forecast");
        }
        _ => {}
    }
    if spec.variant == Variant::ZeroHom {
        f.field("c").map_or(Ok(()), |c| log(c, "CoVaR forecast").map(|_| ()))?;
        f.field("e").map_or(Ok(()), |e| log(e, "CoES forecast").map(|_| ()))?;
    }
    if !(x > f.v) {
        return Ok(0.0);
    }
    match (spec.functional, spec.variant) {
        (Functional::VarCoVar, Variant::Canonical(t)) => {
            let c = f.field("c")?;
            let hit = ind(y <= c);
            let gy = if hit > 0.0 { t.g.eval(y, "y")? } else { 0.0 };
            Ok((hit - alpha) * t.g.eval(c, "CoVaR forecast")? - hit * gy)
        }
        (Functional::VarCoVar, Variant::ZeroHom) => {
            let c = f.field("c")?;
            let hit = ind(y <= c);
            let ly = if hit > 0.0 { 0.0 } else { log(y, "y")? };
            Ok((hit - alpha) * log(c, "CoVaR forecast")? + ly)
        }
        (Functional::VarCoVarCoEs, Variant::Canonical(t)) => {
            let (c, e) = (f.field("c")?, f.field("e")?);
            let hit = ind(y <= c);
            let gy = if hit > 0.0 { t.g.eval(y, "y")? } else { 0.0 };
            let quantile_part = (hit - alpha) * t.g.eval(c, "CoVaR forecast")? - hit * gy;
            Ok(quantile_part + t.phi.bregman(e, tail_target(c, y, alpha), "CoES forecast")?)
        }
        (Functional::VarCoVarCoEs, Variant::ZeroHom) => {
            let (c, e) = (f.field("c")?, f.field("e")?);
            Ok((ind(y > c) * (y - c) / e + (1.0 - alpha) * (c / e - 1.0 + log(e, "CoES forecast")?)) / (1.0 - alpha))
        }
        (Functional::VarMes, variant) => {
            let mu = f.field("mu")?;
            let phi = match variant {
                Variant::Canonical(t) => t.phi,
                Variant::ZeroHom => Convex::NegLog,
            };
            phi.bregman(mu, y, "MES forecast")
        }
        _ => unreachable!(),
    }
}

pub fn mo_score(f: &ForecastTuple, obs: (f64, f64), spec: &ScoreSpec) -> Result<MoScore> {
    let s1 = match spec.functional {
        Functional::MeanVar => {
            let m = f.field("mu")?;
            (m - obs.0) * (m - obs.0)
        }
        _ => score_var(f.v, obs, f.levels.beta, spec)?,
    };
    Ok(MoScore { s1, s2: score_systemic(f, obs, spec)? })
}

/// Builds ((r₁, r₂), y) ↦ (s₁(r₁, y), s₂[r₁](r₂, y)) from a score for the
/// first functional and a family of scores for the second indexed by r₁.
pub fn lex_compose<R1, R2, O>(
    s1: impl Fn(&R1, &O) -> f64,
    s2_family: impl Fn(&R1, &R2, &O) -> f64,
) -> impl Fn(&R1, &R2, &O) -> MoScore {
    move |r1, r2, y| MoScore { s1: s1(r1, y), s2: s2_family(r1, r2, y) }
}

/// Pinball loss (1{y ≤ r} − a)(r − y) for the a-quantile.
pub fn pinball(a: f64) -> impl Fn(&f64, &f64) -> f64 {
    move |r, y| (ind(*y <= *r) - a) * (r - y)
}

/// Squared distance of the ES report from the quantile-implied tail target.
pub fn es_given_quantile(a: f64) -> impl Fn(&f64, &f64, &f64) -> f64 {
    move |q, e, y| (e - tail_target(*q, *y, a)).powi(2)
}

pub fn squared_error(r: &f64, y: &f64) -> f64 {
    (r - y) * (r - y)
}

/// [r₂ − (y − r₁)²]², the variance score given a mean report r₁.
pub fn variance_given_mean(m: &f64, s: &f64, y: &f64) -> f64 {
    (s - (y - m) * (y - m)).powi(2)
}
