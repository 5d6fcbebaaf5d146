//! Numeric check of the convex-level-sets property: if a functional takes
//! the same value on two laws, does it keep that value on their mixtures?

use serde::{Deserialize, Serialize};

use super::{conditional_tail_dist, systemic_measure, Bivariate, MixtureRule, RiskLevels, SystemicKind};
use crate::error::{Error, Result};

pub const CXLS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CxlsKind {
    CoVaR,
    CoES,
    MES,
    /// VaR_β of X.
    VaR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CxlsReport {
    pub value_f0: f64,
    pub value_f1: f64,
    pub value_mix: f64,
    pub violated: bool,
}

fn mixture(f0: &Bivariate, f1: &Bivariate, lambda: f64, rule: MixtureRule) -> Result<Bivariate> {
    match (f0, f1) {
        (Bivariate::Discrete(a), Bivariate::Discrete(b)) => Ok(Bivariate::Discrete(a.mix(b, lambda)?)),
        (Bivariate::Analytic(a), Bivariate::Analytic(b)) => {
            Ok(Bivariate::Mixture { components: vec![(1.0 - lambda, a.clone()), (lambda, b.clone())], rule })
        }
        _ => Err(Error::Validation("cxls probe needs two discrete or two analytic laws".into())),
    }
}

fn evaluate(kind: CxlsKind, dist: &Bivariate, levels: RiskLevels) -> Result<f64> {
    match kind {
        CxlsKind::VaR => dist.marginal_x()?.var_level(levels.beta),
        CxlsKind::CoVaR => systemic_measure(SystemicKind::CoVaR, dist, levels),
        CxlsKind::CoES => systemic_measure(SystemicKind::CoES, dist, levels),
        CxlsKind::MES => conditional_tail_dist(dist, levels.beta)?.mean(),
    }
}

pub fn cxls_probe(
    kind: CxlsKind,
    f0: &Bivariate,
    f1: &Bivariate,
    lambda: f64,
    levels: RiskLevels,
    rule: MixtureRule,
) -> Result<CxlsReport> {
    cxls_probe_with_tol(kind, f0, f1, lambda, levels, rule, CXLS_TOL)
}

/// Evaluates `kind` on F⁰, F¹ and (1 − λ)F⁰ + λF¹. A violation is reported
/// when the first two agree within `tol` and the mixture differs by more.
pub fn cxls_probe_with_tol(
    kind: CxlsKind,
    f0: &Bivariate,
    f1: &Bivariate,
    lambda: f64,
    levels: RiskLevels,
    rule: MixtureRule,
    tol: f64,
) -> Result<CxlsReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::domain(format!("mixing weight {lambda} outside (0,1)")));
    }
    let mix = mixture(f0, f1, lambda, rule)?;
    let value_f0 = evaluate(kind, f0, levels)?;
    let value_f1 = evaluate(kind, f1, levels)?;
    let value_mix = evaluate(kind, &mix, levels)?;
    let violated = (value_f0 - value_f1).abs() <= tol && (value_mix - value_f0).abs() > tol;
    Ok(CxlsReport { value_f0, value_f1, value_mix, violated })
}
