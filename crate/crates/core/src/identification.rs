//! Identification functions and Wald-type calibration tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RiskLevels;
use crate::numerics::special::chi2_sf;
use crate::scoring::ForecastTuple;
use crate::series::LossSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdKind {
    #[serde(rename = "var")]
    VaR,
    #[serde(rename = "var-covar")]
    VarCoVar,
    #[serde(rename = "var-covar-coes")]
    VarCoVarCoEs,
    #[serde(rename = "var-mes")]
    VarMes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdVariant {
    Strict,
    /// The scalar joint-exceedance condition; not strict.
    #[serde(rename = "nonstrict")]
    NonStrictBr,
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Strict identification vector; the first component is always 1{x ≤ v} − β.
pub fn identify(kind: IdKind, f: &ForecastTuple, obs: (f64, f64)) -> Result<Vec<f64>> {
    let (x, y) = obs;
    let RiskLevels { alpha, beta } = f.levels;
    let tail = ind(x > f.v);
    let mut out = vec![ind(x <= f.v) - beta];
    match kind {
        IdKind::VaR => {}
        IdKind::VarCoVar | IdKind::VarCoVarCoEs => {
            let c = f.field("c")?;
            out.push(tail * (ind(y <= c) - alpha));
            if kind == IdKind::VarCoVarCoEs {
                let e = f.field("e")?;
                let target = (y * ind(y > c) + c * (ind(y <= c) - alpha)) / (1.0 - alpha);
                out.push(tail * (e - target));
            }
        }
        IdKind::VarMes => {
            let mu = f.field("mu")?;
            out.push(tail * (mu - y));
        }
    }
    Ok(out)
}

/// 1{x > v}1{y > c} − (1−α)(1−β).
pub fn identify_nonstrict(v: f64, c: f64, obs: (f64, f64), levels: RiskLevels) -> f64 {
    ind(obs.0 > v) * ind(obs.1 > c) - (1.0 - levels.alpha) * (1.0 - levels.beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub mean_id: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub n: usize,
    /// Set when Σ̂ was singular and the test ran on its range (dof < dimension).
    pub reduced_rank: bool,
}

/// Wald statistic n·V̄′Σ̂⁺V̄ on the per-period moment vectors, Σ̂ the sample
/// covariance and Σ̂⁺ its Moore–Penrose inverse.
pub fn wald_on_moments(moments: &[Vec<f64>]) -> Result<CalibResult> {
    let n = moments.len();
    let k = moments.first().map_or(0, |m| m.len());
    if k == 0 {
        return Err(Error::Validation("empty moment vectors".into()));
    }
    if n < 2 * k {
        return Err(Error::InsufficientData(format!("{n} periods for {k} moment conditions")));
    }
    if moments.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::numeric("non-finite identification value"));
    }
    let mut mean = DVector::<f64>::zeros(k);
    for m in moments {
        mean += DVector::from_column_slice(m);
    }
    mean /= n as f64;
    let mut cov = DMatrix::<f64>::zeros(k, k);
    for m in moments {
        let d = DVector::from_column_slice(m) - &mean;
        cov += &d * d.transpose();
    }
    cov /= n as f64;
    let out = |statistic: f64, dof: usize, reduced_rank: bool| CalibResult {
        statistic,
        dof,
        p_value: if statistic.is_infinite() { 0.0 } else { chi2_sf(statistic, dof as f64) },
        mean_id: mean.iter().copied().collect(),
        cov: (0..k).map(|i| cov.row(i).iter().copied().collect()).collect(),
        n,
        reduced_rank,
    };
    if mean.iter().all(|v| *v == 0.0) {
        return Ok(out(0.0, k, false));
    }
    if moments.iter().all(|m| m == &moments[0]) {
        // constant nonzero identification values contradict the null outright
        return Ok(out(f64::INFINITY, k, false));
    }
    // Moore–Penrose inverse on the range of Σ̂, with dof equal to its rank
    let eig = cov.clone().symmetric_eigen();
    let tol = 1e-10 * cov.trace();
    let mut statistic = 0.0;
    let mut rank = 0;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > tol {
            let proj = eig.eigenvectors.column(i).dot(&mean);
            statistic += proj * proj / lambda;
            rank += 1;
        }
    }
    if rank == 0 {
        return Err(Error::DegenerateCovariance("identification values are constant".into()));
    }
    Ok(out(n as f64 * statistic, rank, rank < k))
}

/// Unconditional (instruments ≡ 1) or instrumented calibration test. With
/// instruments h_t, the moments are the products V_t ⊗ h_t.
pub fn calibration_test(
    forecasts: &[ForecastTuple],
    obs: &LossSeries,
    kind: IdKind,
    variant: IdVariant,
    instruments: Option<&[Vec<f64>]>,
) -> Result<CalibResult> {
    if forecasts.len() != obs.len() {
        return Err(Error::Validation(format!("{} forecasts for {} observations", forecasts.len(), obs.len())));
    }
    if let Some(h) = instruments {
        if h.len() != obs.len() {
            return Err(Error::Validation("one instrument vector per period is required".into()));
        }
    }
    let mut moments = Vec::with_capacity(obs.len());
    for (t, f) in forecasts.iter().enumerate() {
        let o = obs.obs(t);
        let v = match variant {
            IdVariant::Strict => identify(kind, f, o)?,
            IdVariant::NonStrictBr => vec![identify_nonstrict(f.v, f.field("c")?, o, f.levels)],
        };
        moments.push(match instruments {
            None => v,
            Some(h) => v.iter().flat_map(|a| h[t].iter().map(move |b| a * b)).collect(),
        });
    }
    wald_on_moments(&moments)
}
