//! Bivariate Gaussian and Student t copulas.
//!
//! Everything is evaluated in "score space", i.e. after mapping each
//! uniform through the copula's own univariate quantile (Φ⁻¹ or T_ϑ⁻¹).
//! The cdf and the survival function are one-dimensional integrals of the
//! conditional distribution (h-function) against the marginal density.

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate_lower, integrate_upper};
use super::special::{ln_gamma, norm_cdf, norm_pdf, norm_quantile, t_cdf, t_pdf, t_quantile};
use crate::error::{Error, Result};

const QUAD_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CopulaKind {
    Gaussian { rho: f64 },
    StudentT { rho: f64, df: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFn {
    Density,
    Cdf,
    Survival,
}

impl CopulaKind {
    pub fn independence() -> Self {
        CopulaKind::Gaussian { rho: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CopulaKind::Gaussian { rho } => rho.abs() < 1.0,
            CopulaKind::StudentT { rho, df } => rho.abs() < 1.0 && df > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid copula parameters {self:?}")))
        }
    }

    pub fn rho(&self) -> f64 {
        match *self {
            CopulaKind::Gaussian { rho } | CopulaKind::StudentT { rho, .. } => rho,
        }
    }

    /// Same family and degrees of freedom with a different correlation.
    pub fn with_rho(&self, rho: f64) -> Self {
        match *self {
            CopulaKind::Gaussian { .. } => CopulaKind::Gaussian { rho },
            CopulaKind::StudentT { df, .. } => CopulaKind::StudentT { rho, df },
        }
    }

    pub fn to_score(&self, u: f64) -> f64 {
        match *self {
            CopulaKind::Gaussian { .. } => norm_quantile(u),
            CopulaKind::StudentT { df, .. } => t_quantile(u, df),
        }
    }

    /// Score-space coordinate of the upper-tail probability `q = 1 − u`.
    pub fn score_isf(&self, q: f64) -> f64 {
        -self.to_score(q)
    }

    pub fn score_sf(&self, x: f64) -> f64 {
        self.score_cdf(-x)
    }

    pub fn score_cdf(&self, x: f64) -> f64 {
        match *self {
            CopulaKind::Gaussian { .. } => norm_cdf(x),
            CopulaKind::StudentT { df, .. } => t_cdf(x, df),
        }
    }

    pub fn score_pdf(&self, x: f64) -> f64 {
        match *self {
            CopulaKind::Gaussian { .. } => norm_pdf(x),
            CopulaKind::StudentT { df, .. } => t_pdf(x, df),
        }
    }

    /// P(X₁ ≤ x1 | X₂ = x2) in score space.
    pub fn h_score(&self, x1: f64, x2: f64) -> f64 {
        match *self {
            CopulaKind::Gaussian { rho } => norm_cdf((x1 - rho * x2) / (1.0 - rho * rho).sqrt()),
            CopulaKind::StudentT { rho, df } => {
                let s = ((df + x2 * x2) * (1.0 - rho * rho) / (df + 1.0)).sqrt();
                t_cdf((x1 - rho * x2) / s, df + 1.0)
            }
        }
    }

    /// P(X₁ > x1 | X₂ = x2) in score space, without cancellation.
    pub fn hbar_score(&self, x1: f64, x2: f64) -> f64 {
        match *self {
            CopulaKind::Gaussian { rho } => norm_cdf((rho * x2 - x1) / (1.0 - rho * rho).sqrt()),
            CopulaKind::StudentT { rho, df } => {
                let s = ((df + x2 * x2) * (1.0 - rho * rho) / (df + 1.0)).sqrt();
                t_cdf((rho * x2 - x1) / s, df + 1.0)
            }
        }
    }

    /// h(u1 | u2) = ∂C/∂u2.
    pub fn h(&self, u1: f64, u2: f64) -> f64 {
        self.h_score(self.to_score(u1), self.to_score(u2))
    }

    /// Log copula density at score-space coordinates.
    pub fn log_density_score(&self, x1: f64, x2: f64) -> f64 {
        match *self {
            CopulaKind::Gaussian { rho } => {
                let r2 = 1.0 - rho * rho;
                -0.5 * r2.ln() - (rho * rho * (x1 * x1 + x2 * x2) - 2.0 * rho * x1 * x2) / (2.0 * r2)
            }
            CopulaKind::StudentT { rho, df } => {
                let r2 = 1.0 - rho * rho;
                let q = (x1 * x1 + x2 * x2 - 2.0 * rho * x1 * x2) / r2;
                t_copula_const(df) - 0.5 * r2.ln() - 0.5 * (df + 2.0) * (q / df).ln_1p()
                    + 0.5 * (df + 1.0) * ((x1 * x1 / df).ln_1p() + (x2 * x2 / df).ln_1p())
            }
        }
    }

    pub fn density(&self, u1: f64, u2: f64) -> f64 {
        self.log_density_score(self.to_score(u1), self.to_score(u2)).exp()
    }

    /// C(u1, u2) = ∫_{−∞}^{x2} h(u1 | s) f(s) ds.
    pub fn cdf(&self, u1: f64, u2: f64) -> Result<f64> {
        let x1 = self.to_score(u1);
        let x2 = self.to_score(u2);
        self.cdf_score(x1, x2)
    }

    pub fn cdf_score(&self, x1: f64, x2: f64) -> Result<f64> {
        integrate_lower(|s| self.h_score(x1, s) * self.score_pdf(s), x2, QUAD_TOL)
    }

    /// P(U1 > u1, U2 > u2) = ∫_{x2}^{∞} (1 − h(u1 | s)) f(s) ds.
    pub fn survival(&self, u1: f64, u2: f64) -> Result<f64> {
        let x1 = self.to_score(u1);
        let x2 = self.to_score(u2);
        self.survival_score(x1, x2)
    }

    pub fn survival_score(&self, x1: f64, x2: f64) -> Result<f64> {
        integrate_upper(|s| self.hbar_score(x1, s) * self.score_pdf(s), x2, QUAD_TOL)
    }
}

pub(crate) fn t_copula_const(df: f64) -> f64 {
    ln_gamma(0.5 * (df + 2.0)) + ln_gamma(0.5 * df) - 2.0 * ln_gamma(0.5 * (df + 1.0))
}

/// Evaluates a copula density, cdf or survival function at `u`.
pub fn copula_fn(kind: CopulaKind, which: CopulaFn, u: (f64, f64)) -> Result<f64> {
    kind.validate()?;
    let inside = |v: f64| v > 0.0 && v < 1.0;
    if !inside(u.0) || !inside(u.1) {
        return Err(Error::domain(format!("copula argument {u:?} outside the open unit square")));
    }
    match which {
        CopulaFn::Density => Ok(kind.density(u.0, u.1)),
        CopulaFn::Cdf => kind.cdf(u.0, u.1),
        CopulaFn::Survival => kind.survival(u.0, u.1),
    }
}
