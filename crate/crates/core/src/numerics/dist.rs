//! Univariate distributions used across the toolkit.

use serde::{Deserialize, Serialize};

use super::special;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind {
    StdNormal,
    StudentT { df: f64 },
    ChiSq { k: u32 },
    Weibull { shape: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistFn {
    Pdf,
    Cdf,
    Quantile,
}

impl DistKind {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DistKind::StdNormal => true,
            DistKind::StudentT { df } => df > 0.0,
            DistKind::ChiSq { k } => k >= 1,
            DistKind::Weibull { shape, scale } => shape > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid distribution parameters {self:?}")))
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            DistKind::StdNormal => special::norm_pdf(x),
            DistKind::StudentT { df } => special::t_pdf(x, df),
            DistKind::ChiSq { k } => special::chi2_pdf(x, k as f64),
            DistKind::Weibull { shape, scale } => {
                if x < 0.0 {
                    0.0
                } else {
                    let z = x / scale;
                    shape / scale * z.powf(shape - 1.0) * (-z.powf(shape)).exp()
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            DistKind::StdNormal => special::norm_cdf(x),
            DistKind::StudentT { df } => special::t_cdf(x, df),
            DistKind::ChiSq { k } => special::chi2_cdf(x, k as f64),
            DistKind::Weibull { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / scale).powf(shape)).exp_m1()
                }
            }
        }
    }

    /// Survival function 1 − F(x), computed without cancellation where possible.
    pub fn sf(&self, x: f64) -> f64 {
        match *self {
            DistKind::StdNormal => special::norm_sf(x),
            DistKind::StudentT { df } => special::t_cdf(-x, df),
            DistKind::ChiSq { k } => special::chi2_sf(x, k as f64),
            DistKind::Weibull { shape, scale } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(x / scale).powf(shape)).exp()
                }
            }
        }
    }

    /// Quantile for p in the open unit interval (the endpoints map to the
    /// support bounds).
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            DistKind::StdNormal => special::norm_quantile(p),
            DistKind::StudentT { df } => special::t_quantile(p, df),
            DistKind::ChiSq { k } => special::chi2_quantile(p, k as f64),
            DistKind::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
        }
    }

    /// Inverse survival function: the x with 1 − F(x) = q.
    pub fn isf(&self, q: f64) -> f64 {
        match *self {
            DistKind::StdNormal => -special::norm_quantile(q),
            DistKind::StudentT { df } => -special::t_quantile(q, df),
            DistKind::ChiSq { k } => special::chi2_quantile(1.0 - q, k as f64),
            DistKind::Weibull { shape, scale } => scale * (-q.ln()).powf(1.0 / shape),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistKind::StdNormal => 0.0,
            DistKind::StudentT { df } => {
                if df > 1.0 {
                    0.0
                } else {
                    f64::NAN
                }
            }
            DistKind::ChiSq { k } => k as f64,
            DistKind::Weibull { shape, scale } => scale * special::ln_gamma(1.0 + 1.0 / shape).exp(),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            DistKind::StdNormal => 1.0,
            DistKind::StudentT { df } => {
                if df > 2.0 {
                    df / (df - 2.0)
                } else {
                    f64::INFINITY
                }
            }
            DistKind::ChiSq { k } => 2.0 * k as f64,
            DistKind::Weibull { shape, scale } => {
                let g1 = special::ln_gamma(1.0 + 1.0 / shape).exp();
                let g2 = special::ln_gamma(1.0 + 2.0 / shape).exp();
                scale * scale * (g2 - g1 * g1)
            }
        }
    }
}

/// Evaluates the pdf, cdf or quantile of `kind` at `arg`.
pub fn dist_fn(kind: DistKind, which: DistFn, arg: f64) -> Result<f64> {
    kind.validate()?;
    if arg.is_nan() {
        return Err(Error::domain("NaN argument"));
    }
    match which {
        DistFn::Pdf => Ok(kind.pdf(arg)),
        DistFn::Cdf => Ok(kind.cdf(arg)),
        DistFn::Quantile => {
            if !(arg > 0.0 && arg < 1.0) {
                return Err(Error::domain(format!("quantile level {arg} outside (0,1)")));
            }
            Ok(kind.quantile(arg))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spec_examples() {
        assert_eq!(dist_fn(DistKind::StdNormal, DistFn::Cdf, 0.0).unwrap(), 0.5);
        let q = dist_fn(DistKind::StdNormal, DistFn::Quantile, 0.95).unwrap();
        assert_abs_diff_eq!(q, 1.6449, epsilon = 1e-4);
        let c = dist_fn(DistKind::ChiSq { k: 2 }, DistFn::Quantile, 0.95).unwrap();
        assert_abs_diff_eq!(c, -2.0 * 0.05f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(c, 5.9915, epsilon = 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(dist_fn(DistKind::StdNormal, DistFn::Quantile, 1.0).is_err());
        assert!(dist_fn(DistKind::StdNormal, DistFn::Quantile, 0.0).is_err());
        assert!(dist_fn(DistKind::StudentT { df: -1.0 }, DistFn::Cdf, 0.0).is_err());
        assert!(dist_fn(DistKind::ChiSq { k: 0 }, DistFn::Cdf, 1.0).is_err());
        assert!(dist_fn(DistKind::Weibull { shape: 0.0, scale: 1.0 }, DistFn::Cdf, 1.0).is_err());
    }

    #[test]
    fn weibull_mean_of_contamination_noise() {
        let w = DistKind::Weibull { shape: 10.0, scale: 0.3 };
        assert_abs_diff_eq!(w.mean(), 0.285_46, epsilon = 1e-4);
        assert_abs_diff_eq!(w.cdf(w.quantile(0.3)), 0.3, epsilon = 1e-14);
    }

    #[test]
    fn round_trip_all_kinds() {
        let kinds = [
            DistKind::StdNormal,
            DistKind::StudentT { df: 5.0 },
            DistKind::StudentT { df: 1.3 },
            DistKind::ChiSq { k: 1 },
            DistKind::ChiSq { k: 5 },
            DistKind::Weibull { shape: 10.0, scale: 0.3 },
            DistKind::Weibull { shape: 0.7, scale: 2.0 },
        ];
        let mut p = 1e-8;
        while p < 1.0 - 1e-8 {
            for k in &kinds {
                let q = k.quantile(p);
                assert!((k.cdf(q) - p).abs() <= 1e-10, "{k:?} p={p}");
            }
            p = if p < 0.01 { p * 3.0 } else if p < 0.99 { p + 0.0137 } else { 1.0 - (1.0 - p) / 3.0 };
        }
    }
}
