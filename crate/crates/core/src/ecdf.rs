//! Empirical distribution of a sample (typically standardized residuals).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::InsufficientData("empirical cdf of an empty sample".into()));
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("empirical cdf sample contains non-finite values".into()));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Number of sample points ≤ x.
    pub fn rank(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    /// Number of sample points < x.
    pub fn rank_below(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v < x)
    }

    /// Plain ecdf k/n.
    pub fn cdf(&self, x: f64) -> f64 {
        self.rank(x) as f64 / self.len() as f64
    }

    /// Left limit of the plain ecdf, P(X < x).
    pub fn cdf_below(&self, x: f64) -> f64 {
        self.rank_below(x) as f64 / self.len() as f64
    }

    /// Rescaled ecdf k/(n+1), strictly inside (0, 1) on the sample.
    pub fn pit(&self, x: f64) -> f64 {
        self.rank(x) as f64 / (self.len() as f64 + 1.0)
    }

    /// Lower quantile of the plain ecdf: the ⌈pn⌉-th order statistic.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let k = (p * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
        self.sorted[k - 1]
    }

    /// Left-continuous inverse of the rescaled ecdf: the ⌈u(n+1)⌉-th order
    /// statistic. Returns the value and whether it had to be clamped to the
    /// sample maximum (u > n/(n+1)).
    pub fn inverse_pit(&self, u: f64) -> (f64, bool) {
        let n = self.len();
        let k = (u * (n as f64 + 1.0) - 1e-9).ceil().max(1.0) as usize;
        if k > n {
            (self.sorted[n - 1], true)
        } else {
            (self.sorted[k - 1], false)
        }
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_conventions() {
        let e = EmpiricalCdf::new(&[3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.quantile(0.51), 3.0);
        assert_eq!(e.cdf(2.5), 0.5);
        assert_eq!(e.pit(4.0), 0.8);
        assert_eq!(e.inverse_pit(0.4), (2.0, false));
        assert_eq!(e.inverse_pit(0.41), (3.0, false));
        assert_eq!(e.inverse_pit(0.81), (4.0, true));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(EmpiricalCdf::new(&[]).is_err());
        assert!(EmpiricalCdf::new(&[1.0, f64::NAN]).is_err());
    }
}
