//! Diebold–Mariano tests on bivariate score differences and the traffic-light
//! classification of the mean difference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::find_root;
use crate::numerics::special::{chi2_cdf, norm_sf};
use crate::scoring::{mo_score, ForecastTuple, ScoreSpec};
use crate::series::LossSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreDiffSeries {
    pub diffs: Vec<(f64, f64)>,
}

impl ScoreDiffSeries {
    pub fn new(diffs: Vec<(f64, f64)>) -> Result<Self> {
        if diffs.iter().any(|d| !d.0.is_finite() || !d.1.is_finite()) {
            return Err(Error::numeric("non-finite score difference"));
        }
        Ok(ScoreDiffSeries { diffs })
    }

    pub fn n(&self) -> usize {
        self.diffs.len()
    }

    pub fn mean(&self) -> (f64, f64) {
        let n = self.n() as f64;
        let (a, b) = self.diffs.iter().fold((0.0, 0.0), |acc, d| (acc.0 + d.0, acc.1 + d.1));
        (a / n, b / n)
    }

    pub fn negated(&self) -> Self {
        ScoreDiffSeries { diffs: self.diffs.iter().map(|d| (-d.0, -d.1)).collect() }
    }
}

/// d_t = S(r₁,t) − S(r₂,t) per period.
pub fn score_diff_series(
    f1: &[ForecastTuple],
    f2: &[ForecastTuple],
    obs: &LossSeries,
    spec: &ScoreSpec,
) -> Result<ScoreDiffSeries> {
    if f1.len() != f2.len() || f1.len() != obs.len() {
        return Err(Error::Validation(format!(
            "length mismatch: {} and {} forecasts for {} observations",
            f1.len(),
            f2.len(),
            obs.len()
        )));
    }
    if obs.len() < 2 {
        return Err(Error::InsufficientData("at least 2 periods are needed".into()));
    }
    spec.validate()?;
    let mut diffs = Vec::with_capacity(obs.len());
    for t in 0..obs.len() {
        if f1[t].levels != f2[t].levels {
            return Err(Error::Validation(format!("forecasts use different risk levels at period {t}")));
        }
        let o = obs.obs(t);
        let a = mo_score(&f1[t], o, spec).map_err(|e| e.at_period(t))?;
        let b = mo_score(&f2[t], o, spec).map_err(|e| e.at_period(t))?;
        let d = a - b;
        diffs.push((d.s1, d.s2));
    }
    ScoreDiffSeries::new(diffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Flat,
    Bartlett,
}

impl Kernel {
    fn weight(&self, h: usize, m: usize) -> f64 {
        match self {
            Kernel::Flat => 1.0,
            Kernel::Bartlett => 1.0 - h as f64 / (m as f64 + 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HacEstimate {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
    pub m: usize,
    pub kernel: Kernel,
    /// True when an eigenvalue was lifted to the positive floor.
    pub repaired: bool,
}

impl HacEstimate {
    pub fn identity() -> Self {
        HacEstimate { s11: 1.0, s12: 0.0, s22: 1.0, m: 0, kernel: Kernel::Flat, repaired: false }
    }

    pub fn from_matrix(s11: f64, s12: f64, s22: f64) -> Self {
        HacEstimate { s11, s12, s22, m: 0, kernel: Kernel::Flat, repaired: false }
    }

    fn det(&self) -> f64 {
        self.s11 * self.s22 - self.s12 * self.s12
    }

    /// d′Ω⁻¹d.
    pub fn quad_form(&self, d: (f64, f64)) -> Result<f64> {
        let det = self.det();
        if !(det > 0.0) || !(self.s11 > 0.0) {
            return Err(Error::DegenerateCovariance(
                "score-difference covariance is singular; use the degenerate single-component test".into(),
            ));
        }
        Ok((self.s22 * d.0 * d.0 - 2.0 * self.s12 * d.0 * d.1 + self.s11 * d.1 * d.1) / det)
    }

    /// Lifts eigenvalues below 1e−12·trace to that floor.
    fn repair(mut self) -> Self {
        let tr = self.s11 + self.s22;
        let floor = 1e-12 * tr;
        let half_gap = (0.25 * (self.s11 - self.s22).powi(2) + self.s12 * self.s12).sqrt();
        let (l1, l2) = (0.5 * tr + half_gap, 0.5 * tr - half_gap);
        if tr <= 0.0 || l2 >= floor {
            return self;
        }
        // eigenvector for l1
        let (vx, vy) = if self.s12.abs() > 0.0 {
            let v = (self.s12, l1 - self.s11);
            let nrm = (v.0 * v.0 + v.1 * v.1).sqrt();
            (v.0 / nrm, v.1 / nrm)
        } else if self.s11 >= self.s22 {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let (a, b) = (l1.max(floor), floor);
        self.s11 = a * vx * vx + b * vy * vy;
        self.s22 = a * vy * vy + b * vx * vx;
        self.s12 = (a - b) * vx * vy;
        self.repaired = true;
        self
    }
}

/// Long-run covariance with 1/n normalization; m = 0 is the sample covariance.
pub fn hac_cov(diffs: &ScoreDiffSeries, m: usize, kernel: Kernel) -> Result<HacEstimate> {
    let n = diffs.n();
    if n <= 1 {
        return Err(Error::InsufficientData("HAC covariance needs at least 2 periods".into()));
    }
    if m >= n {
        return Err(Error::Validation(format!("lag truncation {m} must be below n = {n}")));
    }
    let (m1, m2) = diffs.mean();
    let c: Vec<(f64, f64)> = diffs.diffs.iter().map(|d| (d.0 - m1, d.1 - m2)).collect();
    let mut s = [0.0; 3];
    for d in &c {
        s[0] += d.0 * d.0;
        s[1] += d.0 * d.1;
        s[2] += d.1 * d.1;
    }
    for h in 1..=m {
        let w = kernel.weight(h, m);
        for t in h..n {
            let (a, b) = (c[t], c[t - h]);
            s[0] += w * 2.0 * a.0 * b.0;
            s[1] += w * (a.0 * b.1 + b.0 * a.1);
            s[2] += w * 2.0 * a.1 * b.1;
        }
    }
    let nf = n as f64;
    let est = HacEstimate { s11: s[0] / nf, s12: s[1] / nf, s22: s[2] / nf, m, kernel, repaired: false };
    Ok(est.repair())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    TwoSided,
    OneHalfSided,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    TwoSided,
    OneSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrafficZone {
    Green,
    Yellow,
    Orange,
    Red,
    Grey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    pub p_value: f64,
    pub dbar: (f64, f64),
    pub omega: HacEstimate,
    pub hypothesis: Hypothesis,
    pub zone: Option<TrafficZone>,
    pub n: usize,
}

impl DmResult {
    pub fn rejects(&self, nu: f64) -> bool {
        self.p_value < nu
    }
}

/// Wald statistic n·d̄′Ω̂⁻¹d̄ against χ²₂.
pub fn dm_two_sided(diffs: &ScoreDiffSeries, omega: &HacEstimate) -> Result<DmResult> {
    let dbar = diffs.mean();
    let n = diffs.n();
    let statistic = n as f64 * omega.quad_form(dbar)?;
    Ok(DmResult {
        statistic,
        p_value: (-statistic / 2.0).exp().min(1.0),
        dbar,
        omega: *omega,
        hypothesis: Hypothesis::TwoSided,
        zone: None,
        n,
    })
}

/// Level of the one-and-a-half-sided test at critical value t = χ²_{2,1−ν̃}.
fn os_level(crit: f64) -> f64 {
    0.5 * (1.0 + (-crit / 2.0).exp() - chi2_cdf(crit, 1.0))
}

/// Infimum over c ≤ 0 of the shifted Wald statistics.
pub fn dm_one_half_sided(diffs: &ScoreDiffSeries, omega: &HacEstimate) -> Result<DmResult> {
    if !(omega.s11 > 0.0) {
        return Err(Error::DegenerateCovariance("VaR score differences have zero variance".into()));
    }
    let dbar = diffs.mean();
    let n = diffs.n();
    let m2 = dbar.1.max(omega.s12 / omega.s11 * dbar.0);
    let statistic = n as f64 * omega.quad_form((dbar.0, m2))?;
    Ok(DmResult {
        statistic,
        p_value: os_level(statistic).clamp(0.0, 1.0),
        dbar,
        omega: *omega,
        hypothesis: Hypothesis::OneHalfSided,
        zone: None,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelAdjustment {
    pub nu: f64,
    pub nu_tilde: f64,
    pub chi2_crit: f64,
    pub nu_prime: f64,
}

/// Nominal χ²₂ level ν̃ giving the one-and-a-half-sided test actual size ν.
pub fn adjust_level(nu: f64) -> Result<LevelAdjustment> {
    if !(nu > 0.0 && nu < 0.5) {
        return Err(Error::domain(format!("level must lie in (0, 0.5), got {nu}")));
    }
    let nu_tilde = find_root(|nt| os_level(-2.0 * nt.ln()) - nu, 1e-15, 1.0 - 1e-15, 1e-15)?;
    let chi2_crit = -2.0 * nu_tilde.ln();
    Ok(LevelAdjustment { nu, nu_tilde, chi2_crit, nu_prime: 0.5 - 0.5 * chi2_cdf(chi2_crit, 1.0) })
}

/// √n·d̄₂/ŝ₂₂^{1/2} for identical VaR forecasts.
pub fn dm_degenerate(diffs: &ScoreDiffSeries, side: Side, m: usize, kernel: Kernel) -> Result<DmResult> {
    let n = diffs.n();
    let omega = hac_cov(diffs, m, kernel)?;
    let dbar = diffs.mean();
    if !(omega.s22 > 0.0) {
        return Err(Error::DegenerateCovariance("systemic score differences have zero variance".into()));
    }
    let statistic = (n as f64).sqrt() * dbar.1 / omega.s22.sqrt();
    let p_value = match side {
        Side::TwoSided => (2.0 * norm_sf(statistic.abs())).min(1.0),
        Side::OneSided => norm_sf(statistic),
    };
    Ok(DmResult { statistic, p_value, dbar, omega, hypothesis: Hypothesis::Degenerate, zone: None, n })
}

/// Traffic-light zone of the mean score difference.
pub fn classify_zone(dbar: (f64, f64), omega: &HacEstimate, n: usize, nu: f64) -> Result<TrafficZone> {
    let crit = adjust_level(nu)?.chi2_crit;
    let e1 = (omega.s11 * crit / n as f64).sqrt();
    if dbar.0 < -e1 {
        return Ok(TrafficZone::Red);
    }
    if dbar.0 > e1 {
        return Ok(TrafficZone::Grey);
    }
    if n as f64 * omega.quad_form(dbar)? <= crit {
        return Ok(TrafficZone::Yellow);
    }
    if dbar.1 > omega.s12 / omega.s11 * dbar.0 {
        Ok(TrafficZone::Green)
    } else {
        Ok(TrafficZone::Orange)
    }
}

/// The full comparative backtest: the one-and-a-half-sided test and zone, or
/// the degenerate one-sided test when the VaR components are identical.
pub fn comparative_backtest(diffs: &ScoreDiffSeries, m: usize, kernel: Kernel, nu: f64) -> Result<DmResult> {
    if diffs.diffs.iter().all(|d| d.0 == 0.0) {
        if diffs.diffs.iter().all(|d| d.1 == 0.0) {
            let omega = hac_cov(diffs, m, kernel)?;
            return Ok(DmResult {
                statistic: 0.0,
                p_value: 1.0,
                dbar: (0.0, 0.0),
                omega,
                hypothesis: Hypothesis::OneHalfSided,
                zone: Some(TrafficZone::Yellow),
                n: diffs.n(),
            });
        }
        return dm_degenerate(diffs, Side::OneSided, m, kernel);
    }
    let omega = hac_cov(diffs, m, kernel)?;
    let mut r = dm_one_half_sided(diffs, &omega)?;
    r.zone = Some(classify_zone(r.dbar, &omega, r.n, nu)?);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(dbar: (f64, f64), n: usize) -> ScoreDiffSeries {
        ScoreDiffSeries::new(vec![dbar; n]).unwrap()
    }

    #[test]
    fn level_table() {
        let a = adjust_level(0.05).unwrap();
        assert_abs_diff_eq!(a.nu_tilde, 0.0766, epsilon = 5e-5);
        assert_abs_diff_eq!(a.nu_prime, 0.0117, epsilon = 1e-4);
        assert_abs_diff_eq!(adjust_level(0.01).unwrap().nu_tilde, 0.0160, epsilon = 5e-5);
        assert_abs_diff_eq!(adjust_level(0.10).unwrap().nu_tilde, 0.149, epsilon = 5e-4);
        assert_abs_diff_eq!(a.chi2_crit, 5.139, epsilon = 1e-3);
        assert!(adjust_level(0.5).is_err());
    }

    #[test]
    fn two_sided_arithmetic() {
        let r = dm_two_sided(&series((0.1, 0.2), 100), &HacEstimate::identity()).unwrap();
        assert_abs_diff_eq!(r.statistic, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, (-2.5f64).exp(), epsilon = 1e-15);
        let r = dm_two_sided(&series((0.0, 0.0), 10), &HacEstimate::identity()).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn one_half_sided_examples() {
        let id = HacEstimate::identity();
        let r = dm_one_half_sided(&series((0.0, -1.0), 100), &id).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = dm_one_half_sided(&series((0.0, 0.3), 100), &id).unwrap();
        assert_abs_diff_eq!(r.statistic, 9.0, epsilon = 1e-12);
        assert!(r.statistic > adjust_level(0.05).unwrap().chi2_crit);
        assert!(r.rejects(0.05));
        // the p-value inverts the level equation
        let crit = adjust_level(0.05).unwrap().chi2_crit;
        assert_abs_diff_eq!(os_level(crit), 0.05, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_examples() {
        let s = ScoreDiffSeries::new((0..100).map(|i| (0.0, if i % 2 == 0 { 1.1 } else { -0.9 })).collect()).unwrap();
        let r = dm_degenerate(&s, Side::OneSided, 0, Kernel::Flat).unwrap();
        assert_abs_diff_eq!(r.statistic, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, 0.158655, epsilon = 1e-6);
        let s = ScoreDiffSeries::new((0..10).map(|i| (0.0, if i % 2 == 0 { 1.0 } else { -1.0 })).collect()).unwrap();
        let r = dm_degenerate(&s, Side::TwoSided, 0, Kernel::Flat).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        assert!(dm_degenerate(&series((0.0, 1.0), 10), Side::TwoSided, 0, Kernel::Flat).is_err());
    }

    #[test]
    fn zones() {
        let id = HacEstimate::identity();
        let z = |d| classify_zone(d, &id, 100, 0.05).unwrap();
        assert_eq!(z((0.0, 0.0)), TrafficZone::Yellow);
        assert_eq!(z((0.3, 0.0)), TrafficZone::Grey);
        assert_eq!(z((-0.3, 0.0)), TrafficZone::Red);
        assert_eq!(z((0.0, 0.3)), TrafficZone::Green);
        assert_eq!(z((0.0, -0.3)), TrafficZone::Orange);
        let crit = adjust_level(0.05).unwrap().chi2_crit;
        assert_abs_diff_eq!((crit / 100.0f64).sqrt(), 0.2267, epsilon = 1e-4);
    }

    #[test]
    fn constant_series_has_zero_covariance() {
        let h = hac_cov(&series((1.0, 2.0), 50), 3, Kernel::Bartlett).unwrap();
        assert_eq!((h.s11, h.s12, h.s22), (0.0, 0.0, 0.0));
    }

    #[test]
    fn bartlett_matches_brute_force() {
        // MA(1) series built from a fixed sequence
        let e: Vec<(f64, f64)> = (0..200).map(|i| (((i * 37) % 23) as f64 / 7.0 - 1.5, ((i * 53) % 31) as f64 / 9.0 - 1.7)).collect();
        let d: Vec<(f64, f64)> = (1..200).map(|t| (e[t].0 + 0.6 * e[t - 1].0, e[t].1 - 0.4 * e[t - 1].0)).collect();
        let s = ScoreDiffSeries::new(d.clone()).unwrap();
        let m = 5;
        let h = hac_cov(&s, m, Kernel::Bartlett).unwrap();
        let n = d.len();
        let mean = s.mean();
        let c = |t: usize| [d[t].0 - mean.0, d[t].1 - mean.1];
        let mut o = [[0.0; 2]; 2];
        for t in 0..n {
            for i in 0..2 {
                for j in 0..2 {
                    o[i][j] += c(t)[i] * c(t)[j];
                }
            }
        }
        for lag in 1..=m {
            let w = 1.0 - lag as f64 / (m as f64 + 1.0);
            for t in lag..n {
                for i in 0..2 {
                    for j in 0..2 {
                        o[i][j] += w * (c(t)[i] * c(t - lag)[j] + c(t - lag)[i] * c(t)[j]);
                    }
                }
            }
        }
        assert_abs_diff_eq!(h.s11, o[0][0] / n as f64, epsilon = 1e-12);
        assert_abs_diff_eq!(h.s12, o[0][1] / n as f64, epsilon = 1e-12);
        assert_abs_diff_eq!(h.s22, o[1][1] / n as f64, epsilon = 1e-12);
    }

    #[test]
    fn singular_matrix_is_lifted() {
        let s = ScoreDiffSeries::new((0..20).map(|i| (i as f64, 2.0 * i as f64)).collect()).unwrap();
        let h = hac_cov(&s, 0, Kernel::Flat).unwrap();
        assert!(h.repaired);
        assert!(h.det() > 0.0);
    }
}
