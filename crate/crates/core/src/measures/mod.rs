//! VaR, CoVaR, CoES and MES of bivariate laws.
//!
//! The systemic measures are functionals of the law of Y given that X is in
//! its upper β-tail. When X has an atom at its β-quantile, only the fraction
//! of that atom needed to make the tail event have probability exactly 1 − β
//! is kept, so the tail law is always a proper distribution and reduces to
//! the law of Y for β = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::CopulaKind;

pub mod cxls;
pub mod law;

pub use cxls::{cxls_probe, cxls_probe_with_tol, CxlsKind, CxlsReport, CXLS_TOL};
pub use law::{CopulaTail, DiscreteLaw, Law, Margin, MarginKind, TailPart};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskLevels {
    pub alpha: f64,
    pub beta: f64,
}

impl RiskLevels {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let l = RiskLevels { alpha, beta };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!("alpha = {} outside (0,1)", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::domain(format!("beta = {} outside [0,1)", self.beta)));
        }
        Ok(())
    }
}

/// Finite bivariate law given as (x, y, p) atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBivariate {
    atoms: Vec<(f64, f64, f64)>,
}

impl DiscreteBivariate {
    pub fn new(atoms: Vec<(f64, f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Validation("discrete bivariate law without atoms".into()));
        }
        if atoms.iter().any(|&(x, y, p)| !x.is_finite() || !y.is_finite() || !(p > 0.0) || !p.is_finite()) {
            return Err(Error::Validation("atoms need finite coordinates and positive probabilities".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.2).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("atom probabilities sum to {total}, expected 1")));
        }
        Ok(DiscreteBivariate { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64, f64)] {
        &self.atoms
    }

    pub fn marginal_x(&self) -> Result<DiscreteLaw> {
        DiscreteLaw::new(self.atoms.iter().map(|&(x, _, p)| (x, p)))
    }

    pub fn marginal_y(&self) -> Result<DiscreteLaw> {
        DiscreteLaw::new(self.atoms.iter().map(|&(_, y, p)| (y, p)))
    }

    /// Convex combination (1 − λ)·self + λ·other of the two cdfs.
    pub fn mix(&self, other: &DiscreteBivariate, lambda: f64) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|&(x, y, p)| (x, y, (1.0 - lambda) * p))
            .chain(other.atoms.iter().map(|&(x, y, p)| (x, y, lambda * p)))
            .filter(|a| a.2 > 0.0)
            .collect();
        DiscreteBivariate::new(atoms)
    }

    /// Law of Y given X ≽ VaR_β(X): atoms with x above the quantile count
    /// fully, atoms at the quantile only with the fraction that completes the
    /// tail mass 1 − β.
    pub fn tail_law(&self, beta: f64) -> Result<DiscreteLaw> {
        let v = self.marginal_x()?.quantile_or_min(beta);
        let p_gt: f64 = self.atoms.iter().filter(|a| a.0 > v).map(|a| a.2).sum();
        let p_at: f64 = self.atoms.iter().filter(|a| a.0 == v).map(|a| a.2).sum();
        let rest = (1.0 - beta - p_gt).max(0.0);
        let weighted: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .filter_map(|&(x, y, p)| {
                if x > v {
                    Some((y, p))
                } else if x == v && rest > 0.0 {
                    Some((y, p * rest / p_at))
                } else {
                    None
                }
            })
            .collect();
        let total: f64 = weighted.iter().map(|a| a.1).sum();
        DiscreteLaw::new(weighted.into_iter().map(|(y, p)| (y, p / total)))
    }
}

/// Copula model with arbitrary margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBivariate {
    pub margin_x: Margin,
    pub margin_y: Margin,
    pub copula: CopulaKind,
}

impl AnalyticBivariate {
    /// Standard bivariate normal with correlation ρ.
    pub fn std_normal_pair(rho: f64) -> Self {
        let m = Margin::standard(crate::numerics::DistKind::StdNormal);
        AnalyticBivariate { margin_x: m.clone(), margin_y: m, copula: CopulaKind::Gaussian { rho } }
    }

    pub fn validate(&self) -> Result<()> {
        self.margin_x.validate()?;
        self.margin_y.validate()?;
        self.copula.validate()
    }

    fn tail_law(&self, beta: f64) -> Result<Law> {
        self.validate()?;
        if beta == 0.0 {
            return Ok(Law::Margin(self.margin_y.clone()));
        }
        let c = self.copula;
        if self.margin_x.is_continuous() {
            return Ok(Law::CopulaTail(CopulaTail::at_level(c, self.margin_y.clone(), 1.0 - beta)));
        }
        // X = F⁻¹(U₁) has an atom at v: blend the tails above F(v) and above F(v−).
        let v = self.margin_x.quantile(beta);
        let (above, below) = (1.0 - self.margin_x.cdf(v), 1.0 - self.margin_x.cdf_below(v));
        let w = (1.0 - beta - above) / (below - above);
        let mut parts = Vec::with_capacity(2);
        for (weight, tail) in [((1.0 - w) * above / (1.0 - beta), above), (w * below / (1.0 - beta), below)] {
            if weight > 0.0 && tail > 0.0 {
                parts.push(TailPart { weight, x1: c.score_isf(tail), tail });
            }
        }
        Ok(Law::CopulaTail(CopulaTail { copula: c, margin_y: self.margin_y.clone(), parts }))
    }
}

/// How the conditional law of a mixture is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixtureRule {
    /// Condition the mixed joint cdf: component weights λᵢ·P(Xᵢ > v)/(1 − β).
    #[default]
    JointCdf,
    /// Mix the component conditional laws P(Y ≤ y | Xᵢ > v) with weights λᵢ.
    ConditionalLaws,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Bivariate {
    Discrete(DiscreteBivariate),
    Analytic(AnalyticBivariate),
    /// Finite mixture of copula models sharing the copula and the Y margin
    /// and having continuous X margins.
    Mixture { components: Vec<(f64, AnalyticBivariate)>, rule: MixtureRule },
}

impl Bivariate {
    pub fn marginal_x(&self) -> Result<Law> {
        Ok(match self {
            Bivariate::Discrete(d) => Law::Discrete(d.marginal_x()?),
            Bivariate::Analytic(a) => Law::Margin(a.margin_x.clone()),
            Bivariate::Mixture { components, .. } => {
                Law::Mixture(components.iter().map(|(w, a)| (*w, a.margin_x.clone())).collect())
            }
        })
    }

    pub fn marginal_y(&self) -> Result<Law> {
        Ok(match self {
            Bivariate::Discrete(d) => Law::Discrete(d.marginal_y()?),
            Bivariate::Analytic(a) => Law::Margin(a.margin_y.clone()),
            Bivariate::Mixture { components, .. } => {
                Law::Mixture(components.iter().map(|(w, a)| (*w, a.margin_y.clone())).collect())
            }
        })
    }
}

fn validate_mixture(components: &[(f64, AnalyticBivariate)]) -> Result<()> {
    let first = components.first().ok_or_else(|| Error::Validation("empty mixture".into()))?;
    let total: f64 = components.iter().map(|c| c.0).sum();
    if components.iter().any(|c| !(c.0 > 0.0)) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::Validation("mixture weights must be positive and sum to one".into()));
    }
    for (_, a) in components {
        a.validate()?;
        if a.copula != first.1.copula || a.margin_y != first.1.margin_y {
            return Err(Error::Validation("mixture components must share the copula and the Y margin".into()));
        }
        if !a.margin_x.is_continuous() {
            return Err(Error::Validation("mixture components need continuous X margins".into()));
        }
    }
    Ok(())
}

/// Lower β-quantile inf{x : F(x) ≥ β}.
pub fn var_level(dist: &Law, beta: f64) -> Result<f64> {
    dist.var_level(beta)
}

/// The law of Y given X ≽ VaR_β(X).
pub fn conditional_tail_dist(dist: &Bivariate, beta: f64) -> Result<Law> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::domain(format!("beta = {beta} outside [0,1)")));
    }
    match dist {
        Bivariate::Discrete(d) => Ok(Law::Discrete(d.tail_law(beta)?)),
        Bivariate::Analytic(a) => a.tail_law(beta),
        Bivariate::Mixture { components, rule } => {
            validate_mixture(components)?;
            let base = &components[0].1;
            if beta == 0.0 {
                return Ok(Law::Margin(base.margin_y.clone()));
            }
            let v = dist.marginal_x()?.var_level(beta)?;
            let mut parts = Vec::with_capacity(components.len());
            for (lambda, a) in components {
                let tail = a.margin_x.sf(v);
                let weight = match rule {
                    MixtureRule::JointCdf => lambda * tail,
                    MixtureRule::ConditionalLaws => *lambda,
                };
                if tail > 0.0 {
                    parts.push(TailPart { weight, x1: base.copula.score_isf(tail), tail });
                } else if *rule == MixtureRule::ConditionalLaws {
                    return Err(Error::numeric("conditioning on an event of probability zero"));
                }
            }
            let total: f64 = parts.iter().map(|p| p.weight).sum();
            for p in &mut parts {
                p.weight /= total;
            }
            Ok(Law::CopulaTail(CopulaTail { copula: base.copula, margin_y: base.margin_y.clone(), parts }))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemicKind {
    CoVaR,
    CoES,
    MES,
}

/// CoVaR_{α|β}, CoES_{α|β} or MES_β of `dist`.
pub fn systemic_measure(kind: SystemicKind, dist: &Bivariate, levels: RiskLevels) -> Result<f64> {
    let tail = conditional_tail_dist(dist, levels.beta)?;
    match kind {
        SystemicKind::CoVaR => {
            levels.validate()?;
            tail.var_level(levels.alpha)
        }
        SystemicKind::CoES => {
            if !(0.0..1.0).contains(&levels.alpha) {
                return Err(Error::domain(format!("alpha = {} outside [0,1)", levels.alpha)));
            }
            tail.expected_shortfall(levels.alpha)
        }
        SystemicKind::MES => tail.mean(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::{norm_pdf, norm_quantile};
    use crate::numerics::DistKind;
    use approx::assert_abs_diff_eq;

    fn normal_pair(rho: f64) -> Bivariate {
        Bivariate::Analytic(AnalyticBivariate::std_normal_pair(rho))
    }

    #[test]
    fn var_level_examples() {
        let two = Law::Discrete(DiscreteLaw::new([(0.0, 0.5), (1.0, 0.5)]).unwrap());
        assert_eq!(var_level(&two, 0.5).unwrap(), 0.0);
        let p = 0.3;
        let bern = Law::Discrete(DiscreteLaw::new([(0.0, p), (1.0, 1.0 - p)]).unwrap());
        for b in [0.300_001, 0.5, 0.99] {
            assert_eq!(var_level(&bern, b).unwrap(), 1.0);
        }
        // at β = p the lower quantile is still the lower atom
        assert_eq!(var_level(&bern, p).unwrap(), 0.0);
        let n = Law::Margin(Margin::standard(DistKind::StdNormal));
        assert_abs_diff_eq!(var_level(&n, 0.95).unwrap(), 1.644_853_626_951_472, epsilon = 1e-12);
        assert!(var_level(&n, 1.0).is_err());
        assert!(var_level(&n, -0.1).is_err());
    }

    #[test]
    fn tail_at_zero_is_y_margin() {
        let d = DiscreteBivariate::new(vec![(0.0, 1.0, 0.2), (1.0, 2.0, 0.5), (1.0, 5.0, 0.3)]).unwrap();
        let t = d.tail_law(0.0).unwrap();
        let y = d.marginal_y().unwrap();
        for (a, b) in t.atoms().iter().zip(y.atoms()) {
            assert_eq!(a.0, b.0);
            assert_abs_diff_eq!(a.1, b.1, epsilon = 1e-15);
        }
        let a = normal_pair(0.7);
        assert_eq!(conditional_tail_dist(&a, 0.0).unwrap(), Law::Margin(Margin::standard(DistKind::StdNormal)));
    }

    #[test]
    fn three_atom_correction_by_hand() {
        // X has an atom at VaR_0.5 = 1 with mass 0.6; only 0.4/0.6 of it enters the tail.
        let d = DiscreteBivariate::new(vec![(0.0, 1.0, 0.1), (1.0, 2.0, 0.6), (2.0, 3.0, 0.3)]).unwrap();
        let t = d.tail_law(0.5).unwrap();
        // P(Y ≤ y, X > 1) = 0.3·1{y ≥ 3}; P(Y ≤ y | X = 1) = 1{y ≥ 2}; 1 − β − P(X > 1) = 0.2
        let hand = |y: f64| (0.3 * (y >= 3.0) as u8 as f64 + 0.2 * (y >= 2.0) as u8 as f64) / 0.5;
        for y in [0.0, 1.0, 2.0, 2.5, 3.0, 4.0] {
            assert_abs_diff_eq!(t.cdf(y), hand(y), epsilon = 1e-15);
        }
    }

    #[test]
    fn continuous_pair_matches_plain_right_tail() {
        let rho = 0.6;
        let beta = 0.9;
        let tail = conditional_tail_dist(&normal_pair(rho), beta).unwrap();
        let z = norm_quantile(beta);
        for y in [-1.0, 0.0, 0.8, 2.5] {
            // P(Y ≤ y | X > z) from the conditional normal Y | X = s
            let direct = crate::numerics::quadrature::integrate_upper(
                |s| crate::numerics::special::norm_cdf((y - rho * s) / (1.0f64 - rho * rho).sqrt()) * norm_pdf(s),
                z,
                1e-14,
            )
            .unwrap()
                / (1.0 - beta);
            assert_abs_diff_eq!(tail.cdf(y).unwrap(), direct, epsilon = 1e-8);
        }
    }

    #[test]
    fn normal_pair_mes_and_covar() {
        let l = RiskLevels::new(0.95, 0.95).unwrap();
        let mes = systemic_measure(SystemicKind::MES, &normal_pair(0.8), l).unwrap();
        let z = norm_quantile(0.95);
        assert_abs_diff_eq!(mes, 0.8 * norm_pdf(z) / 0.05, epsilon = 1e-9);
        assert_abs_diff_eq!(mes, 1.6502, epsilon = 1e-3);
        let covar = systemic_measure(SystemicKind::CoVaR, &normal_pair(0.8), l).unwrap();
        assert_abs_diff_eq!(covar, 2.77, epsilon = 0.01);
    }

    #[test]
    fn independence_reduces_to_margin() {
        let m = Margin::location_scale(DistKind::StudentT { df: 4.0 }, 0.5, 2.0);
        let b = Bivariate::Analytic(AnalyticBivariate {
            margin_x: Margin::standard(DistKind::StdNormal),
            margin_y: m.clone(),
            copula: CopulaKind::independence(),
        });
        let l = RiskLevels::new(0.9, 0.95).unwrap();
        let c = systemic_measure(SystemicKind::CoVaR, &b, l).unwrap();
        assert_abs_diff_eq!(c, m.quantile(0.9), epsilon = 1e-9);
    }

    #[test]
    fn mes_is_coes_at_level_zero() {
        for b in [normal_pair(0.8), normal_pair(-0.3)] {
            let mes = systemic_measure(SystemicKind::MES, &b, RiskLevels { alpha: 0.5, beta: 0.95 }).unwrap();
            let coes = systemic_measure(SystemicKind::CoES, &b, RiskLevels { alpha: 0.0, beta: 0.95 }).unwrap();
            assert_abs_diff_eq!(mes, coes, epsilon = 1e-6);
        }
    }

    #[test]
    fn boundary_levels() {
        let b = Bivariate::Analytic(AnalyticBivariate {
            margin_x: Margin::standard(DistKind::StdNormal),
            margin_y: Margin::standard(DistKind::StudentT { df: 5.0 }),
            copula: CopulaKind::StudentT { rho: 0.5, df: 5.0 },
        });
        let y = Law::Margin(Margin::standard(DistKind::StudentT { df: 5.0 }));
        let l = RiskLevels { alpha: 0.9, beta: 0.0 };
        assert_abs_diff_eq!(systemic_measure(SystemicKind::CoVaR, &b, l).unwrap(), y.quantile(0.9).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            systemic_measure(SystemicKind::CoES, &b, l).unwrap(),
            y.expected_shortfall(0.9).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn coes_dominates_covar() {
        let b = Bivariate::Analytic(AnalyticBivariate {
            margin_x: Margin::standard(DistKind::StdNormal),
            margin_y: Margin::location_scale(DistKind::StdNormal, 1.0, 0.5),
            copula: CopulaKind::StudentT { rho: 0.4, df: 3.0 },
        });
        for (a, be) in [(0.5, 0.5), (0.9, 0.95), (0.99, 0.9)] {
            let l = RiskLevels::new(a, be).unwrap();
            let c = systemic_measure(SystemicKind::CoVaR, &b, l).unwrap();
            let e = systemic_measure(SystemicKind::CoES, &b, l).unwrap();
            assert!(e >= c, "{a} {be}: {e} < {c}");
        }
    }

    #[test]
    fn empirical_x_margin_with_atoms() {
        // X takes values 0, 1, 2 with probability 1/3 each; under independence
        // the tail law is the Y margin for every β.
        let b = Bivariate::Analytic(AnalyticBivariate {
            margin_x: Margin::empirical(&[0.0, 1.0, 2.0]).unwrap(),
            margin_y: Margin::standard(DistKind::StdNormal),
            copula: CopulaKind::independence(),
        });
        let l = RiskLevels::new(0.9, 0.5).unwrap();
        assert_abs_diff_eq!(systemic_measure(SystemicKind::CoVaR, &b, l).unwrap(), norm_quantile(0.9), epsilon = 1e-9);
        // with dependence the tail P(U₁ > 1/2) is blended from the tails above 1/3 and 2/3
        let dep = Bivariate::Analytic(AnalyticBivariate { copula: CopulaKind::Gaussian { rho: 0.7 }, ..match b {
            Bivariate::Analytic(a) => a,
            _ => unreachable!(),
        } });
        let law = conditional_tail_dist(&dep, 0.5).unwrap();
        let direct = Law::CopulaTail(CopulaTail::at_level(CopulaKind::Gaussian { rho: 0.7 }, Margin::standard(DistKind::StdNormal), 0.5));
        let blend = |y: f64| {
            let c = CopulaKind::Gaussian { rho: 0.7 };
            let m = Margin::standard(DistKind::StdNormal);
            let lo = Law::CopulaTail(CopulaTail::at_level(c, m.clone(), 2.0 / 3.0)).cdf(y).unwrap();
            let hi = Law::CopulaTail(CopulaTail::at_level(c, m, 1.0 / 3.0)).cdf(y).unwrap();
            // [P(U₁ > 2/3, Y ≤ y) + ½·P(1/3 < U₁ ≤ 2/3, Y ≤ y)] / ½
            (hi / 3.0 + 0.5 * (2.0 * lo / 3.0 - hi / 3.0)) / 0.5
        };
        for y in [-1.0, 0.3, 1.5] {
            assert_abs_diff_eq!(law.cdf(y).unwrap(), blend(y), epsilon = 1e-10);
            assert!((law.cdf(y).unwrap() - direct.cdf(y).unwrap()).abs() > 1e-4);
        }
    }
}
