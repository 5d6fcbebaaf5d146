//! Univariate laws: parametric or empirical margins, finite discrete laws,
//! finite mixtures and copula-tail laws (the distribution of Y given that X
//! exceeds a threshold).

use serde::{Deserialize, Serialize};

use crate::ecdf::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate_lower, integrate_upper, GaussLegendre};
use crate::numerics::root::find_root;
use crate::numerics::{CopulaKind, DistKind};

const QUAD_TOL: f64 = 1e-13;
/// Cumulative probabilities within this distance of a level count as reaching it.
pub const CUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MarginKind {
    Dist { dist: DistKind },
    Empirical { ecdf: EmpiricalCdf },
}

/// A location-scale transform of a standard distribution or an empirical
/// quantile table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub kind: MarginKind,
    pub loc: f64,
    pub scale: f64,
}

impl Margin {
    pub fn standard(dist: DistKind) -> Self {
        Margin { kind: MarginKind::Dist { dist }, loc: 0.0, scale: 1.0 }
    }

    pub fn location_scale(dist: DistKind, loc: f64, scale: f64) -> Self {
        Margin { kind: MarginKind::Dist { dist }, loc, scale }
    }

    pub fn empirical(sample: &[f64]) -> Result<Self> {
        Ok(Margin { kind: MarginKind::Empirical { ecdf: EmpiricalCdf::new(sample)? }, loc: 0.0, scale: 1.0 })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) || !self.loc.is_finite() || !self.scale.is_finite() {
            return Err(Error::Validation(format!("margin needs finite loc and positive scale, got ({}, {})", self.loc, self.scale)));
        }
        if let MarginKind::Dist { dist } = &self.kind {
            dist.validate()?;
        }
        Ok(())
    }

    fn std_value(&self, y: f64) -> f64 {
        (y - self.loc) / self.scale
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let z = self.std_value(y);
        match &self.kind {
            MarginKind::Dist { dist } => dist.cdf(z),
            MarginKind::Empirical { ecdf } => ecdf.cdf(z),
        }
    }

    /// P(Y < y); equals the cdf for continuous margins.
    pub fn cdf_below(&self, y: f64) -> f64 {
        match &self.kind {
            MarginKind::Dist { .. } => self.cdf(y),
            MarginKind::Empirical { ecdf } => ecdf.cdf_below(self.std_value(y)),
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, MarginKind::Dist { .. })
    }

    pub fn sf(&self, y: f64) -> f64 {
        let z = self.std_value(y);
        match &self.kind {
            MarginKind::Dist { dist } => dist.sf(z),
            MarginKind::Empirical { ecdf } => 1.0 - ecdf.cdf(z),
        }
    }

    /// Lower quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        let z = match &self.kind {
            MarginKind::Dist { dist } => dist.quantile(p),
            MarginKind::Empirical { ecdf } => ecdf.quantile(p),
        };
        self.loc + self.scale * z
    }

    pub fn isf(&self, q: f64) -> f64 {
        let z = match &self.kind {
            MarginKind::Dist { dist } => dist.isf(q),
            MarginKind::Empirical { ecdf } => ecdf.quantile(1.0 - q),
        };
        self.loc + self.scale * z
    }

    pub fn mean(&self) -> f64 {
        let m = match &self.kind {
            MarginKind::Dist { dist } => dist.mean(),
            MarginKind::Empirical { ecdf } => ecdf.mean(),
        };
        self.loc + self.scale * m
    }

    /// Lower end of the support (the 0-quantile).
    pub fn lower_bound(&self) -> f64 {
        match &self.kind {
            MarginKind::Dist { dist: DistKind::StdNormal | DistKind::StudentT { .. } } => f64::NEG_INFINITY,
            MarginKind::Dist { .. } => self.loc,
            MarginKind::Empirical { ecdf } => self.loc + self.scale * ecdf.sorted()[0],
        }
    }

    /// Value of this margin at copula score coordinate `x`, i.e.
    /// F⁻¹(G(x)) with G the copula's univariate cdf.
    pub fn from_score(&self, copula: &CopulaKind, x: f64) -> f64 {
        match (&self.kind, copula) {
            (MarginKind::Dist { dist: DistKind::StdNormal }, CopulaKind::Gaussian { .. }) => self.loc + self.scale * x,
            (MarginKind::Dist { dist: DistKind::StudentT { df } }, CopulaKind::StudentT { df: cdf, .. }) if df == cdf => {
                self.loc + self.scale * x
            }
            _ => {
                if x > 0.0 {
                    self.isf(copula.score_sf(x))
                } else {
                    self.quantile(copula.score_cdf(x))
                }
            }
        }
    }

    /// Copula score coordinate of the value `y`.
    pub fn to_score(&self, copula: &CopulaKind, y: f64) -> f64 {
        match (&self.kind, copula) {
            (MarginKind::Dist { dist: DistKind::StdNormal }, CopulaKind::Gaussian { .. }) => self.std_value(y),
            (MarginKind::Dist { dist: DistKind::StudentT { df } }, CopulaKind::StudentT { df: cdf, .. }) if df == cdf => {
                self.std_value(y)
            }
            _ => {
                let u = self.cdf(y);
                if u > 0.5 {
                    copula.score_isf(self.sf(y))
                } else {
                    copula.to_score(u)
                }
            }
        }
    }
}

/// Finite discrete law with sorted, merged atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    /// Builds a law from (value, probability) pairs; probabilities must be
    /// positive and sum to one within 1e-12.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = pairs.into_iter().filter(|&(_, p)| p != 0.0).collect();
        if atoms.iter().any(|&(v, p)| !v.is_finite() || !(p > 0.0) || !p.is_finite()) {
            return Err(Error::Validation("discrete law needs finite values and positive probabilities".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("discrete probabilities sum to {total}, expected 1")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        Ok(DiscreteLaw { atoms: merged })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 <= y).map(|a| a.1).sum()
    }

    /// Smallest atom whose cumulative probability reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let mut cum = 0.0;
        for &(v, q) in &self.atoms {
            cum += q;
            if cum >= p - CUM_TOL {
                return v;
            }
        }
        self.atoms[self.atoms.len() - 1].0
    }

    /// Lower β-quantile, with β = 0 giving the smallest atom.
    pub fn quantile_or_min(&self, beta: f64) -> f64 {
        if beta <= 0.0 {
            self.atoms[0].0
        } else {
            self.quantile(beta)
        }
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    /// (1/(1−α))∫_α^1 q(γ)dγ, evaluated exactly.
    pub fn expected_shortfall(&self, alpha: f64) -> f64 {
        let q = self.quantile(alpha);
        let mut above = 0.0;
        let mut cdf_q = 0.0;
        for &(v, p) in &self.atoms {
            if v > q {
                above += v * p;
            } else {
                cdf_q += p;
            }
        }
        (above + q * (cdf_q - alpha)) / (1.0 - alpha)
    }
}

/// One threshold component of a copula-tail law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPart {
    pub weight: f64,
    /// Threshold of the conditioning variable in copula score space.
    pub x1: f64,
    /// Probability of the conditioning event, 1 − u₁.
    pub tail: f64,
}

/// Law of Y given X > threshold for a copula model, optionally a finite
/// mixture of such laws sharing the copula and the Y margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaTail {
    pub copula: CopulaKind,
    pub margin_y: Margin,
    pub parts: Vec<TailPart>,
}

impl CopulaTail {
    /// Single-threshold tail at copula level u₁ with tail probability 1 − u₁.
    pub fn at_level(copula: CopulaKind, margin_y: Margin, tail: f64) -> Self {
        let x1 = copula.score_isf(tail);
        CopulaTail { copula, margin_y, parts: vec![TailPart { weight: 1.0, x1, tail }] }
    }

    /// P(Y-score > x | tail event).
    pub fn survival_score(&self, x: f64) -> Result<f64> {
        let mut s = 0.0;
        for p in &self.parts {
            s += p.weight * self.copula.survival_score(p.x1, x)? / p.tail;
        }
        Ok(s)
    }

    /// P(Y-score ≤ x | tail event), integrated directly from below.
    pub fn cdf_score(&self, x: f64) -> Result<f64> {
        let mut s = 0.0;
        for p in &self.parts {
            let v = integrate_lower(|t| self.copula.hbar_score(p.x1, t) * self.copula.score_pdf(t), x, QUAD_TOL)?;
            s += p.weight * v / p.tail;
        }
        Ok(s)
    }

    pub fn density_score(&self, x: f64) -> f64 {
        let f = self.copula.score_pdf(x);
        self.parts.iter().map(|p| p.weight * self.copula.hbar_score(p.x1, x) / p.tail).sum::<f64>() * f
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        self.cdf_score(self.margin_y.to_score(&self.copula, y))
    }

    /// Score coordinate of the p-quantile.
    pub fn quantile_score(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile level {p} outside (0,1)")));
        }
        // relative residual on whichever tail is smaller
        let g = |x: f64| -> f64 {
            if p < 0.5 {
                self.cdf_score(x).map(|c| c / p - 1.0).unwrap_or(f64::NAN)
            } else {
                self.survival_score(x).map(|s| 1.0 - s / (1.0 - p)).unwrap_or(f64::NAN)
            }
        };
        let (mut lo, mut hi) = (-4.0, 4.0);
        while g(lo) > 0.0 {
            lo *= 2.0;
            if lo < -1e8 {
                return Err(Error::numeric("tail quantile bracket search diverged"));
            }
        }
        while g(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e8 {
                return Err(Error::numeric("tail quantile bracket search diverged"));
            }
        }
        find_root(g, lo, hi, 1e-13)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        Ok(self.margin_y.from_score(&self.copula, self.quantile_score(p)?))
    }

    /// E[Y | tail event] by quadrature of y·density over the score axis.
    pub fn mean(&self) -> Result<f64> {
        let f = |x: f64| self.margin_y.from_score(&self.copula, x) * self.density_score(x);
        let left = integrate_lower(f, 0.0, QUAD_TOL)?;
        let right = integrate_upper(f, 0.0, QUAD_TOL)?;
        let m = left + right;
        if !m.is_finite() {
            return Err(Error::numeric("tail mean is not finite"));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Law {
    Margin(Margin),
    Discrete(DiscreteLaw),
    /// Finite mixture of margins with weights summing to one.
    Mixture(Vec<(f64, Margin)>),
    CopulaTail(CopulaTail),
}

impl Law {
    pub fn cdf(&self, y: f64) -> Result<f64> {
        match self {
            Law::Margin(m) => Ok(m.cdf(y)),
            Law::Discrete(d) => Ok(d.cdf(y)),
            Law::Mixture(parts) => Ok(parts.iter().map(|(w, m)| w * m.cdf(y)).sum()),
            Law::CopulaTail(t) => t.cdf(y),
        }
    }

    /// Lower p-quantile for p ∈ (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("quantile level {p} outside (0,1)")));
        }
        match self {
            Law::Margin(m) => Ok(m.quantile(p)),
            Law::Discrete(d) => Ok(d.quantile(p)),
            Law::Mixture(parts) => {
                let qs: Vec<f64> = parts.iter().map(|(_, m)| m.quantile(p)).collect();
                let lo = qs.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = qs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if lo == hi {
                    return Ok(lo);
                }
                let f = |y: f64| parts.iter().map(|(w, m)| w * m.cdf(y)).sum::<f64>() - p;
                find_root(f, lo, hi, 1e-14)
            }
            Law::CopulaTail(t) => t.quantile(p),
        }
    }

    /// Lower β-quantile for β ∈ [0, 1); β = 0 gives the lower support end.
    pub fn var_level(&self, beta: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::domain(format!("level {beta} outside [0,1)")));
        }
        if beta > 0.0 {
            return self.quantile(beta);
        }
        match self {
            Law::Margin(m) => Ok(m.lower_bound()),
            Law::Discrete(d) => Ok(d.atoms()[0].0),
            Law::Mixture(parts) => Ok(parts.iter().map(|(_, m)| m.lower_bound()).fold(f64::INFINITY, f64::min)),
            Law::CopulaTail(t) => Ok(t.margin_y.lower_bound()),
        }
    }

    pub fn mean(&self) -> Result<f64> {
        let m = match self {
            Law::Margin(m) => m.mean(),
            Law::Discrete(d) => d.mean(),
            Law::Mixture(parts) => parts.iter().map(|(w, m)| w * m.mean()).sum(),
            Law::CopulaTail(t) => t.mean()?,
        };
        if m.is_finite() {
            Ok(m)
        } else {
            Err(Error::numeric("law has no finite mean"))
        }
    }

    /// (1/(1−α))∫_α^1 q(γ)dγ. Exact for discrete laws; otherwise
    /// Gauss–Legendre on panels graded geometrically towards both ends of
    /// (α, 1).
    pub fn expected_shortfall(&self, alpha: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::domain(format!("level {alpha} outside [0,1)")));
        }
        if let Law::Discrete(d) = self {
            return Ok(d.expected_shortfall(alpha));
        }
        let q = |g: f64| self.quantile(g);
        let integral = graded_integral(q, alpha, 1.0)?;
        let es = integral / (1.0 - alpha);
        if !es.is_finite() {
            return Err(Error::numeric("expected shortfall is not finite"));
        }
        Ok(es)
    }
}

const GRADED_PANELS: i32 = 12;
const GRADED_NODES: usize = 16;

/// ∫_a^b f on 2·GRADED_PANELS panels whose widths shrink by a factor ten
/// towards each endpoint; the outermost 1e-12 fraction at each end is
/// dropped.
pub(crate) fn graded_integral(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let rule = GaussLegendre::cached(GRADED_NODES);
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    let mut err = None;
    let mut eval = |x: f64| match f(x) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    for k in 0..GRADED_PANELS {
        let outer = half * 10f64.powi(-k);
        let inner = half * 10f64.powi(-k - 1);
        total += rule.apply(&mut eval, a + inner, a + outer);
        total += rule.apply(&mut eval, b - outer, b - inner);
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(total)
}
