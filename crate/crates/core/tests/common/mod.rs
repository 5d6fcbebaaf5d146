//! Independent oracles shared by the property suite and the acceptance gate.
//! Each check returns `Err(description)` on the first violation.
#![allow(dead_code)]

use rand::Rng;
use syrisk::dm::{classify_zone, dm_one_half_sided, hac_cov, HacEstimate, Kernel, ScoreDiffSeries, TrafficZone};
use syrisk::identification::{identify, IdKind};
use syrisk::measures::RiskLevels;
use syrisk::models::{inv_link, link};
use syrisk::numerics::{rng_stream, CopulaKind};
use syrisk::scoring::{mo_score, ForecastTuple, Functional, MoScore, ScoreSpec};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

/// Atoms (x, y, p) of a finite bivariate law.
#[derive(Debug, Clone)]
pub struct Atoms(pub Vec<(f64, f64, f64)>);

impl Atoms {
    fn x_law(&self) -> Vec<(f64, f64)> {
        self.0.iter().map(|a| (a.0, a.2)).collect()
    }

    /// Law of y on {x > v}, renormalized, and the mass of that event.
    fn tail(&self, v: f64) -> (Vec<(f64, f64)>, f64) {
        let mass: f64 = self.0.iter().filter(|a| a.0 > v).map(|a| a.2).sum();
        (self.0.iter().filter(|a| a.0 > v).map(|a| (a.1, a.2 / mass)).collect(), mass)
    }

    fn expect(&self, f: &ForecastTuple, spec: &ScoreSpec) -> (f64, f64) {
        self.0.iter().fold((0.0, 0.0), |acc, &(x, y, p)| {
            let MoScore { s1, s2 } = mo_score(f, (x, y), spec).expect("positive support");
            (acc.0 + p * s1, acc.1 + p * s2)
        })
    }
}

fn sorted(law: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut l = law.to_vec();
    l.sort_by(|a, b| a.0.total_cmp(&b.0));
    l
}

/// Smallest atom with cdf ≥ level.
pub fn lower_quantile(law: &[(f64, f64)], level: f64) -> f64 {
    let mut cum = 0.0;
    let l = sorted(law);
    for &(v, p) in &l {
        cum += p;
        if cum >= level - 1e-12 {
            return v;
        }
    }
    l.last().expect("nonempty").0
}

pub fn cdf(law: &[(f64, f64)], at: f64) -> f64 {
    law.iter().filter(|a| a.0 <= at).map(|a| a.1).sum()
}

/// (1/(1−a))∫_a^1 q(u) du by overlapping each atom's u-interval with [a, 1].
pub fn tail_mean(law: &[(f64, f64)], a: f64) -> f64 {
    let mut lo = 0.0;
    let mut acc = 0.0;
    for &(v, p) in &sorted(law) {
        let hi = lo + p;
        acc += v * (hi.min(1.0) - lo.max(a)).max(0.0);
        lo = hi;
    }
    acc / (1.0 - a)
}

pub fn mean(law: &[(f64, f64)]) -> f64 {
    law.iter().map(|a| a.0 * a.1).sum()
}

fn near_level(law: &[(f64, f64)], level: f64) -> bool {
    let l = sorted(law);
    let mut cum = 0.0;
    l.iter().any(|&(_, p)| {
        cum += p;
        (cum - level).abs() < 0.01
    })
}

/// A random law on a positive grid whose cdf levels stay away from α and β,
/// so VaR and CoVaR are unique.
pub fn generic_law(seed: u64) -> (Atoms, RiskLevels) {
    let mut rng = rng_stream(seed, 77);
    loop {
        let k = rng.random_range(5..=12);
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let atoms = Atoms(
            raw.iter()
                .map(|w| {
                    let x = (rng.random_range(0.1..5.0) * 100.0_f64).round() / 100.0;
                    let y = (rng.random_range(0.1..5.0) * 100.0_f64).round() / 100.0;
                    (x, y, w / total)
                })
                .collect(),
        );
        let levels = RiskLevels::new(rng.random_range(0.3..0.8), rng.random_range(0.2..0.7)).unwrap();
        if near_level(&atoms.x_law(), levels.beta) {
            continue;
        }
        let v = lower_quantile(&atoms.x_law(), levels.beta);
        let (tail, _) = atoms.tail(v);
        if tail.len() < 2 || near_level(&tail, levels.alpha) {
            continue;
        }
        return (atoms, levels);
    }
}

pub struct Truth {
    pub v: f64,
    pub c: f64,
    pub e: f64,
    pub mu: f64,
}

pub fn truth(atoms: &Atoms, l: RiskLevels) -> Truth {
    let v = lower_quantile(&atoms.x_law(), l.beta);
    let (tail, _) = atoms.tail(v);
    Truth { v, c: lower_quantile(&tail, l.alpha), e: tail_mean(&tail, l.alpha), mu: mean(&tail) }
}

fn tuple(functional: Functional, v: f64, c: f64, e: f64, mu: f64, l: RiskLevels) -> ForecastTuple {
    match functional {
        Functional::VarCoVar => ForecastTuple::var_covar(v, c, l),
        Functional::VarCoVarCoEs => ForecastTuple::var_covar_coes(v, c, e, l),
        _ => ForecastTuple::var_mes(v, mu, l),
    }
}

fn grid(points: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut p: Vec<f64> = points.collect();
    p.sort_by(f64::total_cmp);
    p.dedup();
    let mut out = p.clone();
    out.extend(p.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    out.push(p[0] * 0.5);
    out.push(p[p.len() - 1] + 0.5);
    out
}

/// The true functional is a lexicographic minimizer of the expected score
/// over a candidate grid, strictly so among reports sharing the true VaR.
pub fn check_strict_consistency(seed: u64, functional: Functional, spec: &ScoreSpec) -> Check {
    let (atoms, l) = generic_law(seed);
    let t = truth(&atoms, l);
    let best = atoms.expect(&tuple(functional, t.v, t.c, t.e, t.mu, l), spec);
    let vs = grid(atoms.0.iter().map(|a| a.0));
    let cs = grid(atoms.0.iter().map(|a| a.1));
    let factors = [0.5, 0.8, 0.95, 0.99, 1.01, 1.05, 1.25, 2.0];
    let mut systemic: Vec<(f64, f64, f64)> = Vec::new();
    match functional {
        Functional::VarCoVar => systemic.extend(cs.iter().map(|&c| (c, t.e, t.mu))),
        Functional::VarCoVarCoEs => {
            for &c in cs.iter().chain([t.c].iter()) {
                systemic.extend(factors.iter().map(|k| (c, k * t.e, t.mu)));
                systemic.push((c, t.e, t.mu));
            }
        }
        _ => systemic.extend(factors.iter().map(|k| (t.c, t.e, k * t.mu))),
    }
    const TOL: f64 = 1e-12;
    for &v in vs.iter().chain([t.v].iter()) {
        for &(c, e, mu) in &systemic {
            let s = atoms.expect(&tuple(functional, v, c, e, mu, l), spec);
            ensure!(best.0 <= s.0 + TOL, "seed {seed}: VaR score {} beats the truth {} at v = {v}", s.0, best.0);
            if (best.0 - s.0).abs() <= TOL {
                ensure!(best.1 <= s.1 + TOL, "seed {seed}: systemic score {} beats {} at ({v}, {c}, {e}, {mu})", s.1, best.1);
            }
            let differs = match functional {
                Functional::VarCoVar => c != t.c,
                Functional::VarCoVarCoEs => c != t.c || e != t.e,
                _ => mu != t.mu,
            };
            if v == t.v && differs {
                ensure!(s.1 > best.1, "seed {seed}: ({c}, {e}, {mu}) ties the truth ({}, {}, {})", t.c, t.e, t.mu);
            }
        }
    }
    Ok(())
}

/// With α and β set to cdf levels, the expected identification vector is
/// zero at the truth and nonzero at every other atom-valued report.
pub fn check_identification(seed: u64, kind: IdKind) -> Check {
    let mut rng = rng_stream(seed, 78);
    let (atoms, v, l) = loop {
        let k = rng.random_range(6..=10);
        // probabilities on a coarse rational grid keep the sums exact enough
        let w: Vec<u32> = (0..k).map(|_| rng.random_range(1..=8)).collect();
        let total: u32 = w.iter().sum();
        let atoms = Atoms(
            (0..k)
                .map(|i| (i as f64 + 1.0, rng.random_range(1..=20) as f64 * 0.25, w[i] as f64 / total as f64))
                .collect(),
        );
        // β is the cdf level of an x atom with at least two atoms above it
        let v = rng.random_range(2..k - 1) as f64;
        let beta = cdf(&atoms.x_law(), v);
        let (tail, _) = atoms.tail(v);
        let mut ys: Vec<f64> = tail.iter().map(|a| a.0).collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        if ys.len() < 2 {
            continue;
        }
        // α is the tail cdf level of a y atom other than the largest
        let alpha = cdf(&tail, ys[rng.random_range(0..ys.len() - 1)]);
        break (atoms, v, RiskLevels::new(alpha, beta).map_err(|e| e.to_string())?);
    };
    let (tail, _) = atoms.tail(v);
    let ys: Vec<(f64, f64)> = sorted(&tail);
    let c = lower_quantile(&tail, l.alpha);
    let e = tail_mean(&tail, l.alpha);
    let mu = mean(&tail);
    let expected = |f: &ForecastTuple| -> Vec<f64> {
        let mut acc = vec![0.0; 3];
        for &(x, y, p) in &atoms.0 {
            for (a, val) in acc.iter_mut().zip(identify(kind, f, (x, y)).unwrap()) {
                *a += p * val;
            }
        }
        acc
    };
    let make = |v: f64, c: f64, e: f64, mu: f64| match kind {
        IdKind::VaR => ForecastTuple::var(v, l),
        IdKind::VarCoVar => ForecastTuple::var_covar(v, c, l),
        IdKind::VarCoVarCoEs => ForecastTuple::var_covar_coes(v, c, e, l),
        IdKind::VarMes => ForecastTuple::var_mes(v, mu, l),
    };
    let at_truth = expected(&make(v, c, e, mu));
    ensure!(at_truth.iter().all(|m| m.abs() < 1e-12), "seed {seed}: {kind:?} mean {at_truth:?} at the truth");
    let xs: Vec<f64> = atoms.0.iter().map(|a| a.0).collect();
    let cands: Vec<f64> = ys.iter().map(|a| a.0).collect();
    for &vv in &xs {
        for &cc in &cands {
            for (ee, mm) in [(e, mu), (e + 0.5, mu), (e, mu - 0.5)] {
                let m = expected(&make(vv, cc, ee, mm));
                let same = vv == v
                    && match kind {
                        IdKind::VaR => true,
                        IdKind::VarCoVar => cc == c,
                        IdKind::VarCoVarCoEs => cc == c && ee == e,
                        IdKind::VarMes => mm == mu,
                    };
                let zero = m.iter().all(|z| z.abs() < 1e-12);
                ensure!(same == zero, "seed {seed}: {kind:?} at ({vv}, {cc}, {ee}, {mm}) mean {m:?}");
            }
        }
    }
    Ok(())
}

/// Scaling losses and reports by λ > 0 leaves zero-homogeneous score
/// differences unchanged: the VaR component for any pair of reports, the
/// systemic component for reports sharing the VaR (the conditioning event).
pub fn check_zero_homogeneity(functional: Functional, f: [f64; 3], g: [f64; 3], obs: (f64, f64), lambda: f64) -> Check {
    let l = RiskLevels::new(0.9, 0.85).unwrap();
    let spec = ScoreSpec::zero_hom(functional);
    let build = |r: [f64; 3], s: f64| tuple(functional, s * r[0], s * r[1], s * r[2], s * r[2], l);
    let shared = [f[0], g[1], g[2]];
    let diff = |s: f64| {
        let o = (s * obs.0, s * obs.1);
        let a = mo_score(&build(f, s), o, &spec).unwrap();
        let b = mo_score(&build(g, s), o, &spec).unwrap();
        let c = mo_score(&build(shared, s), o, &spec).unwrap();
        (a.s1 - b.s1, a.s2 - c.s2)
    };
    let (d0, d1) = (diff(1.0), diff(lambda));
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
    ensure!(close(d0.0, d1.0) && close(d0.1, d1.1), "{functional:?}: {d0:?} vs {d1:?} after scaling by {lambda}");
    Ok(())
}

/// inf over δ ≤ 0 of n·(d̄₁, d̄₂ − δ)′Ω⁻¹(·) by a grid and golden-section refinement.
pub fn os_grid_infimum(dbar: (f64, f64), omega: &HacEstimate, n: usize) -> f64 {
    let q = |delta: f64| {
        let d = (dbar.0, dbar.1 - delta);
        let det = omega.s11 * omega.s22 - omega.s12 * omega.s12;
        n as f64 * (omega.s22 * d.0 * d.0 - 2.0 * omega.s12 * d.0 * d.1 + omega.s11 * d.1 * d.1) / det
    };
    let span = 4.0 * (dbar.1.abs() + (omega.s12 / omega.s11 * dbar.0).abs()) + 1e-9;
    let steps = 4000;
    let (mut best, mut at) = (q(0.0), 0usize);
    for i in 0..=steps {
        let val = q(-span * i as f64 / steps as f64);
        if val < best {
            best = val;
            at = i;
        }
    }
    let (mut a, mut b) = (-span * (at + 1).min(steps) as f64 / steps as f64, -span * at.saturating_sub(1) as f64 / steps as f64);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if q(c) < q(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.min(q(0.5 * (a + b)))
}

pub fn check_os_closed_form(diffs: Vec<(f64, f64)>) -> Check {
    let d = ScoreDiffSeries::new(diffs).map_err(|e| e.to_string())?;
    let omega = hac_cov(&d, 0, Kernel::Flat).map_err(|e| e.to_string())?;
    let det = omega.s11 * omega.s22 - omega.s12 * omega.s12;
    if !(det > 1e-8 * omega.s11 * omega.s22) {
        return Ok(());
    }
    let closed = dm_one_half_sided(&d, &omega).map_err(|e| e.to_string())?.statistic;
    let grid = os_grid_infimum(d.mean(), &omega, d.n());
    ensure!((closed - grid).abs() <= 1e-8 * (1.0 + grid.abs()), "closed form {closed} vs grid {grid}");
    Ok(())
}

/// m = 0 equals the 1/n sample covariance.
pub fn check_hac_m0(diffs: Vec<(f64, f64)>) -> Check {
    let n = diffs.len() as f64;
    let (m1, m2) = diffs.iter().fold((0.0, 0.0), |a, d| (a.0 + d.0 / n, a.1 + d.1 / n));
    let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
    for d in &diffs {
        s11 += (d.0 - m1) * (d.0 - m1) / n;
        s12 += (d.0 - m1) * (d.1 - m2) / n;
        s22 += (d.1 - m2) * (d.1 - m2) / n;
    }
    let d = ScoreDiffSeries::new(diffs).map_err(|e| e.to_string())?;
    for kernel in [Kernel::Flat, Kernel::Bartlett] {
        let h = hac_cov(&d, 0, kernel).map_err(|e| e.to_string())?;
        let scale = 1e-10 * (1.0 + s11 + s22);
        ensure!(
            (h.s11 - s11).abs() <= scale && (h.s12 - s12).abs() <= scale && (h.s22 - s22).abs() <= scale,
            "{kernel:?}: ({}, {}, {}) vs ({s11}, {s12}, {s22})",
            h.s11,
            h.s12,
            h.s22
        );
    }
    Ok(())
}

/// The zone predicate written out from its definition.
pub fn zone_oracle(dbar: (f64, f64), omega: &HacEstimate, n: usize, crit: f64) -> TrafficZone {
    let e1 = (omega.s11 * crit / n as f64).sqrt();
    let det = omega.s11 * omega.s22 - omega.s12 * omega.s12;
    let w = n as f64 * (omega.s22 * dbar.0 * dbar.0 - 2.0 * omega.s12 * dbar.0 * dbar.1 + omega.s11 * dbar.1 * dbar.1) / det;
    if dbar.0 < -e1 {
        TrafficZone::Red
    } else if dbar.0 > e1 {
        TrafficZone::Grey
    } else if w <= crit {
        TrafficZone::Yellow
    } else if dbar.1 > omega.s12 / omega.s11 * dbar.0 {
        TrafficZone::Green
    } else {
        TrafficZone::Orange
    }
}

pub const ZONE_FIXTURES: [((f64, f64), TrafficZone); 7] = [
    ((-0.3, 0.0), TrafficZone::Red),
    ((-0.3, 5.0), TrafficZone::Red),
    ((0.3, 0.0), TrafficZone::Grey),
    ((0.3, -5.0), TrafficZone::Grey),
    ((0.0, 0.0), TrafficZone::Yellow),
    ((0.1, 0.3), TrafficZone::Green),
    ((0.1, -0.3), TrafficZone::Orange),
];

/// Fixtures at Ω = I, n = 100, ν = 5% (half-width of the VaR band ≈ 0.2267),
/// plus agreement with the oracle at random points.
pub fn check_zones(seed: u64, cases: usize) -> Check {
    let crit = syrisk::dm::adjust_level(0.05).unwrap().chi2_crit;
    let id = HacEstimate::identity();
    for (d, want) in ZONE_FIXTURES {
        let got = classify_zone(d, &id, 100, 0.05).map_err(|e| e.to_string())?;
        ensure!(got == want, "fixture {d:?}: {got:?}, expected {want:?}");
    }
    let mut rng = rng_stream(seed, 79);
    for _ in 0..cases {
        let s11: f64 = rng.random_range(0.1..3.0);
        let s22: f64 = rng.random_range(0.1..3.0);
        let s12 = rng.random_range(-0.95..0.95) * (s11 * s22).sqrt();
        let omega = HacEstimate::from_matrix(s11, s12, s22);
        let n = rng.random_range(20..2000);
        let scale = (crit / n as f64).sqrt() * 2.0;
        let d = (rng.random_range(-1.0..1.0) * scale * s11.sqrt(), rng.random_range(-1.0..1.0) * scale * s22.sqrt());
        let got = classify_zone(d, &omega, n, 0.05).map_err(|e| e.to_string())?;
        ensure!(got == zone_oracle(d, &omega, n, crit), "zone {got:?} at {d:?}, {omega:?}, n = {n}");
    }
    Ok(())
}

pub fn check_link(f: f64) -> Check {
    let rho = link(f);
    ensure!(rho.abs() < 1.0, "link({f}) = {rho} leaves (−1, 1)");
    let back = inv_link(rho);
    ensure!((back - f).abs() <= 1e-9 * (1.0 + f.abs()), "inv_link(link({f})) = {back}");
    let r2 = link(inv_link(rho));
    ensure!((r2 - rho).abs() <= 1e-15, "link(inv_link({rho})) = {r2}");
    ensure!(link(f + 1e-3) > rho, "link is not increasing at {f}");
    Ok(())
}

/// Survival and cdf are computed by separate integrals; they must satisfy
/// C̄ = 1 − u₁ − u₂ + C, the margins and the Fréchet bounds.
pub fn check_copula(kind: CopulaKind, u1: f64, u2: f64) -> Check {
    let c = kind.cdf(u1, u2).map_err(|e| e.to_string())?;
    let s = kind.survival(u1, u2).map_err(|e| e.to_string())?;
    ensure!((s - (1.0 - u1 - u2 + c)).abs() < 1e-8, "{kind:?} at ({u1}, {u2}): survival {s}, cdf {c}");
    ensure!(c >= (u1 + u2 - 1.0).max(0.0) - 1e-9 && c <= u1.min(u2) + 1e-9, "{kind:?}: C = {c} outside the Fréchet bounds");
    let swapped = kind.cdf(u2, u1).map_err(|e| e.to_string())?;
    ensure!((c - swapped).abs() < 1e-8, "{kind:?}: C not exchangeable ({c} vs {swapped})");
    let top = kind.cdf(u1, 1.0 - 1e-13).map_err(|e| e.to_string())?;
    ensure!((top - u1).abs() < 1e-8, "{kind:?}: C(u, 1) = {top} for u = {u1}");
    if kind.rho() == 0.0 && matches!(kind, CopulaKind::Gaussian { .. }) {
        ensure!((c - u1 * u2).abs() < 1e-9, "independence copula: {c} vs {}", u1 * u2);
    }
    Ok(())
}
