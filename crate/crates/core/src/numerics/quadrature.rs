//! Gauss–Legendre quadrature: fixed rules, adaptive bisection and
//! semi-infinite ranges.

use std::collections::{BinaryHeap, HashMap};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp;
            loop {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 {
                    break;
                }
            }
            // recompute the derivative at the converged node
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Shared, lazily built rule for `n` nodes.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(n).or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
    }

    /// Applies the rule on [a, b] without finiteness checks.
    pub fn apply(&self, f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

/// n-node Gauss–Legendre estimate of ∫_a^b f.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, nodes: usize) -> Result<f64> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("invalid interval [{a}, {b}]")));
    }
    if nodes == 0 {
        return Err(Error::domain("quadrature needs at least one node"));
    }
    let rule = GaussLegendre::cached(nodes);
    let mut bad = false;
    let v = rule.apply(
        &mut |x| {
            let y = f(x);
            if !y.is_finite() {
                bad = true;
            }
            y
        },
        a,
        b,
    );
    if bad {
        return Err(Error::numeric("non-finite integrand value"));
    }
    Ok(v)
}

/// Globally adaptive Gauss–Legendre: the panel with the largest error
/// estimate (starting from a uniform partition; 10-point rule versus the sum of its two halves) is split until
/// the summed estimate drops below `tol`, the estimates reach rounding level,
/// or the panel budget is exhausted.
pub fn integrate_adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!("invalid interval [{a}, {b}]")));
    }
    let rule = GaussLegendre::cached(10);
    let mut bad = false;
    let mut g = |x: f64| {
        let y = f(x);
        if !y.is_finite() {
            bad = true;
            0.0
        } else {
            y
        }
    };
    let mut panel = |lo: f64, hi: f64| -> Panel {
        let whole = rule.apply(&mut g, lo, hi);
        let m = 0.5 * (lo + hi);
        let left = rule.apply(&mut g, lo, m);
        let right = rule.apply(&mut g, m, hi);
        Panel { lo, hi, value: left + right, err: (left + right - whole).abs() }
    };
    let mut heap = BinaryHeap::new();
    let w = (b - a) / INITIAL_PANELS as f64;
    for i in 0..INITIAL_PANELS {
        let hi = if i + 1 == INITIAL_PANELS { b } else { a + (i + 1) as f64 * w };
        heap.push(panel(a + i as f64 * w, hi));
    }
    for _ in 0..MAX_PANELS {
        let (value, err) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
        if err <= tol || err <= 4.0 * f64::EPSILON * value.abs() {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let m = 0.5 * (worst.lo + worst.hi);
        if m <= worst.lo || m >= worst.hi {
            heap.push(Panel { err: 0.0, ..worst });
            continue;
        }
        heap.push(panel(worst.lo, m));
        heap.push(panel(m, worst.hi));
    }
    drop(panel);
    if bad {
        return Err(Error::numeric("non-finite integrand value"));
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    Ok(panels.iter().map(|p| p.value).sum())
}

// A coarse uniform start keeps narrow peaks from being missed entirely.
const INITIAL_PANELS: usize = 32;
const MAX_PANELS: usize = 400;

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// ∫_a^∞ f via x = a + t/(1−t).
pub fn integrate_upper(f: impl Fn(f64) -> f64, a: f64, tol: f64) -> Result<f64> {
    integrate_adaptive(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// ∫_−∞^b f via x = b − t/(1−t).
pub fn integrate_lower(f: impl Fn(f64) -> f64, b: f64, tol: f64) -> Result<f64> {
    integrate_upper(|x| f(2.0 * b - x), b, tol)
}
