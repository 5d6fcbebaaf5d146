//! Special functions: normal, incomplete gamma/beta, Student t and chi-square.
//!
//! Accuracy targets are absolute 1e-14 on cdfs and relative 1e-12 on
//! quantiles in the ranges used by the toolkit.

use std::f64::consts::{PI, SQRT_2};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse of the standard normal cdf. Acklam's rational approximation
/// polished by two Halley steps. Returns ±∞ at the endpoints.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        return -norm_quantile_lower(1.0 - p);
    }
    norm_quantile_lower(p)
}

fn norm_quantile_lower(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let mut x = if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let e = norm_cdf(x) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cont_frac(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..10_000 {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cont_frac(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized incomplete beta I_x(a, b), with `y = 1 − x` supplied
/// separately so callers can avoid cancellation near x = 1.
pub fn beta_inc(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cont_frac(b, a, y) / b
    }
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..20_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

pub fn t_ln_norm(df: f64) -> f64 {
    ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * PI).ln()
}

pub fn t_pdf(t: f64, df: f64) -> f64 {
    (t_ln_norm(df) - 0.5 * (df + 1.0) * (t * t / df).ln_1p()).exp()
}

/// Lower tail P(T ≤ −|t|).
fn t_tail(t: f64, df: f64) -> f64 {
    let t2 = t * t;
    let x = df / (df + t2);
    let y = t2 / (df + t2);
    0.5 * beta_inc(0.5 * df, 0.5, x, y)
}

pub fn t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = t_tail(t, df);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub fn t_quantile(p: f64, df: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    if df == 1.0 {
        return (PI * (p - 0.5)).tan();
    }
    if df == 2.0 {
        return (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt();
    }
    if p > 0.5 {
        return -t_quantile_lower(1.0 - p, df);
    }
    t_quantile_lower(p, df)
}

/// Solves ln F(t) = ln p for t < 0 by Newton's method in log space,
/// safeguarded by a shrinking bracket.
fn t_quantile_lower(p: f64, df: f64) -> f64 {
    let target = p.ln();
    // Cornish-Fisher start, compared against the power-law tail asymptote.
    let z = norm_quantile(p);
    let cf = z + (z.powi(3) + z) / (4.0 * df)
        + (5.0 * z.powi(5) + 16.0 * z.powi(3) + 3.0 * z) / (96.0 * df * df);
    let ln_k = t_ln_norm(df) + 0.5 * (df - 1.0) * df.ln();
    let asym = -((ln_k - target) / df).exp();
    let resid = |t: f64| (t_tail(t, df).ln() - target).abs();
    let mut t = if cf < 0.0 && resid(cf) <= resid(asym) { cf } else { asym };
    let mut lo = f64::NEG_INFINITY;
    let mut hi = 0.0_f64;
    for _ in 0..200 {
        let f = t_tail(t, df);
        let g = f.ln() - target;
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if g == 0.0 {
            return t;
        }
        let step = g * f / t_pdf(t, df);
        let mut next = t - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if lo.is_finite() { 0.5 * (lo + hi) } else { 2.0 * t.min(-1.0) };
        }
        if (next - t).abs() <= 1e-15 * t.abs().max(1e-300) {
            return next;
        }
        t = next;
    }
    t
}

pub fn chi2_pdf(x: f64, k: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match k.partial_cmp(&2.0) {
            Some(std::cmp::Ordering::Less) => f64::INFINITY,
            Some(std::cmp::Ordering::Equal) => 0.5,
            _ => 0.0,
        };
    }
    let h = 0.5 * k;
    ((h - 1.0) * x.ln() - 0.5 * x - h * std::f64::consts::LN_2 - ln_gamma(h)).exp()
}

pub fn chi2_cdf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if k == 1.0 {
        return libm::erf((0.5 * x).sqrt());
    }
    if k == 2.0 {
        return -(-0.5 * x).exp_m1();
    }
    gamma_p(0.5 * k, 0.5 * x)
}

pub fn chi2_sf(x: f64, k: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if k == 1.0 {
        return libm::erfc((0.5 * x).sqrt());
    }
    if k == 2.0 {
        return (-0.5 * x).exp();
    }
    gamma_q(0.5 * k, 0.5 * x)
}

pub fn chi2_quantile(p: f64, k: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if k == 2.0 {
        return -2.0 * (-p).ln_1p();
    }
    if k == 1.0 {
        let z = norm_quantile(0.5 + 0.5 * p);
        return refine_chi2(z * z, p, k);
    }
    // Wilson-Hilferty start
    let z = norm_quantile(p);
    let c = 2.0 / (9.0 * k);
    let x0 = (k * (1.0 - c + z * c.sqrt()).powi(3)).max(1e-8 * k);
    refine_chi2(x0, p, k)
}

/// Bracketed Newton on the lower tail (p ≤ ½) or the upper tail (p > ½),
/// both in log space.
fn refine_chi2(x0: f64, p: f64, k: f64) -> f64 {
    let upper = p > 0.5;
    let target = if upper { (1.0 - p).ln() } else { p.ln() };
    let mut lo = 0.0_f64;
    let mut hi = f64::INFINITY;
    let mut x = x0;
    for _ in 0..200 {
        let (tail, g) = if upper {
            let s = chi2_sf(x, k);
            (s, target - s.ln())
        } else {
            let c = chi2_cdf(x, k);
            (c, c.ln() - target)
        };
        if g == 0.0 {
            return x;
        }
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = chi2_pdf(x, k) / tail;
        let mut next = x - g / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(1.0) };
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn normal_quantile_matches_bisection() {
        for &p in &[1e-8, 1e-4, 0.01, 0.3, 0.5, 0.95, 0.999_999] {
            let oracle = bisect(|x| norm_cdf(x) - p, -40.0, 40.0);
            assert_abs_diff_eq!(norm_quantile(p), oracle, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(norm_quantile(0.95), 1.644_853_626_951_472_2, epsilon = 1e-13);
    }

    #[test]
    fn known_values() {
        // erf(1) and the t(3) cdf at 1 from closed forms
        assert_abs_diff_eq!(norm_cdf(1.0) - norm_cdf(-1.0), 0.682_689_492_137_085_9, epsilon = 1e-15);
        let t3 = |t: f64| {
            let x = t / 3f64.sqrt();
            0.5 + (x / (1.0 + x * x) + x.atan()) / PI
        };
        for &t in &[-30.0, -2.0, -0.1, 0.7, 4.0] {
            assert_abs_diff_eq!(t_cdf(t, 3.0), t3(t), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(chi2_cdf(3.0, 4.0), 1.0 - (-1.5f64).exp() * 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(chi2_quantile(0.95, 2.0), -2.0 * 0.05f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn t_quantile_round_trip_extremes() {
        for &df in &[0.5, 1.0, 2.0, 2.5, 5.0, 30.0, 1e4] {
            for &p in &[1e-8, 1e-5, 0.025, 0.4, 0.6, 0.975, 1.0 - 1e-8] {
                let q = t_quantile(p, df);
                assert!((t_cdf(q, df) - p).abs() < 1e-12, "df={df} p={p} q={q}");
            }
        }
    }

    #[test]
    fn chi2_quantile_round_trip() {
        for &k in &[1.0, 2.0, 3.0, 7.0, 50.0] {
            for &p in &[1e-8, 1e-3, 0.5, 0.95, 1.0 - 1e-8] {
                let q = chi2_quantile(p, k);
                assert!((chi2_cdf(q, k) - p).abs() < 1e-12, "k={k} p={p}");
            }
        }
    }
}
