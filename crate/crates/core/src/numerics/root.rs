//! Bracketing root finder (Brent's method).

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Finds a root of `f` in `[lo, hi]` with Brent's method (bisection with
/// secant and inverse quadratic steps).
///
/// Stops once `|f(x)| ≤ tol` or the bracket is narrower than `tol`.
pub fn find_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::numeric(format!("non-finite value at bracket end ({fa}, {fb})")));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo, hi, flo: fa, fhi: fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::numeric(format!("non-finite value f({b}) = {fb}")));
        }
    }
    Ok(b)
}

/// Bisection on a monotone function; every iterate stays inside the
/// original bracket.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::numeric("non-finite value at bracket end"));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { lo, hi, flo: fa, fhi: fb });
    }
    let rising = fb > fa;
    while b - a > tol {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if !fm.is_finite() {
            return Err(Error::numeric(format!("non-finite value f({m})")));
        }
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == rising {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sqrt_two() {
        let r = find_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-11);
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert_abs_diff_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn independence_level_equation() {
        // (1−β)(1−u) = (1−α)(1−β) with α = β = 0.95
        let r = find_root(|u| 0.05 * (1.0 - u) - 0.0025, 0.95, 1.0 - 1e-12, 1e-14).unwrap();
        assert_abs_diff_eq!(r, 0.95, epsilon = 1e-10);
    }

    #[test]
    fn errors() {
        assert!(matches!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-10), Err(Error::Bracket { .. })));
        assert!(matches!(find_root(|x| 1.0 / x, 0.0, 1.0, 1e-10), Err(Error::Numeric(_))));
        assert!(matches!(
            find_root(|x| if x > 0.5 { f64::NAN } else { x - 0.7 }, 0.0, 1.0, 1e-10),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn deterministic_and_inside_bracket() {
        let f = |x: f64| x.powi(3) - 0.3 * x - 0.1;
        let a = find_root(f, -0.2, 2.0, 1e-12).unwrap();
        let b = find_root(f, -0.2, 2.0, 1e-12).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((-0.2..=2.0).contains(&a));
    }
}
