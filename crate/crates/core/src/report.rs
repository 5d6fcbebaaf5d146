//! Traffic-light figure: the mean score difference against the Wald
//! ellipse, the dashed diameter and the five decision zones.

use std::fmt::Write;

use crate::dm::{adjust_level, HacEstimate, TrafficZone};
use crate::error::{Error, Result};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 60.0;

fn color(zone: TrafficZone) -> &'static str {
    match zone {
        TrafficZone::Green => "#7bc47f",
        TrafficZone::Yellow => "#f2d64b",
        TrafficZone::Orange => "#f0a04b",
        TrafficZone::Red => "#e06666",
        TrafficZone::Grey => "#b7b7b7",
    }
}

/// SVG document with a fixed 600×600 viewBox.
pub fn traffic_svg(dbar: (f64, f64), omega: &HacEstimate, n: usize, nu: f64, zone: Option<TrafficZone>) -> Result<String> {
    let HacEstimate { s11, s12, s22, .. } = *omega;
    if !(s11 > 0.0 && s22 > 0.0 && s11 * s22 - s12 * s12 > 0.0) || n == 0 {
        return Err(Error::DegenerateCovariance("the ellipse needs a positive definite covariance".into()));
    }
    let r2 = adjust_level(nu)?.chi2_crit / n as f64;
    let (e1, e2) = ((s11 * r2).sqrt(), (s22 * r2).sqrt());
    let slope = s12 / s11;
    let hx = (1.6 * e1).max(1.15 * dbar.0.abs());
    let hy = (1.6 * e2).max(1.15 * dbar.1.abs()).max(1.15 * (slope * hx).abs());
    let px = |x: f64| MARGIN + (x + hx) / (2.0 * hx) * (SIZE - 2.0 * MARGIN);
    let py = |y: f64| SIZE - MARGIN - (y + hy) / (2.0 * hy) * (SIZE - 2.0 * MARGIN);
    let (top, bottom) = (py(hy), py(-hy));
    let line = |x: f64| py((slope * x).clamp(-hy, hy));

    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="600" height="600" viewBox="0 0 600 600">"#);
    let _ = writeln!(w, r#"<rect x="0" y="0" width="600" height="600" fill="white"/>"#);
    let _ = writeln!(w, r#"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#, px(-hx), px(-e1) - px(-hx), bottom - top, color(TrafficZone::Red));
    let _ = writeln!(w, r#"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#, px(e1), px(hx) - px(e1), bottom - top, color(TrafficZone::Grey));
    let (a, b) = (px(-e1), px(e1));
    let _ = writeln!(w, r#"<polygon points="{a:.2},{top:.2} {b:.2},{top:.2} {b:.2},{:.2} {a:.2},{:.2}" fill="{}"/>"#, line(e1), line(-e1), color(TrafficZone::Green));
    let _ = writeln!(w, r#"<polygon points="{a:.2},{:.2} {b:.2},{:.2} {b:.2},{bottom:.2} {a:.2},{bottom:.2}" fill="{}"/>"#, line(-e1), line(e1), color(TrafficZone::Orange));
    // ellipse d = √r2·L·(cos t, sin t) with Ω = LLᵀ
    let l11 = s11.sqrt();
    let l21 = s12 / l11;
    let l22 = (s22 - l21 * l21).sqrt();
    let mut path = String::new();
    for k in 0..=180 {
        let t = k as f64 / 180.0 * std::f64::consts::TAU;
        let (c, si) = (t.cos() * r2.sqrt(), t.sin() * r2.sqrt());
        let (x, y) = (l11 * c, l21 * c + l22 * si);
        let _ = write!(path, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, px(x), py(y));
    }
    let _ = writeln!(w, r#"<path d="{}Z" fill="{}" stroke="black" stroke-width="1"/>"#, path.trim_end(), color(TrafficZone::Yellow));
    let _ = writeln!(w, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-dasharray="6,4"/>"#, px(-e1), line(-e1), px(e1), line(e1));
    let _ = writeln!(w, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-width="0.5"/>"#, px(-hx), py(0.0), px(hx), py(0.0));
    let _ = writeln!(w, r#"<line x1="{:.2}" y1="{top:.2}" x2="{:.2}" y2="{bottom:.2}" stroke="gray" stroke-width="0.5"/>"#, px(0.0), px(0.0));
    let _ = writeln!(w, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{0}" height="{0}" fill="none" stroke="black"/>"#, SIZE - 2.0 * MARGIN);
    let (mx, my) = (px(dbar.0), py(dbar.1));
    let _ = writeln!(w, r#"<path d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="black" stroke-width="2.5"/>"#, mx - 7.0, my - 7.0, mx + 7.0, my + 7.0, mx - 7.0, my + 7.0, mx + 7.0, my - 7.0);
    let _ = writeln!(w, r#"<text x="300" y="585" font-family="sans-serif" font-size="14" text-anchor="middle">mean VaR score difference d1</text>"#);
    let _ = writeln!(w, r#"<text x="18" y="300" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 18 300)">mean systemic score difference d2</text>"#);
    let _ = writeln!(w, r#"<text x="{MARGIN}" y="40" font-family="sans-serif" font-size="12">d1 ∈ [{:.3e}, {:.3e}], d2 ∈ [{:.3e}, {:.3e}], nu = {nu}</text>"#, -hx, hx, -hy, hy);
    if let Some(z) = zone {
        let _ = writeln!(w, r#"<text x="540" y="40" font-family="sans-serif" font-size="14" text-anchor="end">zone: {z:?}</text>"#);
    }
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed() {
        let omega = HacEstimate::from_matrix(1.0, 0.3, 2.0);
        let s = traffic_svg((0.02, 0.05), &omega, 500, 0.05, Some(TrafficZone::Green)).unwrap();
        assert!(s.starts_with("<?xml"));
        assert!(s.contains(r#"viewBox="0 0 600 600""#));
        assert_eq!(s.matches("<svg").count(), 1);
        assert!(s.trim_end().ends_with("</svg>"));
        assert!(!s.contains("NaN") && !s.contains("inf"));
        assert!(s.contains("stroke-dasharray"));
        let bad = HacEstimate::from_matrix(1.0, 1.0, 1.0);
        assert!(traffic_svg((0.0, 0.0), &bad, 10, 0.05, None).is_err());
    }
}
