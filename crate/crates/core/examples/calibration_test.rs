//! Wald backtest of (VaR, CoVaR) forecasts on bivariate normal losses,
//! once with the true values and once with misspecified ones.

use rand::Rng;
use syrisk::experiments::normal_var_covar;
use syrisk::identification::{calibration_test, IdKind, IdVariant};
use syrisk::measures::RiskLevels;
use syrisk::numerics::rng::std_normal;
use syrisk::numerics::rng_stream;
use syrisk::scoring::ForecastTuple;
use syrisk::series::LossSeries;

fn draws(n: usize, cov: [[f64; 2]; 2], rng: &mut impl Rng) -> syrisk::Result<LossSeries> {
    let l11 = cov[0][0].sqrt();
    let l21 = cov[1][0] / l11;
    let l22 = (cov[1][1] - l21 * l21).sqrt();
    let (mut x, mut y) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let (a, b) = (std_normal(rng), std_normal(rng));
        x.push(l11 * a);
        y.push(l21 * a + l22 * b);
    }
    LossSeries::new(x, y)
}

fn main() -> syrisk::Result<()> {
    let cov = [[1.0, 0.5], [0.5, 2.0]];
    let levels = RiskLevels::new(0.95, 0.95)?;
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let obs = draws(1000, cov, &mut rng_stream(seed, 0))?;
    let wrong = RiskLevels::new(0.75, 0.99)?;
    for (name, l) in [("correct", levels), ("misspecified", wrong)] {
        let (v, c) = normal_var_covar(cov, l)?;
        let f = vec![ForecastTuple::var_covar(v, c, levels); obs.len()];
        let joint = obs.iter().filter(|&(x, y)| x > v && y > c).count();
        println!("{name}: {joint} joint exceedances");
        for variant in [IdVariant::Strict, IdVariant::NonStrictBr] {
            let r = calibration_test(&f, &obs, IdKind::VarCoVar, variant, None)?;
            println!("  {variant:<12?} v={v:.3} c={c:.3}  W={:>9.3}  p={:.4}", r.statistic, r.p_value);
        }
    }
    Ok(())
}
